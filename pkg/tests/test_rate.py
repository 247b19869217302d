"""Spectral-efficiency estimation: SINR accounting, Monte Carlo, closed forms."""

import inspect
import math

import numpy as np
import pytest

from holosim import (
    ArrayGeometry,
    ChannelRealization,
    SEResult,
    SINR_CAP,
    draw_wavenumber_channel,
    mmse,
    mrt,
    mrt_theoretical_bound,
    ns_zf,
    per_stream_sinr,
    separable_sigma,
    simulated_se,
    variance_map,
    zf,
    zf_theoretical,
)
from holosim.spectrum import SeparableSigma


def realization_from(matrix):
    h_a = np.asarray(matrix, dtype=complex)
    return ChannelRealization(h_a=h_a, per_user_rows=h_a.shape[0], seed=None)


def uniform_sigma(rows, cols, per_user_rows=None):
    return SeparableSigma(
        matrix=np.ones((rows, cols)),
        per_user_rows=per_user_rows or rows,
        rx_sigma=np.ones(rows),
        tx_sigma=np.ones(cols),
    )


class TestPerStreamSINR:
    def test_zero_forcing_turns_gains_into_exact_sinr(self):
        realization = realization_from([[1, 0, 0], [0, 0, 0], [0, 2, 0]])
        precoder = zf(realization)
        sinr = per_stream_sinr(realization, precoder, p_u=2.0, noise_var=0.5)
        expected = 2.0 * (precoder.alpha * precoder.column_gains) ** 2 / 0.5
        np.testing.assert_allclose(sinr, expected, rtol=1e-12)
        assert sinr[1] == 0.0

    def test_interference_free_streams_cap_at_zero_noise(self):
        realization = realization_from([[1, 0, 0], [0, 0, 0], [0, 2, 0]])
        sinr = per_stream_sinr(realization, zf(realization), p_u=1.0, noise_var=0.0)
        np.testing.assert_array_equal(sinr, [SINR_CAP, 0.0, SINR_CAP])

    def test_single_stream_matched_transmission(self):
        rng = np.random.default_rng(6)
        h = rng.standard_normal((1, 5)) + 1j * rng.standard_normal((1, 5))
        realization = realization_from(h)
        sinr = per_stream_sinr(realization, mrt(realization), p_u=3.0, noise_var=2.0)
        energy = np.linalg.norm(h) ** 2
        assert sinr[0] == pytest.approx(3.0 * energy / 2.0, rel=1e-12)

    def test_scales_cancel_between_power_and_noise(self):
        realization = draw_wavenumber_channel(uniform_sigma(3, 6), 8)
        precoder = mrt(realization)
        base = per_stream_sinr(realization, precoder, p_u=2.0, noise_var=0.5)
        scaled = per_stream_sinr(realization, precoder, p_u=20.0, noise_var=5.0)
        np.testing.assert_allclose(scaled, base, rtol=1e-12)

    def test_transmit_phase_offsets_do_not_change_sinr(self):
        # A per-cell unit-modulus phase (a shifted transmit origin) must leave
        # every scheme's SINRs untouched.
        sigma = uniform_sigma(3, 6)
        realization = draw_wavenumber_channel(sigma, 12)
        phases = np.exp(2j * np.pi * np.random.default_rng(1).uniform(size=6))
        shifted = ChannelRealization(
            h_a=realization.h_a * phases, per_user_rows=3, seed=None
        )
        builders = [
            mrt,
            zf,
            lambda r: mmse(r, snr=10.0),
            lambda r: ns_zf(r, sigma.rx_sigma, 3),
        ]
        for build in builders:
            base = per_stream_sinr(realization, build(realization), 2.0, 1.0)
            moved = per_stream_sinr(shifted, build(shifted), 2.0, 1.0)
            np.testing.assert_allclose(moved, base, rtol=1e-9)

    def test_rejects_bad_scalars_and_shapes(self):
        realization = draw_wavenumber_channel(uniform_sigma(2, 4), 0)
        precoder = mrt(realization)
        with pytest.raises(ValueError):
            per_stream_sinr(realization, precoder, p_u=0.0, noise_var=1.0)
        with pytest.raises(ValueError):
            per_stream_sinr(realization, precoder, p_u=1.0, noise_var=-0.1)
        other = draw_wavenumber_channel(uniform_sigma(3, 4), 0)
        with pytest.raises(ValueError, match="disagree"):
            per_stream_sinr(other, precoder, p_u=1.0, noise_var=1.0)


class TestSEResult:
    def test_rejects_inconsistent_fields(self):
        with pytest.raises(ValueError):
            SEResult(
                per_stream=np.array([[-0.5]]),
                sum_se=np.array([-0.5]),
                trials=1,
                snr_grid_db=(0.0,),
                scheme="MRT",
            )
        with pytest.raises(ValueError, match="column sums"):
            SEResult(
                per_stream=np.array([[1.0]]),
                sum_se=np.array([2.0]),
                trials=1,
                snr_grid_db=(0.0,),
                scheme="MRT",
            )
        with pytest.raises(ValueError, match="trials"):
            SEResult(
                per_stream=np.array([[1.0]]),
                sum_se=np.array([1.0]),
                trials=0,
                snr_grid_db=(0.0,),
                scheme="MRT",
            )
        with pytest.raises(ValueError):
            SEResult(
                per_stream=np.array([1.0]),
                sum_se=np.array([1.0]),
                trials=1,
                snr_grid_db=(0.0,),
                scheme="MRT",
            )


class TestSimulatedSE:
    def test_default_trial_count(self):
        parameters = inspect.signature(simulated_se).parameters
        assert parameters["trials"].default == 800
        assert parameters["ns_iterations"].default == 3

    def test_repeat_runs_are_bit_identical(self):
        sigma = uniform_sigma(3, 6)
        first = simulated_se(sigma, "zf", [0.0, 10.0], trials=8, seed=9)
        second = simulated_se(sigma, "zf", [0.0, 10.0], trials=8, seed=9)
        np.testing.assert_array_equal(first.per_stream, second.per_stream)
        np.testing.assert_array_equal(
            first.per_stream_stderr, second.per_stream_stderr
        )
        assert first.snr_grid_db == (0.0, 10.0)
        assert first.scheme == "ZF"
        assert first.trials == 8

    def test_single_trial_has_zero_stderr(self):
        result = simulated_se(uniform_sigma(2, 5), "mrt", [10.0], trials=1, seed=0)
        np.testing.assert_array_equal(result.per_stream_stderr, 0.0)

    def test_scheme_names_are_case_insensitive(self):
        sigma = uniform_sigma(2, 5)
        for name in ("mrt", " MRT ", "Mrt"):
            assert simulated_se(sigma, name, [0.0], trials=1).scheme == "MRT"
        assert simulated_se(sigma, "ns_zf", [0.0], trials=1).scheme == "NS-ZF"
        with pytest.raises(ValueError, match="unknown scheme"):
            simulated_se(sigma, "svd", [0.0], trials=1)
        with pytest.raises(ValueError, match="trials"):
            simulated_se(sigma, "mrt", [0.0], trials=0)

    def test_noise_variance_cancels_against_matched_power(self):
        sigma = uniform_sigma(3, 6)
        unit = simulated_se(sigma, "mmse", [0.0, 10.0], trials=6, seed=2)
        rescaled = simulated_se(
            sigma, "mmse", [0.0, 10.0], trials=6, seed=2, noise_var=4.0
        )
        np.testing.assert_allclose(rescaled.per_stream, unit.per_stream, rtol=1e-12)

    def test_sum_rows_match_per_stream_columns(self, rx_map_small, tx_map_medium):
        sigma = separable_sigma(rx_map_small, tx_map_medium, 1)
        result = simulated_se(sigma, "mrt", [0.0, 10.0], trials=5, seed=1)
        np.testing.assert_allclose(result.sum_se, result.per_stream.sum(axis=0))
        assert result.per_stream.shape == (13, 2)

    def test_se_grows_with_snr(self, rx_map_small, tx_map_medium):
        sigma = separable_sigma(rx_map_small, tx_map_medium, 1)
        for scheme in ("mrt", "zf"):
            result = simulated_se(
                sigma, scheme, [-10.0, 0.0, 10.0, 20.0, 30.0], trials=50, seed=5
            )
            assert np.all(np.diff(result.sum_se) > -1e-3)


@pytest.fixture(scope="module")
def three_user_sums(rx_map_small, tx_map_medium):
    sigma = separable_sigma(rx_map_small, tx_map_medium, 3)
    return {
        scheme: simulated_se(sigma, scheme, [10.0], trials=200, seed=42).sum_se[0]
        for scheme in ("mrt", "zf", "mmse")
    }


class TestSchemeOrdering:
    def test_frozen_multiuser_sums(self, three_user_sums):
        assert three_user_sums["mrt"] == pytest.approx(50.2072, abs=2e-4)
        assert three_user_sums["zf"] == pytest.approx(215.9033, abs=2e-4)
        assert three_user_sums["mmse"] == pytest.approx(213.6703, abs=2e-4)

    def test_regularized_tracks_the_best_scheme(self, three_user_sums):
        best = max(three_user_sums.values())
        assert three_user_sums["mmse"] >= 0.98 * best

    def test_nulling_beats_matching_at_high_snr(self, three_user_sums):
        assert three_user_sums["zf"] > three_user_sums["mrt"]

    def test_regularized_tracks_the_best_scheme_on_light_channels(self):
        sigma = uniform_sigma(3, 6)
        sums = {
            scheme: simulated_se(sigma, scheme, [10.0], trials=800, seed=42).sum_se[0]
            for scheme in ("mrt", "zf", "mmse")
        }
        assert sums["mrt"] == pytest.approx(6.1085, abs=2e-4)
        assert sums["zf"] == pytest.approx(11.0945, abs=2e-4)
        assert sums["mmse"] == pytest.approx(11.0338, abs=2e-4)
        assert sums["mmse"] >= 0.98 * max(sums.values())

    def test_matched_transmission_plateaus_at_high_snr(
        self, rx_map_small, tx_map_medium
    ):
        sigma = separable_sigma(rx_map_small, tx_map_medium, 3)
        result = simulated_se(sigma, "mrt", [20.0, 30.0], trials=200, seed=42)
        assert abs(result.sum_se[1] - result.sum_se[0]) < 0.1

    def test_denser_transmit_sampling_beats_sparser_at_fixed_patch_count(
        self, rx_map_small
    ):
        sums = {}
        for spacing in (1 / 6, 1 / 15):
            tx_map = variance_map(ArrayGeometry(30, 30, spacing))
            sigma = separable_sigma(rx_map_small, tx_map, 1)
            for scheme in ("zf", "mrt"):
                result = simulated_se(sigma, scheme, [10.0], trials=100, seed=7)
                sums[scheme, spacing] = result.sum_se[0]
        assert sums["zf", 1 / 6] == pytest.approx(121.969, abs=2e-3)
        assert sums["zf", 1 / 15] == pytest.approx(74.053, abs=2e-3)
        assert sums["mrt", 1 / 6] == pytest.approx(32.498, abs=2e-3)
        assert sums["mrt", 1 / 15] == pytest.approx(11.412, abs=2e-3)
        assert sums["zf", 1 / 6] > sums["zf", 1 / 15]
        assert sums["mrt", 1 / 6] > sums["mrt", 1 / 15]


class TestTheoreticalExpressions:
    def test_single_stream_matched_bound_reduces_to_snr_formula(self):
        value = mrt_theoretical_bound(
            np.array([2.0]), np.ones(3), p_u=4.0, noise_var=0.5, stream=0
        )
        assert value == pytest.approx(math.log2(1.0 + 4.0 * 3.0 * 4.0 / 0.5), rel=1e-12)

    def test_matched_bound_shrinks_as_streams_are_added(self):
        lone = mrt_theoretical_bound(np.ones(1), np.ones(8), 2.0, 1.0, 0)
        crowded = mrt_theoretical_bound(np.ones(3), np.ones(8), 2.0, 1.0, 0)
        assert crowded < lone

    def test_classical_identity_nulling_formula(self):
        value = zf_theoretical(np.ones(4), np.ones(10), p_u=2.0, noise_var=1.0, stream=0)
        assert value == pytest.approx(math.log2(1.0 + (2.0 / 4.0) * 7.0), rel=1e-12)

    def test_square_nulling_loses_all_array_gain(self):
        value = zf_theoretical(np.ones(5), np.ones(5), p_u=5.0, noise_var=1.0, stream=2)
        assert value == pytest.approx(1.0, rel=1e-12)

    def test_nulling_skips_dead_streams(self):
        rx = np.array([1.0, 0.0, 2.0])
        assert zf_theoretical(rx, np.ones(4), 1.0, 1.0, 1) == 0.0
        # Only two live streams share the power and count against the cells.
        value = zf_theoretical(rx, np.ones(4), 1.0, 1.0, 2)
        assert value == pytest.approx(math.log2(1.0 + 0.5 * 3.0 * 4.0), rel=1e-12)

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            mrt_theoretical_bound(np.array([]), np.ones(3), 1.0, 1.0, 0)
        with pytest.raises(ValueError, match="more than two"):
            mrt_theoretical_bound(np.ones(2), np.ones(2), 1.0, 1.0, 0)
        with pytest.raises(ValueError, match="out of range"):
            zf_theoretical(np.ones(2), np.ones(4), 1.0, 1.0, 2)
        with pytest.raises(ValueError, match="exceed"):
            zf_theoretical(np.ones(5), np.ones(3), 1.0, 1.0, 0)
        with pytest.raises(ValueError):
            zf_theoretical(np.ones(2), np.ones(4), 0.0, 1.0, 0)
        with pytest.raises(ValueError):
            zf_theoretical(np.ones(2), np.ones(4), 1.0, 0.0, 0)

    def test_nulling_formula_tracks_simulation(self, rx_map_small, tx_map_medium):
        sigma = separable_sigma(rx_map_small, tx_map_medium, 3)
        result = simulated_se(sigma, "zf", [0.0, 20.0], trials=300, seed=42)
        for col, snr_db in enumerate(result.snr_grid_db):
            p_u = 10.0 ** (snr_db / 10.0)
            theory = sum(
                zf_theoretical(sigma.rx_sigma, sigma.tx_sigma, p_u, 1.0, k)
                for k in range(sigma.matrix.shape[0])
            )
            gap = abs(theory - result.sum_se[col]) / result.sum_se[col]
            assert gap < (0.10 if snr_db == 0.0 else 0.15)

    def test_both_formulas_grow_with_more_transmit_cells(self, rx_map_small):
        simulated = []
        theory = []
        for patches in (24, 30, 60):
            tx_map = variance_map(ArrayGeometry(patches, patches, 1 / 3))
            sigma = separable_sigma(rx_map_small, tx_map, 1)
            result = simulated_se(sigma, "zf", [10.0], trials=100, seed=3)
            simulated.append(result.sum_se[0] / sigma.matrix.shape[0])
            theory.append(
                zf_theoretical(sigma.rx_sigma, sigma.tx_sigma, 10.0, 1.0, 0)
            )
        assert simulated == sorted(simulated)
        assert theory == sorted(theory)
        assert simulated[0] > 0.0 and theory[0] > 0.0
