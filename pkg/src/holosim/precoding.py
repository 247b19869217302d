"""Linear precoders for stacked wavenumber-domain channels.

All precoders operate directly on the wavenumber-domain channel matrix and
return a transmit matrix with unit Frobenius norm, so that every Monte Carlo
trial satisfies the total power constraint on its own.  Streams whose channel
row is identically zero (cells on the edge of the propagating disk can carry
exactly zero power) are excluded from inversions and get all-zero precoding
columns; power is shared over the streams that remain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization

__all__ = [
    "SingularChannelError",
    "Precoder",
    "mrt",
    "zf",
    "mmse",
    "neumann_inverse",
    "ns_zf",
]

_CONDITION_LIMIT = 1e12


class SingularChannelError(RuntimeError):
    """The channel Gram matrix is too ill-conditioned to invert."""


@dataclass(frozen=True)
class Precoder:
    """Transmit matrix with bookkeeping for rate evaluation.

    Attributes:
        v: Complex matrix of shape ``(tx_cells, streams)`` with unit
            Frobenius norm; column ``i`` precodes stream ``i``.
        scheme: One of ``"MRT"``, ``"ZF"``, ``"MMSE"``, ``"NS-ZF"``.
        alpha: Scalar normalization applied on top of any per-column
            scaling.
        ns_iterations: Series order used by the ``"NS-ZF"`` scheme, ``None``
            otherwise.
        column_gains: For the inverting schemes, the per-stream channel
            gains ``1/‖f_i‖`` of the unnormalized solution columns (zero for
            excluded streams); ``None`` for schemes that do not solve.
    """

    v: np.ndarray
    scheme: str
    alpha: float
    ns_iterations: int | None = None
    column_gains: np.ndarray | None = None


def _alive_rows(h_a: np.ndarray) -> np.ndarray:
    return np.linalg.norm(h_a, axis=1) > 0.0


def mrt(realization: ChannelRealization) -> Precoder:
    """Maximum-ratio transmission: match the channel, normalize total power.

    Args:
        realization: Channel draw to precode.

    Returns:
        The precoder with ``v`` equal to the conjugate transpose of the
        channel scaled to unit Frobenius norm.

    Raises:
        ValueError: If the channel is identically zero.
    """
    h_a = realization.h_a
    scale = np.linalg.norm(h_a)
    if scale == 0.0:
        raise ValueError("cannot match an all-zero channel")
    return Precoder(v=h_a.conj().T / scale, scheme="MRT", alpha=1.0 / scale)


def _vector_normalized(
    h_a: np.ndarray, alive: np.ndarray, columns: np.ndarray, scheme: str, **extra
) -> Precoder:
    """Package per-stream solution columns with vector normalization."""
    streams = h_a.shape[0]
    active = int(alive.sum())
    norms = np.linalg.norm(columns, axis=0)
    if np.any(norms == 0.0):
        raise SingularChannelError("inversion produced a zero precoding column")
    v = np.zeros((h_a.shape[1], streams), dtype=complex)
    v[:, alive] = columns / (np.sqrt(active) * norms)
    gains = np.zeros(streams)
    gains[alive] = 1.0 / norms
    return Precoder(
        v=v,
        scheme=scheme,
        alpha=1.0 / np.sqrt(active),
        column_gains=gains,
        **extra,
    )


def zf(realization: ChannelRealization) -> Precoder:
    """Zero-forcing precoding with per-column (vector) normalization.

    The right pseudo-inverse is solved on the streams with nonzero channel
    rows; each of its columns is scaled to equal power so that interference
    is nulled exactly and the power constraint is met per realization.

    Args:
        realization: Channel draw; requires at least as many transmit cells
            as active streams.

    Returns:
        The precoder, with ``column_gains`` recording each stream's
        pseudo-inverse column gain.

    Raises:
        SingularChannelError: If the Gram matrix of the active streams has
            condition number above 1e12.
        ValueError: If there are more active streams than transmit cells or
            no active streams at all.
    """
    h_a = realization.h_a
    alive = _alive_rows(h_a)
    active = int(alive.sum())
    if active == 0:
        raise ValueError("cannot zero-force an all-zero channel")
    if active > h_a.shape[1]:
        raise ValueError(
            f"{active} active streams exceed {h_a.shape[1]} transmit cells"
        )
    rows = h_a[alive]
    gram = rows @ rows.conj().T
    if np.linalg.cond(gram) > _CONDITION_LIMIT:
        raise SingularChannelError("channel Gram matrix is numerically singular")
    pseudo = np.linalg.solve(gram, rows).conj().T
    return _vector_normalized(h_a, alive, pseudo, "ZF")


def mmse(realization: ChannelRealization, snr: float) -> Precoder:
    """Regularized inversion with noise loading matched to the SNR.

    The Gram matrix is loaded with ``streams / snr`` on the diagonal before
    inversion, then the result is Frobenius-normalized.  The loading keeps
    the solve well-posed at any draw, interpolating between matched
    transmission at low SNR and zero-forcing at high SNR.

    Args:
        realization: Channel draw.
        snr: Transmit power over noise variance; must be positive.

    Returns:
        The precoder.

    Raises:
        ValueError: If ``snr`` is not positive.
    """
    if not snr > 0.0:
        raise ValueError(f"snr must be positive, got {snr!r}")
    h_a = realization.h_a
    streams = h_a.shape[0]
    gram = h_a @ h_a.conj().T
    loaded = gram + (streams / snr) * np.eye(streams)
    solution = np.linalg.solve(loaded, h_a).conj().T
    scale = np.linalg.norm(solution)
    return Precoder(v=solution / scale, scheme="MMSE", alpha=1.0 / scale)


def neumann_inverse(w_tilde: np.ndarray, iterations: int) -> np.ndarray:
    """Truncated Neumann series approximation of a matrix inverse.

    Splitting ``w_tilde`` into its diagonal ``D`` and off-diagonal ``E``,
    the order-``iterations`` series is accumulated Horner style,
    ``X <- D^{-1} - D^{-1} E X``, so each extra order costs one
    matrix-matrix product.  The series converges to the true inverse only
    when the spectral radius of ``D^{-1} E`` is below one; for dominant
    off-diagonal mass the residual grows with the order instead.

    Args:
        w_tilde: Square matrix to invert approximately.
        iterations: Highest series order, at least 0 (order 0 returns
            ``D^{-1}``).

    Returns:
        The order-``iterations`` series value.

    Raises:
        ValueError: On a non-square input, a negative order, or a zero
            diagonal entry.
    """
    w_tilde = np.asarray(w_tilde)
    if w_tilde.ndim != 2 or w_tilde.shape[0] != w_tilde.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {w_tilde.shape}")
    if not isinstance(iterations, (int, np.integer)) or iterations < 0:
        raise ValueError(f"iterations must be a nonnegative integer, got {iterations!r}")
    diag = np.diag(w_tilde)
    if np.any(diag == 0.0):
        raise ValueError("diagonal entries must be nonzero")
    inv_diag = 1.0 / diag
    off = w_tilde - np.diag(diag)
    scaled_off = inv_diag[:, None] * off
    base = np.diag(inv_diag)
    result = base
    for _ in range(iterations):
        result = base - scaled_off @ result
    return result


def ns_zf(
    realization: ChannelRealization, rx_sigma: np.ndarray, iterations: int = 3
) -> Precoder:
    """Zero-forcing with the Gram inverse replaced by a Neumann series.

    The Gram matrix is symmetrized by the per-stream scale factors before
    the series: with single-ended separable correlation the rescaled Gram
    concentrates near the identity, which is what makes a short series
    usable.  The approximate inverse is sandwiched back and applied like the
    exact zero-forcing solution, including the per-column normalization.

    Args:
        realization: Channel draw.
        rx_sigma: Per-stream scale factors, one per channel row.  Streams
            with scale zero must have identically zero rows (they are
            excluded, like in :func:`zf`).
        iterations: Highest series order; defaults to 3.

    Returns:
        The precoder, with ``ns_iterations`` set.

    Raises:
        ValueError: If the scale vector length does not match, a zero scale
            meets a nonzero channel row, or no stream is active.
    """
    h_a = realization.h_a
    rx_sigma = np.asarray(rx_sigma, dtype=float)
    if rx_sigma.shape != (h_a.shape[0],):
        raise ValueError(
            f"rx_sigma has shape {rx_sigma.shape}, expected ({h_a.shape[0]},)"
        )
    alive = _alive_rows(h_a)
    if np.any((rx_sigma == 0.0) & alive):
        raise ValueError("zero scale factor for a stream with a nonzero channel row")
    alive &= rx_sigma > 0.0
    active = int(alive.sum())
    if active == 0:
        raise ValueError("cannot zero-force an all-zero channel")
    rows = h_a[alive]
    scales = rx_sigma[alive]
    gram = rows @ rows.conj().T
    balanced = gram / np.outer(scales, scales)
    series = neumann_inverse(balanced, iterations)
    approx_inv = series / np.outer(scales, scales)
    pseudo = rows.conj().T @ approx_inv
    return _vector_normalized(
        h_a, alive, pseudo, "NS-ZF", ns_iterations=iterations
    )
