"""Random wavenumber-domain channels and their correlation spectra.

A channel realization lives in the wavenumber domain: one complex coupling
coefficient per (receive cell, transmit cell) pair, drawn independently with
the per-cell scale factors supplied by the variance maps.  Element-domain
channels are recovered by sandwiching the realization between harmonic bases.
The correlation structure is separable, which keeps its eigen-analysis
closed-form even for surfaces with hundreds of thousands of matrix entries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import HarmonicBasis
from .spectrum import SeparableSigma, VarianceMap

__all__ = [
    "ChannelRealization",
    "CorrelationSpectrum",
    "draw_wavenumber_channel",
    "assemble_element_channel",
    "correlation_eigenvalues",
]


@dataclass(frozen=True)
class ChannelRealization:
    """One random draw of the stacked wavenumber-domain channel.

    Attributes:
        h_a: Complex matrix of shape ``(users * per_user_rows, tx_cells)``;
            each user occupies a contiguous block of rows.
        per_user_rows: Receive-cell count of a single user block.
        seed: Seed material that produced the draw.
    """

    h_a: np.ndarray
    per_user_rows: int
    seed: object

    @property
    def num_users(self) -> int:
        return self.h_a.shape[0] // self.per_user_rows

    def user_block(self, user: int) -> np.ndarray:
        """Rows of ``h_a`` belonging to one user (0-based index)."""
        lo = user * self.per_user_rows
        return self.h_a[lo : lo + self.per_user_rows]


@dataclass(frozen=True)
class CorrelationSpectrum:
    """Eigenvalues of one user's element-domain correlation matrix.

    Attributes:
        eigenvalues: Nonincreasing nonnegative reals, padded with zeros to
            the full element-domain dimension.
    """

    eigenvalues: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.eigenvalues, dtype=float)
        if np.any(vals < -1e-9):
            raise ValueError("eigenvalues must be nonnegative")
        vals = np.clip(vals, 0.0, None)
        if np.any(np.diff(vals) > 0.0):
            raise ValueError("eigenvalues must be nonincreasing")
        object.__setattr__(self, "eigenvalues", vals)


def draw_wavenumber_channel(sigma: SeparableSigma, seed) -> ChannelRealization:
    """Draw one wavenumber-domain channel with the given per-cell scales.

    Every entry is an independent circular complex Gaussian of unit variance
    (real and imaginary parts of variance one half each) multiplied by the
    matching entry of ``sigma.matrix``.  The draw is deterministic in the
    seed.

    Args:
        sigma: Stacked per-user scale matrix.
        seed: Anything accepted by :func:`numpy.random.default_rng` — an
            integer for standalone use, or a spawned seed sequence when a
            caller manages streams itself.

    Returns:
        The realization.
    """
    rng = np.random.default_rng(seed)
    shape = sigma.matrix.shape
    noise = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    return ChannelRealization(
        h_a=sigma.matrix * noise, per_user_rows=sigma.per_user_rows, seed=seed
    )


def assemble_element_channel(
    realization: ChannelRealization,
    rx_bases: list[HarmonicBasis],
    tx_basis: HarmonicBasis,
) -> np.ndarray:
    """Map a wavenumber-domain realization to element-domain channels.

    Each user block is expanded as ``U_rx @ block @ U_tx^H`` with that user's
    receive basis, and the per-user results are stacked vertically.  Because
    the bases are semi-unitary, the mapping is an isometry in Frobenius norm;
    it exists for validation and inspection, while precoding itself stays in
    the wavenumber domain.

    Args:
        realization: Stacked wavenumber-domain draw.
        rx_bases: One receive basis per user, in user order.
        tx_basis: Shared transmit basis.

    Returns:
        Complex matrix with one block of receive-patch rows per user.

    Raises:
        ValueError: If basis shapes do not match the realization blocks.
    """
    if len(rx_bases) != realization.num_users:
        raise ValueError(
            f"{len(rx_bases)} receive bases for {realization.num_users} users"
        )
    tx_cells = realization.h_a.shape[1]
    if tx_basis.matrix.shape[1] != tx_cells:
        raise ValueError(
            f"transmit basis spans {tx_basis.matrix.shape[1]} cells, "
            f"realization has {tx_cells}"
        )
    blocks = []
    for user, basis in enumerate(rx_bases):
        if basis.matrix.shape[1] != realization.per_user_rows:
            raise ValueError(
                f"receive basis {user} spans {basis.matrix.shape[1]} cells, "
                f"blocks have {realization.per_user_rows}"
            )
        blocks.append(basis.matrix @ realization.user_block(user) @ tx_basis.matrix.conj().T)
    return np.vstack(blocks)


def correlation_eigenvalues(
    rx_map: VarianceMap, tx_map: VarianceMap
) -> CorrelationSpectrum:
    """Eigenvalues of one user's element-domain correlation matrix.

    The correlation matrix factors through semi-unitary bases acting on a
    diagonal of per-cell variances, so its nonzero eigenvalues are exactly
    the pairwise products of the squared receive and transmit scale factors.
    They are returned sorted, padded with zeros to the element-domain
    dimension, without ever forming the dense matrix.

    Args:
        rx_map: Variance map of one receive surface.
        tx_map: Variance map of the transmit surface.

    Returns:
        The padded, sorted spectrum.
    """
    products = np.outer(
        rx_map.normalized_sigma**2, tx_map.normalized_sigma**2
    ).ravel()
    full_dim = rx_map.num_patches * tx_map.num_patches
    padded = np.zeros(full_dim)
    padded[: products.size] = np.sort(products)[::-1]
    return CorrelationSpectrum(eigenvalues=padded)
