"""AFDM modem: chirp-domain modulation, demodulation, and the effective
channel, including the chirp-rate rule that puts each integer
delay-Doppler path on its own cyclic diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelMatrix, chirp_prefix_phases
from .transforms import DaftOperator, OpCounter, _dft_axis, chirp_phases, daft_apply

__all__ = [
    "AfdmConfig",
    "afdm_modulate",
    "afdm_demodulate",
    "afdm_effective_channel",
    "predicted_band_offset",
    "cyclic_diagonal_energies",
]

TRANSFORM_DOMAIN = "multicarrier chirp (DAFT)"


@dataclass(frozen=True)
class AfdmConfig:
    """Chirp rates and prefix mode of the modem.

    ``c1`` controls the delay-to-diagonal spreading and is the rate the
    chirp-periodic prefix must agree with; ``c2`` only rotates the input
    basis and is free (default 0).
    """

    n: int
    c1: float
    c2: float = 0.0
    prefix: str = "cpp"
    auto_c1: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"frame length must be >= 1, got {self.n}")
        if self.prefix not in ("cpp", "cp", "none"):
            raise ValueError(f"unknown prefix mode {self.prefix!r}")

    @classmethod
    def with_auto_c1(cls, n: int, max_doppler: int, c2: float = 0.0) -> "AfdmConfig":
        """Chirp rate (2*max_doppler + 1) / (2N) separating every integer
        (delay, doppler) pair with |doppler| <= max_doppler onto distinct
        cyclic diagonals (provided the delay spread also fits the frame).
        """
        if max_doppler != int(max_doppler) or max_doppler < 0:
            raise ValueError(f"auto c1 needs a nonnegative integer max_doppler, got {max_doppler}")
        c1 = (2 * int(max_doppler) + 1) / (2 * n)
        return cls(n=n, c1=c1, c2=c2, prefix="cpp", auto_c1=True)

    def operator(self) -> DaftOperator:
        return DaftOperator(self.n, self.c1, self.c2)


def afdm_modulate(x: np.ndarray, cfg: AfdmConfig, counter: OpCounter | None = None) -> np.ndarray:
    """Chirp-carrier frame s = A^-1 x (inverse DAFT), factored form."""
    return daft_apply(np.asarray(x), cfg.operator(), "inverse", counter)


def afdm_demodulate(r: np.ndarray, cfg: AfdmConfig, counter: OpCounter | None = None) -> np.ndarray:
    """Chirp-domain output y = A r (forward DAFT)."""
    return daft_apply(np.asarray(r), cfg.operator(), "forward", counter)


def _daft_cols(mat: np.ndarray, c1: float, c2: float, inverse: bool) -> np.ndarray:
    """A @ M (or A^-1 @ M) column-batched via chirp / FFT / chirp stages."""
    if inverse:
        out = chirp_phases(mat.shape[0], c2).conj()[:, None] * mat
        out = _dft_axis(out, 0, inverse=True)
        return chirp_phases(mat.shape[0], c1).conj()[:, None] * out
    out = chirp_phases(mat.shape[0], c1)[:, None] * mat
    out = _dft_axis(out, 0, inverse=False)
    return chirp_phases(mat.shape[0], c2)[:, None] * out


def _check_prefix_consistency(channel: ChannelMatrix, cfg: AfdmConfig) -> None:
    # The prefix phases baked into the channel must be the ones this c1
    # would produce, else the effective channel silently loses its
    # cyclic structure.
    for factors in channel.per_path:
        expected = chirp_prefix_phases(channel.n, factors.delay, cfg.c1)
        if not np.allclose(factors.cp_phase, expected, atol=1e-12):
            raise ValueError(
                f"channel prefix phases (prefix={channel.prefix!r}, "
                f"c1={channel.prefix_c1}) do not match modem c1={cfg.c1}; "
                "rebuild the channel with prefix='cpp' and the same c1"
            )


def afdm_effective_channel(channel: ChannelMatrix, cfg: AfdmConfig) -> np.ndarray:
    """Similarity transform A @ H @ A^-1, assembled path by path.

    Requires the channel's prefix phases to match the modem's c1.
    """
    if channel.n != cfg.n:
        raise ValueError(f"channel size {channel.n} does not match config N {cfg.n}")
    _check_prefix_consistency(channel, cfg)
    eff = np.zeros((cfg.n, cfg.n), dtype=complex)
    for factors in channel.per_path:
        term = factors.term_matrix()
        # M @ A^-1 = (A^-1T @ M^T)^T and A^-1T is the inverse DAFT with
        # the chirp rates swapped (the DFT factor is symmetric).
        right = _daft_cols(term.T, c1=cfg.c2, c2=cfg.c1, inverse=True).T
        eff += _daft_cols(right, c1=cfg.c1, c2=cfg.c2, inverse=False)
    return eff


def predicted_band_offset(delay: float, doppler: float, c1: float, n: int) -> float:
    """Cyclic diagonal offset (row minus column, mod N) that a single
    path occupies in the effective channel: (doppler - 2*N*c1*delay) mod N.

    Exact for integer delay/Doppler with a matched chirp-periodic prefix;
    fractional Doppler spreads energy around this (then non-integer)
    center. Shared by the modem structure checks and the sensing search
    pruning.
    """
    return float((doppler - 2.0 * n * c1 * delay) % n)


def cyclic_diagonal_energies(mat: np.ndarray) -> np.ndarray:
    """Energy per cyclic diagonal offset d: sum_m |M[m, (m - d) mod N]|^2."""
    n = mat.shape[0]
    rows = np.arange(n)
    return np.array([np.sum(np.abs(mat[rows, (rows - d) % n]) ** 2) for d in range(n)])
