"""Symbol detection for BER benchmarking: Gray-labeled constellations,
LMMSE equalization over the effective channel, and hard-decision
demapping."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Constellation",
    "constellation",
    "map_bits",
    "demap",
    "lmmse_equalize",
    "EqualizationError",
    "DetectionReport",
    "count_bit_errors",
]

# Gray code per 2-bit axis label: 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3
_GRAY4 = {(0, 0): -3.0, (0, 1): -1.0, (1, 1): 1.0, (1, 0): 3.0}


class EqualizationError(RuntimeError):
    """Raised when the zero-noise LMMSE system is rank deficient."""


@dataclass(frozen=True)
class Constellation:
    """Unit-average-energy symbol set with Gray bit labels.

    ``points[i]`` is the symbol whose label is the bits of ``i``,
    most-significant bit first.
    """

    name: str
    points: np.ndarray
    bits_per_symbol: int


def _qpsk_points() -> np.ndarray:
    pts = np.empty(4, dtype=complex)
    for i in range(4):
        b0, b1 = (i >> 1) & 1, i & 1
        pts[i] = ((1.0 if b0 == 0 else -1.0) + 1j * (1.0 if b1 == 0 else -1.0)) / np.sqrt(2)
    return pts


def _qam16_points() -> np.ndarray:
    pts = np.empty(16, dtype=complex)
    for i in range(16):
        b = [(i >> k) & 1 for k in (3, 2, 1, 0)]
        re = _GRAY4[(b[0], b[1])]
        im = _GRAY4[(b[2], b[3])]
        pts[i] = (re + 1j * im) / np.sqrt(10)
    return pts


_CONSTELLATIONS = {
    "bpsk": (np.array([1.0 + 0j, -1.0 + 0j]), 1),
    "qpsk": (_qpsk_points(), 2),
    "16qam": (_qam16_points(), 4),
}


def constellation(name: str) -> Constellation:
    key = name.lower()
    if key not in _CONSTELLATIONS:
        raise ValueError(f"unknown constellation {name!r}; choose from {sorted(_CONSTELLATIONS)}")
    points, bps = _CONSTELLATIONS[key]
    return Constellation(key, points.copy(), bps)


def map_bits(bits: np.ndarray, const: Constellation) -> np.ndarray:
    """Map a bit vector (length multiple of bits_per_symbol) to symbols."""
    bits = np.asarray(bits, dtype=int)
    bps = const.bits_per_symbol
    if bits.ndim != 1 or bits.size % bps != 0:
        raise ValueError(f"bit count {bits.size} is not a multiple of {bps}")
    weights = 1 << np.arange(bps - 1, -1, -1)
    idx = bits.reshape(-1, bps) @ weights
    return const.points[idx]


def demap(symbols: np.ndarray, const: Constellation) -> np.ndarray:
    """Nearest-point hard decision; ties resolve to the lowest point index."""
    symbols = np.asarray(symbols)
    dist = np.abs(symbols[:, None] - const.points[None, :])
    idx = np.argmin(dist, axis=1)  # argmin takes the first (lowest) index on ties
    bps = const.bits_per_symbol
    shifts = np.arange(bps - 1, -1, -1)
    return ((idx[:, None] >> shifts[None, :]) & 1).reshape(-1)


def count_bit_errors(sent: np.ndarray, received: np.ndarray) -> int:
    sent = np.asarray(sent)
    received = np.asarray(received)
    if sent.shape != received.shape:
        raise ValueError("bit vectors differ in length")
    return int(np.sum(sent != received))


def lmmse_equalize(h_eff: np.ndarray, y: np.ndarray, noise_variance: float) -> np.ndarray:
    """LMMSE estimate x_hat = H^H (H H^H + sigma^2 I)^-1 y.

    With zero noise this reduces to exact inversion; a rank-deficient
    system then raises EqualizationError.
    """
    h_eff = np.asarray(h_eff)
    y = np.asarray(y)
    n = h_eff.shape[0]
    if h_eff.shape != (n, n) or y.shape != (n,):
        raise ValueError("h_eff must be square and y must match its size")
    if noise_variance < 0:
        raise ValueError("noise variance must be >= 0")
    if noise_variance == 0:
        cond = np.linalg.cond(h_eff)
        if not np.isfinite(cond) or cond > 1e12:
            raise EqualizationError(
                f"zero-noise equalization of a rank-deficient channel (cond={cond:.3g})"
            )
        return np.linalg.solve(h_eff, y)
    gram = h_eff @ h_eff.conj().T + noise_variance * np.eye(n)
    return h_eff.conj().T @ np.linalg.solve(gram, y)


@dataclass(frozen=True)
class DetectionReport:
    """Error counts for one SNR point of a Monte Carlo sweep."""

    snr_db: float
    trials: int
    bits_total: int
    bit_errors: int
    esn0_db: float
    ebn0_db: float

    def __post_init__(self):
        if self.bits_total <= 0:
            raise ValueError("bits_total must be positive")
        if not 0 <= self.bit_errors <= self.bits_total:
            raise ValueError("bit_errors must lie in [0, bits_total]")

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits_total
