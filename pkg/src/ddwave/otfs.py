"""OTFS modem: delay-Doppler grid modulation, demodulation, and the
effective channel seen by the vectorized symbol grid.

The grid is K x L with K delay bins (rows) and L Doppler bins (columns);
the time-domain frame is its column-major vectorization after per-row
pulse shaping and an L-point inverse DFT across columns. The K-point DFT
of the delay-Doppler map and its inverse from the Heisenberg step cancel
exactly, which is what the factored forms below exploit.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .channel import ChannelMatrix
from .transforms import OpCounter, _dft_axis, devectorize, vectorize

__all__ = ["OtfsConfig", "OtfsFrame", "otfs_modulate", "otfs_demodulate", "otfs_effective_channel"]

TRANSFORM_DOMAIN = "delay-Doppler (ISFFT)"


@dataclass
class OtfsConfig:
    """Grid geometry and pulse-shaping diagonals.

    ``tx_pulse`` / ``rx_pulse`` are the length-K diagonals of the
    transmit and matched filters; None means rectangular (identity).
    Non-unit-modulus pulses are accepted but break unitarity, voiding
    the round-trip guarantees.
    """

    rows: int
    cols: int
    tx_pulse: np.ndarray | None = None
    rx_pulse: np.ndarray | None = None

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"grid must be at least 1x1, got {self.rows}x{self.cols}")
        self.tx_pulse = self._as_pulse(self.tx_pulse, "tx_pulse")
        self.rx_pulse = self._as_pulse(self.rx_pulse, "rx_pulse")
        if not self.unitary_pulses:
            warnings.warn(
                "windowed (non-unit-modulus) pulse shaping is non-unitary: "
                "round-trip guarantees void",
                stacklevel=2,
            )

    def _as_pulse(self, pulse, name: str) -> np.ndarray:
        if pulse is None:
            return np.ones(self.rows, dtype=complex)
        pulse = np.asarray(pulse, dtype=complex)
        if pulse.shape != (self.rows,):
            raise ValueError(f"{name} must have length {self.rows}, got shape {pulse.shape}")
        return pulse

    @property
    def n(self) -> int:
        return self.rows * self.cols

    @property
    def unitary_pulses(self) -> bool:
        return bool(
            np.allclose(np.abs(self.tx_pulse), 1.0, atol=1e-12)
            and np.allclose(np.abs(self.rx_pulse), 1.0, atol=1e-12)
        )


@dataclass(frozen=True)
class OtfsFrame:
    """Information symbols on the delay-Doppler grid."""

    grid: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=complex)
        if grid.ndim != 2:
            raise ValueError("OtfsFrame grid must be 2-D")
        object.__setattr__(self, "grid", grid)

    @classmethod
    def from_vector(cls, x: np.ndarray, rows: int, cols: int) -> "OtfsFrame":
        return cls(devectorize(x, rows, cols))

    @property
    def vector(self) -> np.ndarray:
        return vectorize(self.grid)


def _as_grid(frame, cfg: OtfsConfig) -> np.ndarray:
    if isinstance(frame, OtfsFrame):
        grid = frame.grid
    else:
        arr = np.asarray(frame)
        grid = devectorize(arr, cfg.rows, cfg.cols) if arr.ndim == 1 else arr
    if grid.shape != (cfg.rows, cfg.cols):
        raise ValueError(f"grid shape {grid.shape} does not match config {cfg.rows}x{cfg.cols}")
    return grid


def otfs_modulate(frame, cfg: OtfsConfig, counter: OpCounter | None = None) -> np.ndarray:
    """Time-domain frame s = vec(G_tx @ X @ F_L^H).

    Accepts an OtfsFrame, a K x L grid, or its length-N vectorization.
    The Kronecker form is never materialized.
    """
    grid = _as_grid(frame, cfg)
    if counter is not None:
        for _ in range(cfg.rows):
            counter.count_dft(cfg.cols)
        counter.count_diagonal(cfg.n)
    shaped = cfg.tx_pulse[:, None] * _dft_axis(grid, 1, inverse=True)
    return vectorize(shaped)


def otfs_demodulate(r: np.ndarray, cfg: OtfsConfig, counter: OpCounter | None = None) -> np.ndarray:
    """Filtered grid output y = vec(G_rx @ R @ F_L), R the received grid."""
    grid = devectorize(np.asarray(r), cfg.rows, cfg.cols)
    if counter is not None:
        for _ in range(cfg.rows):
            counter.count_dft(cfg.cols)
        counter.count_diagonal(cfg.n)
    filtered = cfg.rx_pulse[:, None] * _dft_axis(grid, 1, inverse=False)
    return vectorize(filtered)


def _tx_side_cols(mat: np.ndarray, cfg: OtfsConfig) -> np.ndarray:
    """(F_L^H kron G_tx) @ M, applied column-batched via the factored form."""
    n, m = mat.shape
    stacked = mat.reshape(cfg.rows, cfg.cols, m, order="F")
    out = cfg.tx_pulse[:, None, None] * _dft_axis(stacked, 1, inverse=True)
    return out.reshape(n, m, order="F")


def _rx_side_cols(mat: np.ndarray, cfg: OtfsConfig) -> np.ndarray:
    """(F_L kron G_rx) @ M, applied column-batched via the factored form."""
    n, m = mat.shape
    stacked = mat.reshape(cfg.rows, cfg.cols, m, order="F")
    out = cfg.rx_pulse[:, None, None] * _dft_axis(stacked, 1, inverse=False)
    return out.reshape(n, m, order="F")


def otfs_effective_channel(channel: ChannelMatrix, cfg: OtfsConfig) -> np.ndarray:
    """End-to-end matrix on the vectorized grid, assembled path by path:
    (F_L kron G_rx) @ H_p @ (F_L^H kron G_tx) summed over paths.

    Both Kronecker factors are symmetric, so the right-multiplication is
    a transposed column transform.
    """
    if channel.n != cfg.n:
        raise ValueError(f"channel size {channel.n} does not match config N {cfg.n}")
    eff = np.zeros((cfg.n, cfg.n), dtype=complex)
    for factors in channel.per_path:
        term = factors.term_matrix()
        right = _tx_side_cols(term.T, cfg).T
        eff += _rx_side_cols(right, cfg)
    return eff
