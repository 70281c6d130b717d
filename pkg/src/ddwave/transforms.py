"""Unitary transform building blocks shared by the OTFS and AFDM modems.

Normalized DFT matrices, quadratic-chirp diagonals, the forward/inverse
DAFT pair, the ISFFT, column-major (de)vectorization, and an operation
counter backing the modulation-complexity analyses.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "OpCounter",
    "DaftOperator",
    "dft_matrix",
    "dft_apply",
    "chirp_phases",
    "chirp_diagonal",
    "daft_apply",
    "isfft",
    "isfft_inverse",
    "vectorize",
    "devectorize",
]


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass
class OpCounter:
    """Complex-operation tally accumulated by counted transform calls.

    ``diagonal_multiplies`` is the subset of ``complex_multiplies`` spent
    in diagonal (chirp or pulse) scaling stages. Counts only ever grow.
    """

    complex_multiplies: int = 0
    complex_adds: int = 0
    diagonal_multiplies: int = 0

    def count_dft(self, n: int) -> None:
        # Radix-2 convention for power-of-two sizes; anything else is a
        # direct matrix application and is counted as such.
        if _is_power_of_two(n):
            stages = n.bit_length() - 1
            self.complex_multiplies += (n // 2) * stages
            self.complex_adds += n * stages
        else:
            self.complex_multiplies += n * n
            self.complex_adds += n * (n - 1)

    def count_diagonal(self, n: int) -> None:
        self.complex_multiplies += n
        self.diagonal_multiplies += n


def dft_matrix(n: int) -> np.ndarray:
    """Normalized N-point DFT matrix with entry (m, k) = exp(-2j*pi*m*k/N)/sqrt(N).

    Symmetric by construction (m*k = k*m), so its conjugate equals its
    adjoint.
    """
    if n < 1:
        raise ValueError(f"DFT size must be >= 1, got {n}")
    m = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(m, m) / n) / np.sqrt(n)


@lru_cache(maxsize=16)
def _cached_dft(n: int) -> np.ndarray:
    return dft_matrix(n)


def _dft_axis(a: np.ndarray, axis: int, inverse: bool) -> np.ndarray:
    """Apply the normalized (I)DFT along one axis of ``a``.

    Because the DFT matrix is symmetric this is simultaneously a
    left-multiplication of columns and a right-multiplication of rows.
    Power-of-two sizes go through the FFT; other sizes use the dense
    matrix.
    """
    n = a.shape[axis]
    if _is_power_of_two(n):
        fn = np.fft.ifft if inverse else np.fft.fft
        return fn(a, axis=axis, norm="ortho")
    mat = _cached_dft(n)
    if inverse:
        mat = mat.conj()
    return np.moveaxis(np.tensordot(mat, a, axes=([1], [axis])), 0, axis)


def dft_apply(x: np.ndarray, direction: str = "forward", counter: OpCounter | None = None) -> np.ndarray:
    """Apply the normalized DFT (or its inverse) to a vector.

    Parameters
    ----------
    x : complex vector
    direction : "forward" for F @ x, "inverse" for F^H @ x
    counter : optional OpCounter incremented with the transform cost
    """
    x = np.asarray(x)
    if x.ndim != 1 or x.size < 1:
        raise ValueError("dft_apply expects a nonempty 1-D vector")
    if direction not in ("forward", "inverse"):
        raise ValueError(f"unknown direction {direction!r}")
    if counter is not None:
        counter.count_dft(x.size)
    return _dft_axis(x, 0, inverse=(direction == "inverse"))


def chirp_phases(n: int, c: float) -> np.ndarray:
    """Diagonal entries exp(-2j*pi*c*k^2) of the quadratic-chirp matrix."""
    if n < 1:
        raise ValueError(f"chirp size must be >= 1, got {n}")
    k = np.arange(n, dtype=float)
    return np.exp(-2j * np.pi * c * k * k)


def chirp_diagonal(n: int, c: float) -> np.ndarray:
    """Dense N x N quadratic-chirp diagonal matrix of central frequency c."""
    return np.diag(chirp_phases(n, c))


@dataclass(frozen=True)
class DaftOperator:
    """Forward chirp-DFT-chirp composition; the inverse is its adjoint."""

    size: int
    c1: float
    c2: float = 0.0

    def __post_init__(self):
        if self.size < 1:
            raise ValueError(f"DAFT size must be >= 1, got {self.size}")

    def matrix(self) -> np.ndarray:
        lam1 = chirp_phases(self.size, self.c1)
        lam2 = chirp_phases(self.size, self.c2)
        return lam2[:, None] * dft_matrix(self.size) * lam1[None, :]

    def inverse_matrix(self) -> np.ndarray:
        return self.matrix().conj().T


def _chirp_stage(x: np.ndarray, c: float, conj: bool, counter: OpCounter | None) -> np.ndarray:
    # Trivial chirps are skipped when uncounted so the c1 = c2 = 0 case is
    # bit-for-bit a plain DFT; counted runs always pay the multiplies.
    if counter is None and c == 0.0:
        return x
    if counter is not None:
        counter.count_diagonal(x.size)
    phases = chirp_phases(x.size, c)
    if conj:
        phases = phases.conj()
    return phases * x


def daft_apply(
    x: np.ndarray,
    op: DaftOperator,
    direction: str = "forward",
    counter: OpCounter | None = None,
) -> np.ndarray:
    """Apply the forward DAFT or its inverse to a vector, factored form."""
    x = np.asarray(x)
    if x.ndim != 1 or x.size != op.size:
        raise ValueError(f"input length {x.shape} does not match operator size {op.size}")
    if direction == "forward":
        y = _chirp_stage(x, op.c1, conj=False, counter=counter)
        y = dft_apply(y, "forward", counter)
        return _chirp_stage(y, op.c2, conj=False, counter=counter)
    if direction == "inverse":
        y = _chirp_stage(x, op.c2, conj=True, counter=counter)
        y = dft_apply(y, "inverse", counter)
        return _chirp_stage(y, op.c1, conj=True, counter=counter)
    raise ValueError(f"unknown direction {direction!r}")


def isfft(grid: np.ndarray) -> np.ndarray:
    """Map a delay-Doppler grid to time-frequency: F_K @ X @ F_L^H."""
    grid = np.asarray(grid)
    if grid.ndim != 2 or min(grid.shape) < 1:
        raise ValueError("isfft expects a nonempty 2-D grid")
    return _dft_axis(_dft_axis(grid, 0, inverse=False), 1, inverse=True)


def isfft_inverse(grid: np.ndarray) -> np.ndarray:
    """Inverse of :func:`isfft`: F_K^H @ Y @ F_L."""
    grid = np.asarray(grid)
    if grid.ndim != 2 or min(grid.shape) < 1:
        raise ValueError("isfft_inverse expects a nonempty 2-D grid")
    return _dft_axis(_dft_axis(grid, 0, inverse=True), 1, inverse=False)


def vectorize(grid: np.ndarray) -> np.ndarray:
    """Column-major stacking of a K x L grid into a length-KL vector."""
    grid = np.asarray(grid)
    if grid.ndim != 2:
        raise ValueError("vectorize expects a 2-D grid")
    return grid.ravel(order="F")


def devectorize(x: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`vectorize`; requires len(x) == rows*cols."""
    x = np.asarray(x)
    if x.ndim != 1 or x.size != rows * cols:
        raise ValueError(f"cannot reshape length-{x.size} vector into {rows}x{cols}")
    return x.reshape((rows, cols), order="F")
