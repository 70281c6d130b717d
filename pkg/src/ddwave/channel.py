"""Doubly-dispersive (time-varying multipath) channel model.

Holds the three impulse-response representations (time-delay,
time-frequency, delay-Doppler), the sampled cyclic-convolution model and
its matrix form as a superposition of shifted diagonals, plus seeded
complex AWGN.

Conventions: path delays are stored in samples (delay resolution equals
the sample period, i.e. one over the bandwidth) and Doppler shifts in
cycles per frame, so a path contributes the phase exp(2j*pi*doppler*k/N)
at sample k. Physical units are derived from the scenario on demand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SPEED_OF_LIGHT",
    "ScenarioConfig",
    "vehicular_scenario",
    "Path",
    "PathSet",
    "random_path_set",
    "NoiseModel",
    "PathFactors",
    "ChannelMatrix",
    "cyclic_shift_matrix",
    "chirp_prefix_phases",
    "build_channel_matrix",
    "apply_channel",
    "cir_time_delay",
    "cir_time_frequency",
    "delay_doppler_spread",
    "transfer_function_grid",
]

SPEED_OF_LIGHT = 299_792_458.0

_PREFIX_MODES = ("cp", "cpp", "none")


@dataclass(frozen=True)
class ScenarioConfig:
    """Frame and propagation-geometry constants.

    The delay resolution is pinned to the sample period (one over the
    bandwidth), so path delays are sample indices.
    """

    n: int
    carrier_hz: float
    bandwidth_hz: float
    max_delay: int
    max_doppler: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"frame length must be >= 1, got {self.n}")
        if self.carrier_hz <= 0 or self.bandwidth_hz <= 0:
            raise ValueError("carrier and bandwidth must be positive")
        if not 0 <= self.max_delay < self.n:
            raise ValueError(f"max_delay must lie in [0, N), got {self.max_delay} for N={self.n}")
        if self.max_doppler < 0:
            raise ValueError("max_doppler must be nonnegative")

    @property
    def sample_period(self) -> float:
        return 1.0 / self.bandwidth_hz

    @property
    def delay_resolution(self) -> float:
        return self.sample_period

    @property
    def frame_duration(self) -> float:
        return self.n * self.sample_period

    def delay_seconds(self, delay_samples: float) -> float:
        return delay_samples * self.delay_resolution

    def doppler_hz(self, doppler_cycles: float) -> float:
        return doppler_cycles / self.frame_duration


def vehicular_scenario(n: int = 64, max_delay: int = 3, max_doppler: float = 2.0) -> ScenarioConfig:
    """V2X-style defaults: 5.9 GHz carrier, 10 MHz bandwidth."""
    return ScenarioConfig(
        n=n, carrier_hz=5.9e9, bandwidth_hz=10e6, max_delay=max_delay, max_doppler=max_doppler
    )


@dataclass(frozen=True)
class Path:
    gain: complex
    delay: float  # samples, >= 0
    doppler: float  # cycles/frame

    def __post_init__(self):
        if self.delay < 0:
            raise ValueError(f"path delay must be >= 0, got {self.delay}")


@dataclass(frozen=True)
class PathSet:
    """The P-path channel parameterization {gain, delay, doppler}."""

    paths: tuple[Path, ...]
    integer_mode: bool = False

    def __post_init__(self):
        paths = tuple(self.paths)
        object.__setattr__(self, "paths", paths)
        if len(paths) < 1:
            raise ValueError("a PathSet needs at least one path")
        if self.integer_mode:
            for p in paths:
                if p.delay != int(p.delay) or p.doppler != int(p.doppler):
                    raise ValueError(
                        f"integer mode requires integer delays and Dopplers, got {p}"
                    )

    def __len__(self) -> int:
        return len(self.paths)

    def __iter__(self):
        return iter(self.paths)

    def validate_for(self, scenario: ScenarioConfig) -> None:
        for p in self.paths:
            if p.delay > scenario.max_delay:
                raise ValueError(f"path delay {p.delay} exceeds max_delay {scenario.max_delay}")
            if abs(p.doppler) > scenario.max_doppler:
                raise ValueError(
                    f"path Doppler {p.doppler} exceeds max_doppler {scenario.max_doppler}"
                )


def random_path_set(
    scenario: ScenarioConfig,
    count: int,
    rng: np.random.Generator,
    integer_mode: bool = True,
    distinct: bool = True,
) -> PathSet:
    """Draw ``count`` paths uniformly over the scenario's delay-Doppler box.

    Gains are complex Gaussian normalized to unit expected total power.
    In integer mode delays and Dopplers land on the integer grid; with
    ``distinct`` the (delay, doppler) cells are pairwise different.
    """
    m = int(math.floor(scenario.max_doppler))
    cells: list[tuple[float, float]] = []
    if integer_mode and distinct:
        available = (scenario.max_delay + 1) * (2 * m + 1)
        if count > available:
            raise ValueError(f"cannot draw {count} distinct cells from {available}")
    seen = set()
    while len(cells) < count:
        if integer_mode:
            cell = (
                float(rng.integers(0, scenario.max_delay + 1)),
                float(rng.integers(-m, m + 1)),
            )
        else:
            cell = (
                float(rng.integers(0, scenario.max_delay + 1)),
                float(rng.uniform(-scenario.max_doppler, scenario.max_doppler)),
            )
        if distinct and cell in seen:
            continue
        seen.add(cell)
        cells.append(cell)
    scale = math.sqrt(1.0 / (2 * count))
    gains = scale * (rng.standard_normal(count) + 1j * rng.standard_normal(count))
    paths = tuple(Path(complex(g), d, a) for g, (d, a) in zip(gains, cells))
    return PathSet(paths, integer_mode=integer_mode)


@dataclass(frozen=True)
class NoiseModel:
    """Circular complex AWGN of total per-sample variance ``variance``.

    Sampling is a pure function of the seed: the same model always
    produces the same draw. Monte Carlo loops should therefore derive one
    model (one seed) per trial.
    """

    variance: float
    seed: int | tuple[int, ...] = 0

    def __post_init__(self):
        if self.variance < 0:
            raise ValueError("noise variance must be >= 0")

    def sample(self, count: int) -> np.ndarray:
        rng = np.random.default_rng(self.seed)
        scale = math.sqrt(self.variance / 2.0)
        return scale * (rng.standard_normal(count) + 1j * rng.standard_normal(count))


def cyclic_shift_matrix(n: int, shift: int = 1) -> np.ndarray:
    """Forward cyclic-shift permutation: (Pi^s x)[k] = x[(k - s) mod N]."""
    rows = np.arange(n)
    mat = np.zeros((n, n))
    mat[rows, (rows - shift) % n] = 1.0
    return mat


def chirp_prefix_phases(n: int, delay: int, c1: float) -> np.ndarray:
    """Diagonal phases that make an integer-delay path act cyclically in
    the chirp domain (chirp-periodic prefix). Unity for delay 0 or c1 0,
    which also covers the plain cyclic prefix."""
    phases = np.ones(n, dtype=complex)
    if delay > 0 and c1 != 0.0:
        k = np.arange(delay, dtype=float)
        phases[:delay] = np.exp(-2j * np.pi * c1 * (n * n - 2 * n * (delay - k)))
    return phases


@dataclass(frozen=True)
class PathFactors:
    """One path's factor matrices, stored as diagonals plus the shift.

    The dense contribution is gain * diag(cp_phase) * diag(doppler_phase)
    * Pi^delay.
    """

    gain: complex
    delay: int
    doppler: float
    cp_phase: np.ndarray
    doppler_phase: np.ndarray

    @property
    def n(self) -> int:
        return self.doppler_phase.size

    def shift_matrix(self) -> np.ndarray:
        return cyclic_shift_matrix(self.n, self.delay)

    def term_matrix(self) -> np.ndarray:
        n = self.n
        rows = np.arange(n)
        term = np.zeros((n, n), dtype=complex)
        term[rows, (rows - self.delay) % n] = self.gain * self.cp_phase * self.doppler_phase
        return term

    def term_apply(self, s: np.ndarray) -> np.ndarray:
        return self.gain * self.cp_phase * self.doppler_phase * np.roll(s, self.delay)


@dataclass(frozen=True)
class ChannelMatrix:
    """Dense N x N channel together with its per-path factorization."""

    matrix: np.ndarray
    per_path: tuple[PathFactors, ...]
    scenario: ScenarioConfig
    prefix: str
    prefix_c1: float = 0.0

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def build_channel_matrix(
    paths: PathSet,
    scenario: ScenarioConfig,
    prefix: str = "cp",
    prefix_c1: float = 0.0,
) -> ChannelMatrix:
    """Assemble the channel as a superposition of shifted diagonals.

    Parameters
    ----------
    paths : PathSet with integer delays (fractional delays are rejected;
        fractional Dopplers are fine)
    prefix : "cp" or "none" leave the prefix diagonals at identity;
        "cpp" applies the chirp-periodic prefix phases for ``prefix_c1``
    """
    if prefix not in _PREFIX_MODES:
        raise ValueError(f"prefix must be one of {_PREFIX_MODES}, got {prefix!r}")
    paths.validate_for(scenario)
    n = scenario.n
    rows = np.arange(n)
    matrix = np.zeros((n, n), dtype=complex)
    factors = []
    for p in paths:
        if p.delay != int(p.delay):
            raise ValueError(f"fractional delay {p.delay} is not supported by the matrix model")
        delay = int(p.delay)
        doppler_phase = np.exp(2j * np.pi * p.doppler * rows / n)
        if prefix == "cpp":
            cp_phase = chirp_prefix_phases(n, delay, prefix_c1)
        else:
            cp_phase = np.ones(n, dtype=complex)
        fac = PathFactors(
            gain=complex(p.gain),
            delay=delay,
            doppler=float(p.doppler),
            cp_phase=cp_phase,
            doppler_phase=doppler_phase,
        )
        factors.append(fac)
        matrix[rows, (rows - delay) % n] += fac.gain * cp_phase * doppler_phase
    return ChannelMatrix(
        matrix=matrix,
        per_path=tuple(factors),
        scenario=scenario,
        prefix=prefix,
        prefix_c1=float(prefix_c1) if prefix == "cpp" else 0.0,
    )


def apply_channel(channel: ChannelMatrix, s: np.ndarray, noise: NoiseModel | None = None) -> np.ndarray:
    """Propagate a frame: r = H s + w. Noiseless when ``noise`` is None
    or has zero variance."""
    s = np.asarray(s)
    if s.shape != (channel.n,):
        raise ValueError(f"signal shape {s.shape} does not match channel size {channel.n}")
    r = channel.matrix @ s
    if noise is not None and noise.variance > 0:
        r = r + noise.sample(channel.n)
    return r


def _doppler_rate_hz(path: Path, scenario: ScenarioConfig) -> float:
    return scenario.doppler_hz(path.doppler)


def cir_time_delay(
    paths: PathSet,
    scenario: ScenarioConfig,
    t: float,
    tau: float,
    kernel_bw: float,
) -> complex:
    """Time-variant impulse response g(t, tau).

    The impulsive delay support is rendered with a unit-mass Gaussian
    kernel of width ``kernel_bw`` (visualization only); exactly on a path
    delay the analytic value gain * exp(2j*pi*doppler_hz*t) is returned
    instead of the kernel peak.
    """
    if kernel_bw <= 0:
        raise ValueError("kernel_bw must be positive")
    atol = 1e-9 * scenario.delay_resolution
    exact = 0.0 + 0.0j
    smeared = 0.0 + 0.0j
    hit = False
    for p in paths:
        tau_p = scenario.delay_seconds(p.delay)
        rotation = p.gain * np.exp(2j * np.pi * _doppler_rate_hz(p, scenario) * t)
        if abs(tau - tau_p) <= atol:
            exact += rotation
            hit = True
        else:
            x = (tau - tau_p) / kernel_bw
            smeared += rotation * math.exp(-0.5 * x * x) / (kernel_bw * math.sqrt(2 * math.pi))
    return exact if hit else smeared


def cir_time_frequency(paths: PathSet, scenario: ScenarioConfig, t: float, f: float) -> complex:
    """Time-variant transfer function g_TF(t, f), closed form."""
    total = 0.0 + 0.0j
    for p in paths:
        total += (
            p.gain
            * np.exp(2j * np.pi * _doppler_rate_hz(p, scenario) * t)
            * np.exp(-2j * np.pi * scenario.delay_seconds(p.delay) * f)
        )
    return complex(total)


def transfer_function_grid(
    paths: PathSet,
    scenario: ScenarioConfig,
    times: np.ndarray,
    freqs: np.ndarray,
) -> np.ndarray:
    """g_TF evaluated on a (time x frequency) grid."""
    times = np.asarray(times, dtype=float)
    freqs = np.asarray(freqs, dtype=float)
    grid = np.zeros((times.size, freqs.size), dtype=complex)
    for p in paths:
        t_phase = np.exp(2j * np.pi * _doppler_rate_hz(p, scenario) * times)
        f_phase = np.exp(-2j * np.pi * scenario.delay_seconds(p.delay) * freqs)
        grid += p.gain * np.outer(t_phase, f_phase)
    return grid


def delay_doppler_spread(paths: PathSet) -> list[tuple[float, float, complex]]:
    """Impulsive delay-Doppler support: (delay, doppler, gain) tuples in
    the channel's native normalized units, duplicates merged by summing
    gains."""
    merged: dict[tuple[float, float], complex] = {}
    for p in paths:
        key = (float(p.delay), float(p.doppler))
        merged[key] = merged.get(key, 0.0 + 0.0j) + complex(p.gain)
    return [(d, a, g) for (d, a), g in sorted(merged.items())]
