"""Scenario configuration and the Monte Carlo driver.

BER and sensing sweeps over the SNR grid with a deterministic per-trial
seed schedule: trial (waveform wi, snr si, trial t) derives its generator
from SeedSequence([master, wi, si, t]), so results are reproducible and
independent of trial execution order. DDWAVE_THREADS caps the worker
pool; aggregation is order-independent.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path as FsPath

import numpy as np

from . import __version__
from .afdm import AfdmConfig, afdm_demodulate, afdm_effective_channel, afdm_modulate
from .analysis import balanced_grid
from .channel import (
    ChannelMatrix,
    NoiseModel,
    Path,
    PathSet,
    ScenarioConfig,
    apply_channel,
    build_channel_matrix,
    delay_doppler_spread,
    random_path_set,
    transfer_function_grid,
    vehicular_scenario,
)
from .detection import DetectionReport, constellation, count_bit_errors, demap, lmmse_equalize, map_bits
from .otfs import OtfsConfig, otfs_demodulate, otfs_effective_channel, otfs_modulate
from .reporting import manifest_hash, write_json, write_rows_csv
from .sensing import EstimationResult, SensingProblem, estimate_grid_sic, sensing_metrics

__all__ = [
    "Experiment",
    "waveform_config",
    "build_waveform_channel",
    "effective_channel",
    "run_ber_sweep",
    "run_sensing_sweep",
    "run_experiment",
    "viz_channel",
    "VIZ_REPRESENTATIONS",
]

WAVEFORMS = ("afdm", "otfs")
VIZ_REPRESENTATIONS = ("tf", "dd", "eff-otfs", "eff-afdm")


def _threads(explicit: int | None) -> int:
    if explicit is not None:
        return max(1, explicit)
    return max(1, int(os.environ.get("DDWAVE_THREADS", "1")))


@dataclass
class Experiment:
    """One reproducible run: scenario, waveforms, SNR grid, trial budget,
    master seed, and output directory."""

    scenario: ScenarioConfig
    waveforms: tuple[str, ...] = WAVEFORMS
    snr_grid_db: tuple[float, ...] = (0.0, 5.0, 10.0, 15.0, 20.0)
    trials: int = 100
    seed: int = 1
    outputs: FsPath = FsPath("results")
    constellation: str = "qpsk"
    num_paths: int = 3
    paths: PathSet | None = None  # fixed channel; random per trial when None
    otfs_rows: int | None = None
    refine_doppler: bool = False
    assumed_paths: int | None = None

    def __post_init__(self):
        self.waveforms = tuple(self.waveforms)
        self.snr_grid_db = tuple(float(s) for s in self.snr_grid_db)
        self.outputs = FsPath(self.outputs)
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.snr_grid_db:
            raise ValueError("snr grid must be nonempty")
        for w in self.waveforms:
            if w not in WAVEFORMS:
                raise ValueError(f"unknown waveform {w!r}; choose from {WAVEFORMS}")
        if self.num_paths < 1:
            raise ValueError("num_paths must be >= 1")

    def config_dict(self) -> dict:
        """JSON-able configuration; excludes the output directory so the
        manifest hash identifies the experiment, not where it landed."""
        sc = self.scenario
        cfg = {
            "n": sc.n,
            "carrier_hz": sc.carrier_hz,
            "bandwidth_hz": sc.bandwidth_hz,
            "max_delay": sc.max_delay,
            "max_doppler": sc.max_doppler,
            "waveforms": list(self.waveforms),
            "snr_grid_db": list(self.snr_grid_db),
            "trials": self.trials,
            "seed": self.seed,
            "constellation": self.constellation,
            "num_paths": self.num_paths,
            "otfs_rows": self.otfs_rows,
            "refine_doppler": self.refine_doppler,
            "assumed_paths": self.assumed_paths,
        }
        if self.paths is not None:
            cfg["paths"] = [
                {"gain": [p.gain.real, p.gain.imag], "delay": p.delay, "doppler": p.doppler}
                for p in self.paths
            ]
        return cfg


def waveform_config(name: str, scenario: ScenarioConfig, otfs_rows: int | None = None):
    """Default modem configuration for a scenario: auto-c1 chirp rates for
    AFDM, the most square grid for OTFS."""
    if name == "afdm":
        return AfdmConfig.with_auto_c1(scenario.n, int(math.floor(scenario.max_doppler)))
    if name == "otfs":
        rows, cols = balanced_grid(scenario.n, otfs_rows)
        return OtfsConfig(rows=rows, cols=cols)
    raise ValueError(f"unknown waveform {name!r}")


def build_waveform_channel(paths: PathSet, scenario: ScenarioConfig, cfg) -> ChannelMatrix:
    """Physical channel with the prefix convention the modem expects."""
    if isinstance(cfg, AfdmConfig):
        return build_channel_matrix(paths, scenario, prefix=cfg.prefix, prefix_c1=cfg.c1)
    return build_channel_matrix(paths, scenario, prefix="cp")


def effective_channel(chan: ChannelMatrix, cfg) -> np.ndarray:
    if isinstance(cfg, AfdmConfig):
        return afdm_effective_channel(chan, cfg)
    return otfs_effective_channel(chan, cfg)


def _modulate(x: np.ndarray, cfg) -> np.ndarray:
    return afdm_modulate(x, cfg) if isinstance(cfg, AfdmConfig) else otfs_modulate(x, cfg)


def _demodulate(r: np.ndarray, cfg) -> np.ndarray:
    return afdm_demodulate(r, cfg) if isinstance(cfg, AfdmConfig) else otfs_demodulate(r, cfg)


def _noise_variance(chan: ChannelMatrix, snr_db: float) -> float:
    # SNR is per-realization received symbol energy over noise:
    # E||H s||^2 / (N sigma^2) with unit-energy symbols.
    snr = 10.0 ** (snr_db / 10.0)
    fro2 = float(np.sum(np.abs(chan.matrix) ** 2))
    return fro2 / (chan.n * snr)


def _trial_paths(exp: Experiment, scenario: ScenarioConfig, rng: np.random.Generator) -> PathSet:
    if exp.paths is not None:
        return exp.paths
    return random_path_set(scenario, exp.num_paths, rng)


def _ber_trial(exp: Experiment, cfg, wi: int, si: int, trial: int, snr_db: float):
    rng = np.random.default_rng(np.random.SeedSequence([exp.seed, wi, si, trial]))
    scenario = exp.scenario
    paths = _trial_paths(exp, scenario, rng)
    chan = build_waveform_channel(paths, scenario, cfg)
    sigma2 = _noise_variance(chan, snr_db)
    const = constellation(exp.constellation)
    bits = rng.integers(0, 2, scenario.n * const.bits_per_symbol)
    x = map_bits(bits, const)
    s = _modulate(x, cfg)
    r = apply_channel(chan, s, NoiseModel(sigma2, seed=(exp.seed, wi, si, trial, 1)))
    y = _demodulate(r, cfg)
    h_eff = effective_channel(chan, cfg)
    x_hat = lmmse_equalize(h_eff, y, sigma2)
    bit_hat = demap(x_hat, const)
    return bits.size, count_bit_errors(bits, bit_hat)


def run_ber_sweep(exp: Experiment, threads: int | None = None) -> dict[str, list[DetectionReport]]:
    """Monte Carlo BER over the SNR grid; returns one report list per
    waveform."""
    workers = _threads(threads)
    const = constellation(exp.constellation)
    out: dict[str, list[DetectionReport]] = {}
    for wi, name in enumerate(exp.waveforms):
        cfg = waveform_config(name, exp.scenario, exp.otfs_rows)
        reports = []
        for si, snr_db in enumerate(exp.snr_grid_db):
            def one(trial: int, _si=si, _wi=wi, _snr=snr_db, _cfg=cfg):
                return _ber_trial(exp, _cfg, _wi, _si, trial, _snr)

            if workers > 1:
                with ThreadPoolExecutor(max_workers=workers) as pool:
                    counts = list(pool.map(one, range(exp.trials)))
            else:
                counts = [one(t) for t in range(exp.trials)]
            bits = sum(c[0] for c in counts)
            errors = sum(c[1] for c in counts)
            reports.append(
                DetectionReport(
                    snr_db=snr_db,
                    trials=exp.trials,
                    bits_total=bits,
                    bit_errors=errors,
                    esn0_db=snr_db,
                    ebn0_db=snr_db - 10 * math.log10(const.bits_per_symbol),
                )
            )
        out[name] = reports
    return out


def _sensing_trial(exp: Experiment, cfg, wi: int, si: int, trial: int, snr_db: float):
    rng = np.random.default_rng(np.random.SeedSequence([exp.seed, 1000 + wi, si, trial]))
    scenario = exp.scenario
    paths = _trial_paths(exp, scenario, rng)
    chan = build_waveform_channel(paths, scenario, cfg)
    sigma2 = _noise_variance(chan, snr_db)
    const = constellation(exp.constellation)
    bits = rng.integers(0, 2, scenario.n * const.bits_per_symbol)
    x = map_bits(bits, const)
    s = _modulate(x, cfg)
    r = apply_channel(chan, s, NoiseModel(sigma2, seed=(exp.seed, 1000 + wi, si, trial, 1)))
    y = _demodulate(r, cfg)
    problem = SensingProblem(
        received=y,
        transmitted=x,
        scenario=scenario,
        waveform_cfg=cfg,
        num_paths=exp.assumed_paths or exp.num_paths,
        refine_doppler=exp.refine_doppler,
    )
    return estimate_grid_sic(problem), paths


def run_sensing_sweep(
    exp: Experiment, threads: int | None = None
) -> dict[str, dict[float, list[tuple[EstimationResult, PathSet]]]]:
    """Estimator runs per waveform and SNR point; returns the raw
    (result, truth) pairs for metric aggregation and CSV emission."""
    workers = _threads(threads)
    out: dict[str, dict[float, list[tuple[EstimationResult, PathSet]]]] = {}
    for wi, name in enumerate(exp.waveforms):
        cfg = waveform_config(name, exp.scenario, exp.otfs_rows)
        per_snr = {}
        for si, snr_db in enumerate(exp.snr_grid_db):
            def one(trial: int, _si=si, _wi=wi, _snr=snr_db, _cfg=cfg):
                return _sensing_trial(exp, _cfg, _wi, _si, trial, _snr)

            if workers > 1:
                with ThreadPoolExecutor(max_workers=workers) as pool:
                    pairs = list(pool.map(one, range(exp.trials)))
            else:
                pairs = [one(t) for t in range(exp.trials)]
            per_snr[snr_db] = pairs
        out[name] = per_snr
    return out


def _ber_rows(reports: list[DetectionReport]) -> list[tuple]:
    return [
        (r.snr_db, r.esn0_db, r.ebn0_db, r.trials, r.bits_total, r.bit_errors, r.ber)
        for r in reports
    ]


def _sense_rows(per_snr: dict[float, list[tuple[EstimationResult, PathSet]]]) -> list[tuple]:
    rows = []
    for snr_db, pairs in per_snr.items():
        for trial, (result, truth) in enumerate(pairs):
            for k, true_path in enumerate(truth):
                est = result.paths[k] if k < len(result.paths) else None
                rows.append(
                    (
                        snr_db,
                        trial,
                        k,
                        true_path.delay,
                        true_path.doppler,
                        abs(true_path.gain),
                        est.delay if est else "",
                        est.doppler if est else "",
                        est.gain.real if est else "",
                        est.gain.imag if est else "",
                        result.residual,
                        result.search_evaluations,
                    )
                )
    return rows


def run_experiment(
    exp: Experiment,
    kinds: tuple[str, ...] = ("ber",),
    threads: int | None = None,
    render_figures: bool = True,
) -> dict:
    """Execute the requested sweeps and write the CSV/JSON artifacts plus
    a run manifest into the experiment's output directory.

    Deterministic given the configuration and master seed: reruns emit
    byte-identical CSV files.
    """
    exp.outputs.mkdir(parents=True, exist_ok=True)
    manifest = manifest_hash(exp.config_dict())
    artifacts: list[str] = []
    bundle: dict = {"manifest": manifest, "outputs": str(exp.outputs), "artifacts": artifacts}

    if "ber" in kinds:
        curves = run_ber_sweep(exp, threads)
        ber_columns = ["snr_db", "esn0_db", "ebn0_db", "trials", "bits", "errors", "ber"]
        payload = {}
        for name, reports in curves.items():
            path = exp.outputs / f"ber_{name}.csv"
            write_rows_csv(path, ber_columns, _ber_rows(reports), manifest)
            artifacts.append(path.name)
            payload[name] = [dict(zip(ber_columns, row)) for row in _ber_rows(reports)]
        write_json(exp.outputs / "ber.json", {"manifest": manifest, "curves": payload})
        artifacts.append("ber.json")
        bundle["ber"] = curves
        if render_figures:
            from .figures import save_ber_curves

            fig = save_ber_curves(
                {n: ([r.snr_db for r in rs], [r.ber for r in rs]) for n, rs in curves.items()},
                exp.outputs / "ber.png",
            )
            artifacts.append(fig.name)

    if "sense" in kinds:
        sweeps = run_sensing_sweep(exp, threads)
        sense_columns = [
            "snr_db",
            "trial",
            "path",
            "true_delay",
            "true_doppler",
            "true_gain_abs",
            "est_delay",
            "est_doppler",
            "est_gain_re",
            "est_gain_im",
            "residual",
            "evaluations",
        ]
        summary_rows = []
        all_truth_pts: list[tuple[float, float]] = []
        all_est_pts: list[tuple[float, float]] = []
        for name, per_snr in sweeps.items():
            path = exp.outputs / f"sense_{name}.csv"
            write_rows_csv(path, sense_columns, _sense_rows(per_snr), manifest)
            artifacts.append(path.name)
            for snr_db, pairs in per_snr.items():
                results = [p[0] for p in pairs]
                truths = [p[1] for p in pairs]
                report = sensing_metrics(results, truths, exp.scenario)
                summary_rows.append(
                    (
                        name,
                        snr_db,
                        len(pairs),
                        report.detection_rate,
                        report.delay_rmse_samples,
                        report.delay_rmse_m,
                        report.doppler_rmse_cycles,
                        report.doppler_rmse_mps,
                        report.misses,
                        report.false_alarms,
                    )
                )
                for res, tru in pairs:
                    all_truth_pts.extend((p.delay, p.doppler) for p in tru)
                    all_est_pts.extend((p.delay, p.doppler) for p in res.paths)
        summary_columns = [
            "waveform",
            "snr_db",
            "trials",
            "detection_rate",
            "delay_rmse_samples",
            "delay_rmse_m",
            "doppler_rmse_cycles",
            "doppler_rmse_mps",
            "misses",
            "false_alarms",
        ]
        write_rows_csv(exp.outputs / "sense_summary.csv", summary_columns, summary_rows, manifest)
        artifacts.append("sense_summary.csv")
        write_json(
            exp.outputs / "sense_summary.json",
            {
                "manifest": manifest,
                "summary": [dict(zip(summary_columns, row)) for row in summary_rows],
            },
        )
        artifacts.append("sense_summary.json")
        bundle["sense"] = sweeps
        if render_figures:
            from .figures import save_sensing_scatter

            fig = save_sensing_scatter(all_truth_pts, all_est_pts, exp.outputs / "sense.png")
            artifacts.append(fig.name)

    write_json(
        exp.outputs / "run_manifest.json",
        {
            "manifest": manifest,
            "version": __version__,
            "config": exp.config_dict(),
            "artifacts": sorted(artifacts),
        },
    )
    return bundle


def viz_channel(
    paths: PathSet,
    scenario: ScenarioConfig,
    representation: str,
    otfs_rows: int | None = None,
) -> tuple[np.ndarray, str, str]:
    """Magnitude grid for one channel representation.

    "tf": time-variant transfer function sampled on the frame (N x N).
    "dd": impulsive delay-Doppler support on the integer grid.
    "eff-otfs" / "eff-afdm": the effective-channel magnitude.
    Returns (values, axis1 name, axis2 name); axis1 indexes rows.
    """
    n = scenario.n
    if representation == "tf":
        times = np.arange(n) * scenario.sample_period
        freqs = np.arange(n) / scenario.frame_duration
        grid = transfer_function_grid(paths, scenario, times, freqs)
        return np.abs(grid), "time_s", "frequency_hz"
    if representation == "dd":
        m = int(math.ceil(scenario.max_doppler))
        values = np.zeros((scenario.max_delay + 1, 2 * m + 1))
        for delay, doppler, gain in delay_doppler_spread(paths):
            row = int(round(delay))
            col = int(round(doppler)) + m
            values[row, col] += abs(gain)
        return values, "delay_samples", "doppler_cycles_per_frame"
    if representation == "eff-otfs":
        cfg = waveform_config("otfs", scenario, otfs_rows)
        chan = build_waveform_channel(paths, scenario, cfg)
        return np.abs(otfs_effective_channel(chan, cfg)), "output_bin", "input_bin"
    if representation == "eff-afdm":
        cfg = waveform_config("afdm", scenario)
        chan = build_waveform_channel(paths, scenario, cfg)
        return np.abs(afdm_effective_channel(chan, cfg)), "output_bin", "input_bin"
    raise ValueError(
        f"unknown representation {representation!r}; choose from {VIZ_REPRESENTATIONS}"
    )
