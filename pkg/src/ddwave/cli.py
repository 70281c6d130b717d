"""Command-line interface.

Subcommands: viz-channel, ber, sense, compare, diversity-probe, overhead.
Each reads an optional JSON config (--config) with flag overrides and
writes CSV results (plus JSON mirrors and PNG figures unless
--no-figures) into the output directory.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
DDWAVE_THREADS caps trial-level parallelism.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path as FsPath

import numpy as np

from .afdm import AfdmConfig
from .analysis import (
    balanced_grid,
    comparison_table,
    default_guard_policy,
    diversity_probe,
    guard_overhead,
)
from .channel import Path, PathSet, ScenarioConfig, random_path_set
from .detection import EqualizationError
from .experiments import (
    VIZ_REPRESENTATIONS,
    Experiment,
    run_experiment,
    viz_channel,
    waveform_config,
)
from .otfs import OtfsConfig
from .reporting import manifest_hash, write_heatmap_csv, write_json, write_rows_csv

_NUMERICAL_ERRORS = (EqualizationError, np.linalg.LinAlgError, FloatingPointError, ZeroDivisionError)


class ConfigError(ValueError):
    pass


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config file must hold a JSON object")
    return cfg


def _parse_snr(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise ConfigError(f"bad --snr list {text!r}") from exc


def _paths_from_config(raw) -> PathSet:
    try:
        paths = []
        for item in raw:
            gain = item["gain"]
            gain = complex(gain[0], gain[1]) if isinstance(gain, (list, tuple)) else complex(gain)
            paths.append(Path(gain, float(item["delay"]), float(item["doppler"])))
        return PathSet(tuple(paths))
    except (KeyError, TypeError, IndexError, ValueError) as exc:
        raise ConfigError(f"bad paths specification: {exc}") from exc


def _scenario(cfg: dict, args) -> ScenarioConfig:
    n = args.n or cfg.get("n", 64)
    try:
        return ScenarioConfig(
            n=int(n),
            carrier_hz=float(cfg.get("carrier_hz", 5.9e9)),
            bandwidth_hz=float(cfg.get("bandwidth_hz", 10e6)),
            max_delay=int(cfg.get("max_delay", 3)),
            max_doppler=float(cfg.get("max_doppler", 2.0)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _waveforms(cfg: dict, args) -> tuple[str, ...]:
    if getattr(args, "waveform", None):
        return (args.waveform,) if args.waveform != "both" else ("afdm", "otfs")
    names = cfg.get("waveforms", ["afdm", "otfs"])
    return tuple(names)


def _experiment(cfg: dict, args) -> Experiment:
    scenario = _scenario(cfg, args)
    paths = _paths_from_config(cfg["paths"]) if "paths" in cfg else None
    snr = _parse_snr(args.snr) if args.snr else cfg.get("snr_db", [0, 5, 10, 15, 20])
    try:
        return Experiment(
            scenario=scenario,
            waveforms=_waveforms(cfg, args),
            snr_grid_db=tuple(float(s) for s in snr),
            trials=int(args.trials or cfg.get("trials", 100)),
            seed=int(args.seed if args.seed is not None else cfg.get("seed", 1)),
            outputs=FsPath(args.out or cfg.get("out", "results")),
            constellation=cfg.get("constellation", "qpsk"),
            num_paths=int(cfg.get("num_paths", 3)),
            paths=paths,
            otfs_rows=cfg.get("otfs_rows"),
            refine_doppler=bool(cfg.get("refine_doppler", False)),
            assumed_paths=cfg.get("assumed_paths"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _cmd_ber(args) -> int:
    cfg = _load_config(args.config)
    exp = _experiment(cfg, args)
    bundle = run_experiment(exp, kinds=("ber",), render_figures=not args.no_figures)
    for name, reports in bundle["ber"].items():
        for r in reports:
            print(f"{name} snr={r.snr_db:g}dB ber={r.ber:.3e} ({r.bit_errors}/{r.bits_total})")
    print(f"artifacts in {bundle['outputs']} (manifest {bundle['manifest']})")
    return 0


def _cmd_sense(args) -> int:
    cfg = _load_config(args.config)
    exp = _experiment(cfg, args)
    if args.refine:
        exp.refine_doppler = True
    bundle = run_experiment(exp, kinds=("sense",), render_figures=not args.no_figures)
    print(f"artifacts in {bundle['outputs']} (manifest {bundle['manifest']})")
    return 0


def _cmd_viz_channel(args) -> int:
    cfg = _load_config(args.config)
    exp = _experiment(cfg, args)
    scenario = exp.scenario
    if exp.paths is not None:
        paths = exp.paths
    else:
        rng = np.random.default_rng(np.random.SeedSequence([exp.seed, 42]))
        paths = random_path_set(scenario, exp.num_paths, rng)
    out = exp.outputs
    out.mkdir(parents=True, exist_ok=True)
    manifest = manifest_hash({**exp.config_dict(), "representation": args.representation})
    values, axis1, axis2 = viz_channel(paths, scenario, args.representation, exp.otfs_rows)
    csv_path = write_heatmap_csv(
        out / f"channel_{args.representation}.csv", values, axis1, axis2, manifest
    )
    print(f"wrote {csv_path}")
    if not args.no_figures:
        from .figures import save_heatmap

        png = save_heatmap(
            values,
            csv_path.with_suffix(".png"),
            title=f"{args.representation} representation",
            xlabel=axis2,
            ylabel=axis1,
            db=args.representation.startswith("eff-"),
        )
        print(f"wrote {png}")
    return 0


def _cmd_compare(args) -> int:
    cfg = _load_config(args.config)
    exp = _experiment(cfg, args)
    scenario = exp.scenario
    if exp.paths is not None:
        paths = exp.paths
    else:
        rng = np.random.default_rng(np.random.SeedSequence([exp.seed, 43]))
        paths = random_path_set(scenario, exp.num_paths, rng)
    rows = comparison_table(scenario, paths, n_complexity=int(cfg.get("n_complexity", 1024)))
    out = exp.outputs
    out.mkdir(parents=True, exist_ok=True)
    manifest = manifest_hash(exp.config_dict())
    csv_path = write_rows_csv(
        out / "comparison.csv",
        ["property", "afdm", "otfs"],
        [(r.property_name, r.afdm, r.otfs) for r in rows],
        manifest,
    )
    width = max(len(r.property_name) for r in rows)
    for r in rows:
        print(f"{r.property_name:<{width}}  AFDM: {r.afdm}  |  OTFS: {r.otfs}")
    print(f"wrote {csv_path}")
    if not args.no_figures:
        from .experiments import build_waveform_channel, effective_channel
        from .figures import save_heatmap_pair

        cfg_a = waveform_config("afdm", scenario)
        cfg_o = waveform_config("otfs", scenario, exp.otfs_rows)
        eff_a = effective_channel(build_waveform_channel(paths, scenario, cfg_a), cfg_a)
        eff_o = effective_channel(build_waveform_channel(paths, scenario, cfg_o), cfg_o)
        png = save_heatmap_pair(
            np.abs(eff_o),
            np.abs(eff_a),
            out / "comparison_effective_channels.png",
            "OTFS effective channel",
            "AFDM effective channel",
        )
        print(f"wrote {png}")
    return 0


def _cmd_diversity_probe(args) -> int:
    cfg = _load_config(args.config)
    n = int(args.n or cfg.get("n", 8))
    scenario = ScenarioConfig(
        n=n,
        carrier_hz=float(cfg.get("carrier_hz", 5.9e9)),
        bandwidth_hz=float(cfg.get("bandwidth_hz", 10e6)),
        max_delay=int(cfg.get("max_delay", 1)),
        max_doppler=float(cfg.get("max_doppler", 1.0)),
    )
    if "paths" in cfg:
        paths = _paths_from_config(cfg["paths"])
    else:
        paths = PathSet((Path(1.0, 0.0, 0.0), Path(1.0, 1.0, 0.0)), integer_mode=True)
    const = cfg.get("constellation", "bpsk")
    out = FsPath(args.out or cfg.get("out", "results"))
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for name in _waveforms(cfg, args):
        wf_cfg = (
            AfdmConfig.with_auto_c1(n, int(math.floor(scenario.max_doppler)))
            if name == "afdm"
            else OtfsConfig(*balanced_grid(n, cfg.get("otfs_rows")))
        )
        try:
            result = diversity_probe(
                wf_cfg,
                scenario,
                const,
                paths,
                max_patterns=int(cfg.get("max_patterns", 250_000)),
                allow_subsample=bool(cfg.get("allow_subsample", False)),
                seed=int(args.seed if args.seed is not None else cfg.get("seed", 0)),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        witness = " ".join(format(complex(w), "g") for w in result.witness)
        rows.append(
            (name, result.min_rank, result.patterns_evaluated, result.exhaustive, witness)
        )
        print(
            f"{name}: min rank {result.min_rank} over {result.patterns_evaluated} "
            f"difference patterns ({'exhaustive' if result.exhaustive else 'subsampled'})"
        )
    csv_path = write_rows_csv(
        out / "diversity_probe.csv",
        ["waveform", "min_rank", "patterns", "exhaustive", "witness"],
        rows,
        manifest_hash({"n": n, "paths": str(paths), "constellation": const}),
    )
    print(f"wrote {csv_path}")
    return 0


def _cmd_overhead(args) -> int:
    cfg = _load_config(args.config)
    n = int(args.n or cfg.get("n", 64))
    max_delay = int(cfg.get("max_delay", 2))
    max_doppler = int(cfg.get("max_doppler", 1))
    policy = default_guard_policy(max_delay, max_doppler)
    rows_cfg = cfg.get("otfs_rows")
    k, l = balanced_grid(n, rows_cfg)
    out = FsPath(args.out or cfg.get("out", "results"))
    out.mkdir(parents=True, exist_ok=True)
    try:
        ov_a = guard_overhead("afdm", n, policy)
        ov_o = guard_overhead("otfs", n, policy, rows=k, cols=l)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    rows = [
        ("afdm", n, policy.width_1d, "", "", ov_a),
        ("otfs", n, "", policy.guard_delay, policy.guard_doppler, ov_o),
    ]
    csv_path = write_rows_csv(
        out / "overhead.csv",
        ["waveform", "n", "width_1d", "guard_delay", "guard_doppler", "overhead"],
        rows,
        manifest_hash({"n": n, "max_delay": max_delay, "max_doppler": max_doppler}),
    )
    print(f"afdm overhead: {ov_a:.4f}   otfs overhead: {ov_o:.4f}")
    print(f"wrote {csv_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ddwave",
        description="Doubly-dispersive waveform simulation and comparison toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, snr: bool = True):
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--n", type=int, help="frame length override")
        p.add_argument("--trials", type=int, help="Monte Carlo trials override")
        p.add_argument("--seed", type=int, help="master seed override")
        p.add_argument(
            "--waveform", choices=["afdm", "otfs", "both"], help="waveform selection override"
        )
        p.add_argument("--out", help="output directory")
        p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
        if snr:
            p.add_argument("--snr", help="comma-separated SNR grid in dB")

    p = sub.add_parser("viz-channel", help="export channel representation heatmaps")
    common(p)
    p.add_argument(
        "--representation",
        required=True,
        choices=list(VIZ_REPRESENTATIONS),
        help="which representation to export",
    )
    p.set_defaults(fn=_cmd_viz_channel)

    p = sub.add_parser("ber", help="Monte Carlo BER sweep")
    common(p)
    p.set_defaults(fn=_cmd_ber)

    p = sub.add_parser("sense", help="delay-Doppler estimation sweep")
    common(p)
    p.add_argument("--refine", action="store_true", help="golden-section Doppler refinement")
    p.set_defaults(fn=_cmd_sense)

    p = sub.add_parser("compare", help="emit the waveform comparison table")
    common(p)
    p.set_defaults(fn=_cmd_compare)

    p = sub.add_parser("diversity-probe", help="exhaustive diversity-order probe")
    common(p, snr=False)
    p.set_defaults(fn=_cmd_diversity_probe)

    p = sub.add_parser("overhead", help="pilot guard overhead per waveform")
    common(p, snr=False)
    p.set_defaults(fn=_cmd_overhead)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    # LinAlgError subclasses ValueError, so numerical failures go first.
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (ValueError, KeyError, TypeError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
