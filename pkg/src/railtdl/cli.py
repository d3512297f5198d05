"""Command-line interface.

Subcommands: ``generate`` (config -> trace file), ``estimate`` (trace ->
model file), ``compare`` (traces -> RMS-delay-spread comparison report).
Every command writes a run manifest next to its primary output;
``railtdl --verify-manifest FILE`` re-derives the digests.

Exit codes: 0 success, 2 input/parse error, 3 validation/semantic error.
"""

import argparse
import json
import sys

import numpy as np

from . import baseline as bl
from . import stats
from .estimator import DEFAULT_SPEED_MPS, estimate_model, estimated_model_to_dict
from .generator import (AMPLITUDE_MODES, DEFAULT_CARRIER_HZ, DOPPLER_MODES,
                        GenConfig, generate)
from .manifest import manifest_path_for, verify_manifest, write_manifest
from .params import ParamValidationError, load_params, preset_5gr, validate
from .traceio import (TraceFormatError, atomic_write_bytes, read_trace,
                      write_trace, write_trace_text)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_INVALID = 3

CONFIG_SCHEMA_VERSION = 1

_COMMON_KEYS = {"schema_version", "model", "preset", "params_file",
                "n_snapshots", "seed", "snapshot_interval_s", "carrier_hz"}
_MARKOV_KEYS = _COMMON_KEYS | {"doppler_mode", "amplitude_mode"}
_BASELINE_KEYS = _COMMON_KEYS | {"doppler_model", "f_max_hz"}


class ConfigError(ValueError):
    """Config cannot be parsed or is structurally wrong (exit 2)."""


class SemanticError(ValueError):
    """Config parsed but a value is invalid (exit 3)."""


def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path}: line {exc.lineno}, column {exc.colno}: {exc.msg}")
    if not isinstance(cfg, dict):
        raise ConfigError(f"config {path}: top level must be an object")
    if cfg.get("schema_version") != CONFIG_SCHEMA_VERSION:
        raise ConfigError(
            f"config {path}: field schema_version must be {CONFIG_SCHEMA_VERSION}"
        )
    model = cfg.get("model", "markov")
    if model not in ("markov", "baseline"):
        raise ConfigError(f"config {path}: field model must be 'markov' or 'baseline'")
    allowed = _MARKOV_KEYS if model == "markov" else _BASELINE_KEYS
    unknown = set(cfg) - allowed
    if unknown:
        raise ConfigError(
            f"config {path}: unknown field(s) {sorted(unknown)}"
        )
    return cfg


def _base_params(cfg: dict):
    preset = cfg.get("preset")
    params_file = cfg.get("params_file")
    if (preset is None) == (params_file is None):
        raise ConfigError("config: exactly one of 'preset'/'params_file' is required")
    if preset is not None:
        if preset != "5gr":
            raise ConfigError(f"config: unknown preset {preset!r}")
        params = preset_5gr()
    else:
        try:
            params = load_params(params_file)
        except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
            raise ConfigError(f"params file {params_file}: {exc}")
    if "snapshot_interval_s" in cfg:
        from dataclasses import replace
        params = replace(params, snapshot_interval_s=cfg["snapshot_interval_s"])
    return params


def _require_seed(cfg: dict, override) -> int:
    seed = override if override is not None else cfg.get("seed")
    if seed is None:
        raise SemanticError("field seed: required (in config or via --seed)")
    if not isinstance(seed, int) or seed < 0:
        raise SemanticError(f"field seed: must be a nonnegative integer, got {seed!r}")
    return seed


def _require_n(cfg: dict) -> int:
    n = cfg.get("n_snapshots")
    if not isinstance(n, int) or n < 1:
        raise SemanticError(f"field n_snapshots: must be an integer >= 1, got {n!r}")
    return n


def cmd_generate(args) -> int:
    cfg = _load_config(args.config)
    n = _require_n(cfg)
    seed = _require_seed(cfg, args.seed)
    params = _base_params(cfg)
    carrier = cfg.get("carrier_hz", DEFAULT_CARRIER_HZ)

    if cfg.get("model", "markov") == "markov":
        violations = validate(params)
        if violations:
            raise ParamValidationError(violations)
        gen_cfg = GenConfig(
            n_snapshots=n,
            rng_seed=seed,
            doppler_mode=cfg.get("doppler_mode", "redrawn-per-birth"),
            amplitude_mode=cfg.get("amplitude_mode", "power-scaled-lognormal"),
            carrier_hz=carrier,
        )
        if gen_cfg.doppler_mode not in DOPPLER_MODES:
            raise SemanticError(f"field doppler_mode: must be one of {DOPPLER_MODES}")
        if gen_cfg.amplitude_mode not in AMPLITUDE_MODES:
            raise SemanticError(f"field amplitude_mode: must be one of {AMPLITUDE_MODES}")
        trace = generate(params, gen_cfg)
    else:
        profile = bl.profile_from_params(params, cfg.get("doppler_model", "uniform"))
        f_max = cfg.get("f_max_hz", params.max_doppler_hz)
        trace = bl.generate_stationary(
            profile, f_max, n, seed,
            snapshot_interval_s=params.snapshot_interval_s,
            carrier_hz=carrier,
            delay_resolution_s=params.delay_resolution_s,
        )

    if args.format == "text":
        write_trace_text(trace, args.out)
    else:
        write_trace(trace, args.out)
    inputs = [args.config] + ([cfg["params_file"]] if cfg.get("params_file") else [])
    write_manifest(manifest_path_for(args.out), "generate", cfg | {"seed": seed},
                   [seed], inputs, [args.out])
    print(f"wrote {trace.n_snapshots}x{trace.n_taps} trace to {args.out}")
    return EXIT_OK


def cmd_estimate(args) -> int:
    trace = read_trace(args.trace)
    try:
        model = estimate_model(trace, threshold_db=args.threshold_db,
                               speed_mps=args.speed_kmh / 3.6)
    except ValueError as exc:
        raise SemanticError(str(exc))
    payload = json.dumps(estimated_model_to_dict(model), indent=2) + "\n"
    atomic_write_bytes(args.out, payload.encode())
    write_manifest(
        manifest_path_for(args.out), "estimate",
        {"trace": args.trace, "threshold_db": args.threshold_db,
         "speed_kmh": args.speed_kmh},
        [int(trace.meta.rng_seed)], [args.trace], [args.out],
    )
    print(f"estimated {model.params.n_taps}-tap model written to {args.out}")
    return EXIT_OK


def _trace_summary(path: str, trace, series: np.ndarray) -> dict:
    finite = series[~np.isnan(series)]
    occ = (trace.gains != 0).mean(axis=0)
    return {
        "path": path,
        "n_snapshots": trace.n_snapshots,
        "n_taps": trace.n_taps,
        "occupancy": [float(x) for x in occ],
        "rms_ds_windows": int(finite.size),
        "rms_ds_mean_s": float(finite.mean()) if finite.size else None,
        "rms_ds_std_s": float(finite.std()) if finite.size else None,
        "rms_ds_var_s2": float(finite.var()) if finite.size else None,
    }


def _write_histogram(path: str, pdf: stats.EmpiricalPdf) -> None:
    lines = ["# bin_edge_lo\tbin_edge_hi\tdensity"]
    for lo, hi, d in zip(pdf.bin_edges[:-1], pdf.bin_edges[1:], pdf.densities):
        lines.append(f"{lo!r}\t{hi!r}\t{d!r}")
    atomic_write_bytes(path, ("\n".join(lines) + "\n").encode())


def cmd_compare(args) -> int:
    traces = []
    for p in args.traces:
        traces.append((p, read_trace(p)))

    grid = traces[0][1].delays_s
    for p, tr in traces[1:]:
        if tr.n_taps != grid.size or not np.array_equal(tr.delays_s, grid):
            raise SemanticError(f"trace {p}: delay grid differs from {traces[0][0]}")

    summaries = []
    normalized = []
    hist_paths = []
    for i, (p, tr) in enumerate(traces):
        if args.window > tr.n_snapshots:
            raise SemanticError(
                f"trace {p}: window {args.window} exceeds {tr.n_snapshots} snapshots"
            )
        series = stats.rms_ds_series(tr, args.window, args.threshold_db)
        finite = series[~np.isnan(series)]
        if finite.size == 0:
            raise SemanticError(f"trace {p}: no window yields a defined RMS DS")
        norm = finite / finite.mean()
        normalized.append(norm)
        summaries.append(_trace_summary(p, tr, series))
        pdf = stats.empirical_pdf(norm, args.bins)
        hist = f"{args.out}.{i}.hist.tsv"
        _write_histogram(hist, pdf)
        hist_paths.append(hist)

    pairwise = []
    for i in range(len(traces)):
        for j in range(i + 1, len(traces)):
            d = stats.distribution_distance(normalized[i], normalized[j])
            pairwise.append({
                "a": traces[i][0], "b": traces[j][0],
                "ks_stat": d.ks_stat,
                "mean_diff": d.mean_diff,
                "std_diff": d.std_diff,
            })

    report = {
        "window_len": args.window,
        "threshold_db": args.threshold_db,
        "bins": args.bins,
        "normalization": "per-trace sample mean of the RMS DS series",
        "traces": summaries,
        "pairwise_normalized_rms_ds": pairwise,
        "histograms": hist_paths,
    }
    report_path = f"{args.out}.report.json"
    atomic_write_bytes(report_path, (json.dumps(report, indent=2) + "\n").encode())
    write_manifest(
        manifest_path_for(report_path), "compare",
        {"traces": list(args.traces), "window": args.window,
         "threshold_db": args.threshold_db, "bins": args.bins},
        [], list(args.traces), [report_path] + hist_paths,
    )

    for s in summaries:
        occ = " ".join(f"{o:.3f}" for o in s["occupancy"])
        print(f"{s['path']}: occupancy [{occ}], "
              f"rms_ds mean {s['rms_ds_mean_s']:.3e} s, "
              f"var {s['rms_ds_var_s2']:.3e} s^2")
    for pw in pairwise:
        print(f"ks({pw['a']}, {pw['b']}) = {pw['ks_stat']:.4f}")
    print(f"report written to {report_path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="railtdl",
        description="Non-stationary Markov TDL channel simulator and estimator",
    )
    parser.add_argument("--verify-manifest", metavar="FILE",
                        help="re-derive digests of a run manifest and exit")
    sub = parser.add_subparsers(dest="command")

    g = sub.add_parser("generate", help="synthesize a channel trace")
    g.add_argument("--config", required=True, help="JSON run config")
    g.add_argument("--seed", type=int, default=None, help="override config seed")
    g.add_argument("--out", required=True, help="output trace path")
    g.add_argument("--format", choices=("bin", "text"), default="bin")

    e = sub.add_parser("estimate", help="recover model parameters from a trace")
    e.add_argument("trace", help="input trace file")
    e.add_argument("--out", required=True, help="output model JSON path")
    e.add_argument("--threshold-db", type=float, default=6.0)
    e.add_argument("--speed-kmh", type=float, default=DEFAULT_SPEED_MPS * 3.6,
                   help="receiver speed used for the Doppler bound")

    c = sub.add_parser("compare", help="compare RMS delay spread distributions")
    c.add_argument("traces", nargs="+", help="two or more trace files")
    c.add_argument("--out", default="compare", help="output prefix")
    c.add_argument("--threshold-db", type=float, default=6.0)
    c.add_argument("--bins", type=int, default=50, help="histogram bin count")
    c.add_argument("--window", type=int, default=100,
                   help="snapshots per RMS DS window")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.verify_manifest:
            problems = verify_manifest(args.verify_manifest)
            if problems:
                for p in problems:
                    print(f"manifest mismatch: {p}", file=sys.stderr)
                return EXIT_INVALID
            print(f"manifest ok: {args.verify_manifest}")
            return EXIT_OK
        if args.command is None:
            parser.print_usage(sys.stderr)
            return EXIT_PARSE
        if args.command == "generate":
            return cmd_generate(args)
        if args.command == "estimate":
            return cmd_estimate(args)
        if args.command == "compare":
            if len(args.traces) < 2:
                raise SemanticError("compare needs at least two traces")
            return cmd_compare(args)
        raise AssertionError(args.command)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except TraceFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ParamValidationError as exc:
        for v in exc.violations:
            print(f"invalid parameters: {v}", file=sys.stderr)
        return EXIT_INVALID
    except SemanticError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
