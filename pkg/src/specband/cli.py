"""Command-line front end.

Subcommands: estimate, bands, depmeasure, simulate, verify, kernel-info.
All structured output is JSON with a schema_version field and an echo of the
fully resolved configuration; series and plot data travel as CSV.

Exit codes: 0 success, 1 domain errors (bad data, unsupported model), 2
usage errors (bad flags or plan validation).
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys

import numpy as np

from . import __version__
from .acov import sample_autocov
from .dependence import check_conditions, profile
from .errors import InvalidLevel, InvalidPlan, SpecbandError
from .inference import pointwise_ci, uniform_band
from .kernels import get_kernel, kernel_names, tabulated_kernel
from .mc import ExperimentPlan, run_experiment
from .models import parse_model, simulate
from .series import center, load_csv, write_csv
from .spectral import Bandwidth, estimate_spectrum, theorem_grid

log = logging.getLogger("specband")

SCHEMA_VERSION = 1


class UsageError(Exception):
    pass


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _sanitize(obj):
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def _emit(payload: dict, path: str | None):
    payload = {"schema_version": SCHEMA_VERSION, **_sanitize(payload)}
    text = json.dumps(payload, sort_keys=True, default=_json_default) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        log.info("wrote %s", path)
    else:
        sys.stdout.write(text)


def _resolve_kernel(name: str):
    if name.startswith("file:"):
        return tabulated_kernel(name[5:])
    return get_kernel(name)


def _load_centered(path: str, has_header: bool):
    return center(load_csv(path, has_header=has_header))


def _parse_grid(spec: str, bandwidth: Bandwidth):
    if spec == "theorem":
        return theorem_grid(bandwidth)
    if spec.startswith("uniform:"):
        count = int(spec.split(":", 1)[1])
        if count < 2:
            raise UsageError("uniform grid needs at least 2 points")
        return np.linspace(0.0, np.pi, count)
    raise UsageError(f"unknown grid {spec!r} (use theorem or uniform:<count>)")


def _parse_entries(spec: str, n: int):
    if spec == "all":
        return [(i, j) for i in range(n) for j in range(i, n)]
    if spec == "diag":
        return [(i, i) for i in range(n)]
    entries = []
    for token in spec.split(";"):
        token = token.strip()
        if not token:
            continue
        try:
            i_s, j_s = token.split(",")
            i, j = int(i_s) - 1, int(j_s) - 1
        except ValueError:
            raise UsageError(f"bad entry {token!r}; use i,j with 1-based indices")
        if not (0 <= i < n and 0 <= j < n):
            raise UsageError(f"entry {token!r} outside 1..{n}")
        entries.append((i, j))
    if not entries:
        raise UsageError("no entries selected")
    return entries


def _cmd_estimate(args) -> int:
    series = _load_centered(args.input, args.has_header)
    kernel = _resolve_kernel(args.kernel)
    bandwidth = Bandwidth(series.t_len, args.b_exponent, args.c_const)
    freqs = _parse_grid(args.grid, bandwidth)
    acov = sample_autocov(series, min(bandwidth.value, series.t_len - 1))
    grid = estimate_spectrum(acov, kernel, bandwidth, freqs)
    payload = grid.to_dict()
    payload["config"] = {
        "input": args.input,
        "kernel": args.kernel,
        "b_exponent": args.b_exponent,
        "c_const": args.c_const,
        "grid": args.grid,
        "centered": True,
    }
    _emit(payload, args.output)
    return 0


def _cmd_bands(args) -> int:
    series = _load_centered(args.input, args.has_header)
    kernel = _resolve_kernel(args.kernel)
    bandwidth = Bandwidth(series.t_len, args.b_exponent, args.c_const)
    freqs = theorem_grid(bandwidth)
    acov = sample_autocov(series, min(bandwidth.value, series.t_len - 1))
    grid = estimate_spectrum(acov, kernel, bandwidth, freqs)
    entries = _parse_entries(args.entries, series.n_dim)
    config = {
        "input": args.input,
        "kernel": args.kernel,
        "level": args.level,
        "entries": args.entries,
        "method": args.method,
        "bonferroni": args.bonferroni,
        "assume_smooth": args.assume_smooth,
        "b_exponent": args.b_exponent,
        "c_const": args.c_const,
    }
    if args.method == "uniform":
        band = uniform_band(grid, kernel, args.level, entries, args.bonferroni)
        payload = band.to_dict()
    else:
        out = []
        for i, j in entries:
            lowers, uppers = [], []
            for freq in freqs:
                lo, hi = pointwise_ci(grid, kernel, args.level, (i, j), float(freq))
                lowers.append(lo)
                uppers.append(hi)
            out.append(
                {
                    "i": i + 1,
                    "j": j + 1,
                    "freqs": [float(f) for f in freqs],
                    "estimate_re": [float(v) for v in grid.entry(i, j).real],
                    "estimate_im": [float(v) for v in grid.entry(i, j).imag],
                    "lower": lowers,
                    "upper": uppers,
                }
            )
        payload = {
            "level": args.level,
            "method": "clt_pointwise",
            "bonferroni_m": 1,
            "entries": out,
        }
    target = "true_spectrum" if args.assume_smooth else "expected_smoothed_spectrum"
    payload["target"] = target
    if args.assume_smooth:
        q, _ = kernel.q_exponent, kernel.k_q
        check = args.b_exponent * (q + 1.0) > 1.0 if math.isfinite(q) else True
        payload["undersmoothing_check"] = {
            "b_exponent_times_q_plus_1_gt_1": bool(check),
            "q": q if math.isfinite(q) else "inf",
        }
        print(
            f"undersmoothing check b*(q+1) > 1: {'ok' if check else 'VIOLATED'}",
            file=sys.stderr,
        )
    payload["config"] = config
    _emit(payload, args.output)
    return 0


def _cmd_simulate(args) -> int:
    model = parse_model(args.model)
    series = simulate(model, args.t_len, args.seed)
    write_csv(series, args.out)
    meta = {
        "model": args.model,
        "t_len": args.t_len,
        "seed": args.seed,
        "out": args.out,
        "n_dim": series.n_dim,
    }
    if args.meta:
        _emit(meta, args.meta)
    else:
        _emit(meta, None)
    return 0


def _cmd_depmeasure(args) -> int:
    model = parse_model(args.model)
    prof = profile(model, args.p, args.horizon, args.reps, args.seed)
    payload = prof.to_dict()
    payload["model"] = args.model
    payload["seed"] = args.seed
    if args.check_conditions:
        report = check_conditions(
            prof,
            p=args.p,
            b=args.b_exponent_upper,
            b_lower=args.b_exponent_lower,
            delta_param=args.delta_param,
            independent_components=args.independent_components,
        )
        payload["conditions"] = report.to_dict()
    _emit(payload, args.output)
    return 0


def _cmd_verify(args) -> int:
    plan = ExperimentPlan(
        experiment=args.experiment.replace("-", "_"),
        model_spec=args.model,
        kernel_name=args.kernel,
        t_grid=tuple(int(t) for t in args.t_grid.split(",")),
        b_exponent=args.b_exponent,
        c_const=args.c_const,
        reps=args.reps,
        seed=args.seed,
        entry=tuple(int(v) - 1 for v in args.entry.split(",")),
        level=args.level,
        nu_star=args.nu_star,
        nu=args.nu,
        workers=args.threads,
        keep_raw=not args.no_raw,
    )
    report = run_experiment(plan)
    text = report.to_json(include_raw=not args.no_raw)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.plot_data:
        with open(args.plot_data, "w", encoding="utf-8") as fh:
            fh.write("experiment,T,statistic,value,se\n")
            for exp, t_val, key, value, se in report.plot_rows():
                se_txt = "" if se is None else repr(se)
                fh.write(f"{exp},{t_val},{key},{value!r},{se_txt}\n")
    for name, ok in sorted(report.verdicts.items()):
        print(f"[{'PASS' if ok else 'FAIL'}] {name}", file=sys.stderr)
    return 0


def _cmd_kernel_info(args) -> int:
    kernel = _resolve_kernel(args.kernel)
    q, k_q = kernel.q_exponent, kernel.k_q
    payload = {
        "name": kernel.name,
        "kappa": kernel.kappa,
        "q": q if math.isfinite(q) else "inf",
        "k_q": k_q,
        "psd_guarantee": kernel.psd_guarantee,
        "note": kernel.note,
    }
    _emit(payload, args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specband",
        description="lag-window spectral estimation with confidence bands",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument(
        "--log-level", default="warning", choices=["debug", "info", "warning", "error"]
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_kernel_flags(p):
        p.add_argument("--kernel", default="bartlett",
                      help="bartlett|parzen|tukey|truncated|file:<path>")
        p.add_argument("--b-exponent", type=float, default=0.4)
        p.add_argument("--c-const", type=float, default=1.0)

    p_est = sub.add_parser("estimate", help="estimate the spectral matrix")
    p_est.add_argument("--input", required=True)
    p_est.add_argument("--has-header", action="store_true")
    add_kernel_flags(p_est)
    p_est.add_argument("--grid", default="theorem", help="theorem or uniform:<count>")
    p_est.add_argument("--output", default=None)
    p_est.set_defaults(func=_cmd_estimate)

    p_bands = sub.add_parser("bands", help="confidence bands for spectral entries")
    p_bands.add_argument("--input", required=True)
    p_bands.add_argument("--has-header", action="store_true")
    add_kernel_flags(p_bands)
    p_bands.add_argument("--level", type=float, default=0.95)
    p_bands.add_argument("--entries", default="all", help="all|diag|i,j;i,j;...")
    p_bands.add_argument("--method", default="uniform", choices=["uniform", "pointwise"])
    p_bands.add_argument("--bonferroni", action="store_true")
    p_bands.add_argument("--assume-smooth", action="store_true")
    p_bands.add_argument("--output", default=None)
    p_bands.set_defaults(func=_cmd_bands)

    p_sim = sub.add_parser("simulate", help="draw a series from a model")
    p_sim.add_argument("--model", required=True)
    p_sim.add_argument("--t-len", type=int, required=True)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--out", required=True)
    p_sim.add_argument("--meta", default=None, help="optional metadata JSON path")
    p_sim.set_defaults(func=_cmd_simulate)

    p_dep = sub.add_parser("depmeasure", help="coupled dependence measures")
    p_dep.add_argument("--model", required=True)
    p_dep.add_argument("--p", type=float, default=4.0)
    p_dep.add_argument("--horizon", type=int, default=30)
    p_dep.add_argument("--reps", type=int, default=5000)
    p_dep.add_argument("--seed", type=int, default=0)
    p_dep.add_argument("--check-conditions", action="store_true")
    p_dep.add_argument("--delta-param", type=float, default=1.0)
    p_dep.add_argument("--b-exponent-lower", type=float, default=0.2)
    p_dep.add_argument("--b-exponent-upper", type=float, default=0.4)
    p_dep.add_argument("--independent-components", action="store_true")
    p_dep.add_argument("--report", default="json", choices=["json"])
    p_dep.add_argument("--output", default=None)
    p_dep.set_defaults(func=_cmd_depmeasure)

    p_ver = sub.add_parser("verify", help="Monte Carlo limit-theorem checks")
    p_ver.add_argument(
        "--experiment",
        required=True,
        choices=["clt", "gumbel", "moments", "uniform-rate", "bias-rate", "coverage"],
    )
    p_ver.add_argument("--model", default="white")
    add_kernel_flags(p_ver)
    p_ver.add_argument("--t-grid", default="4096,16384,65536")
    p_ver.add_argument("--reps", type=int, default=500)
    p_ver.add_argument("--seed", type=int, default=1)
    p_ver.add_argument("--entry", default="1,1", help="1-based i,j")
    p_ver.add_argument("--level", type=float, default=0.95)
    p_ver.add_argument("--nu-star", type=float, default=1.0)
    p_ver.add_argument("--nu", type=float, default=2.0)
    p_ver.add_argument("--threads", type=int, default=1)
    p_ver.add_argument("--no-raw", action="store_true")
    p_ver.add_argument("--out", default=None)
    p_ver.add_argument("--plot-data", default=None)
    p_ver.set_defaults(func=_cmd_verify)

    p_ki = sub.add_parser("kernel-info", help="kernel metadata")
    p_ki.add_argument("--kernel", required=True)
    p_ki.add_argument("--output", default=None)
    p_ki.set_defaults(func=_cmd_kernel_info)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level.upper())
    try:
        return args.func(args)
    except (UsageError, InvalidLevel, InvalidPlan, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except SpecbandError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
