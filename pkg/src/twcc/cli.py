"""Command-line interface.

Subcommands: ``sample`` (draw variates to an angle CSV), ``fit`` (fit an
angle CSV, optionally with bootstrap intervals), ``grid`` (export a
conditional-density grid for external contour plotting), and ``simulate``
(replicated simulation studies summarized into a table).

Angle CSVs carry a header ``u1,u2,u3`` (aliases ``phi,psi,omega`` accepted)
and decimal radians; ``--degrees`` converts on ingest and values outside
[0, 2*pi) are reduced with a warning. All commands are deterministic under a
fixed ``--seed``, including parallel runs.

Exit codes: 0 success, 2 input/parse error, 3 fit failure, 4 invalid
parameters.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .analytics import corr_coefficients, modes
from .density import conditional_pair_given_one
from .errors import ParameterError, TwccError
from .estimation import (
    FitConfig,
    bootstrap_ci,
    circular_center,
    fit_mle,
    log_likelihood,
)
from .numerics import TWO_PI, wrap_angle
from .params import PAIRS, RhoParams
from .sampling import AngleSample, RngState, sample_twcc

_FORMAT_TAG = "twcc-fit-report/1"


class _InputError(Exception):
    """Raised for unreadable or malformed input files (exit code 2)."""


def _fmt(x):
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


# ---------------------------------------------------------------------------
# angle CSV input/output
# ---------------------------------------------------------------------------

_HEADERS = (("u1", "u2", "u3"), ("phi", "psi", "omega"))


def read_angle_csv(path, degrees=False):
    """Read an angle CSV into an (n, 3) array of radians in [0, 2*pi)."""
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise _InputError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise _InputError(f"{path}: empty file (expected a header row)") from None
        cols = tuple(h.strip().lower() for h in header[:3])
        if cols not in _HEADERS:
            raise _InputError(
                f"{path}: header must be u1,u2,u3 or phi,psi,omega, got {','.join(cols)}"
            )
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < 3:
                raise _InputError(f"{path}: row {lineno}: expected 3 columns")
            try:
                rows.append([float(c) for c in row[:3]])
            except ValueError:
                raise _InputError(
                    f"{path}: row {lineno}: non-numeric value {row!r}"
                ) from None
    arr = np.asarray(rows, dtype=float).reshape(-1, 3)
    if degrees:
        arr = np.deg2rad(arr)
    outside = int(np.count_nonzero((arr < 0.0) | (arr >= TWO_PI)))
    if outside:
        print(
            f"warning: {outside} value(s) outside [0, 2*pi) reduced on ingest",
            file=sys.stderr,
        )
    return wrap_angle(arr)


def write_angle_csv(path, angles):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("u1", "u2", "u3"))
        for row in np.atleast_2d(angles):
            writer.writerow([repr(float(v)) for v in row])


# ---------------------------------------------------------------------------
# fit report rendering and parsing
# ---------------------------------------------------------------------------

def build_report(fit, sample, boot=None):
    """Assemble the fit report as an ordered key/value mapping."""
    p = fit.rho_hat
    doc = {
        "format": _FORMAT_TAG,
        "n": fit.n,
        "seed": fit.config.seed,
        "starts": fit.config.n_starts,
        "centered": bool(sample.centered),
    }
    if sample.centered and sample.offsets is not None:
        for idx, off in enumerate(sample.offsets, start=1):
            doc[f"center_offset_u{idx}"] = float(off)
    doc.update(
        {
            "rho12_hat": p.rho12,
            "rho13_hat": p.rho13,
            "rho23_hat": p.rho23,
            "branch": ",".join(str(i) for i in fit.branch),
            "loglik": fit.loglik,
            "starts_converged": fit.starts_converged,
        }
    )
    from .params import pairwise_phi

    for i, j in PAIRS:
        doc[f"phi_tilde_{i}{j}"] = pairwise_phi(p, (i, j)).varphi
    for i, j in PAIRS:
        cc = corr_coefficients(p, (i, j))
        doc[f"corr_jw_{i}{j}"] = cc.johnson_wehrly
        doc[f"corr_jm_{i}{j}"] = cc.jupp_mardia
        doc[f"corr_fl_{i}{j}"] = cc.fisher_lee
    mode, antimode = modes(p)
    doc["mode"] = str(mode)
    doc["antimode"] = str(antimode)
    doc["mode_delta12"] = mode.delta12
    doc["mode_delta13"] = mode.delta13
    doc["antimode_delta12"] = antimode.delta12
    doc["antimode_delta13"] = antimode.delta13
    if boot is not None:
        doc["bootstrap_b"] = boot.b
        doc["bootstrap_failed"] = boot.n_failed
        for pos, (i, j) in enumerate(PAIRS):
            doc[f"boot_rho{i}{j}_lo"] = float(boot.lo[pos])
            doc[f"boot_rho{i}{j}_hi"] = float(boot.hi[pos])
            doc[f"boot_rho{i}{j}_median"] = float(boot.medians[pos])
    return doc


def render_report(doc, as_json=False):
    if as_json:
        return json.dumps(doc, indent=2) + "\n"
    return "".join(f"{key} = {_fmt(val)}\n" for key, val in doc.items())


def parse_report(text):
    """Parse a report back into a dict; accepts both text and JSON forms."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return json.loads(text)
    doc = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        key, _, raw = line.partition(" = ")
        raw = raw.strip()
        if raw in ("true", "false"):
            doc[key] = raw == "true"
            continue
        try:
            doc[key] = int(raw)
        except ValueError:
            try:
                doc[key] = float(raw)
            except ValueError:
                doc[key] = raw
    return doc


def _write_text(path, text):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_sample(args):
    try:
        p = RhoParams(*args.rho)
    except ParameterError as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return 4
    sample = sample_twcc(args.n, p, RngState(args.seed, 0))
    angles = np.rad2deg(sample.angles) if args.degrees else sample.angles
    write_angle_csv(args.out, angles)
    return 0


def _cmd_fit(args):
    try:
        arr = read_angle_csv(args.input, degrees=args.degrees)
    except _InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    cfg = FitConfig(
        n_starts=args.starts,
        bootstrap_b=args.bootstrap,
        seed=args.seed,
        n_jobs=args.jobs,
    )
    sample = AngleSample(arr)
    try:
        if args.center:
            sample = circular_center(sample)
        fit = fit_mle(sample, cfg)
        boot = bootstrap_ci(sample, cfg, fit) if args.bootstrap > 0 else None
    except TwccError as exc:
        print(f"fit failed: {exc}", file=sys.stderr)
        return 3
    doc = build_report(fit, sample, boot)
    _write_text(args.out, render_report(doc, as_json=args.json))
    return 0


def _cmd_grid(args):
    try:
        p = RhoParams(*args.rho)
    except ParameterError as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return 4
    k, value = int(args.fix[0]), float(args.fix[1])
    if k not in (1, 2, 3):
        print(f"invalid parameters: fixed index must be 1, 2 or 3, got {k}", file=sys.stderr)
        return 4
    if args.resolution < 1:
        print("invalid parameters: resolution must be >= 1", file=sys.stderr)
        return 4
    free = [m for m in (1, 2, 3) if m != k]
    grid = np.arange(args.resolution) * (TWO_PI / args.resolution)
    ui, uj = np.meshgrid(grid, grid, indexing="ij")
    dens = conditional_pair_given_one(ui, uj, value, p, fixed=k)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow((f"u{free[0]}", f"u{free[1]}", "density"))
        for a in range(args.resolution):
            for b in range(args.resolution):
                writer.writerow(
                    (repr(float(ui[a, b])), repr(float(uj[a, b])), repr(float(dens[a, b])))
                )
    return 0


_SCENARIOS = {
    "table-s1": {"rho": (1.0, -4.0, -0.25), "sizes": (100, 500, 1000)},
    "fig-s1": {"rho": (1.0, 0.25, 4.0), "sizes": (100, 250, 500, 1000, 2000)},
}


def _simulate_replicate(task):
    """One replicate: sample at the truth, fit, return the estimate triple."""
    rho_triple, n, data_stream, cfg = task
    truth = RhoParams(*rho_triple)
    sample = sample_twcc(n, truth, RngState(cfg.seed, data_stream))
    try:
        fit = fit_mle(sample, cfg)
    except TwccError:
        return None
    return fit.rho_hat.as_array()


def _cmd_simulate(args):
    if args.scenario == "custom":
        if args.rho is None or args.sizes is None:
            print(
                "invalid parameters: custom scenario needs --rho and --sizes",
                file=sys.stderr,
            )
            return 4
        rho_triple, sizes = tuple(args.rho), tuple(args.sizes)
    else:
        preset = _SCENARIOS[args.scenario]
        rho_triple = preset["rho"] if args.rho is None else tuple(args.rho)
        sizes = preset["sizes"] if args.sizes is None else tuple(args.sizes)
    try:
        truth = RhoParams(*rho_triple)
    except ParameterError as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return 4
    cfg = FitConfig(n_starts=args.starts, seed=args.seed)
    tasks = []
    for size_idx, n in enumerate(sizes):
        for rep in range(args.replicates):
            stream = 1_000_000_000 + size_idx * 1_000_000 + rep
            tasks.append((tuple(truth.as_array()), int(n), stream, cfg))
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(
                pool.map(_simulate_replicate, tasks, chunksize=max(1, len(tasks) // (8 * args.jobs)))
            )
    else:
        results = [_simulate_replicate(t) for t in tasks]

    names = ("rho12", "rho13", "rho23")
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            (
                "scenario", "n", "parameter", "true_value", "median",
                "q025", "q975", "median_abs_error", "replicates", "failed",
            )
        )
        for size_idx, n in enumerate(sizes):
            chunk = results[size_idx * args.replicates:(size_idx + 1) * args.replicates]
            good = np.array([r for r in chunk if r is not None])
            failed = sum(1 for r in chunk if r is None)
            for pos, name in enumerate(names):
                true_val = truth.as_array()[pos]
                if len(good):
                    col = good[:, pos]
                    med = float(np.median(col))
                    q025 = float(np.percentile(col, 2.5))
                    q975 = float(np.percentile(col, 97.5))
                    mae = float(np.median(np.abs(col - true_val)))
                else:
                    med = q025 = q975 = mae = math.nan
                writer.writerow(
                    (
                        args.scenario, n, name, repr(float(true_val)), repr(med),
                        repr(q025), repr(q975), repr(mae), args.replicates, failed,
                    )
                )
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="twcc",
        description="Trivariate wrapped Cauchy copula toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sample = sub.add_parser("sample", help="draw variates into an angle CSV")
    p_sample.add_argument("--rho", nargs=3, type=float, required=True, metavar=("R12", "R13", "R23"))
    p_sample.add_argument("--n", type=int, required=True)
    p_sample.add_argument("--seed", type=int, default=0)
    p_sample.add_argument("--out", required=True)
    p_sample.add_argument("--degrees", action="store_true", help="write degrees instead of radians")
    p_sample.set_defaults(func=_cmd_sample)

    p_fit = sub.add_parser("fit", help="fit an angle CSV by maximum likelihood")
    p_fit.add_argument("input")
    p_fit.add_argument("--center", action="store_true", help="remove per-column circular means first")
    p_fit.add_argument("--starts", type=int, default=50)
    p_fit.add_argument("--bootstrap", type=int, default=0, metavar="B")
    p_fit.add_argument("--seed", type=int, default=0)
    p_fit.add_argument("--out", default=None)
    p_fit.add_argument("--json", action="store_true", help="emit the report as JSON")
    p_fit.add_argument("--jobs", type=int, default=1)
    p_fit.add_argument("--degrees", action="store_true", help="input is in degrees")
    p_fit.set_defaults(func=_cmd_fit)

    p_grid = sub.add_parser("grid", help="export a conditional-density grid")
    p_grid.add_argument("--rho", nargs=3, type=float, required=True, metavar=("R12", "R13", "R23"))
    p_grid.add_argument("--fix", nargs=2, required=True, metavar=("K", "VALUE"),
                        help="index (1-3) and value of the conditioning angle")
    p_grid.add_argument("--resolution", type=int, default=64)
    p_grid.add_argument("--out", required=True)
    p_grid.add_argument("--window", type=float, default=None,
                        help="display window for nearby data points (presentational only)")
    p_grid.set_defaults(func=_cmd_grid)

    p_sim = sub.add_parser("simulate", help="replicated simulation study")
    p_sim.add_argument("--scenario", choices=("table-s1", "fig-s1", "custom"), required=True)
    p_sim.add_argument("--replicates", type=int, default=200, metavar="M")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--out", required=True)
    p_sim.add_argument("--rho", nargs=3, type=float, default=None)
    p_sim.add_argument("--sizes", nargs="+", type=int, default=None)
    p_sim.add_argument("--starts", type=int, default=50)
    p_sim.add_argument("--jobs", type=int, default=1)
    p_sim.set_defaults(func=_cmd_simulate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except ParameterError as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return 4
    except TwccError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
