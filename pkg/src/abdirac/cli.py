"""Command-line interface.

::

    abdirac energy --nu 0.3 --a 0
    abdirac energy --nu 0.25 --critical --format json
    abdirac sweep energy-vs-a --nu 0.3 --a-range 0:0.2:41 --out table.csv
    abdirac sweep eigensolve --nu 0.1,0.2 --a-frac 0,0.5 --ell 0,1 --jobs 4

Option values may also come from a flat ``key = value`` file given with
``--config``; command-line flags win over the file, which wins over the
defaults.  A relative ``--out`` path is resolved against ``$ABDIRAC_OUTDIR``
when that variable is set, and without ``--out`` the table goes to stdout.

Exit codes: 0 success, 1 some sweep rows failed, 2 invalid parameters,
3 supercritical parameters.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Optional

import numpy as np

from . import __version__
from .errors import AbDiracError, BadSpec, DomainError, SupercriticalError
from .io import SweepTable, read_config, write_table

EXIT_ROW_FAILED = 1
EXIT_DOMAIN = 2
EXIT_SUPERCRITICAL = 3
OUTDIR_ENV = "ABDIRAC_OUTDIR"

DEFAULTS = {
    "nu": "0.3",
    "a": None,
    "a_frac": None,
    "a_range": None,
    "ell": "0",
    "c": "10,20,40,80",
    "eps": ",".join(f"1e-{k}" for k in range(1, 9)),
    "h": "1e-2,1e-3,1e-4",
    "beta": "0.3,1.2,-0.7,0.45",
    "variant": "zbar",
    "jobs": "1",
    "format": "csv",
    "out": None,
}


# ---------------------------------------------------------------------------
# parsing helpers


def _floats(s) -> list[float]:
    if s is None or s == "":
        return []
    if isinstance(s, (int, float)):
        return [float(s)]
    return [float(x) for x in str(s).split(",") if x.strip()]


def _ints(s) -> list[int]:
    return [int(x) for x in _floats(s)]


def _linspace(spec: str) -> list[float]:
    parts = spec.split(":")
    if len(parts) != 3:
        raise BadSpec(f"range must be start:stop:num, got {spec!r}")
    lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    return [float(x) for x in np.linspace(lo, hi, n)]


def _resolve(args: argparse.Namespace) -> dict:
    """Merge flags over config file over defaults."""
    conf = read_config(args.config) if getattr(args, "config", None) else {}
    out = {}
    for key, default in DEFAULTS.items():
        flag = getattr(args, key, None)
        if flag is not None:
            out[key] = flag
        elif key in conf:
            out[key] = conf[key]
        else:
            out[key] = default
    unknown = set(conf) - set(DEFAULTS)
    if unknown:
        raise BadSpec(f"unknown config keys: {', '.join(sorted(unknown))}")
    return out


def _a_values(opts: dict, nu: float) -> list[float]:
    from .model import critical_field

    if opts["a_range"]:
        return _linspace(opts["a_range"])
    if opts["a"] is not None:
        return _floats(opts["a"])
    fr = _floats(opts["a_frac"]) if opts["a_frac"] is not None else [0.0, 1 / 3, 2 / 3]
    return [f * critical_field(nu) for f in fr]


# ---------------------------------------------------------------------------
# row workers (module level so that worker processes can pickle them)


def _row_energy_vs_a(task):
    from .model import CouplingParams, ground_state_energy

    nu, a = task
    p = CouplingParams(nu, a)
    return {"nu": nu, "a": a, "lambda": ground_state_energy(p), "regime": p.regime.value}


def _row_slope(task):
    from .model import critical_field, energy_slope_exact, energy_slope_fd

    nu, h = task
    a0 = critical_field(nu) - h
    return {"nu": nu, "h": h, "a": a0, "slope_fd": energy_slope_fd(nu, h),
            "slope_exact": energy_slope_exact(nu, a0)}


def _row_nonrel(task):
    from .model import CouplingParams
    from .nonrel import scaled_energy

    nu, a, c = task
    e = scaled_energy(CouplingParams(nu, a), c)
    return {"c": c, "lambda_c": e.lambda_c, "shifted": e.shifted,
            "error": abs(e.shifted - e.limit), "ratio": e.lower_upper_ratio}


def _row_supercritical(task):
    from .grid import build_grid, make_supercritical_witness
    from .forms import JForm
    from .model import CouplingParams

    nu, a, eps, grid_spec = task
    p = CouplingParams(nu, a)
    g = build_grid(grid_spec)
    w = make_supercritical_witness(p, eps, g)
    return {"nu": nu, "a": a, "epsilon": eps, "J": JForm(w, p, 0)(-1.0).total}


def _row_hardy(task):
    from .hardy import near_optimizer_sequence, wirtinger_constant

    beta, variant = task
    C = wirtinger_constant(beta, variant)
    seq = near_optimizer_sequence(beta, C.attaining_mode, variant)
    return {"beta": beta, "variant": variant, "ell": C.attaining_mode,
            "constant": 4.0 * C.value, "quotient": seq.quotients[-1],
            "extrapolated": seq.extrapolated, "relative_gap": seq.relative_gap}


def _row_eigensolve(task):
    from .eigen import eigensolve_shooting, lowest_gap_eigenvalue_form
    from .model import CouplingParams, mode_energy

    nu, a, ell = task
    p = CouplingParams(nu, a)
    closed = mode_energy(p, ell).lambda_ell
    lf = lowest_gap_eigenvalue_form(p, ell).lam
    ls = eigensolve_shooting(p, ell).lam
    return {"nu": nu, "a": a, "ell": ell, "lambda_closed": closed, "lambda_form": lf,
            "lambda_shoot": ls, "max_abs_diff": max(abs(lf - closed), abs(ls - closed))}


def _row_variational(task, channel="electron"):
    from .model import CouplingParams, eta_star_profile, ground_state_energy
    from .variational import minimize_lambda_star, power_exp_family

    nu, a = task
    p = CouplingParams(nu, a)
    res = minimize_lambda_star(p, power_exp_family(p), channel=channel)
    A, B = eta_star_profile(p)
    lam = ground_state_energy(p)
    target = lam if channel == "electron" else -lam
    return {"nu": nu, "a": a, "lambda_target": target, "best_lambda": res.best_lambda,
            "A": res.best_params["A"], "B": res.best_params["B"], "A_closed": A,
            "B_closed": B, "evaluations": res.evaluations,
            "abs_diff": abs(res.best_lambda - target)}


def _row_positron(task):
    return _row_variational(task, "positron")


SWEEPS: dict[str, tuple[tuple, Callable]] = {
    "energy-vs-a": (("nu", "a", "lambda", "regime"), _row_energy_vs_a),
    "slope": (("nu", "h", "a", "slope_fd", "slope_exact"), _row_slope),
    "nonrel": (("c", "lambda_c", "shifted", "error", "ratio"), _row_nonrel),
    "supercritical": (("nu", "a", "epsilon", "J"), _row_supercritical),
    "hardy": (("beta", "variant", "ell", "constant", "quotient", "extrapolated",
               "relative_gap"), _row_hardy),
    "eigensolve": (("nu", "a", "ell", "lambda_closed", "lambda_form", "lambda_shoot",
                    "max_abs_diff"), _row_eigensolve),
    "variational": (("nu", "a", "lambda_target", "best_lambda", "A", "B", "A_closed",
                     "B_closed", "evaluations", "abs_diff"), _row_variational),
    "positron": (("nu", "a", "lambda_target", "best_lambda", "A", "B", "A_closed",
                  "B_closed", "evaluations", "abs_diff"), _row_positron),
}


_TEXT_COLUMNS = ("regime", "variant")
FAILURE_COLUMN = "failure"      # empty on success, "ErrorType: message" otherwise


def _run_row(kind: str, task) -> dict:
    """Evaluate one row; library errors become a ``failure`` entry."""
    fn = SWEEPS[kind][1]
    try:
        row = fn(task)
        row[FAILURE_COLUMN] = ""
    except (AbDiracError, ValueError, ArithmeticError) as exc:
        row = {FAILURE_COLUMN: f"{type(exc).__name__}: {exc}"}
    return row


def _input_columns(kind: str, task) -> dict:
    """Echo of the inputs, used to fill failed rows."""
    names = {
        "energy-vs-a": ("nu", "a"), "slope": ("nu", "h"), "nonrel": ("c",),
        "supercritical": ("nu", "a", "epsilon"), "hardy": ("beta", "variant"),
        "eigensolve": ("nu", "a", "ell"), "variational": ("nu", "a"), "positron": ("nu", "a"),
    }[kind]
    vals = task[-1:] if kind == "nonrel" else task
    return dict(zip(names, vals))


def build_tasks(kind: str, opts: dict) -> tuple[list, dict]:
    """Task list and the resolved parameters recorded in provenance."""
    from .grid import GridSpec
    from .variational import witness_grid

    nus = _floats(opts["nu"])
    if not nus:
        raise BadSpec("--nu is required")
    params: dict = {"nu": nus}
    if kind == "energy-vs-a":
        tasks = [(nu, a) for nu in nus for a in _a_values(opts, nu)]
    elif kind == "slope":
        hs = _floats(opts["h"])
        params["h"] = hs
        tasks = [(nu, h) for nu in nus for h in hs]
    elif kind == "nonrel":
        cs = _floats(opts["c"])
        nu = nus[0]
        a = _a_values(opts, nu)[0] if (opts["a"] or opts["a_frac"] or opts["a_range"]) else 0.1
        params.update({"a": a, "c": cs})
        tasks = [(nu, a, c) for c in cs]
    elif kind == "supercritical":
        eps = _floats(opts["eps"])
        params["eps"] = eps
        spec = witness_grid(min(eps)).spec.as_dict()
        params["grid"] = spec
        tasks = [(nu, a, e, spec) for nu in nus for a in _a_values(opts, nu) for e in eps]
    elif kind == "hardy":
        betas = _floats(opts["beta"])
        params = {"beta": betas, "variant": opts["variant"]}
        tasks = [(b, opts["variant"]) for b in betas]
    elif kind == "eigensolve":
        ells = _ints(opts["ell"])
        params["ell"] = ells
        tasks = [(nu, a, ell) for nu in nus for a in _a_values(opts, nu) for ell in ells]
    elif kind in ("variational", "positron"):
        tasks = [(nu, a) for nu in nus for a in _a_values(opts, nu)]
    else:
        raise BadSpec(f"unknown sweep kind {kind!r}")
    if kind not in ("hardy", "nonrel"):
        params["a"] = sorted({t[1] for t in tasks})
    return tasks, params


def run_sweep(kind: str, opts: dict, jobs: int = 1) -> tuple[SweepTable, int]:
    """Run a sweep; returns the table and the number of failed rows.

    Rows are gathered in input order so the table does not depend on ``jobs``.
    """
    schema, _ = SWEEPS[kind]
    tasks, params = build_tasks(kind, opts)
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_row, [kind] * len(tasks), tasks))
    else:
        results = [_run_row(kind, t) for t in tasks]
    rows, failed = [], 0
    for task, res in zip(tasks, results):
        if res[FAILURE_COLUMN]:
            failed += 1
            filled = {c: ("" if c in _TEXT_COLUMNS else math.nan) for c in schema}
            filled.update(_input_columns(kind, task))
            filled[FAILURE_COLUMN] = res[FAILURE_COLUMN]
            res = filled
        rows.append([res[c] for c in schema] + [res[FAILURE_COLUMN]])
    prov = {"command": f"sweep {kind}", "parameters": params,
            "tolerances": _tolerances(kind), "version": __version__}
    return SweepTable(schema + (FAILURE_COLUMN,), rows, prov), failed


def _tolerances(kind: str) -> dict:
    from . import eigen, variational

    if kind == "eigensolve":
        return {"form_N": eigen.FORM_N, "shoot_N": eigen.SHOOT_N}
    if kind in ("variational", "positron"):
        return {"tol": 1e-10, "max_evals": 200, "mu_max": variational.MU_MAX,
                "delta": variational.DELTA}
    return {}


# ---------------------------------------------------------------------------
# commands


def cmd_energy(args) -> int:
    from .model import (
        CouplingParams,
        critical_field,
        eta_star_profile,
        ground_state_energy,
        lemma_square_mu,
    )

    if args.critical:
        p = CouplingParams.critical(args.nu)
    else:
        if args.a is None:
            raise BadSpec("give --a or --critical")
        p = CouplingParams(args.nu, float(args.a))
    lam = ground_state_energy(p)
    A, B = eta_star_profile(p)
    out = {"nu": p.nu, "a": p.a, "critical_field": critical_field(p.nu),
           "regime": p.regime.value, "lambda": lam, "mu": lemma_square_mu(p),
           "eta_star_A": A, "eta_star_B": B}
    if args.format == "json":
        print(json.dumps(out))
    else:
        for k, v in out.items():
            print(f"{k}: {v}")
    return 0


def _output_path(out: Optional[str]) -> Optional[str]:
    if out is None:
        return None
    base = os.environ.get(OUTDIR_ENV)
    if base and not os.path.isabs(out):
        return os.path.join(base, out)
    return out


def cmd_sweep(args) -> int:
    opts = _resolve(args)
    fmt = opts["format"]
    if fmt not in ("csv", "json"):
        raise BadSpec(f"format must be csv or json, got {fmt!r}")
    table, failed = run_sweep(args.kind, opts, int(opts["jobs"]))
    path = _output_path(opts["out"])
    if path is None:
        sys.stdout.write(table.emit(fmt))
    else:
        write_table(table, path, fmt)
    if failed:
        print(f"{failed} of {len(table)} rows failed", file=sys.stderr)
        return EXIT_ROW_FAILED
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="abdirac", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    e = sub.add_parser("energy", help="closed-form ground state quantities")
    e.add_argument("--nu", type=float, required=True)
    g = e.add_mutually_exclusive_group()
    g.add_argument("--a", type=float)
    g.add_argument("--critical", action="store_true", help="use a = c(nu)")
    e.add_argument("--format", choices=("text", "json"), default="text")
    e.set_defaults(func=cmd_energy)

    s = sub.add_parser("sweep", help="parameter sweeps written as CSV or JSON")
    s.add_argument("kind", choices=sorted(SWEEPS))
    s.add_argument("--nu", help="comma-separated couplings")
    s.add_argument("--a", help="comma-separated fluxes")
    s.add_argument("--a-frac", dest="a_frac", help="fluxes as fractions of c(nu)")
    s.add_argument("--a-range", dest="a_range", help="start:stop:num (inclusive linspace)")
    s.add_argument("--ell", help="comma-separated angular modes (eigensolve)")
    s.add_argument("--c", help="speeds of light (nonrel)")
    s.add_argument("--eps", help="witness scales (supercritical)")
    s.add_argument("--h", help="distances below the critical field (slope)")
    s.add_argument("--beta", help="Wirtinger exponents (hardy)")
    s.add_argument("--variant", choices=("zbar", "z"))
    s.add_argument("--jobs", type=int, help="worker processes")
    s.add_argument("--out", help="output file (default stdout)")
    s.add_argument("--format", choices=("csv", "json"))
    s.add_argument("--config", help="flat key = value file")
    s.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SupercriticalError as exc:
        print(f"supercritical: {exc}", file=sys.stderr)
        return EXIT_SUPERCRITICAL
    except (DomainError, BadSpec) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
