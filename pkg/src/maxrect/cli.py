"""Command-line entry point.

One executable exposes every part of the toolkit: maximal maps, Orlicz
norms, weight constants, covering selections, interpolation calculators
and the distributional experiments.  Runs are reproducible: numeric output
carries 17 significant digits, every ``--out`` file gets a manifest with
the resolved configuration and its hash, and wall-clock data stays in the
manifest's timestamp plus the per-row runtime column.

Exit codes: 0 success, 2 input error (message names the offending field
or path), 3 enumeration budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import platform
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .basis import BasisBudget, BasisSpec, BudgetExceededError, Rect
from .covering import select_alpha_scattered, select_exp_overlap, select_half_overlap
from .grid import (
    Box,
    CellSet,
    GridFunction,
    gridfunction_from_dict,
    gridfunction_to_dict,
    preset_gridfunction,
)
from .harness import (
    ExperimentRow,
    bsmf_experiment,
    geometric_grid,
    jmz_experiment,
    rect_indicator_family,
    sharpness_sweep,
    weighted_bound_probe,
    TestFunction,
)
from .interp import DivergenceError, InterpConstants, l1xlp_bound, strong_type_constant
from .maximal import MaximalRequest
from .orlicz import YoungSpec, luxemburg_norm
from .weights import (
    ExponentVector,
    WeightVector,
    ap_constant,
    bump_constant,
    condition_a_probe,
    multi_ap_constant,
    nu_of,
)

__all__ = ["main", "dispatch"]

SIG = ".17g"


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, SIG)
    return str(x)


def _load_grid(path_or_expr: str, args) -> GridFunction:
    if path_or_expr.startswith("expr:"):
        if args.lower is None or args.upper is None or args.dims is None:
            raise ValueError(
                "field 'f': expr presets need --lower, --upper and --dims"
            )
        box = Box(_floats(args.lower), _floats(args.upper), _ints(args.dims))
        return preset_gridfunction(path_or_expr[len("expr:"):], box)
    path = Path(path_or_expr)
    if not path.exists():
        raise ValueError(f"field 'f': file not found: {path}")
    with open(path) as fh:
        return gridfunction_from_dict(json.load(fh))


def _floats(s: str) -> tuple[float, ...]:
    return tuple(float(v) for v in s.split(","))


def _ints(s: str) -> tuple[int, ...]:
    return tuple(int(v) for v in s.split(","))


def _young_from_args(args) -> YoungSpec:
    if getattr(args, "linear", False):
        return YoungSpec("linear")
    if getattr(args, "psi", None):
        params = dict(kv.split("=") for kv in args.psi.split(","))
        return YoungSpec("psi", n=int(params.get("n", 2)))
    phi = getattr(args, "phi", None) or "n=2,m=1"
    params = dict(kv.split("=") for kv in phi.split(","))
    return YoungSpec("phi", n=int(params.get("n", 2)), m=int(params.get("m", 1)))


def _basis_from_args(args) -> BasisSpec:
    if args.basis == "eccentricity":
        if args.N is None:
            raise ValueError("field 'N': eccentricity basis needs --N")
        return BasisSpec("eccentricity", N=args.N)
    return BasisSpec(args.basis)


def _write_manifest(out: Path, command: str, config: dict, seed: int) -> None:
    canonical = json.dumps(config, sort_keys=True, default=str)
    manifest = {
        "command": command,
        "config": config,
        "config_hash": hashlib.sha256(canonical.encode()).hexdigest(),
        "seed": seed,
        "versions": {
            "maxrect": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
        },
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    out.with_suffix(out.suffix + ".manifest.json").write_text(
        json.dumps(manifest, indent=2, default=str) + "\n"
    )


def _write_rows_csv(path: Path, header: list[str], rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(row.get(k, "")) for k in header])


def _experiment_rows_to_dicts(rows: list[ExperimentRow]) -> tuple[list[str], list[dict]]:
    keys: list[str] = []
    for row in rows:
        for k in row.params:
            if k not in keys:
                keys.append(k)
    header = keys + ["lhs", "rhs", "ratio", "runtime_ms", "flags"]
    dicts = []
    for row in rows:
        d = dict(row.params)
        d.update(lhs=row.lhs, rhs=row.rhs, ratio=row.ratio,
                 runtime_ms=row.runtime_ms, flags=row.flags)
        dicts.append(d)
    return header, dicts


def _rects_from_file(path: str) -> tuple[list[Rect], tuple[int, ...]]:
    p = Path(path)
    if not p.exists():
        raise ValueError(f"field 'rects': file not found: {p}")
    doc = json.loads(p.read_text())
    for key in ("dims", "rects"):
        if key not in doc:
            raise ValueError(f"field 'rects': document missing '{key}'")
    dims = tuple(int(d) for d in doc["dims"])
    rects = [Rect(tuple(r["lo"]), tuple(r["hi"])) for r in doc["rects"]]
    return rects, dims


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------

def _cmd_compute(args) -> int:
    spec = _basis_from_args(args)
    fs = [_load_grid(f, args) for f in args.f]
    if args.m is not None and args.m != len(fs):
        raise ValueError(f"field 'm': got {args.m} but {len(fs)} functions")
    weight = _load_grid(args.w, args) if args.w else None
    req = MaximalRequest(fs, spec, weight=weight, algorithm=args.algorithm,
                         budget=BasisBudget(args.budget), threads=args.threads)
    out_fn = req.run()
    doc = gridfunction_to_dict(out_fn)
    out = Path(args.out)
    out.write_text(json.dumps(doc) + "\n")
    _write_manifest(out, "compute", _resolved(args), args.seed)
    return 0


def _cmd_orlicz(args) -> int:
    if args.action != "norm":
        raise ValueError(f"field 'action': unknown orlicz action '{args.action}'")
    young = _young_from_args(args)
    g = _load_grid(args.f, args)
    if args.set != "all":
        raise ValueError("field 'set': only 'all' is supported")
    res = luxemburg_norm(g, None, young)
    print(json.dumps({
        "norm": float(_fmt(res.value)),
        "iterations": res.iterations,
        "residual": float(_fmt(res.residual)),
        "young": young.describe(),
    }))
    return 0


def _cmd_weights(args) -> int:
    spec = _basis_from_args(args)
    budget = BasisBudget(args.budget)
    if args.action == "ap":
        w = _load_grid(args.w[0], args)
        rep = ap_constant(w, float(args.p), spec, budget)
        print(_fmt(rep.value))
        return 0
    if args.action == "apvec":
        ps = ExponentVector(_floats(args.p))
        ws = WeightVector(tuple(_load_grid(w, args) for w in args.w))
        if args.bump_r is not None:
            nu = _load_grid(args.nu, args) if args.nu else nu_of(ws, ps)
            rep = bump_constant(nu, ws, ps, args.bump_r, spec, budget)
        else:
            nu = _load_grid(args.nu, args) if args.nu else None
            rep = multi_ap_constant(ws, ps, spec, nu_override=nu, budget=budget)
        print(_fmt(rep.value))
        return 0
    if args.action == "conditiona":
        w = _load_grid(args.w[0], args)
        rep = condition_a_probe(w, spec, args.lam, trials=args.trials, seed=args.seed)
        print(json.dumps({"c_hat": float(_fmt(rep.c_hat)),
                          "trials": rep.trials, "skipped": rep.skipped}))
        return 0
    raise ValueError(f"field 'action': unknown weights action '{args.action}'")


def _cmd_cover(args) -> int:
    rects, dims = _rects_from_file(args.rects)
    if args.order == "by-measure-desc":
        order = sorted(range(len(rects)), key=lambda i: (-rects[i].ncells, i))
        rects = [rects[i] for i in order]
    if args.method == "half":
        res = select_half_overlap(rects, dims)
    elif args.method == "scattered":
        res = select_alpha_scattered(rects, dims, args.lam)
    elif args.method == "exp":
        res = select_exp_overlap(rects, dims, n=args.n, delta0=args.delta0)
    else:
        raise ValueError(f"field 'method': unknown method '{args.method}'")
    doc = {
        "method": args.method,
        "selected": res.selected,
        "rejected": res.rejected,
        "disjoint_part_cells": [p.cell_count for p in res.disjoint_parts],
    }
    if args.method == "exp":
        doc["union_ratio"] = float(_fmt(res.union_ratio))
        doc["psi_norm"] = float(_fmt(res.psi_norm))
    out = Path(args.out)
    out.write_text(json.dumps(doc) + "\n")
    _write_manifest(out, "cover", _resolved(args), args.seed)
    return 0


def _cmd_interp(args) -> int:
    if args.action == "l1lp":
        f = _load_grid(args.f, args)
        g = _load_grid(args.g, args)
        res = l1xlp_bound(f, g, args.alpha, args.B1, args.B2, args.p, n=args.n)
        print(json.dumps({k: float(_fmt(v)) for k, v in res.items()}))
        return 0
    if args.action == "strong":
        young = _young_from_args(args)
        consts = InterpConstants(B1=args.B1, B2=args.B2, B=args.B, A=args.A,
                                 s1=args.s1, s2=args.s2, p=args.p)
        res = strong_type_constant(consts, young)
        print(json.dumps({k: float(_fmt(v)) for k, v in res.items()}))
        return 0
    raise ValueError(f"field 'action': unknown interp action '{args.action}'")


def _lambda_grid(args) -> np.ndarray:
    return geometric_grid(args.lambda_min, args.lambda_max, args.points)


def _cmd_jmz(args) -> int:
    if args.family == "rects12":
        functions = rect_indicator_family()
    else:
        if not args.f:
            raise ValueError("field 'f': give --f files or --family rects12")
        functions = [TestFunction(Path(p).stem, _load_grid(p, args)) for p in args.f]
    rows = jmz_experiment(functions, _lambda_grid(args), n=args.n)
    header, dicts = _experiment_rows_to_dicts(rows)
    out = Path(args.out)
    _write_rows_csv(out, header, dicts)
    _write_manifest(out, "jmz", _resolved(args), args.seed)
    return 0


def _cmd_bsmf(args) -> int:
    fs = [_load_grid(p, args) for p in args.f]
    rows = bsmf_experiment(fs, _lambda_grid(args), m=len(fs), n=args.n,
                           algorithm=args.algorithm)
    header, dicts = _experiment_rows_to_dicts(rows)
    out = Path(args.out)
    _write_rows_csv(out, header, dicts)
    _write_manifest(out, "bsmf", _resolved(args), args.seed)
    return 0


def _cmd_sharpness(args) -> int:
    Ns = []
    N = 1
    while N <= args.Nmax:
        Ns.append(N)
        N *= args.base
    rows = sharpness_sweep(Ns, alpha=args.alpha)
    header = ["N", "lambda", "lhs", "rhs_phi1", "rhs_phi2", "ratio1", "ratio2",
              "runtime_ms"]
    out = Path(args.out)
    _write_rows_csv(out, header, rows)
    _write_manifest(out, "sharpness", _resolved(args), args.seed)
    return 0


def _cmd_probe(args) -> int:
    spec = _basis_from_args(args)
    ps = ExponentVector(_floats(args.p))
    ws = WeightVector(tuple(_load_grid(w, args) for w in args.w))
    fs = [_load_grid(f, args) for f in args.f]
    if len(fs) != ps.m:
        raise ValueError(
            f"field 'f': need {ps.m} functions for {ps.m} exponents, got {len(fs)}"
        )
    res = weighted_bound_probe(ws, ps, spec, [fs], _lambda_grid(args), mode=args.mode)
    header, dicts = _experiment_rows_to_dicts(res["rows"])
    out = Path(args.out)
    _write_rows_csv(out, header, dicts)
    _write_manifest(out, "probe", _resolved(args), args.seed)
    print(_fmt(res["sup_ratio"]))
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--budget", type=int, default=10**8)
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--config", type=str, default=None)
    sp.add_argument("--lower", type=str, default=None)
    sp.add_argument("--upper", type=str, default=None)
    sp.add_argument("--dims", type=str, default=None)


def _add_lambda_grid(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--lambda-min", dest="lambda_min", type=float, default=0.002)
    sp.add_argument("--lambda-max", dest="lambda_max", type=float, default=0.02)
    sp.add_argument("--points", type=int, default=24)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maxrect",
        description="strong/multilinear maximal function toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("compute", help="maximal map of one or more functions")
    sp.add_argument("--basis", required=True)
    sp.add_argument("--N", type=float, default=None)
    sp.add_argument("--m", type=int, default=None)
    sp.add_argument("--f", action="append", required=True)
    sp.add_argument("--w", type=str, default=None)
    sp.add_argument("--algorithm", choices=["brute", "sweep", "auto"], default="auto")
    sp.add_argument("--out", required=True)
    _add_common(sp)
    sp.set_defaults(handler=_cmd_compute)

    sp = sub.add_parser("orlicz", help="Orlicz norms")
    sp.add_argument("action", choices=["norm"])
    sp.add_argument("--phi", type=str, default=None)
    sp.add_argument("--psi", type=str, default=None)
    sp.add_argument("--linear", action="store_true")
    sp.add_argument("--f", required=True)
    sp.add_argument("--set", type=str, default="all")
    _add_common(sp)
    sp.set_defaults(handler=_cmd_orlicz)

    sp = sub.add_parser("weights", help="weight-class constants")
    sp.add_argument("action", choices=["ap", "apvec", "conditiona"])
    sp.add_argument("--p", required=True)
    sp.add_argument("--w", action="append", required=True)
    sp.add_argument("--basis", required=True)
    sp.add_argument("--N", type=float, default=None)
    sp.add_argument("--nu", type=str, default=None)
    sp.add_argument("--bump-r", dest="bump_r", type=float, default=None)
    sp.add_argument("--lambda", dest="lam", type=float, default=0.5)
    sp.add_argument("--trials", type=int, default=50)
    _add_common(sp)
    sp.set_defaults(handler=_cmd_weights)

    sp = sub.add_parser("cover", help="covering selections")
    sp.add_argument("--method", choices=["half", "scattered", "exp"], required=True)
    sp.add_argument("--lambda", dest="lam", type=float, default=0.5)
    sp.add_argument("--delta0", type=float, default=1.0)
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--rects", required=True)
    sp.add_argument("--order", choices=["given", "by-measure-desc"], default="given")
    sp.add_argument("--out", required=True)
    _add_common(sp)
    sp.set_defaults(handler=_cmd_cover)

    sp = sub.add_parser("interp", help="interpolation constant calculators")
    sp.add_argument("action", choices=["l1lp", "strong"])
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--alpha", type=float, default=None)
    sp.add_argument("--B1", type=float, default=1.0)
    sp.add_argument("--B2", type=float, default=1.0)
    sp.add_argument("--B", type=float, default=1.0)
    sp.add_argument("--A", type=float, default=1.0)
    sp.add_argument("--s1", type=float, default=None)
    sp.add_argument("--s2", type=float, default=None)
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--phi", type=str, default=None)
    sp.add_argument("--f", type=str, default=None)
    sp.add_argument("--g", type=str, default=None)
    _add_common(sp)
    sp.set_defaults(handler=_cmd_interp)

    sp = sub.add_parser("jmz", help="endpoint distribution experiment (one slot)")
    sp.add_argument("--family", type=str, default=None)
    sp.add_argument("--f", action="append", default=None)
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--out", required=True)
    _add_lambda_grid(sp)
    _add_common(sp)
    sp.set_defaults(handler=_cmd_jmz)

    sp = sub.add_parser("bsmf", help="multilinear endpoint distribution experiment")
    sp.add_argument("--f", action="append", required=True)
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--algorithm", choices=["brute", "sweep", "auto"], default="auto")
    sp.add_argument("--out", required=True)
    _add_lambda_grid(sp)
    _add_common(sp)
    sp.set_defaults(handler=_cmd_bsmf)

    sp = sub.add_parser("sharpness", help="two-slot sharpness sweep")
    sp.add_argument("--Nmax", type=int, default=4**10)
    sp.add_argument("--base", type=int, default=4)
    sp.add_argument("--alpha", type=float, default=0.1)
    sp.add_argument("--out", required=True)
    _add_common(sp)
    sp.set_defaults(handler=_cmd_sharpness)

    sp = sub.add_parser("probe", help="weighted bound probe")
    sp.add_argument("--mode", choices=["weak", "strong"], default="weak")
    sp.add_argument("--p", required=True)
    sp.add_argument("--w", action="append", required=True)
    sp.add_argument("--f", action="append", required=True)
    sp.add_argument("--basis", required=True)
    sp.add_argument("--N", type=float, default=None)
    sp.add_argument("--out", required=True)
    _add_lambda_grid(sp)
    _add_common(sp)
    sp.set_defaults(handler=_cmd_probe)
    return parser


def _resolved(args) -> dict:
    skip = {"handler", "config"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _merge_config(argv: list[str], args: argparse.Namespace) -> argparse.Namespace:
    """Overlay --config values under explicitly given flags.

    Config keys are argument destinations (e.g. ``lambda_min``); a flag
    spelled on the command line always wins over the config value, and
    unknown keys are rejected.
    """
    if not getattr(args, "config", None):
        return args
    path = Path(args.config)
    if not path.exists():
        raise ValueError(f"field 'config': file not found: {path}")
    doc = json.loads(path.read_text())
    if not isinstance(doc, dict):
        raise ValueError("field 'config': document must be an object")
    known = set(vars(args))
    explicit = {a.split("=", 1)[0].lstrip("-").replace("-", "_")
                for a in argv if a.startswith("--")}
    for key, value in doc.items():
        dest = key.replace("-", "_")
        if dest not in known:
            raise ValueError(f"field 'config': unknown key '{key}'")
        if dest in explicit or (dest == "lam" and "lambda" in explicit):
            continue
        setattr(args, dest, value)
    return args


def dispatch(argv: list[str]) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args = _merge_config(argv, args)
    return args.handler(args)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    try:
        return dispatch(argv)
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
