"""``numlab`` command line: radius, index, verify and reproduce."""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .claims import FORMATS, RunConfig, claim_ids, emit_report, run_reproduce
from .constructions import build_space
from .errors import InputError, NumlabError, UnsupportedRepresentation
from .numindex import index_oracle_2d, index_search_upper
from .numrange import numerical_radius
from .operators import Operator
from .verifiers import (almost_cl_test, c_rich_criterion, c_rich_witness_search,
                        extreme_pair_report, load_kmodel, lushness_test)

EXIT_INPUT = 2
EXIT_UNSUPPORTED = 3


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, float) and not np.isfinite(x):
        return str(x)
    return x


def _dump(obj):
    sys.stdout.write(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


def _entry(v):
    if isinstance(v, list):
        if len(v) != 2:
            raise InputError("complex entries are [re, im] pairs")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, str):
        return complex(v.replace(" ", ""))
    return float(v)


def load_operator(path, space_text=None):
    """Read ``{"space"?, "matrix", "field"?}``; ``space_text`` overrides the file."""
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read operator file {path}: {exc}") from exc
    text = space_text or obj.get("space")
    if not text:
        raise InputError("no space given (use --space or a 'space' key)")
    space = build_space(text)
    if "field" in obj and obj["field"] != space.field.value:
        raise InputError(f"operator field {obj['field']!r} does not match space field {space.field.value!r}")
    rows = [[_entry(v) for v in row] for row in obj["matrix"]]
    return Operator(np.array(rows), space)


def _cmd_radius(args):
    T = load_operator(args.op, args.space)
    cert = numerical_radius(T, args.method)
    w = cert.witness
    _dump({
        "value": cert.value,
        "error_bound": cert.error_bound,
        "method": cert.method.value,
        "lower_only": cert.lower_only,
        "meets_tol": bool(not cert.lower_only and cert.error_bound <= args.tol),
        "witness": None if w is None else {"x": w.x, "f": w.f},
    })
    return 0


def _cmd_index(args):
    space = build_space(args.space)
    est = index_search_upper(space, args.starts, args.budget, args.seed, args.threads)
    out = {
        "upper": est.upper,
        "witness_matrix": est.witness.matrix,
        "metadata": est.metadata,
    }
    if est.known_value is not None:
        out["known_value"] = {"value": est.known_value[0], "citation": est.known_value[1]}
    if args.oracle:
        orc = index_oracle_2d(space)
        out["oracle_value"] = orc.value
        out["oracle_grid"] = {"value": orc.grid_value, "bound": orc.grid_bound, "points": orc.points}
    _dump(out)
    return 0


def _eps_list(text):
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad epsilon list {text!r}") from exc
    return vals


def _cmd_verify(args):
    if args.predicate == "crich":
        if not args.kmodel:
            raise InputError("verify crich needs --kmodel")
        m = load_kmodel(args.kmodel)
        crit = c_rich_criterion(m["K"], m["functionals"])
        out = {"predicate": "crich", "pass": crit, "witnesses": [], "stats": {}}
        if m["open_set"] is not None:
            eps = args.eps[0] if args.eps else m["epsilon"]
            w = c_rich_witness_search(m["K"], m["functionals"], m["open_set"], eps, level=m["level"])
            out["stats"] = {"distance": w.distance, "level": w.level, "history": w.history}
            if w.found:
                out["witnesses"].append({"peak": w.peak, "h": w.h})
        _dump(out)
        return 0
    if not args.space:
        raise InputError(f"verify {args.predicate} needs --space")
    space = build_space(args.space)
    if args.predicate == "lush":
        kw = {"grid": args.grid}
        if args.eps:
            kw["epsilons"] = args.eps
        r = lushness_test(space, **kw)
        out = {"predicate": "lush", "pass": r.ok, "witnesses": r.failures,
               "stats": dict(r.stats, checked=r.checked, pass_rate=r.pass_rate)}
    elif args.predicate == "almostcl":
        r = almost_cl_test(space)
        out = {"predicate": "almostcl", "pass": r.ok, "witnesses": r.witnesses, "stats": r.stats}
    else:
        r = extreme_pair_report(space)
        out = {"predicate": "pairs", "pass": r.all_one, "witnesses": r.witnesses,
               "stats": {"minimum": r.minimum, "histogram": {"counts": r.histogram[0],
                                                             "edges": r.histogram[1]}}}
    _dump(out)
    return 0


def _cmd_reproduce(args):
    overrides = {"seed": args.seed, "format": args.format,
                 "timing": False if args.no_timing else None}
    if args.config:
        cfg = RunConfig.from_file(args.config, **overrides)
    else:
        cfg = RunConfig(**{k: v for k, v in overrides.items() if v is not None})
    claims = [c.strip() for c in args.claims.split(",") if c.strip()] if args.claims else None
    results = run_reproduce(cfg, claims)
    text = emit_report(results, cfg.format, args.out, cfg.timing)
    if args.out is None:
        sys.stdout.write(text)
    return 0 if all(r.passed for r in results) else 1


def build_parser():
    p = argparse.ArgumentParser(prog="numlab", description="Numerical ranges, radii and indices of normed spaces.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("radius", help="numerical radius of one operator")
    r.add_argument("--space", help="space expression (overrides the operator file)")
    r.add_argument("--op", required=True, help="operator JSON file")
    r.add_argument("--method", default="auto", choices=["exact", "hilbert", "limit", "sample", "auto"])
    r.add_argument("--tol", type=float, default=1e-6)
    r.set_defaults(func=_cmd_radius)

    i = sub.add_parser("index", help="numerical index estimate")
    i.add_argument("--space", required=True)
    i.add_argument("--starts", type=int)
    i.add_argument("--budget", type=int)
    i.add_argument("--seed", type=int, default=0)
    i.add_argument("--threads", type=int, default=1)
    i.add_argument("--oracle", action="store_true", help="also run the 2-D grid oracle")
    i.set_defaults(func=_cmd_index)

    v = sub.add_parser("verify", help="structural predicates")
    v.add_argument("predicate", choices=["lush", "almostcl", "pairs", "crich"])
    v.add_argument("--space")
    v.add_argument("--kmodel", help="K model JSON file (crich)")
    v.add_argument("--grid", type=int, default=64)
    v.add_argument("--eps", type=_eps_list)
    v.set_defaults(func=_cmd_verify)

    c = sub.add_parser("reproduce", help="run the claim suite")
    c.add_argument("--claims", help="comma-separated ids: " + ", ".join(claim_ids()))
    c.add_argument("--out")
    c.add_argument("--format", choices=FORMATS)
    c.add_argument("--seed", type=int)
    c.add_argument("--config", help="key = value config file")
    c.add_argument("--no-timing", action="store_true", help="omit runtimes for byte-stable reports")
    c.set_defaults(func=_cmd_reproduce)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UnsupportedRepresentation as exc:
        print(f"numlab: unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except (InputError, NumlabError) as exc:
        print(f"numlab: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"numlab: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
