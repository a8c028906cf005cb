"""Reproduction harness: run configuration, the claim registry, and reports."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .constructions import build_space, direct_sum, random_symmetric_polygon
from .errors import InputError
from .numindex import (check_duality_equality_findim, index_oracle_2d,
                       index_search_upper, in_index_range)
from .numrange import (check_radius_norm_equality, radius_exact_polytope,
                       radius_hilbert, radius_limit_formula, radius_lower_sampling)
from .operators import Operator, adjoint, op_norm, random_operator
from .verifiers import (KModel, MeasureModel, OpenSet, almost_cl_test,
                        c_rich_criterion, c_rich_witness_search, extreme_pair_report,
                        lushness_test)

FORMATS = ("json", "csv", "markdown")


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    tau_geom: float = 1e-9
    tau_pair: float = 1e-9
    search_tol: float = 2e-2
    starts: int = 0          # 0 selects the per-dimension default
    evals: int = 0
    grid_density: int = 200_000
    threads: int = 1
    format: str = "json"
    timing: bool = True

    def __post_init__(self):
        if min(self.tau_geom, self.tau_pair, self.search_tol) <= 0:
            raise InputError("tolerances must be positive")
        if self.threads < 1:
            raise InputError("thread count must be at least 1")
        if self.format not in FORMATS:
            raise InputError(f"format must be one of {FORMATS}")
        if self.starts < 0 or self.evals < 0 or self.grid_density < 1:
            raise InputError("budgets must be positive")

    @classmethod
    def from_file(cls, path, **overrides):
        """``key = value`` lines; ``#`` starts a comment."""
        kinds = {f.name: f.type for f in fields(cls)}
        values = {}
        try:
            with open(path) as fh:
                lines = fh.read().splitlines()
        except OSError as exc:
            raise InputError(f"cannot read config {path}: {exc}") from exc
        for n, line in enumerate(lines, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InputError(f"{path}:{n}: expected key = value")
            k, v = (s.strip() for s in line.split("=", 1))
            if k not in kinds:
                raise InputError(f"{path}:{n}: unknown key {k!r}")
            values[k] = _coerce(kinds[k], v, f"{path}:{n}")
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def with_env(self, environ=None):
        env = os.environ if environ is None else environ
        if "NUMLAB_THREADS" in env:
            try:
                return replace(self, threads=int(env["NUMLAB_THREADS"]))
            except ValueError as exc:
                raise InputError("NUMLAB_THREADS must be an integer") from exc
        return self

    @property
    def budget(self):
        return (self.starts or None, self.evals or None)


def _coerce(kind, text, where):
    try:
        if kind in ("bool", bool):
            if text.lower() in ("1", "true", "yes", "on"):
                return True
            if text.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if kind in ("int", int):
            return int(text)
        if kind in ("float", float):
            return float(text)
        return text
    except ValueError as exc:
        raise InputError(f"{where}: bad value {text!r}") from exc


def claim_seed(seed, claim_id):
    digest = hashlib.sha256(f"{seed}:{claim_id}".encode()).digest()
    return int.from_bytes(digest[:4], "little")


@dataclass
class ClaimResult:
    claim_id: str
    description: str
    expected: object
    provenance: str
    computed: object
    tolerance: float
    passed: bool
    runtime: float
    details: dict = field(default_factory=dict, compare=False)


class _IndexLog:
    """Every index value computed during a run, for the range check."""

    def __init__(self):
        self._lock = threading.Lock()
        self.entries = []

    def add(self, label, value, complex_field):
        with self._lock:
            self.entries.append((label, float(value), bool(complex_field)))
        return value


@dataclass(frozen=True)
class Claim:
    claim_id: str
    description: str
    provenance: str
    limit: float
    run: object


_REGISTRY = {}


def claim(claim_id, description, provenance, limit):
    def deco(fn):
        _REGISTRY[claim_id] = Claim(claim_id, description, provenance, limit, fn)
        return fn
    return deco


def claim_ids():
    return sorted(_REGISTRY)


def claim_limit(claim_id):
    return _REGISTRY[claim_id].limit


def _search(space, cfg, seed, log, label):
    starts, budget = cfg.budget
    est = index_search_upper(space, starts, budget, seed)
    log.add(label, est.upper, space.is_complex)
    return est


def _oracle(space, cfg, log, label):
    res = index_oracle_2d(space, cfg.grid_density)
    log.add(label, res.value, False)
    return res


# ----------------------------------------------------------------- claims

@claim("hilbert-real-zero", "search upper bound on the real Hilbert plane", "known value 0", 10)
def _hilbert_real(cfg, seed, log):
    s = build_space("hilbert(2, real)")
    est = _search(s, cfg, seed, log, "hilbert(2, real)")
    W = est.witness
    v = radius_hilbert(W).value / op_norm(W)[0]
    ok = est.upper <= 1e-6 and v <= 1e-9
    return 0.0, est.upper, 1e-6, ok, {"witness_radius": v, "witness": W.matrix.tolist()}


@claim("hilbert-complex-half", "search upper bound on the complex Hilbert plane", "known value 1/2", 60)
def _hilbert_complex(cfg, seed, log):
    s = build_space("hilbert(2, complex)")
    est = _search(s, cfg, seed, log, "hilbert(2, complex)")
    return 0.5, est.upper, 5e-3, abs(est.upper - 0.5) <= 5e-3, {}


@claim("m-space-one", "almost-CL and v(T) = ||T|| on random operators of linf(2), linf(3)",
       "M-spaces have index 1", 30)
def _m_space(cfg, seed, log):
    worst, cl = 0.0, True
    rng = np.random.SeedSequence(seed)
    for e, child in zip(("linf(2)", "linf(3)"), rng.spawn(2)):
        s = build_space(e)
        cl = cl and almost_cl_test(s).ok
        for k in range(1000):
            T = random_operator(s, [child.entropy, k])
            worst = max(worst, abs(radius_exact_polytope(T).value - op_norm(T)[0]))
    return "almost-CL and |v-||T|||<=1e-9", worst, 1e-9, cl and worst <= 1e-9, {"almost_cl": cl}


@claim("hexagon-below-one", "2-D oracle on hexquot stays below 0.8 and matches the search",
       "hexagon ball gives index < 1", 120)
def _hexagon(cfg, seed, log):
    s = build_space("hexquot")
    orc = _oracle(s, cfg, log, "hexquot")
    est = _search(s, cfg, seed, log, "hexquot")
    ok = orc.value <= 0.8 and abs(est.upper - orc.value) <= cfg.search_tol
    return "<= 0.8", orc.value, cfg.search_tol, ok, {
        "search": est.upper, "grid_value": orc.grid_value, "grid_bound": orc.grid_bound}


@claim("polygon-trend", "oracle index of polygon(n) strictly decreases for n = 2..6",
       "index of regular polygons tends to 0", 600)
def _polygon(cfg, seed, log):
    vals = [_oracle(build_space(f"polygon({n})"), cfg, log, f"polygon({n})").value for n in range(2, 7)]
    ok = abs(vals[0] - 1.0) <= 1e-3 and all(a > b for a, b in zip(vals, vals[1:]))
    return "strictly decreasing, polygon(2) = 1", ";".join(_num(v) for v in vals), 1e-3, ok, {"values": vals}


@claim("adjoint-radius", "v(T) = v(T*) on linf(3) and l1(3)", "radius is preserved by adjoints", 30)
def _adjoint(cfg, seed, log):
    worst = 0.0
    for e, child in zip(("linf(3)", "l1(3)"), np.random.SeedSequence(seed).spawn(2)):
        s = build_space(e)
        for k in range(200):
            T = random_operator(s, [child.entropy, k])
            worst = max(worst, abs(radius_exact_polytope(T).value - radius_exact_polytope(adjoint(T)).value))
    return 0.0, worst, 1e-9, worst <= 1e-9, {}


@claim("limit-formula-sandwich", "sampling <= exact <= limit formula, limit within 1e-6",
       "limit formula for the radius", 60)
def _sandwich(cfg, seed, log):
    gap, order_ok = 0.0, True
    for e, child in zip(("linf(2)", "l1(2)", "hexquot"), np.random.SeedSequence(seed).spawn(3)):
        s = build_space(e)
        for k in range(100):
            T = random_operator(s, [child.entropy, k])
            ex = radius_exact_polytope(T).value
            lo = radius_lower_sampling(T, seed=k).value
            lim = radius_limit_formula(T)
            order_ok &= lo <= ex + cfg.tau_pair and ex <= lim.upper + cfg.tau_pair
            gap = max(gap, abs(lim.value - ex))
    return 0.0, gap, 1e-6, order_ok and gap <= 1e-6, {"ordered": bool(order_ok)}


@claim("equality-criterion", "v(T) = ||T|| iff max ||Id + wT|| = 1 + ||T||",
       "norm-attaining characterization of v(T) = ||T||", 60)
def _equality(cfg, seed, log):
    bad, total, agree = 0, 0, 0
    spaces = ("linf(2)", "hexquot", "hilbert(2, real)")
    for e, child in zip(spaces, np.random.SeedSequence(seed).spawn(3)):
        s = build_space(e)
        ops = [random_operator(s, [child.entropy, k]) for k in range(66)]
        ops.append(Operator.identity(s))
        for T in ops:
            r = check_radius_norm_equality(T, cfg.tau_pair)
            total += 1
            bad += not r.consistent
            agree += r.radius_equals_norm
    return 0, bad, 0, bad == 0, {"operators": total, "with_equality": int(agree)}


@claim("findim-duality", "n(X) = n(X*) for 2-D polytope spaces", "reflexive spaces", 600)
def _duality(cfg, seed, log):
    cases = {e: build_space(e) for e in ("linf(2)", "hexquot", "polygon(4)")}
    cases[f"random_polygon(5, {seed})"] = random_symmetric_polygon(5, seed)
    starts, budget = cfg.budget
    diffs = {}
    for label, space in cases.items():
        rep = check_duality_equality_findim(space, starts, budget, seed, cfg.search_tol)
        log.add(label, rep.space.value, False)
        log.add(f"dual({label})", rep.dual.value, False)
        diffs[label] = rep.difference
    worst = max(diffs.values())
    return 0.0, worst, cfg.search_tol, worst <= cfg.search_tol, {"differences": diffs}


@claim("sum-formula", "n(A sum_inf B) = min(n(A), n(B))", "index of M-sums", 600)
def _sum(cfg, seed, log):
    worst, vals = 0.0, {}
    for a, b in (("linf(2)", "hexquot"), ("hexquot", "hexquot")):
        A, B = build_space(a), build_space(b)
        S = direct_sum(A, B, "inf")
        label = f"sum_inf({a}, {b})"
        n_sum = _search(S, cfg, seed, log, label).upper
        parts = [_oracle(X, cfg, log, x).value for X, x in ((A, a), (B, b))]
        vals[label] = n_sum
        worst = max(worst, abs(n_sum - min(parts)))
    return 0.0, worst, cfg.search_tol, worst <= cfg.search_tol, {"sums": vals}


@claim("truncation-mechanism", "xtrunc(1) has the hexagon's index and is not almost-CL",
       "M-summand structure of the truncations", 600)
def _truncation(cfg, seed, log):
    x = build_space("xtrunc(1)")
    n_x = _search(x, cfg, seed, log, "xtrunc(1)").upper
    n_h = _oracle(build_space("hexquot"), cfg, log, "hexquot").value
    cl_x = almost_cl_test(x).ok
    cl_c = almost_cl_test(build_space("linf(3)")).ok
    ok = abs(n_x - n_h) <= cfg.search_tol and not cl_x and cl_c
    return n_h, n_x, cfg.search_tol, ok, {"almost_cl_xtrunc": cl_x, "almost_cl_linf3": cl_c}


@claim("extreme-pairs", "extreme pairings are 1 on linf(3), l1(3) and drop below on hexquot",
       "extreme-pair rigidity for index 1", 10)
def _pairs(cfg, seed, log):
    m = {e: extreme_pair_report(build_space(e)).minimum for e in ("linf(3)", "l1(3)", "hexquot")}
    ok = abs(m["linf(3)"] - 1) <= 1e-9 and abs(m["l1(3)"] - 1) <= 1e-9 and m["hexquot"] < 0.9
    return "1, 1, < 0.9", ";".join(_num(m[k]) for k in ("linf(3)", "l1(3)", "hexquot")), 1e-9, ok, m


def crich_examples():
    """The three kernels of ``C(ℕ ∪ {∞})`` with the open set that tests each."""
    return [
        ("delta_inf", MeasureModel({"inf": 1.0}), OpenSet(tails={"n": 5}), True, 0.0),
        ("delta_1", MeasureModel({"1": 1.0}), OpenSet(frozenset({"1"})), False, 1.0),
        ("mixed", MeasureModel({"3": 0.5, "inf": 0.5}), OpenSet(frozenset({"3"})), False, 0.5),
    ]


@claim("crich-criterion", "isolated-point criterion for C-rich kernels, with LP witnesses",
       "C-rich kernel criterion", 30)
def _crich(cfg, seed, log):
    K = KModel.one_point()
    ok, out = True, {}
    for name, f, U, expect, mass in crich_examples():
        crit = c_rich_criterion(K, [f])
        w = c_rich_witness_search(K, [f], U, 0.5)
        agree = (w.found and w.distance <= 1e-9) if expect else (not w.found and w.distance >= mass - 1e-7)
        ok &= crit == expect and agree
        out[name] = {"criterion": crit, "distance": w.distance}
    return "true, false, false", ";".join(str(out[n]["criterion"]).lower() for n in out), 0, ok, out


@claim("lushness-falsifier", "no lushness failures on linf(2); failures on hexquot",
       "lush spaces have index 1", 120)
def _lush(cfg, seed, log):
    a = lushness_test(build_space("linf(2)"), grid=64)
    b = lushness_test(build_space("hexquot"), grid=64)
    ok = a.ok and not b.ok
    return "0 and >= 1", f"{len(a.failures)};{len(b.failures)}", 0, ok, {
        "pass_rate_hexquot": b.pass_rate}


RANGE_ID = "range-bounds"
_REGISTRY[RANGE_ID] = Claim(RANGE_ID, "every computed index lies in [0, 1]; complex ones >= 1/e",
                            "attainable index ranges", 600, None)


def _range_check(cfg, seed, log):
    if not log.entries:
        for e in ("linf(2)", "hexquot", "polygon(4)"):
            _oracle(build_space(e), cfg, log, e)
        _search(build_space("hilbert(2, real)"), replace(cfg, starts=32), seed, log, "hilbert(2, real)")
        _search(build_space("hilbert(2, complex)"), replace(cfg, starts=16), seed, log, "hilbert(2, complex)")
    bad = [(lab, v) for lab, v, c in log.entries if not in_index_range(v, c)]
    worst_c = min((v for _, v, c in log.entries if c), default=math.nan)
    return "[0, 1] real, [1/e, 1] complex", len(bad), 0, not bad, {
        "checked": len(log.entries), "violations": bad, "min_complex": worst_c}


# ------------------------------------------------------------------ runner

def _execute(c, fn, cfg, log):
    t0 = time.perf_counter()
    expected, computed, tol, ok, details = fn(cfg, claim_seed(cfg.seed, c.claim_id), log)
    return ClaimResult(c.claim_id, c.description, expected, c.provenance, computed, tol,
                       bool(ok), time.perf_counter() - t0, details)


def run_reproduce(config=None, claims=None):
    """Run the selected claims (all by default); results sorted by claim id."""
    cfg = (config or RunConfig()).with_env()
    ids = claim_ids() if not claims else list(dict.fromkeys(claims))
    unknown = [c for c in ids if c not in _REGISTRY]
    if unknown:
        raise InputError(f"unknown claim id(s): {', '.join(unknown)}")
    log = _IndexLog()
    work = [c for c in ids if c != RANGE_ID]
    run = lambda cid: _execute(_REGISTRY[cid], _REGISTRY[cid].run, cfg, log)
    if cfg.threads > 1:
        with ThreadPoolExecutor(cfg.threads) as pool:
            results = list(pool.map(run, work))
    else:
        results = [run(c) for c in work]
    if RANGE_ID in ids:
        results.append(_execute(_REGISTRY[RANGE_ID], _range_check, cfg, log))
    return sorted(results, key=lambda r: r.claim_id)


# ------------------------------------------------------------------ reports

def _num(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, float, np.integer, np.floating)):
        return format(float(x), ".12g")
    return str(x)


def _row(r, timing):
    return {
        "claim_id": r.claim_id,
        "expected": _num(r.expected),
        "computed": _num(r.computed),
        "tol": _num(r.tolerance),
        "pass": "true" if r.passed else "false",
        "runtime": format(r.runtime, ".3f") if timing else "-",
    }


def render_report(results, fmt="json", timing=True):
    rows = [_row(r, timing) for r in sorted(results, key=lambda r: r.claim_id)]
    if fmt == "json":
        objs = []
        for r, row in zip(sorted(results, key=lambda r: r.claim_id), rows):
            objs.append(dict(row, description=r.description, provenance=r.provenance,
                             **{"pass": r.passed}))
        return json.dumps({"claims": objs, "all_pass": all(r.passed for r in results)},
                          indent=2, sort_keys=True) + "\n"
    cols = ["claim_id", "expected", "computed", "tol", "pass", "runtime"]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, cols, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        return buf.getvalue()
    if fmt == "markdown":
        lines = ["| " + " | ".join(cols) + " |", "|" + "---|" * len(cols)]
        lines += ["| " + " | ".join(row[c] for c in cols) + " |" for row in rows]
        return "\n".join(lines) + "\n"
    raise InputError(f"unknown format {fmt!r}")


def emit_report(results, fmt="json", path=None, timing=True):
    """Write the report to ``path`` (stdout when ``None``); returns the text."""
    text = render_report(results, fmt, timing)
    if path is None:
        return text
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc.strerror}") from exc
    return text
