"""Successor-selection iteration for the startpoint / endpoint / fixed-point variants.

Each variant fixes a one-step inequality that a successor ``y in Tx`` has to
satisfy.  With ``f(x) = H({x}, Tx)``, ``h = H({x}, {y}) = d(x, y)``:

========  ==========================================  =====================
variant   successor condition                          extra condition
========  ==========================================  =====================
GABA_C    f(y) <= c * h
GABA_PHI  f(y) <= Phi(h) * h
GABA_B    f(y) <= Phi(h) * h                           (b gauge in ``eta``)
V1        f(y) <= phi(f(x)) * h
V2        f(y) <= phi(h) * h
V3..V6    f(y) <= phi(f(x))                            eta(h) <= f(x)
V7, V8    f(y) <= phi(h)                               eta(h) <= f(x)
========  ==========================================  =====================

``mode="end"`` runs the start iteration on the conjugate space.
``mode="fixed"`` uses ``f = H^s({x}, Tx)`` and requires the successor
condition on both sides at once (``h = d(x, y)`` with ``f(x) -> H({x}, Tx)``
and ``h = d(y, x)`` with ``f(x) -> H(Tx, {x})``); the eta condition becomes
``eta(d^s(x, y)) <= min(H({x}, Tx), H(Tx, {x}))``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from . import gauge as G
from .errors import EmptyImage, NoFeasibleSuccessor, TraceTooShort, UnknownVariant
from .hausdorff import SetValuedMap, all_f, f_start, image
from .spaces import MatrixSpace, Space, classify_cauchy

VARIANT_IDS = ("GABA_C", "GABA_PHI", "GABA_B", "V1", "V2", "V3", "V4", "V5", "V6", "V7", "V8")
MODES = ("start", "end", "fixed")

TOL_FEAS = 1e-9
EPS_CONV = 1e-8
MAX_ITER = 10_000
RECOMPUTE_TOL = 1e-12

REQUIRED_PROPS = {
    "GABA_C": frozenset(),
    "GABA_PHI": frozenset(),
    "GABA_B": frozenset({"eta_nondecreasing"}),
    "V1": frozenset(),
    "V2": frozenset(),
    "V3": frozenset({"phi_nondecreasing"}),
    "V4": frozenset({"eta_nondecreasing"}),
    "V5": frozenset({"phi_continuous", "phi_nondecreasing", "eta_le_identity"}),
    "V6": frozenset({"eta_continuous", "eta_nondecreasing", "eta_lt_identity"}),
    "V7": frozenset({"phi_nondecreasing", "phi_subadditive"}),
    "V8": frozenset({"eta_nondecreasing", "eta_subadditive"}),
}

_FX_BOUND = {"V1", "V3", "V4", "V5", "V6"}     # gauge evaluated at f(x)
_TIMES_H = {"GABA_C", "GABA_PHI", "GABA_B", "V1", "V2"}
_ETA_SIDE = {"V3", "V4", "V5", "V6", "V7", "V8"}


@dataclass(frozen=True)
class VariantSpec:
    """Which theorem governs an iteration, its gauges and its mode.

    ``phi`` holds phi (V*), Phi (GABA_PHI, GABA_B) or the constant c
    (GABA_C).  ``eta`` holds eta (V*) or the bounding function b (GABA_B).
    """

    id: str
    mode: str = "start"
    phi: G.Gauge | None = None
    eta: G.Gauge | None = None
    extra_props: frozenset = frozenset()

    def __post_init__(self):
        if self.id not in VARIANT_IDS:
            raise UnknownVariant(self.id)
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.phi is None:
            raise ValueError(f"variant {self.id} needs a phi gauge")
        if self.id not in ("GABA_C", "GABA_PHI") and self.eta is None:
            raise ValueError(f"variant {self.id} needs an eta gauge")

    @classmethod
    def gaba_c(cls, c: float, mode: str = "start") -> "VariantSpec":
        return cls("GABA_C", mode, phi=G.Constant(c, range="[0,1)"))

    @property
    def c(self) -> float | None:
        return self.phi.c if self.id == "GABA_C" and isinstance(self.phi, G.Constant) else None

    @property
    def pair(self) -> G.GaugePair:
        eta = self.eta if self.eta is not None else G.Constant(1.0)
        return G.GaugePair(self.phi, eta, REQUIRED_PROPS[self.id] | self.extra_props)

    def with_mode(self, mode: str) -> "VariantSpec":
        return VariantSpec(self.id, mode, self.phi, self.eta, self.extra_props)

    def to_json(self) -> dict:
        out = {"variant": self.id, "mode": self.mode, "phi": self.phi.to_json()}
        if self.eta is not None:
            out["eta"] = self.eta.to_json()
        return out


# -- side conditions on the gauges ----------------------------------------

def _b_of(g: G.Gauge, grid) -> float:
    return g.b if g.b is not None else float(np.min(g(grid)))


def _range_check(g: G.Gauge, grid, lo: float, hi: float, upper_incl: bool, name: str) -> G.CheckResult:
    ts = np.asarray(grid, dtype=float)
    vals = g(ts)
    bad = (vals < lo) | ((vals > hi) if upper_incl else (vals >= hi))
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        return G.CheckResult(name, False, float(ts[i]),
                             f"value {vals[i]!r} outside [{lo}, {hi}{']' if upper_incl else ')'}")
    return G.CheckResult(name, True, detail=f"[{lo}, {hi}{']' if upper_incl else ')'}")


def side_conditions(variant: VariantSpec, grid) -> list[G.CheckResult]:
    """Sampled checks of every gauge hypothesis the variant states."""
    return list(_side_conditions_cached(variant, tuple(float(t) for t in np.unique(grid))))


@lru_cache(maxsize=256)
def _side_conditions_cached(variant: VariantSpec, grid: tuple) -> tuple:
    ts = np.asarray(grid)
    vid, phi, eta, pair = variant.id, variant.phi, variant.eta, variant.pair
    out: list[G.CheckResult] = []
    if vid == "GABA_C":
        c = float(phi(0.0))
        ok = isinstance(phi, G.Constant) and 0 < c < 1
        out.append(G.CheckResult("c_in_(0,1)", ok, None if ok else c, sampled=False))
    elif vid == "GABA_PHI":
        out.append(_range_check(phi, ts, 0.0, 1.0, False, "Phi_range"))
        out.append(G.check_limsup_below(phi, ts, "limsup_Phi_lt_1"))
    elif vid == "GABA_B":
        a = _b_of(eta, ts)
        out.append(G.CheckResult("a_positive", a > 0, None if a > 0 else a))
        out.append(_range_check(eta, ts, max(a, 0.0), 1.0, False, "b_range"))
        out.append(_range_check(phi, ts, 0.0, 1.0, False, "Phi_range"))
        out.append(G.check_pointwise_dominance(pair, ts))
        out.append(G.check_limsup_below(phi, ts, "limsup_Phi_lt_limsup_b", bound=eta))
    elif vid in ("V1", "V2"):
        b = _b_of(eta, ts)
        out.append(G.CheckResult("b_in_(0,1)", 0 < b < 1, None if 0 < b < 1 else b))
        out.append(_range_check(phi, ts, 0.0, 1.0, False, "phi_range"))
        out.append(_range_check(eta, ts, b, 1.0, vid == "V2", "eta_range"))
        out.append(G.check_pointwise_dominance(pair, ts))
        out.append(G.check_limsup_below(pair.ratio, ts, "limsup_ratio_lt_1"))
    else:
        out.append(_range_check(phi, ts, 0.0, math.inf, False, "phi_range"))
        out.append(_range_check(eta, ts, 0.0, math.inf, False, "eta_range"))
        out.append(G.check_pointwise_dominance(pair, ts))
        out.append(G.check_limsup_below(pair.ratio, ts, "limsup_ratio_lt_1"))
    out.extend(G.check_declared(pair, ts).values())
    return tuple(out)


# -- per-candidate inequalities -------------------------------------------

@dataclass(frozen=True)
class Inequality:
    name: str
    lhs: float
    rhs: float

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs


@dataclass(frozen=True)
class Candidate:
    y: object
    f_y: float
    h: float
    inequalities: tuple[Inequality, ...]

    @property
    def slack(self) -> float:
        return min(q.slack for q in self.inequalities)

    def feasible(self, tol: float = TOL_FEAS) -> bool:
        return self.slack >= -tol

    def to_dict(self) -> dict:
        return {"y": self.y, "f_y": self.f_y, "h": self.h,
                "inequalities": [{"name": q.name, "lhs": q.lhs, "rhs": q.rhs} for q in self.inequalities]}


class _Context:
    """Caches f-values and distances for one (space, map, mode) triple."""

    def __init__(self, space: Space, T: SetValuedMap, mode: str):
        self.mode = mode
        self.T = T
        self.base = space.conjugate() if mode == "end" else space
        self.work = self.base.symmetrize() if mode == "fixed" else self.base
        self._f: dict = {}
        self._fs: dict = {}
        self._fe: dict = {}
        self._cached = None
        if isinstance(space, MatrixSpace):
            pts = space.points()
            dom = [x for x in pts if T.in_domain(x)]
            if len(dom) == len(pts):
                self._cached = {
                    "f": all_f(self.work, T, pts, "start"),
                    "fs": all_f(self.base, T, pts, "start"),
                    "fe": all_f(self.base, T, pts, "end"),
                }

    def _get(self, key: str, store: dict, x, kind: str, space: Space) -> float:
        if self._cached is not None:
            return float(self._cached[key][x])
        if x not in store:
            from .hausdorff import f_end
            store[x] = (f_start if kind == "start" else f_end)(space, self.T, x)
        return store[x]

    def f(self, x) -> float:
        return self._get("f", self._f, x, "start", self.work)

    def fs(self, x) -> float:
        return self._get("fs", self._fs, x, "start", self.base)

    def fe(self, x) -> float:
        return self._get("fe", self._fe, x, "end", self.base)

    def h(self, x, y) -> float:
        return self.base._dist(x, y)

    def d_step(self, x, y) -> float:
        return self.work._dist(x, y)


def _bound(vid: str, phi: G.Gauge, fx: float, h: float) -> float:
    g = phi(fx) if vid in _FX_BOUND else phi(h)
    return g * h if vid in _TIMES_H else g


def _inequalities(variant: VariantSpec, ctx: _Context, x, y) -> tuple[Inequality, ...]:
    vid, phi, eta = variant.id, variant.phi, variant.eta
    fy = ctx.f(y)
    if ctx.mode != "fixed":
        fx, h = ctx.f(x), ctx.h(x, y)
        out = [Inequality("successor", fy, _bound(vid, phi, fx, h))]
        if vid in _ETA_SIDE:
            out.append(Inequality("eta", eta(h), fx))
        return tuple(out)
    fs, fe = ctx.fs(x), ctx.fe(x)
    hs, he = ctx.h(x, y), ctx.h(y, x)
    out = [Inequality("successor", fy, min(_bound(vid, phi, fs, hs), _bound(vid, phi, fe, he)))]
    if vid in _ETA_SIDE:
        out.append(Inequality("eta", eta(max(hs, he)), min(fs, fe)))
    return tuple(out)


def _evaluate(ctx: _Context, variant: VariantSpec, x) -> list[Candidate]:
    img = image(ctx.T, x)
    return [Candidate(y, ctx.f(y), ctx.d_step(x, y), _inequalities(variant, ctx, x, y)) for y in img]


def evaluate_candidates(space: Space, T: SetValuedMap, x, variant: VariantSpec) -> list[Candidate]:
    """Every ``y in Tx`` with its inequality values, feasible or not."""
    space.check_point(x)
    return _evaluate(_Context(space, T, variant.mode), variant, x)


def feasible_successors(space: Space, T: SetValuedMap, x, variant: VariantSpec,
                        tol_feas: float = TOL_FEAS) -> list[Candidate]:
    return [c for c in evaluate_candidates(space, T, x, variant) if c.feasible(tol_feas)]


def select_successor(candidates: Sequence[Candidate], how: str = "min_f"):
    """Deterministic choice: least f(y), then least H({x}, {y}), then point order."""
    if not candidates:
        raise NoFeasibleSuccessor("no feasible successor")
    if how == "first":
        return candidates[0].y
    return min(candidates, key=lambda c: (c.f_y, c.h, c.y)).y


# -- iteration ------------------------------------------------------------

@dataclass(frozen=True)
class Step:
    n: int
    x: object
    f: float
    d_n: float
    y: object
    slack: float


@dataclass(frozen=True)
class Outcome:
    kind: str  # "converged" | "violation" | "max_iter"
    x: object
    f: float
    candidates: tuple[Candidate, ...] = ()

    @property
    def converged(self) -> bool:
        return self.kind == "converged"


@dataclass(frozen=True)
class IterationTrace:
    variant: VariantSpec
    x0: object
    eps: float
    max_iter: int
    tol_feas: float
    steps: tuple[Step, ...]
    outcome: Outcome
    space: Space = field(repr=False)

    @property
    def points(self) -> list:
        return [s.x for s in self.steps] + [self.outcome.x]

    @property
    def f_values(self) -> list[float]:
        return [s.f for s in self.steps] + [self.outcome.f]

    @property
    def iterations(self) -> int:
        return len(self.steps)

    def summary(self) -> dict:
        out = {
            "variant": self.variant.id, "mode": self.variant.mode, "x0": self.x0,
            "eps": self.eps, "max_iter": self.max_iter, "tol_feas": self.tol_feas,
            "iterations": self.iterations, "outcome": self.outcome.kind,
            "x_final": self.outcome.x, "f_final": self.outcome.f,
        }
        if self.outcome.kind == "violation":
            out["witness"] = {"x": self.outcome.x,
                              "candidates": [c.to_dict() for c in self.outcome.candidates]}
        return out


def solve(space: Space, T: SetValuedMap, variant: VariantSpec, x0, eps_conv: float = EPS_CONV,
          max_iter: int = MAX_ITER, tol_feas: float = TOL_FEAS, selection: str = "min_f") -> IterationTrace:
    """Iterate ``x_{n+1} = select(feasible successors of x_n)`` until ``f(x_n) <= eps_conv``.

    Stopping with no feasible successor is reported as a ``violation``
    outcome carrying the full candidate table, not raised.
    """
    if eps_conv <= 0 or max_iter < 1:
        raise ValueError("need eps_conv > 0 and max_iter >= 1")
    space.check_point(x0)
    ctx = _Context(space, T, variant.mode)
    steps: list[Step] = []
    x = x0
    while True:
        fx = ctx.f(x)
        if fx <= eps_conv:
            outcome = Outcome("converged", x, fx)
            break
        if len(steps) >= max_iter:
            outcome = Outcome("max_iter", x, fx)
            break
        cands = _evaluate(ctx, variant, x)
        if not cands:
            raise EmptyImage(f"image of {x!r} is empty")
        ok = [c for c in cands if c.feasible(tol_feas)]
        if not ok:
            outcome = Outcome("violation", x, fx, tuple(cands))
            break
        y = select_successor(ok, selection)
        chosen = next(c for c in ok if c.y == y)
        steps.append(Step(len(steps), x, fx, chosen.h, y, chosen.slack))
        x = y
    return IterationTrace(variant, x0, eps_conv, max_iter, tol_feas, tuple(steps), outcome, ctx.work)


def verify_trace(space: Space, T: SetValuedMap, variant: VariantSpec, steps: Iterable[Step],
                 tol_feas: float = TOL_FEAS) -> list[str]:
    """Re-assert every recorded step from scratch; returns a list of problems."""
    ctx = _Context(space, T, variant.mode)
    problems = []
    for s in steps:
        if s.y not in image(T, s.x):
            problems.append(f"step {s.n}: {s.y!r} not in T({s.x!r})")
            continue
        f = ctx.f(s.x)
        if abs(f - s.f) > RECOMPUTE_TOL:
            problems.append(f"step {s.n}: f={s.f!r} recomputes to {f!r}")
        ineq = _inequalities(variant, ctx, s.x, s.y)
        slack = min(q.slack for q in ineq)
        if slack < -tol_feas:
            problems.append(f"step {s.n}: slack {slack!r} below -{tol_feas}")
        d = ctx.d_step(s.x, s.y)
        if abs(d - s.d_n) > RECOMPUTE_TOL:
            problems.append(f"step {s.n}: d_n={s.d_n!r} recomputes to {d!r}")
        if d > f + RECOMPUTE_TOL:
            problems.append(f"step {s.n}: H(x, y)={d!r} exceeds f(x)={f!r}")
    return problems


# -- diagnostics ----------------------------------------------------------

@dataclass(frozen=True)
class DecayReport:
    monotone: bool
    monotone_from: int
    q_hat: float
    ratios: tuple[float, ...]
    dn_lt_2Dn: bool
    dn_violations: tuple[int, ...]
    dn_eq_Dn: bool
    left_k: object  # CauchyVerdict | None
    cauchy_tol: float

    def to_dict(self) -> dict:
        lk = self.left_k
        return {
            "monotone": self.monotone, "monotone_from": self.monotone_from, "q_hat": self.q_hat,
            "dn_lt_2Dn": self.dn_lt_2Dn, "dn_violations": list(self.dn_violations),
            "dn_eq_Dn": self.dn_eq_Dn, "cauchy_tol": self.cauchy_tol,
            "left_k_cauchy": None if lk is None else lk.left_k,
        }


def decay_diagnostics(trace: IterationTrace, tail: float = 0.5,
                      cauchy_tol: float | None = None) -> DecayReport:
    """Decay of f along a trace.

    * ``monotone_from``: least n0 with f non-increasing from n0 on;
      ``monotone`` is true when that happens inside the first half.
    * ``q_hat``: largest ratio f(x_{n+1}) / f(x_n) over the last ``tail``
      fraction of defined ratios (0/0 skipped).
    * ``dn_lt_2Dn``: d_n < 2 D_n at every recorded step.
    * ``left_k``: left K-Cauchy verdict of the iterates; the default
      tolerance is the geometric tail bound 2 D_{n0} / (1 - q_hat).
    """
    if trace.outcome.kind == "violation":
        raise ValueError("decay diagnostics need a converged or max_iter trace")
    if len(trace.points) < 3:
        raise TraceTooShort(f"trace has {len(trace.points)} iterates, need at least 3")
    fs = trace.f_values
    n0 = len(fs) - 1
    while n0 > 0 and fs[n0] <= fs[n0 - 1]:
        n0 -= 1
    ratios = tuple(b / a for a, b in zip(fs, fs[1:]) if a > 0)
    k = max(1, math.ceil(tail * len(ratios))) if ratios else 0
    q_hat = max(ratios[-k:]) if ratios else 0.0

    viol = tuple(s.n for s in trace.steps if not s.d_n < 2 * s.f)
    eq = all(s.d_n == s.f for s in trace.steps)

    pts = trace.points
    start = len(pts) - max(1, math.ceil(0.25 * len(pts)))
    if cauchy_tol is None:
        cauchy_tol = 2 * fs[start] / (1 - q_hat) if q_hat < 1 else math.inf
    left_k = classify_cauchy(trace.space, pts, cauchy_tol) if len(pts) >= 3 else None
    return DecayReport(
        monotone=n0 <= len(fs) // 2, monotone_from=n0, q_hat=q_hat, ratios=ratios,
        dn_lt_2Dn=not viol, dn_violations=viol, dn_eq_Dn=eq, left_k=left_k, cauchy_tol=cauchy_tol,
    )


# -- CSV round trip -------------------------------------------------------

CSV_HEADER = ("n", "x", "f", "d_n", "y", "slack")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return repr(float(v))


def _parse_point(s: str):
    if s == "":
        return None
    try:
        return int(s)
    except ValueError:
        return float(s)


def trace_to_csv(trace: IterationTrace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for s in trace.steps:
        w.writerow([s.n, _fmt(s.x), _fmt(s.f), _fmt(s.d_n), _fmt(s.y), _fmt(s.slack)])
    o = trace.outcome
    w.writerow(["outcome", o.kind, _fmt(o.x), _fmt(o.f), "", ""])
    return buf.getvalue()


def trace_from_csv(text: str) -> tuple[list[Step], tuple[str, object, float]]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ValueError("missing trace CSV header")
    steps, outcome = [], None
    for row in rows[1:]:
        if row[0] == "outcome":
            outcome = (row[1], _parse_point(row[2]), float(row[3]))
            continue
        steps.append(Step(int(row[0]), _parse_point(row[1]), float(row[2]), float(row[3]),
                          _parse_point(row[4]), float(row[5])))
    if outcome is None:
        raise ValueError("trace CSV has no outcome footer")
    return steps, outcome
