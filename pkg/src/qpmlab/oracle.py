"""Brute-force ground truth on finite instances and seeded instance generators."""

from __future__ import annotations

import numbers
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import gauge as G
from .errors import GridRequired
from .hausdorff import SetValuedMap, TableMap, all_f, point_to_set
from .solver import TOL_FEAS, Candidate, VariantSpec, _Context, _evaluate, side_conditions
from .spaces import MatrixSpace, Space, metric_closure, verify_axioms

EPS_T0 = 2.0 ** -20  # ~1e-6, dyadic so perturbed integer costs still add exactly


def enumerate_points(space: Space, grid=None) -> list:
    """All points of a finite space, or the grid points of an interval space."""
    if space.is_finite:
        return space.points()
    if grid is None:
        raise GridRequired("interval spaces need an enumeration grid")
    if isinstance(grid, numbers.Real):
        return space.grid(step=float(grid))
    return space.grid(points=grid)


def brute_force_points(space: Space, T: SetValuedMap, kind: str, eps: float = 1e-9, grid=None) -> list:
    """Every enumerated x with ``f_kind(x) <= eps``.

    ``start``: H({x}, Tx); ``end``: H(Tx, {x}); ``fixed``: d^s(x, Tx), the
    relaxed form of ``x in Tx``.  Closed-form maps are evaluated exactly at
    grid points; images are never snapped to the grid.
    """
    pts = enumerate_points(space, grid)
    if kind in ("start", "end"):
        vals = all_f(space, T, pts, kind)
    elif kind == "fixed":
        sym = space.symmetrize()
        vals = np.array([point_to_set(sym, x, T(x)) for x in pts])
    else:
        raise ValueError(f"unknown kind {kind!r}")
    return [x for x, v in zip(pts, vals) if v <= eps]


@dataclass(frozen=True)
class Witness:
    x: object
    candidates: tuple[Candidate, ...]

    def to_dict(self) -> dict:
        return {"x": self.x, "candidates": [c.to_dict() for c in self.candidates]}


@dataclass(frozen=True)
class HypothesisReport:
    variant: str
    mode: str
    verdict: str  # "pass" | "fail"
    witnesses: tuple[Witness, ...]
    side_conditions: tuple[G.CheckResult, ...]
    metadata: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    @property
    def map_ok(self) -> bool:
        return not self.witnesses

    def to_dict(self) -> dict:
        return {
            "variant": self.variant, "mode": self.mode, "verdict": self.verdict,
            "witnesses": [w.to_dict() for w in self.witnesses],
            "side_conditions": [c.to_dict() for c in self.side_conditions],
            "metadata": dict(self.metadata),
        }


def exhaustive_hypothesis_check(space: Space, T: SetValuedMap, variant: VariantSpec, enumeration=None,
                                tol_feas: float = TOL_FEAS, gauge_grid=None,
                                check_gauges: bool = True) -> HypothesisReport:
    """Check that every enumerated x has a feasible successor, and the gauge conditions.

    Witnesses (points with no feasible y) come out sorted by point order.
    ``gauge_grid`` defaults to 512 log-spaced points on [0, 2 * diameter].
    """
    pts = enumerate_points(space, enumeration)
    ctx = _Context(space, T, variant.mode)
    witnesses = []
    for x in pts:
        cands = _evaluate(ctx, variant, x)
        if not any(c.feasible(tol_feas) for c in cands):
            witnesses.append(Witness(x, tuple(cands)))
    if gauge_grid is None:
        knots = set(variant.phi.knots()) | set(variant.eta.knots() if variant.eta else ())
        gauge_grid = G.default_grid(2 * space.diameter(), knots=knots)
    sides = tuple(side_conditions(variant, gauge_grid)) if check_gauges else ()
    ok = not witnesses and all(c.passed for c in sides)
    meta = {
        "n_points": len(pts), "tol_feas": tol_feas, "gauge_grid_points": len(np.unique(gauge_grid)),
        "gauge_grid_max": float(np.max(gauge_grid)), "enumeration": "exhaustive" if space.is_finite else "grid",
        "gauges_checked": check_gauges, "sampled_gauge_checks": True,
    }
    return HypothesisReport(variant.id, variant.mode, "pass" if ok else "fail",
                            tuple(witnesses), sides, meta)


def replay_witness(space: Space, T: SetValuedMap, variant: VariantSpec, witness: Witness) -> bool:
    """Recompute the stored candidate table of ``witness`` from scratch."""
    fresh = _evaluate(_Context(space, T, variant.mode), variant, witness.x)
    return tuple(fresh) == tuple(witness.candidates)


# -- generators -----------------------------------------------------------

def random_space(n: int, seed: int, density: float = 0.6, scale: int = 8, zero_frac: float = 0.15,
                 resolution: int = 4) -> MatrixSpace:
    """Seeded random finite T0 quasi-pseudometric space.

    Off-diagonal raw costs are 0 with probability ``zero_frac``, a multiple
    of ``1 / resolution`` in ``(0, scale]`` with probability ``density``,
    and a long finite detour cost otherwise.  The min-plus closure is taken;
    raw zero edges lying on a zero cycle are raised to ``EPS_T0`` and the
    closure retaken, which leaves no distinct pair at distance 0 both ways.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    u = rng.random((n, n))
    costs = rng.integers(1, scale * resolution + 1, size=(n, n)) / resolution
    raw = np.where(u < zero_frac, 0.0, np.where(u < zero_frac + density, costs, float(scale * n)))
    np.fill_diagonal(raw, 0.0)
    space = metric_closure(raw)
    D = space.dist
    zero = (D == 0) & (D.T == 0)
    np.fill_diagonal(zero, False)
    if zero.any():
        raw = np.where(zero & (raw == 0), EPS_T0, raw)
        space = metric_closure(raw)
    rep = verify_axioms(space, check_t0=True)
    if not rep.ok:  # pragma: no cover - construction guarantees this
        raise AssertionError(f"random_space produced an invalid space: {rep.failures[:3]}")
    return MatrixSpace(space.dist, t0_flag=True)


def random_setmap(space: MatrixSpace, seed: int, max_card: int = 2) -> TableMap:
    """Seeded map giving each point a uniformly drawn nonempty subset of size <= max_card."""
    if max_card < 1:
        raise ValueError("max_card must be >= 1")
    rng = np.random.default_rng(seed)
    n = space.n
    table = {}
    for x in range(n):
        k = int(rng.integers(1, min(max_card, n) + 1))
        table[x] = sorted(int(v) for v in rng.choice(n, size=k, replace=False))
    return TableMap(table)


@dataclass(frozen=True)
class Agreement:
    variant: str
    mode: str
    hypothesis_passed: bool
    starts: int
    converged: int
    limits_in_oracle: int
    failures: tuple = ()

    @property
    def agree(self) -> bool:
        return not self.hypothesis_passed or (self.converged == self.starts == self.limits_in_oracle)

    def to_dict(self) -> dict:
        return {"variant": self.variant, "mode": self.mode, "hypothesis_passed": self.hypothesis_passed,
                "starts": self.starts, "converged": self.converged,
                "limits_in_oracle": self.limits_in_oracle, "agree": self.agree,
                "failures": [list(f) for f in self.failures]}


def check_agreement(space: Space, T: SetValuedMap, variant: VariantSpec, eps_conv: float = 1e-8,
                    max_iter: int = 10_000, enumeration=None, starts: Sequence | None = None,
                    report: HypothesisReport | None = None) -> Agreement:
    """Where the hypotheses pass, every start must converge to a brute-force point."""
    from .solver import solve

    if report is None:
        report = exhaustive_hypothesis_check(space, T, variant, enumeration)
    pts = list(starts) if starts is not None else enumerate_points(space, enumeration)
    if not report.passed:
        return Agreement(variant.id, variant.mode, False, len(pts), 0, 0)
    oracle = set(brute_force_points(space, T, variant.mode, 2 * eps_conv, enumeration))
    conv = inside = 0
    failures = []
    for x0 in pts:
        tr = solve(space, T, variant, x0, eps_conv, max_iter)
        if tr.outcome.converged:
            conv += 1
            if tr.outcome.x in oracle or _near(space, variant.mode, T, tr.outcome.x, 2 * eps_conv):
                inside += 1
            else:
                failures.append((x0, "limit-not-in-oracle", tr.outcome.x))
        else:
            failures.append((x0, tr.outcome.kind, tr.outcome.x))
    return Agreement(variant.id, variant.mode, True, len(pts), conv, inside, tuple(failures))


def _near(space: Space, kind: str, T: SetValuedMap, x, eps: float) -> bool:
    # limits off the enumeration grid are checked by direct evaluation
    return bool(brute_force_points(space, T, kind, eps, grid=[x]) if not space.is_finite else False)
