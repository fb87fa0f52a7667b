"""Quasi-pseudometric spaces and the sequence classifiers built on them.

Two concrete spaces are provided:

* :class:`MatrixSpace` -- a finite space on the points ``0..n-1`` whose
  distance is an ``n x n`` matrix.
* :class:`IntervalSpace` -- a closed interval ``[lo, hi]`` of reals whose
  distance is a named closed-form rule (``"maxdiff"`` is
  ``d(a, b) = max(a - b, 0)``).

Both are immutable.  :meth:`Space.conjugate` and :meth:`Space.symmetrize`
return new spaces for the reversed distance ``d^-1(x, y) = d(y, x)`` and the
symmetrization ``d^s(x, y) = max(d(x, y), d(y, x))``.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import (
    EmptyTail,
    GridRequired,
    NegativeEntry,
    NegativeRadius,
    NonzeroDiagonal,
    PointOutOfDomain,
    UnknownRule,
)

AXIOM_TOL = 1e-9
DEFAULT_TAIL = 0.25

Point = int | float
Rule = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _maxdiff(a, b):
    return np.maximum(np.subtract(a, b), 0.0)


def _absdiff(a, b):
    return np.abs(np.subtract(a, b))


RULES: dict[str, Rule] = {
    "maxdiff": _maxdiff,
    "abs": _absdiff,
}

VIEWS = ("d", "inv", "sym")


class Space:
    """Common surface of every space.  Subclasses implement ``_raw``."""

    view: str = "d"

    @property
    def is_finite(self) -> bool:
        raise NotImplementedError

    def contains(self, x) -> bool:
        raise NotImplementedError

    def check_point(self, x) -> None:
        if not self.contains(x):
            raise PointOutOfDomain(f"{x!r} is not a point of {self!r}")

    def distance(self, x, y) -> float:
        self.check_point(x)
        self.check_point(y)
        return self._dist(x, y)

    def _dist(self, x, y) -> float:
        raise NotImplementedError

    def pairwise(self, xs: Sequence, ys: Sequence) -> np.ndarray:
        """Distance block ``D[i, j] = d(xs[i], ys[j])`` (points assumed valid)."""
        raise NotImplementedError

    def conjugate(self) -> "Space":
        raise NotImplementedError

    def symmetrize(self) -> "Space":
        raise NotImplementedError

    def points(self) -> list:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class MatrixSpace(Space):
    """Finite quasi-pseudometric space backed by a distance matrix.

    The constructor enforces finiteness, non-negativity and a zero
    diagonal.  The triangle inequality is *not* enforced here; use
    :func:`metric_closure` to build a guaranteed space or
    :func:`verify_axioms` to audit an arbitrary matrix.
    """

    dist: np.ndarray
    t0_flag: bool = False
    view: str = "d"

    def __post_init__(self):
        m = np.array(self.dist, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"distance matrix must be square, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("distance matrix has non-finite entries")
        if np.any(m < 0):
            i, j = np.argwhere(m < 0)[0]
            raise NegativeEntry(f"negative entry at ({i}, {j}): {m[i, j]}")
        if np.any(np.diag(m) != 0):
            i = int(np.flatnonzero(np.diag(m) != 0)[0])
            raise NonzeroDiagonal(f"diagonal entry ({i}, {i}) is {m[i, i]}")
        m.setflags(write=False)
        object.__setattr__(self, "dist", m)

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    @property
    def is_finite(self) -> bool:
        return True

    def contains(self, x) -> bool:
        if isinstance(x, bool) or not isinstance(x, numbers.Integral):
            return False
        return 0 <= int(x) < self.n

    def _dist(self, x, y) -> float:
        return float(self.dist[x, y])

    def pairwise(self, xs, ys) -> np.ndarray:
        return self.dist[np.ix_(np.asarray(xs, dtype=int), np.asarray(ys, dtype=int))]

    def points(self) -> list[int]:
        return list(range(self.n))

    def diameter(self) -> float:
        return float(self.dist.max()) if self.n else 0.0

    def conjugate(self) -> "MatrixSpace":
        view = {"d": "inv", "inv": "d", "sym": "sym"}[self.view]
        return MatrixSpace(self.dist.T, t0_flag=self.t0_flag, view=view)

    def symmetrize(self) -> "MatrixSpace":
        return MatrixSpace(np.maximum(self.dist, self.dist.T), t0_flag=self.t0_flag, view="sym")

    def to_json(self) -> dict:
        return {"kind": "matrix", "dist": self.dist.tolist()}

    def __repr__(self) -> str:
        return f"MatrixSpace(n={self.n}, view={self.view!r})"


@dataclass(frozen=True, eq=False)
class IntervalSpace(Space):
    """The interval ``[lo, hi]`` with a closed-form distance rule.

    Points are floats and distances are evaluated exactly from the rule,
    so maps such as ``x -> x/2`` never have to be snapped to a grid.
    """

    lo: float
    hi: float
    rule: str = "maxdiff"
    view: str = "d"

    def __post_init__(self):
        if self.rule not in RULES:
            raise UnknownRule(self.rule)
        if self.view not in VIEWS:
            raise ValueError(f"unknown view {self.view!r}")
        if not (math.isfinite(self.lo) and math.isfinite(self.hi) and self.lo <= self.hi):
            raise ValueError(f"bad interval [{self.lo}, {self.hi}]")

    @property
    def is_finite(self) -> bool:
        return False

    def contains(self, x) -> bool:
        if isinstance(x, bool) or not isinstance(x, numbers.Real):
            return False
        return self.lo <= float(x) <= self.hi

    def _eval(self, a, b):
        fn = RULES[self.rule]
        if self.view == "d":
            return fn(a, b)
        if self.view == "inv":
            return fn(b, a)
        return np.maximum(fn(a, b), fn(b, a))

    def _dist(self, x, y) -> float:
        return float(self._eval(float(x), float(y)))

    def pairwise(self, xs, ys) -> np.ndarray:
        a = np.asarray(xs, dtype=float)[:, None]
        b = np.asarray(ys, dtype=float)[None, :]
        return self._eval(a, b)

    def points(self) -> list:
        raise GridRequired("interval spaces have no finite point list; supply a grid")

    def grid(self, step: float | None = None, points: Iterable[float] | None = None) -> list[float]:
        """Enumerate grid points.  Either ``step`` or explicit ``points`` is required."""
        if points is not None:
            pts = sorted({float(p) for p in points})
            for p in pts:
                self.check_point(p)
            return pts
        if step is None:
            raise GridRequired("interval space needs a grid step or explicit points")
        if step <= 0:
            raise ValueError("grid step must be positive")
        count = int(math.floor((self.hi - self.lo) / step + 1e-9))
        pts = [self.lo + k * step for k in range(count + 1)]
        if pts[-1] < self.hi:
            pts.append(self.hi)
        return pts

    def diameter(self) -> float:
        return float(self._eval(np.array([self.lo, self.hi]), np.array([self.hi, self.lo])).max())

    def conjugate(self) -> "IntervalSpace":
        view = {"d": "inv", "inv": "d", "sym": "sym"}[self.view]
        return IntervalSpace(self.lo, self.hi, self.rule, view)

    def symmetrize(self) -> "IntervalSpace":
        return IntervalSpace(self.lo, self.hi, self.rule, "sym")

    def to_json(self) -> dict:
        out = {"kind": "interval", "lo": self.lo, "hi": self.hi, "rule": self.rule}
        if self.view != "d":
            out["view"] = self.view
        return out


def distance(space: Space, x, y) -> float:
    return space.distance(x, y)


def conjugate(space: Space) -> Space:
    return space.conjugate()


def symmetrize(space: Space) -> Space:
    return space.symmetrize()


def space_from_json(obj: dict) -> Space:
    kind = obj.get("kind")
    if kind == "matrix":
        return MatrixSpace(np.array(obj["dist"], dtype=float))
    if kind == "interval":
        return IntervalSpace(float(obj["lo"]), float(obj["hi"]), obj.get("rule", "maxdiff"),
                             obj.get("view", "d"))
    raise ValueError(f"unknown space kind {kind!r}")


# -- axioms -----------------------------------------------------------------

@dataclass(frozen=True)
class AxiomFailure:
    axiom: str  # "nonnegative", "identity", "triangle", "t0"
    witness: tuple
    values: tuple


@dataclass(frozen=True)
class AxiomReport:
    ok: bool
    t0_ok: bool | None
    failures: tuple[AxiomFailure, ...]
    sampled: bool
    tol: float
    n_points: int

    @property
    def axioms_ok(self) -> bool:
        return not any(f.axiom != "t0" for f in self.failures)

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "t0_ok": self.t0_ok,
            "sampled": self.sampled,
            "tol": self.tol,
            "n_points": self.n_points,
            "failures": [
                {"axiom": f.axiom, "witness": list(f.witness), "values": list(f.values)}
                for f in self.failures
            ],
        }


def verify_axioms(space: Space, check_t0: bool = True, grid: Sequence[float] | float | None = None,
                  tol: float = AXIOM_TOL, max_witnesses: int = 50) -> AxiomReport:
    """Audit the quasi-pseudometric axioms (and optionally T0).

    Finite spaces are scanned exhaustively.  Interval spaces are scanned on
    ``grid`` (a step or an explicit point list) and the report is marked
    ``sampled``.  Every failure carries a concrete witness; triangle
    witnesses ``(x, y, z)`` satisfy ``d(x, z) > d(x, y) + d(y, z) + tol``.
    """
    if space.is_finite:
        pts = space.points()
        sampled = False
    else:
        if grid is None:
            raise GridRequired("verify_axioms on an interval space needs a grid")
        pts = space.grid(step=grid) if isinstance(grid, numbers.Real) else space.grid(points=grid)
        sampled = True
    D = np.asarray(space.pairwise(pts, pts), dtype=float)
    failures: list[AxiomFailure] = []

    bad = np.argwhere(~np.isfinite(D) | (D < 0))
    for i, j in bad[:max_witnesses]:
        failures.append(AxiomFailure("nonnegative", (pts[i], pts[j]), (float(D[i, j]),)))
    for i in np.flatnonzero(np.diag(D) != 0)[:max_witnesses]:
        failures.append(AxiomFailure("identity", (pts[i],), (float(D[i, i]),)))

    # middle point y on the outer loop keeps memory at O(n^2)
    tri = []
    for j in range(len(pts)):
        via = D[:, j][:, None] + D[j, :][None, :]
        for i, k in np.argwhere(D > via + tol):
            tri.append((int(i), j, int(k)))
    tri.sort()
    for i, j, k in tri[:max_witnesses]:
        failures.append(AxiomFailure(
            "triangle", (pts[i], pts[j], pts[k]),
            (float(D[i, k]), float(D[i, j]), float(D[j, k]))))

    t0_ok = None
    if check_t0:
        zero = (D == 0) & (D.T == 0)
        np.fill_diagonal(zero, False)
        pairs = [(int(i), int(j)) for i, j in np.argwhere(np.triu(zero, 1))]
        t0_ok = not pairs
        for i, j in pairs[:max_witnesses]:
            failures.append(AxiomFailure("t0", (pts[i], pts[j]), (0.0, 0.0)))

    ok = not failures
    return AxiomReport(ok=ok, t0_ok=t0_ok, failures=tuple(failures), sampled=sampled,
                       tol=tol, n_points=len(pts))


def metric_closure(raw) -> MatrixSpace:
    """Min-plus (all-pairs shortest path) closure of a raw cost matrix."""
    m = np.array(raw, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"raw matrix must be square, got shape {m.shape}")
    if np.any(m < 0):
        i, j = np.argwhere(m < 0)[0]
        raise NegativeEntry(f"negative entry at ({i}, {j}): {m[i, j]}")
    if np.any(np.diag(m) != 0):
        i = int(np.flatnonzero(np.diag(m) != 0)[0])
        raise NonzeroDiagonal(f"diagonal entry ({i}, {i}) is {m[i, i]}")
    for k in range(m.shape[0]):
        np.minimum(m, m[:, k, None] + m[None, k, :], out=m)
    return MatrixSpace(m)


# -- balls and sequences ----------------------------------------------------

def _view(space: Space, view: str) -> Space:
    if view == "d":
        return space
    if view in ("inv", "d-1", "d⁻¹"):
        return space.conjugate()
    if view in ("sym", "ds", "d^s"):
        return space.symmetrize()
    raise ValueError(f"unknown view {view!r}")


def ball_membership(space: Space, center, radius: float, y, closed: bool = False,
                    view: str = "d") -> bool:
    if radius < 0 or (not closed and radius == 0):
        raise NegativeRadius(f"radius {radius} not allowed for {'closed' if closed else 'open'} ball")
    r = _view(space, view).distance(center, y)
    return r <= radius if closed else r < radius


def _tail(seq: Sequence, tail: float) -> list:
    if len(seq) == 0:
        raise EmptyTail("empty sequence")
    if not 0 < tail <= 1:
        raise ValueError("tail fraction must be in (0, 1]")
    k = max(1, math.ceil(tail * len(seq)))
    return list(seq[-k:])


@dataclass(frozen=True)
class ConvergenceVerdict:
    left: bool
    right: bool
    ds: bool
    tol: float
    tail: float
    tail_len: int
    left_sup: float
    right_sup: float


def classify_convergence(space: Space, seq: Sequence, x, tol: float,
                         tail: float = DEFAULT_TAIL) -> ConvergenceVerdict:
    """Finite-prefix surrogate for d-, d^-1- and d^s-convergence of ``seq`` to ``x``.

    left: sup over the tail of d(x, x_n) <= tol; right: sup of d(x_n, x) <= tol.
    """
    pts = _tail(seq, tail)
    for p in pts:
        space.check_point(p)
    space.check_point(x)
    left_sup = float(space.pairwise([x], pts).max())
    right_sup = float(space.pairwise(pts, [x]).max())
    left, right = left_sup <= tol, right_sup <= tol
    return ConvergenceVerdict(left, right, left and right, tol, tail, len(pts), left_sup, right_sup)


@dataclass(frozen=True)
class CauchyVerdict:
    left_d: bool
    left_k: bool
    right_d: bool
    right_k: bool
    ds: bool
    tol: float
    tail: float
    tail_len: int
    sups: dict = field(default_factory=dict, compare=False)


def classify_cauchy(space: Space, seq: Sequence, tol: float, tail: float = DEFAULT_TAIL,
                    candidates: Sequence | None = None) -> CauchyVerdict:
    """Finite-prefix surrogate for the five Cauchy notions.

    Everything is measured over the tail window of ``seq``.  The left/right
    d-Cauchy witnesses ``x`` are searched among ``candidates`` (default:
    every point of a finite space, or the interval endpoints) together with
    the tail points themselves, which makes left-K => left-d hold by
    construction.
    """
    if len(seq) < 3:
        raise EmptyTail("Cauchy classification needs at least 3 points")
    pts = _tail(seq, tail)
    for p in pts:
        space.check_point(p)
    D = np.asarray(space.pairwise(pts, pts), dtype=float)
    upper = np.triu(np.ones_like(D, dtype=bool))  # k <= n
    fwd = float(D[upper].max())      # d(x_k, x_n), k <= n
    bwd = float(D.T[upper].max())    # d(x_n, x_k), k <= n
    left_k, right_k = fwd <= tol, bwd <= tol

    if candidates is None:
        candidates = space.points() if space.is_finite else [space.lo, space.hi]
    cands = list(candidates) + pts
    C = np.asarray(space.pairwise(cands, pts), dtype=float)
    left_best = float(C.max(axis=1).min())       # min_x sup_n d(x, x_n)
    C2 = np.asarray(space.pairwise(pts, cands), dtype=float)
    right_best = float(C2.max(axis=0).min())     # min_x sup_n d(x_n, x)
    return CauchyVerdict(
        left_d=left_best <= tol,
        left_k=left_k,
        right_d=right_best <= tol,
        right_k=right_k,
        ds=left_k and right_k,
        tol=tol,
        tail=tail,
        tail_len=len(pts),
        sups={"left_k": fwd, "right_k": bwd, "left_d": left_best, "right_d": right_best},
    )
