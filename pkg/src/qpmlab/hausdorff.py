"""Point-to-set distances, the Hausdorff quasi-distance H and the functionals
``f_start(x) = H({x}, Tx)`` and ``f_end(x) = H(Tx, {x})``.

All sets are finite, so every inf/sup is an exact min/max.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

import numpy as np

from .errors import EmptyImage, EmptySet, PointOutOfDomain, UnknownRule
from .spaces import IntervalSpace, MatrixSpace, Space


def as_point_set(points: Iterable) -> tuple:
    """Deduplicate and sort ``points``; raise :class:`EmptySet` if nothing is left."""
    elems = tuple(sorted(set(points)))
    if not elems:
        raise EmptySet("point sets must be nonempty")
    return elems


def _block(space: Space, A, B) -> np.ndarray:
    A = as_point_set(A)
    B = as_point_set(B)
    for p in A + B:
        space.check_point(p)
    return np.asarray(space.pairwise(A, B), dtype=float)


def point_to_set(space: Space, x, A) -> float:
    return float(_block(space, [x], A).min())


def set_to_point(space: Space, A, x) -> float:
    return float(_block(space, A, [x]).min())


def hausdorff_H(space: Space, A, B) -> float:
    """``max(sup_a d(a, B), sup_b d(A, b))``."""
    D = _block(space, A, B)
    return float(max(D.min(axis=1).max(), D.min(axis=0).max()))


def hausdorff_Hs(space: Space, A, B) -> float:
    """H evaluated over the symmetrized distance."""
    return hausdorff_H(space.symmetrize(), A, B)


# -- set-valued maps --------------------------------------------------------

class SetValuedMap:
    """A map assigning every point of its domain a nonempty finite point set."""

    def __call__(self, x) -> tuple:
        raise NotImplementedError

    def in_domain(self, x) -> bool:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class TableMap(SetValuedMap):
    table: Mapping

    def __post_init__(self):
        clean = {}
        for k, v in self.table.items():
            try:
                clean[int(k)] = as_point_set(int(p) for p in v)
            except EmptySet:
                raise EmptyImage(f"image of {k} is empty") from None
        object.__setattr__(self, "table", clean)

    def __call__(self, x) -> tuple:
        if not self.in_domain(x):
            raise PointOutOfDomain(f"{x!r} is not in the domain of the map")
        return self.table[int(x)]

    def in_domain(self, x) -> bool:
        return not isinstance(x, bool) and isinstance(x, (int, np.integer)) and int(x) in self.table

    def domain(self) -> list[int]:
        return sorted(self.table)

    def check_space(self, space: Space) -> None:
        for x, img in self.table.items():
            space.check_point(x)
            for y in img:
                space.check_point(y)

    def to_json(self) -> dict:
        return {"kind": "table", "map": {str(k): list(v) for k, v in sorted(self.table.items())}}


def _half_except_6(x: float) -> tuple:
    if x == 6:
        return (4.0, 5.0)
    return (x / 2,)


def _identity(x: float) -> tuple:
    return (x,)


CLOSED_FORM_RULES: dict[str, Callable[[float], tuple]] = {
    "half-except-6": _half_except_6,
    "identity": _identity,
}


@dataclass(frozen=True)
class ClosedFormMap(SetValuedMap):
    rule: str
    lo: float = 0.0
    hi: float = 10.0

    def __post_init__(self):
        if self.rule not in CLOSED_FORM_RULES:
            raise UnknownRule(self.rule)

    def in_domain(self, x) -> bool:
        return not isinstance(x, bool) and isinstance(x, (int, float, np.floating, np.integer)) \
            and self.lo <= x <= self.hi

    def __call__(self, x) -> tuple:
        if not self.in_domain(x):
            raise PointOutOfDomain(f"{x!r} is not in the domain [{self.lo}, {self.hi}]")
        return as_point_set(CLOSED_FORM_RULES[self.rule](float(x)))

    def to_json(self) -> dict:
        return {"kind": "closedform", "rule": self.rule}


def map_from_json(obj: Mapping, space: Space | None = None) -> SetValuedMap:
    kind = obj.get("kind")
    if kind == "table":
        return TableMap(obj["map"])
    if kind == "closedform":
        lo, hi = (space.lo, space.hi) if isinstance(space, IntervalSpace) else (0.0, 10.0)
        return ClosedFormMap(obj["rule"], lo, hi)
    raise ValueError(f"unknown map kind {kind!r}")


def image(T: SetValuedMap, x) -> tuple:
    img = T(x)
    if not img:
        raise EmptyImage(f"image of {x!r} is empty")
    return img


def f_start(space: Space, T: SetValuedMap, x) -> float:
    return hausdorff_H(space, (x,), image(T, x))


def f_end(space: Space, T: SetValuedMap, x) -> float:
    return hausdorff_H(space, image(T, x), (x,))


def f_fixed(space: Space, T: SetValuedMap, x) -> float:
    """``H^s({x}, Tx)``; on a singleton first argument this equals ``H^s(Tx, {x})``."""
    return hausdorff_Hs(space, (x,), image(T, x))


def all_f(space: Space, T: SetValuedMap, points, kind: str = "start") -> np.ndarray:
    """Vectorised ``f_kind`` over ``points`` for finite spaces."""
    fn = {"start": f_start, "end": f_end, "fixed": f_fixed}[kind]
    if isinstance(space, MatrixSpace):
        D = space.dist
        if kind == "end":
            D = D.T
        elif kind == "fixed":
            D = np.maximum(D, D.T)
        return np.array([D[x, list(image(T, x))].max() for x in points], dtype=float)
    return np.array([fn(space, T, x) for x in points], dtype=float)
