"""Gauge functions (phi, eta, Phi, b, c) and sampled checks of their side conditions.

Every check here is sampled on a finite grid; reports say so.  Gauges are
vectorised: calling one on a numpy array evaluates elementwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import NegativeArgument, RatioOutOfRange

DEFAULT_DELTAS = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6)
DEFAULT_SAMPLES = 64
DEFAULT_MARGIN = 1e-6
GRID_POINTS = 512
STRICT_MARGIN = 1e-12
SHAPE_TOL = 1e-9

RANGES = ("[0,1)", "[b,1)", "[b,1]", "[0,inf)")


@dataclass(frozen=True, kw_only=True)
class Gauge:
    range: str = "[0,inf)"
    b: float | None = None

    def __post_init__(self):
        if self.range not in RANGES:
            raise ValueError(f"unknown range {self.range!r}; expected one of {RANGES}")
        if self.range.startswith("[b") and not (self.b is not None and 0 < self.b < 1):
            raise ValueError(f"range {self.range} needs 0 < b < 1, got b={self.b}")

    def __call__(self, t):
        arr = np.asarray(t, dtype=float)
        if np.any(arr < 0):
            raise NegativeArgument(f"gauge evaluated at negative argument {t!r}")
        out = self._eval(arr)
        return float(out) if np.ndim(out) == 0 else out

    def _eval(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def knots(self) -> tuple[float, ...]:
        return ()

    def bounds(self) -> tuple[float, float, bool]:
        """(lower, upper, upper_inclusive) of the declared range."""
        lo = 0.0 if self.range.startswith("[0") else float(self.b)
        if self.range.endswith("inf)"):
            return lo, math.inf, False
        return lo, 1.0, self.range.endswith("]")

    def _range_json(self) -> dict:
        out = {"range": self.range}
        if self.b is not None:
            out["b"] = self.b
        return out


@dataclass(frozen=True)
class Constant(Gauge):
    c: float

    def _eval(self, t):
        return np.full_like(t, self.c, dtype=float)

    def to_json(self) -> dict:
        return {"kind": "constant", "c": self.c, **self._range_json()}


@dataclass(frozen=True)
class Affine(Gauge):
    """``slope * t + intercept``."""

    slope: float
    intercept: float = 0.0

    def _eval(self, t):
        return self.slope * t + self.intercept

    def to_json(self) -> dict:
        return {"kind": "affine", "slope": self.slope, "intercept": self.intercept, **self._range_json()}


@dataclass(frozen=True)
class RatioForm(Gauge):
    """``scale * t / (1 + t)``."""

    scale: float = 1.0

    def _eval(self, t):
        return self.scale * t / (1.0 + t)

    def to_json(self) -> dict:
        return {"kind": "ratio", "scale": self.scale, **self._range_json()}


@dataclass(frozen=True)
class Table(Gauge):
    """Piecewise-linear interpolation through ``points``; constant beyond the ends."""

    points: tuple[tuple[float, float], ...]

    def __post_init__(self):
        super().__post_init__()
        pts = tuple((float(a), float(v)) for a, v in self.points)
        if not pts:
            raise ValueError("table gauge needs at least one knot")
        ts = [a for a, _ in pts]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("table knots must be strictly increasing")
        object.__setattr__(self, "points", pts)

    def _eval(self, t):
        xs = [a for a, _ in self.points]
        ys = [v for _, v in self.points]
        return np.interp(t, xs, ys)

    def knots(self):
        return tuple(a for a, _ in self.points)

    def to_json(self) -> dict:
        return {"kind": "table", "knots": [list(p) for p in self.points], **self._range_json()}


def gauge_from_json(obj: dict) -> Gauge:
    kind = obj.get("kind")
    common = {"range": obj.get("range", "[0,inf)"), "b": obj.get("b")}
    if kind == "constant":
        return Constant(float(obj["c"]), **common)
    if kind == "affine":
        return Affine(float(obj["slope"]), float(obj.get("intercept", 0.0)), **common)
    if kind == "ratio":
        return RatioForm(float(obj.get("scale", 1.0)), **common)
    if kind == "table":
        return Table(tuple(tuple(p) for p in obj["knots"]), **common)
    raise ValueError(f"unknown gauge kind {kind!r}")


def eval_gauge(g: Gauge, t: float) -> float:
    return g(t)


PAIR_PROPS = frozenset({
    "phi_nondecreasing", "eta_nondecreasing", "phi_subadditive", "eta_subadditive",
    "phi_continuous", "eta_continuous", "eta_le_identity", "eta_lt_identity",
})


@dataclass(frozen=True)
class GaugePair:
    phi: Gauge
    eta: Gauge
    declared_props: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        props = frozenset(self.declared_props)
        unknown = props - PAIR_PROPS
        if unknown:
            raise ValueError(f"unknown gauge properties: {sorted(unknown)}")
        object.__setattr__(self, "declared_props", props)

    def ratio(self, t):
        return _safe_ratio(self.phi(t), self.eta(t))


def _safe_ratio(num, den):
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = num / den
    # 0/0 carries no information about the ratio; x/0 with x > 0 is unbounded
    r = np.where((den == 0) & (num == 0), np.nan, r)
    r = np.where((den == 0) & (num > 0), np.inf, r)
    return r


# -- grids ------------------------------------------------------------------

def default_grid(t_max: float, n: int = GRID_POINTS, knots: Iterable[float] = ()) -> np.ndarray:
    """0 plus ``n - 1`` log-spaced points up to ``t_max``, merged with ``knots``."""
    t_max = float(t_max) if t_max > 0 else 1.0
    pts = np.concatenate(([0.0], np.geomspace(t_max * 1e-6, t_max, n - 1),
                          [k for k in knots if 0 <= k <= t_max]))
    return np.unique(pts)


def _as_grid(grid) -> np.ndarray:
    g = np.unique(np.asarray(list(grid) if not isinstance(grid, np.ndarray) else grid, dtype=float))
    if g.size == 0:
        raise ValueError("grid must be nonempty")
    if np.any(g < 0):
        raise NegativeArgument("grid has negative points")
    return g


# -- checks -----------------------------------------------------------------

@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    witness: float | tuple | None = None
    detail: str = ""
    sampled: bool = True

    def to_dict(self) -> dict:
        w = self.witness
        return {"name": self.name, "passed": self.passed,
                "witness": list(w) if isinstance(w, tuple) else w,
                "detail": self.detail, "sampled": self.sampled}


def check_range(g: Gauge, grid, name: str = "range") -> CheckResult:
    ts = _as_grid(grid)
    vals = g(ts)
    lo, hi, incl = g.bounds()
    bad = (vals < lo) | ((vals > hi) if incl else (vals >= hi))
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        return CheckResult(name, False, float(ts[i]), f"value {vals[i]!r} outside {g.range} (b={g.b})")
    return CheckResult(name, True)


def check_pointwise_dominance(pair: GaugePair, grid) -> CheckResult:
    """phi(t) < eta(t) on every grid point.

    At t = 0 the pair phi(0) = eta(0) = 0 is accepted: gauges of the
    ``eta(t) <= t`` family are forced to vanish there.
    """
    ts = _as_grid(grid)
    p, e = pair.phi(ts), pair.eta(ts)
    ok = p < e - STRICT_MARGIN
    ok |= (ts == 0) & (p == 0) & (e == 0)
    if np.all(ok):
        return CheckResult("phi_lt_eta", True)
    i = int(np.flatnonzero(~ok)[0])
    return CheckResult("phi_lt_eta", False, float(ts[i]), f"phi={p[i]!r} eta={e[i]!r}")


@dataclass(frozen=True)
class LimsupEstimate:
    t: float
    estimate: float
    passed: bool
    windows: tuple[tuple[float, float], ...]
    margin: float
    sampled: bool = True


def _window_max(func: Callable, t: float, deltas, samples: int) -> list[tuple[float, float]]:
    fracs = np.arange(1, samples + 1) / samples
    out = []
    for d in deltas:
        vals = np.asarray(func(t + d * fracs), dtype=float)
        finite = vals[~np.isnan(vals)]
        out.append((float(d), float(finite.max()) if finite.size else 0.0))
    return out


def estimate_limsup(func: Callable, t: float, deltas: Sequence[float] = DEFAULT_DELTAS,
                    samples: int = DEFAULT_SAMPLES, bound: float = 1.0,
                    margin: float = DEFAULT_MARGIN) -> LimsupEstimate:
    """Sampled right-limsup of ``func`` at ``t``: max over the finest window (t, t+delta]."""
    if t < 0:
        raise NegativeArgument(f"limsup probe at negative t={t}")
    windows = _window_max(func, t, sorted(deltas, reverse=True), samples)
    est = windows[-1][1]
    return LimsupEstimate(t, est, est <= bound - margin, tuple(windows), margin)


def estimate_limsup_ratio(pair: GaugePair, t: float, deltas: Sequence[float] = DEFAULT_DELTAS,
                          samples: int = DEFAULT_SAMPLES, margin: float = DEFAULT_MARGIN) -> LimsupEstimate:
    """Sampled ``limsup_{r -> t+} phi(r) / eta(r)``; passes iff estimate <= 1 - margin."""
    return estimate_limsup(pair.ratio, t, deltas, samples, 1.0, margin)


def limsup_on_grid(func: Callable, grid, deltas=DEFAULT_DELTAS, samples: int = DEFAULT_SAMPLES) -> np.ndarray:
    """Finest-window limsup estimates at every grid point, vectorised."""
    ts = _as_grid(grid)
    fine = min(deltas)
    r = ts[:, None] + fine * (np.arange(1, samples + 1) / samples)[None, :]
    vals = np.asarray(func(r), dtype=float)
    vals = np.where(np.isnan(vals), -np.inf, vals)
    est = vals.max(axis=1)
    return np.where(np.isneginf(est), 0.0, est)


def check_limsup_below(func: Callable, grid, name: str, bound: Callable | float = 1.0,
                       margin: float = DEFAULT_MARGIN) -> CheckResult:
    ts = _as_grid(grid)
    est = limsup_on_grid(func, ts)
    rhs = limsup_on_grid(bound, ts) if callable(bound) else np.full_like(est, float(bound))
    bad = ~(est <= rhs - margin)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        return CheckResult(name, False, float(ts[i]), f"limsup {est[i]!r} vs {rhs[i]!r}")
    return CheckResult(name, True, detail=f"max estimate {float(est.max())!r}")


def check_shape_properties(g: Gauge, props: Iterable[str], grid, modulus: float = 1e3,
                           tol: float = SHAPE_TOL) -> dict[str, CheckResult]:
    """Sampled shape checks.  ``props`` is any subset of
    ``{"nondecreasing", "subadditive", "continuous", "le_identity", "lt_identity"}``.
    """
    ts = _as_grid(grid)
    vals = g(ts)
    out: dict[str, CheckResult] = {}
    for prop in props:
        if prop == "nondecreasing":
            bad = np.flatnonzero(np.diff(vals) < -tol)
            out[prop] = (CheckResult(prop, False, (float(ts[bad[0]]), float(ts[bad[0] + 1])))
                         if bad.size else CheckResult(prop, True))
        elif prop == "subadditive":
            s, t = np.meshgrid(ts, ts, indexing="ij")
            keep = s + t <= ts[-1]
            lhs = g(s + t)
            bad = keep & (lhs > g(s) + g(t) + tol)
            if np.any(bad):
                i, j = np.argwhere(bad)[0]
                out[prop] = CheckResult(prop, False, (float(ts[i]), float(ts[j])))
            else:
                out[prop] = CheckResult(prop, True)
        elif prop == "continuous":
            jumps = np.abs(np.diff(vals))
            bad = np.flatnonzero(jumps > modulus * np.diff(ts) + tol)
            out[prop] = (CheckResult(prop, False, float(ts[bad[0]]), f"modulus {modulus}")
                         if bad.size else CheckResult(prop, True, detail=f"modulus {modulus}"))
        elif prop == "le_identity":
            bad = np.flatnonzero(vals > ts + tol)
            out[prop] = (CheckResult(prop, False, float(ts[bad[0]])) if bad.size
                         else CheckResult(prop, True))
        elif prop == "lt_identity":
            # strict only for t > 0; at t = 0 the best possible is g(0) = 0
            bad = np.flatnonzero(np.where(ts > 0, vals >= ts - STRICT_MARGIN, vals > 0))
            out[prop] = (CheckResult(prop, False, float(ts[bad[0]])) if bad.size
                         else CheckResult(prop, True))
        else:
            raise ValueError(f"unknown shape property {prop!r}")
    return out


def check_declared(pair: GaugePair, grid, modulus: float = 1e3) -> dict[str, CheckResult]:
    """Run check_shape_properties for every property the pair declares."""
    out = {}
    for who in ("phi", "eta"):
        props = [p.split("_", 1)[1] for p in pair.declared_props if p.startswith(who + "_")]
        for name, res in check_shape_properties(getattr(pair, who), props, grid, modulus).items():
            out[f"{who}_{name}"] = CheckResult(f"{who}_{name}", res.passed, res.witness, res.detail)
    return out


def iterate(g: Gauge, t: float, n: int) -> float:
    """n-fold composition g(g(...g(t)))."""
    if n < 0:
        raise ValueError("iteration count must be >= 0")
    x = float(t)
    if x < 0:
        raise NegativeArgument(f"gauge evaluated at negative argument {t!r}")
    for _ in range(n):
        x = g(x)
    return x


def derived_psi(phi_t: float) -> float:
    """``Psi = Phi (2 - Phi)`` for a ratio value ``Phi`` in [0, 1)."""
    if not 0 <= phi_t < 1:
        raise RatioOutOfRange(f"Phi(t) = {phi_t!r} is outside [0, 1)")
    return phi_t * (2 - phi_t)
