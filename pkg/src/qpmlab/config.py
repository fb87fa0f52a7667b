"""Scenario configs: JSON text -> validated :class:`ScenarioConfig`.

A config names a scenario and one or more variants::

    {"scenario": "paper-example", "variant": "V1", "mode": "start",
     "phi": {"kind": "constant", "c": 0.5, "range": "[0,1)"},
     "eta": {"kind": "constant", "c": 0.6666666666666666, "range": "[b,1)", "b": 0.5},
     "x0": 10, "eps": 1e-8, "max_iter": 10000}

``scenario`` is ``"paper-example"`` (the interval [0, 10] with
d(a, b) = max(a - b, 0) and the map x -> {x/2}, 6 -> {4, 5}), ``"custom"``
(with ``space`` and ``map`` objects) or ``"random"`` (seeded generators,
``n`` / ``max_card`` / ``seed``).  Variants may also be given as a list under
``variants``, each object shaped like the top-level variant fields.
"""

from __future__ import annotations

import json
import math
import numbers
from dataclasses import dataclass, field

from . import gauge as G
from .errors import SchemaError, UnknownRule, UnknownVariant
from .hausdorff import CLOSED_FORM_RULES, ClosedFormMap, SetValuedMap, TableMap
from .solver import EPS_CONV, MAX_ITER, MODES, VARIANT_IDS, VariantSpec
from .spaces import RULES, IntervalSpace, MatrixSpace, Space

SCENARIOS = ("paper-example", "custom", "random")
PAPER_GRID_STEP = 0.5


def paper_example() -> tuple[IntervalSpace, ClosedFormMap]:
    return IntervalSpace(0.0, 10.0, "maxdiff"), ClosedFormMap("half-except-6", 0.0, 10.0)


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    space: Space
    T: SetValuedMap
    variants: tuple[VariantSpec, ...]
    x0: object = None
    eps: float = EPS_CONV
    max_iter: int = MAX_ITER
    grid: object = None
    seed: int | None = None
    raw: dict = field(default_factory=dict, repr=False, compare=False)


class _Errors:
    def __init__(self):
        self.items: list[tuple[str, str]] = []

    def add(self, path: str, msg: str):
        self.items.append((path, msg))

    def raise_if_any(self):
        if self.items:
            raise SchemaError(self.items)


def _is_num(v) -> bool:
    return isinstance(v, numbers.Real) and not isinstance(v, bool) and math.isfinite(v)


def _gauge(obj, path: str, errs: _Errors):
    if not isinstance(obj, dict):
        errs.add(path, "gauge must be an object")
        return None
    try:
        return G.gauge_from_json(obj)
    except (KeyError, TypeError) as exc:
        errs.add(path, f"missing or bad gauge field: {exc}")
    except ValueError as exc:
        errs.add(path, str(exc))
    return None


def _variant(obj: dict, path: str, errs: _Errors) -> VariantSpec | None:
    vid = obj.get("variant")
    if not isinstance(vid, str):
        errs.add(f"{path}.variant", "variant id (string) is required")
        return None
    if vid not in VARIANT_IDS:
        raise UnknownVariant(vid)
    mode = obj.get("mode", "start")
    if mode not in MODES:
        errs.add(f"{path}.mode", f"mode must be one of {list(MODES)}")
        return None
    if vid == "GABA_C" and "c" in obj:
        if not _is_num(obj["c"]):
            errs.add(f"{path}.c", "c must be a number")
            return None
        return VariantSpec.gaba_c(float(obj["c"]), mode)
    if "phi" not in obj:
        errs.add(f"{path}.phi", "phi gauge is required")
        return None
    phi = _gauge(obj["phi"], f"{path}.phi", errs)
    eta = None
    if "eta" in obj:
        eta = _gauge(obj["eta"], f"{path}.eta", errs)
    elif vid not in ("GABA_C", "GABA_PHI"):
        errs.add(f"{path}.eta", f"eta gauge is required for {vid}")
        return None
    if phi is None or ("eta" in obj and eta is None):
        return None
    props = obj.get("props", [])
    try:
        return VariantSpec(vid, mode, phi, eta, frozenset(props))
    except ValueError as exc:
        errs.add(path, str(exc))
        return None


def _space(obj, errs: _Errors) -> Space | None:
    if not isinstance(obj, dict):
        errs.add("$.space", "space must be an object")
        return None
    kind = obj.get("kind")
    if kind == "matrix":
        dist = obj.get("dist")
        if not (isinstance(dist, list) and dist and all(isinstance(r, list) for r in dist)):
            errs.add("$.space.dist", "dist must be a nonempty list of rows")
            return None
        for i, row in enumerate(dist):
            for j, v in enumerate(row):
                if not _is_num(v):
                    errs.add(f"$.space.dist[{i}][{j}]", "entries must be finite numbers")
        if errs.items:
            return None
        try:
            return MatrixSpace(dist)
        except ValueError as exc:
            errs.add("$.space.dist", str(exc))
            return None
    if kind == "interval":
        for key in ("lo", "hi"):
            if not _is_num(obj.get(key)):
                errs.add(f"$.space.{key}", "must be a finite number")
        rule = obj.get("rule", "maxdiff")
        if rule not in RULES:
            raise UnknownRule(rule)
        if errs.items:
            return None
        try:
            return IntervalSpace(float(obj["lo"]), float(obj["hi"]), rule)
        except ValueError as exc:
            errs.add("$.space", str(exc))
            return None
    errs.add("$.space.kind", "kind must be 'matrix' or 'interval'")
    return None


def _map(obj, space: Space | None, errs: _Errors) -> SetValuedMap | None:
    if not isinstance(obj, dict):
        errs.add("$.map", "map must be an object")
        return None
    kind = obj.get("kind")
    if kind == "table":
        table = obj.get("map")
        if not isinstance(table, dict):
            errs.add("$.map.map", "table map must be an object of point -> list")
            return None
        for k, v in table.items():
            if not (isinstance(v, list) and v):
                errs.add(f"$.map.map.{k}", "image must be a nonempty list")
        if errs.items:
            return None
        try:
            T = TableMap(table)
            if space is not None:
                T.check_space(space)
            return T
        except ValueError as exc:
            errs.add("$.map.map", str(exc))
            return None
    if kind == "closedform":
        rule = obj.get("rule")
        if rule not in CLOSED_FORM_RULES:
            raise UnknownRule(str(rule))
        if not isinstance(space, IntervalSpace):
            errs.add("$.map", "closed-form maps need an interval space")
            return None
        return ClosedFormMap(rule, space.lo, space.hi)
    errs.add("$.map.kind", "kind must be 'table' or 'closedform'")
    return None


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate; raises SchemaError (with JSON paths), UnknownVariant or UnknownRule."""
    try:
        raw = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise SchemaError([("$", f"invalid JSON: {exc}")]) from None
    return config_from_dict(raw)


def _reject_constant(name):
    raise SchemaError([("$", f"{name} is not allowed")])


def config_from_dict(raw) -> ScenarioConfig:
    errs = _Errors()
    if not isinstance(raw, dict):
        raise SchemaError([("$", "config must be a JSON object")])
    scen = raw.get("scenario")
    if scen is None:
        errs.add("$.scenario", "scenario is required")
    elif scen not in SCENARIOS:
        errs.add("$.scenario", f"scenario must be one of {list(SCENARIOS)}")
    errs.raise_if_any()

    seed = raw.get("seed")
    if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool)):
        errs.add("$.seed", "seed must be an integer")
    grid = raw.get("grid")
    if grid is not None and not (_is_num(grid) and grid > 0) and not isinstance(grid, list):
        errs.add("$.grid", "grid must be a positive step or a list of points")

    space = T = None
    if scen == "paper-example":
        space, T = paper_example()
        if grid is None:
            grid = PAPER_GRID_STEP
    elif scen == "custom":
        for key in ("space", "map"):
            if key not in raw:
                errs.add(f"$.{key}", f"{key} is required for custom scenarios")
        errs.raise_if_any()
        space = _space(raw["space"], errs)
        T = _map(raw["map"], space, errs) if space is not None else None
    else:
        from .oracle import random_space, random_setmap

        n = raw.get("n", 5)
        max_card = raw.get("max_card", 2)
        if not (isinstance(n, int) and n >= 1):
            errs.add("$.n", "n must be a positive integer")
        if not (isinstance(max_card, int) and max_card >= 1):
            errs.add("$.max_card", "max_card must be a positive integer")
        errs.raise_if_any()
        s = 0 if seed is None else seed
        space = random_space(n, s)
        T = random_setmap(space, s + 1, max_card)

    variants: list[VariantSpec] = []
    if "variants" in raw:
        if not isinstance(raw["variants"], list) or not raw["variants"]:
            errs.add("$.variants", "variants must be a nonempty list")
        else:
            for i, obj in enumerate(raw["variants"]):
                if not isinstance(obj, dict):
                    errs.add(f"$.variants[{i}]", "variant must be an object")
                    continue
                v = _variant(obj, f"$.variants[{i}]", errs)
                if v is not None:
                    variants.append(v)
    elif isinstance(raw.get("variant"), dict):
        v = _variant(raw["variant"], "$.variant", errs)
        if v is not None:
            variants.append(v)
    elif "variant" in raw:
        v = _variant(raw, "$", errs)
        if v is not None:
            variants.append(v)

    x0 = raw.get("x0")
    if x0 is not None and space is not None:
        if not _is_num(x0) or not space.contains(int(x0) if space.is_finite and float(x0).is_integer() else x0):
            errs.add("$.x0", f"x0={x0!r} is not a point of the space")
        elif space.is_finite:
            x0 = int(x0)
        else:
            x0 = float(x0)
    eps = raw.get("eps", EPS_CONV)
    if not (_is_num(eps) and eps > 0):
        errs.add("$.eps", "eps must be a positive number")
    max_iter = raw.get("max_iter", MAX_ITER)
    if not (isinstance(max_iter, int) and not isinstance(max_iter, bool) and max_iter >= 1):
        errs.add("$.max_iter", "max_iter must be a positive integer")
    errs.raise_if_any()
    return ScenarioConfig(scen, space, T, tuple(variants), x0, float(eps), int(max_iter), grid, seed, raw)
