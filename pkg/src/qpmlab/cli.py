"""Batch command-line front end.

Exit codes: 0 pass/converged, 2 hypothesis violation or axiom failure,
1 usage or schema error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import gauge as G
from .config import ScenarioConfig, parse_config
from .errors import QPMError, SchemaError, UnknownRule, UnknownVariant
from .oracle import brute_force_points, check_agreement, exhaustive_hypothesis_check
from .solver import TOL_FEAS, decay_diagnostics, solve, trace_to_csv
from .spaces import AXIOM_TOL, DEFAULT_TAIL, verify_axioms

logger = logging.getLogger("qpmlab")

COMMANDS = ("check-space", "check-hypotheses", "solve", "oracle")
EXIT_OK, EXIT_USAGE, EXIT_VIOLATION = 0, 1, 2


def _defaults(cfg: ScenarioConfig) -> dict:
    return {
        "scenario": cfg.scenario, "eps": cfg.eps, "max_iter": cfg.max_iter, "grid": cfg.grid,
        "seed": cfg.seed, "tol_feas": TOL_FEAS, "axiom_tol": AXIOM_TOL, "tail_window": DEFAULT_TAIL,
        "limsup_deltas": list(G.DEFAULT_DELTAS), "limsup_samples": G.DEFAULT_SAMPLES,
        "limsup_margin": G.DEFAULT_MARGIN, "gauge_grid_points": G.GRID_POINTS,
    }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item"):
        return obj.item()
    if isinstance(obj, float) and obj != obj:
        return None
    if isinstance(obj, float) and obj in (float("inf"), float("-inf")):
        return str(obj)
    return obj


def _write(out: Path | None, name: str, payload) -> None:
    if out is None:
        return
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    if isinstance(payload, str):
        path.write_text(payload)
    else:
        path.write_text(json.dumps(_jsonable(payload), indent=2, allow_nan=False) + "\n")


def run_check_space(cfg: ScenarioConfig, out: Path | None) -> tuple[int, dict]:
    rep = verify_axioms(cfg.space, check_t0=True, grid=None if cfg.space.is_finite else cfg.grid)
    body = {"header": _defaults(cfg), "command": "check-space", "report": rep.to_dict()}
    _write(out, "report.json", body)
    return (EXIT_OK if rep.ok else EXIT_VIOLATION), body


def run_check_hypotheses(cfg: ScenarioConfig, out: Path | None) -> tuple[int, dict]:
    reports = [exhaustive_hypothesis_check(cfg.space, cfg.T, v, cfg.grid) for v in cfg.variants]
    body = {"header": _defaults(cfg), "command": "check-hypotheses",
            "reports": [r.to_dict() for r in reports]}
    _write(out, "report.json", body)
    ok = all(r.passed for r in reports)
    return (EXIT_OK if ok else EXIT_VIOLATION), body


def run_solve(cfg: ScenarioConfig, out: Path | None) -> tuple[int, dict]:
    if cfg.x0 is None:
        raise SchemaError([("$.x0", "x0 is required for solve")])
    summaries = []
    ok = True
    for v in cfg.variants:
        tr = solve(cfg.space, cfg.T, v, cfg.x0, cfg.eps, cfg.max_iter)
        s = tr.summary()
        if tr.outcome.kind != "violation" and len(tr.points) >= 3:
            s["decay"] = decay_diagnostics(tr).to_dict()
        summaries.append(s)
        _write(out, f"trace_{v.id}_{v.mode}.csv", trace_to_csv(tr))
        ok &= tr.outcome.converged
    body = {"header": _defaults(cfg), "command": "solve", "runs": summaries}
    _write(out, "summary.json", body)
    return (EXIT_OK if ok else EXIT_VIOLATION), body


def run_oracle(cfg: ScenarioConfig, out: Path | None) -> tuple[int, dict]:
    points = {k: brute_force_points(cfg.space, cfg.T, k, 1e-9, cfg.grid) for k in ("start", "end", "fixed")}
    agreements = [check_agreement(cfg.space, cfg.T, v, cfg.eps, cfg.max_iter, cfg.grid).to_dict()
                  for v in cfg.variants]
    body = {"header": _defaults(cfg), "command": "oracle", "points": points, "agreement": agreements}
    _write(out, "report.json", body)
    ok = all(a["agree"] for a in agreements)
    return (EXIT_OK if ok else EXIT_VIOLATION), body


RUNNERS = {
    "check-space": run_check_space,
    "check-hypotheses": run_check_hypotheses,
    "solve": run_solve,
    "oracle": run_oracle,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qpmlab", description=__doc__.splitlines()[0])
    p.add_argument("--config", required=True, help="scenario config JSON file")
    p.add_argument("--command", required=True, choices=COMMANDS)
    p.add_argument("--out", default=None, help="directory for reports and traces")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--grid", type=float, default=None, help="grid step for interval spaces")
    p.add_argument("--quiet", action="store_true")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(message)s")
    try:
        text = Path(args.config).read_text()
        raw = json.loads(text)
        for key, val in (("seed", args.seed), ("eps", args.eps), ("max_iter", args.max_iter),
                         ("grid", args.grid)):
            if val is not None and isinstance(raw, dict):
                raw[key] = val
        cfg = parse_config(json.dumps(raw))
        if args.command != "check-space" and not cfg.variants:
            raise SchemaError([("$.variant", f"{args.command} needs at least one variant")])
        code, body = RUNNERS[args.command](cfg, Path(args.out) if args.out else None)
    except SchemaError as exc:
        for path, msg in exc.errors:
            print(f"schema error at {path}: {msg}", file=sys.stderr)
        return EXIT_USAGE
    except (UnknownVariant, UnknownRule) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, json.JSONDecodeError, QPMError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if not args.quiet:
        print(json.dumps(_jsonable(body), indent=2))
    logger.info("%s finished with exit code %d", args.command, code)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
