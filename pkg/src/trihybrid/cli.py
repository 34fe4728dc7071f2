"""Command-line entry point.

    trihybrid <experiment> [--scenario FILE] [--out DIR] [--seed N] [--jobs N]

Writes ``<experiment>.csv`` and ``<experiment>.meta.json`` into the output
directory. Exit codes: 0 success, 2 configuration error, 3 model/runtime error;
errors are reported as one JSON object on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__
from .config import EXPERIMENTS, ConfigError, ScenarioConfig, config_hash, parse_scenario, scenario_dict, validate_scenario
from .experiments import (
    comparison_problem,
    dma_coefficient_map,
    ee_se_frontier,
    run_link,
    run_optimizer_comparison,
    sweep_aperture,
    write_trace,
)
from .results import write_metadata

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="trihybrid", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="experiment", required=True, metavar="experiment")
    for name in EXPERIMENTS:
        s = sub.add_parser(name)
        s.add_argument("--scenario", type=Path, help="scenario JSON (defaults used if omitted)")
        s.add_argument("--out", type=Path, help="output directory (overrides the scenario)")
        s.add_argument("--seed", type=int, help="random seed (overrides the scenario)")
        s.add_argument("--jobs", type=int, default=1, help="worker processes")
    return p


def load_config(args) -> ScenarioConfig:
    data = scenario_dict(parse_scenario(args.scenario)) if args.scenario else {}
    data.setdefault("experiment", {})["name"] = args.experiment
    if args.seed is not None:
        data["seed"] = args.seed
    if args.out is not None:
        data.setdefault("output", {})["dir"] = str(args.out)
    return validate_scenario(data)


def run_experiment(cfg: ScenarioConfig, jobs: int = 1) -> dict:
    """Run the configured experiment; tables keyed by output file stem."""
    name = cfg.experiment.name
    e = cfg.experiment
    if name == "link":
        return {"link": run_link(cfg, jobs)}
    if name == "aperture-sweep":
        return {"aperture-sweep": sweep_aperture(cfg, jobs=jobs)}
    if name == "frontier":
        return {"frontier": ee_se_frontier(cfg, jobs=jobs)}
    if name == "dma-map":
        d = cfg.em.dma
        return {"dma-map": dma_coefficient_map(e.alphas, e.resolution, d.guide_phase, "radiating")}
    return {"optimize": run_optimizer_comparison(cfg, jobs)}


def execute(cfg: ScenarioConfig, jobs: int = 1) -> list[Path]:
    out = Path(cfg.output.dir)
    out.mkdir(parents=True, exist_ok=True)
    digest = config_hash(cfg)
    start = time.perf_counter()
    tables = run_experiment(cfg, jobs)
    written = []
    for stem, table in tables.items():
        written.append(table.write(out / f"{stem}.csv", digest))
    if cfg.experiment.name == "optimize":
        written.append(write_trace(comparison_problem(cfg, 0), cfg, out / "optimize.trace.csv"))
    o = cfg.experiment.optimizer
    meta = {
        "config_hash": digest,
        "seed": cfg.seed,
        "version": __version__,
        "experiment": cfg.experiment.name,
        "elapsed_s": round(time.perf_counter() - start, 3),
        "search": {"method": o.method, "budget": o.budget, "rounds": o.rounds},
    }
    written.append(write_metadata(out / f"{cfg.experiment.name}.meta.json", meta))
    return written


def _fail(code: int, payload: dict) -> int:
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, exc.as_dict())
    if args.jobs < 1:
        return _fail(EXIT_CONFIG, {"error": "config", "details": [
            {"field": "--jobs", "message": "must be >= 1"}]})
    try:
        paths = execute(cfg, args.jobs)
    except Exception as exc:  # every model failure maps to one exit code
        return _fail(EXIT_RUNTIME, {"error": "runtime", "type": type(exc).__name__,
                                    "message": str(exc)})
    for p in paths:
        print(p)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
