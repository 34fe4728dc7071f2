"""Run every shipped scenario through the CLI and collect the CSVs.

    python scripts/run_all.py [--out results] [--jobs N] [--quick]

``--quick`` turns off SE in the aperture sweep (power only), which is the
slow part at large apertures.
"""

import argparse
import json
import sys
import tempfile
from pathlib import Path

from trihybrid import cli

ROOT = Path(__file__).resolve().parents[1]
RUNS = [
    ("link", "default.json"),
    ("aperture-sweep", "aperture.json"),
    ("frontier", "frontier.json"),
    ("dma-map", "dma_map.json"),
    ("optimize", "toy.json"),
]


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", type=Path, default=ROOT / "results")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--quick", action="store_true")
    args = p.parse_args(argv)
    for experiment, name in RUNS:
        scenario = ROOT / "scenarios" / name
        with tempfile.TemporaryDirectory() as tmp:
            if args.quick and experiment == "aperture-sweep":
                data = json.loads(scenario.read_text())
                data["experiment"]["compute_se"] = False
                scenario = Path(tmp) / name
                scenario.write_text(json.dumps(data))
            code = cli.main([experiment, "--scenario", str(scenario), "--out", str(args.out),
                             "--jobs", str(args.jobs)])
        if code:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
