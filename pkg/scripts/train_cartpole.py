#!/usr/bin/env python3
"""Train the amplitude-encoded 2-qubit cart-pole policy.

Full scale (N=500, 1700 generations) takes hours on one core; pass
--desk for the N=100 configuration that converges in minutes.
"""

import argparse
import sys
from pathlib import Path

from qevo import cli

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--desk", action="store_true",
                        help="small population, quick convergence check")
    parser.add_argument("--seed", type=int, help="override master seed")
    parser.add_argument("--out-dir", help="override output directory")
    parser.add_argument("--workers", type=int, help="override worker count")
    args = parser.parse_args()

    name = "cartpole_desk.json" if args.desk else "cartpole.json"
    forwarded = ["train", "--config", str(CONFIG_DIR / name)]
    if args.seed is not None:
        forwarded += ["--seed", str(args.seed)]
    if args.out_dir is not None:
        forwarded += ["--out-dir", args.out_dir]
    if args.workers is not None:
        forwarded += ["--workers", str(args.workers)]
    return cli.main(forwarded)


if __name__ == "__main__":
    sys.exit(main())
