#!/usr/bin/env python3
"""Train the hybrid MPS + 8-qubit circuit policy on MiniGrid-Empty.

Pick the grid with --size {5,6,8}; --desk switches the 5x5 task to the
small population that reaches the reward plateau in a few minutes.
"""

import argparse
import sys
from pathlib import Path

from qevo import cli

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--size", type=int, choices=(5, 6, 8), default=5)
    parser.add_argument("--desk", action="store_true",
                        help="small population, 5x5 only")
    parser.add_argument("--seed", type=int, help="override master seed")
    parser.add_argument("--out-dir", help="override output directory")
    parser.add_argument("--workers", type=int, help="override worker count")
    args = parser.parse_args()

    if args.desk and args.size != 5:
        parser.error("--desk is tuned for --size 5")
    name = "minigrid5_desk.json" if args.desk else f"minigrid{args.size}.json"
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
