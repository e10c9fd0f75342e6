"""Run the full NCAA pipeline over a directory of record files via the CLI.

Expects games.csv and rankings.csv (and optionally blocks.csv, passes.csv) in
the package schemas. Each step writes into OUT/<step>/.

    python3 scripts/reproduce_ncaa.py DATA_DIR OUT --seasons 2021 2022 2023 2024
"""

import argparse
import sys
from pathlib import Path

from hoopsnet.cli import dispatch


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("data", type=Path)
    ap.add_argument("out", type=Path)
    ap.add_argument("--seasons", type=int, nargs="+", default=[2021, 2022, 2023, 2024])
    ap.add_argument("--iterations", type=int, default=100)
    ap.add_argument("--quantiles", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--block-season", type=int, default=2023)
    ap.add_argument("--pass-game", default=None)
    args = ap.parse_args()

    common = ["--seed", str(args.seed), "--threads", str(args.threads)]
    games, ranks = str(args.data / "games.csv"), str(args.data / "rankings.csv")
    steps = []
    for season in args.seasons:
        steps.append((f"lkl_{season}", ["lkl", "--games", games, "--season", str(season)]))
        for direction in ("prev", "next"):
            steps.append((f"quantiles_{season}_{direction}",
                          ["quantiles", "--games", games, "--rankings", ranks, "--season", str(season),
                           "--direction", direction, "--quantiles", str(args.quantiles),
                           "--format", "csv,json,svg"]))
        steps.append((f"matchups_{season}", ["experiment", "matchups", "--games", games,
                                             "--season", str(season),
                                             "--iterations", str(args.iterations)]))
    blocks = args.data / "blocks.csv"
    if blocks.exists():
        steps.append(("blocks", ["experiment", "blocks", "--blocks", str(blocks),
                                 "--season", str(args.block_season),
                                 "--iterations", str(args.iterations)]))
    passes = args.data / "passes.csv"
    if passes.exists() and args.pass_game:
        steps.append(("passes", ["experiment", "passes", "--passes", str(passes), "--game",
                                 args.pass_game, "--iterations", str(args.iterations)]))
        for focus in ("3", "13"):
            steps.append((f"similarity_{focus}",
                          ["similarity-report", "--passes", str(passes), "--game", args.pass_game,
                           "--quarters", "1", "--focus", focus, "--format", "csv,svg"]))

    failed = 0
    for name, argv in steps:
        print(f"[{name}] ", end="", flush=True)
        code = dispatch(argv + common + ["--out", str(args.out / name)])
        if code:
            failed += 1
            print(f"[{name}] exit {code}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
