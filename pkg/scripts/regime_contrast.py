"""Single link, both ends pinned: one-way with and without a heat bath vs two-way.

Writes one trace CSV per regime and prints when each first reaches the solution.
"""
import argparse
from pathlib import Path

import numpy as np

from linkanneal.config import EngineConfig
from linkanneal.network import make_network
from linkanneal.oneway import anneal_one_way
from linkanneal.twoway import relax_two_way


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps", type=int, default=2000)
    p.add_argument("--out", default="regimes")
    args = p.parse_args()

    net = make_network(["r", "s"], [("r", "s")], fixes=[("r", 1), ("s", 0)])
    out = Path(args.out)
    out.mkdir(exist_ok=True)
    runs = {
        "oneway_bath": lambda cfg, rng: anneal_one_way(net, cfg, rng),
        "oneway_nobath": lambda cfg, rng: anneal_one_way(net, cfg.replace(bath=False), rng),
        "twoway_nobath": lambda cfg, rng: relax_two_way(net, cfg.replace(bath=False), rng),
    }
    for name, run in runs.items():
        trace, result = run(EngineConfig(max_steps=args.steps), np.random.default_rng(args.seed))
        (out / f"{name}.csv").write_text(trace.to_csv())
        print(f"{name:>14s}: {result.verdict:<16s} steps={result.steps:<5d} "
              f"half-solution step={result.half_solution_step}")


if __name__ == "__main__":
    main()
