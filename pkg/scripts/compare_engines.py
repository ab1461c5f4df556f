"""Hitting-time comparison of the three engines over random small CNFs.

Hitting time is counted in each engine's own unit (proposals, cycles, reduction
steps), so the numbers show trends rather than a common clock.
"""
import argparse
import csv

import numpy as np

from linkanneal.cli import hitting_stats, run_engine
from linkanneal.config import EngineConfig
from linkanneal.netlang import CnfFormula, compile_cnf
from linkanneal.network import enumerate_solutions


def random_cnf(rng, v, c):
    clauses = []
    for _ in range(c):
        chosen = rng.choice(np.arange(1, v + 1), size=min(3, v), replace=False)
        clauses.append(tuple(int(x) * int(rng.choice([-1, 1])) for x in chosen))
    return CnfFormula(v, tuple(clauses))


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--instances", type=int, default=10)
    p.add_argument("--runs", type=int, default=20)
    p.add_argument("--vars", type=int, default=5)
    p.add_argument("--clauses", type=int, default=12)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="compare_engines.csv")
    args = p.parse_args()

    rng = np.random.default_rng(args.seed)
    cfg = EngineConfig(max_steps=5000, max_iters=5000, restarts=5)
    rows = []
    made = 0
    while made < args.instances:
        net = compile_cnf(random_cnf(rng, args.vars, args.clauses))
        if not enumerate_solutions(net, limit=1):
            continue
        for engine in ("classical", "oneway", "twoway"):
            hits = [run_engine(net, engine, cfg, np.random.SeedSequence([args.seed, made, i]))[-1]
                    for i in range(args.runs)]
            rows.append({"instance": made, "engine": engine, **hitting_stats(hits)})
            print(rows[-1])
        made += 1
    with open(args.out, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


if __name__ == "__main__":
    main()
