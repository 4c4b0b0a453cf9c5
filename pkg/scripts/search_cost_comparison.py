#!/usr/bin/env python3
"""Compare message costs: expanding ring vs k-random-walk on random overlays.

For each seed, builds one connected G(n, p), picks a random source/target
pair, and runs both searches; prints mean costs and success rates.
"""

import argparse
import math

from sosim.graph import random_graph
from sosim.protocols.search import QueryConfig, WalkConfig, expanding_ring_search, k_random_walk
from sosim.rng import derive_run_seed, generator


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=100)
    ap.add_argument("--p", type=float, default=0.06)
    ap.add_argument("--k", type=int, default=16)
    ap.add_argument("--check-interval", type=int, default=4)
    ap.add_argument("--runs", type=int, default=50)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    ring_msgs, walk_msgs, walk_checks = [], [], []
    ring_hits = walk_hits = 0
    for i in range(args.runs):
        seed = derive_run_seed(args.seed, i)
        g = random_graph(args.n, args.p, seed=seed, require_connected=True,
                         max_retries=200)
        rng = generator(seed)
        src = int(rng.integers(0, args.n))
        tgt = int(rng.integers(0, args.n))
        ring = expanding_ring_search(g, QueryConfig(src, frozenset([tgt])))
        walk = k_random_walk(g, src, {tgt},
                             WalkConfig(args.k, args.check_interval, 10 * args.n), rng)
        ring_hits += ring.success
        walk_hits += walk.success
        ring_msgs.append(ring.messages)
        walk_msgs.append(walk.messages)
        walk_checks.append(walk.check_messages)

    mean = lambda xs: sum(xs) / len(xs)
    print(f"overlay G({args.n}, {args.p}), {args.runs} runs")
    print(f"expanding ring: success {ring_hits}/{args.runs}, "
          f"mean messages {mean(ring_msgs):8.1f}")
    print(f"{args.k}-walk (c={args.check_interval}): success {walk_hits}/{args.runs}, "
          f"mean messages {mean(walk_msgs):8.1f} + {mean(walk_checks):6.1f} checks")


if __name__ == "__main__":
    main()
