"""How often is the true optimum reachable at all with a given action set?

Enumerates every action sequence of an environment on tiny random instances and
compares the best reachable objective with the exact optimum. A search over the
environment can never beat the reachable optimum, so this bounds its hit rate.

    python3 scripts/reachability.py --env 1.4 --count 200
"""

import argparse
import random

from mcts_jssp.env import JobShopEnv, preset
from mcts_jssp.instance import make_instance
from mcts_jssp.oracle import oracle_exact


def tiny_instance(rng, weighted):
    n_jobs = rng.randint(2, 4)
    m = rng.randint(1, 3)
    sizes = [1] * n_jobs
    for _ in range(rng.randint(n_jobs, 8) - n_jobs):
        sizes[rng.randrange(n_jobs)] += 1
    jobs = [[(rng.randrange(m), rng.randint(1, 10)) for _ in range(s)] for s in sizes]
    weights = [rng.randint(1, 5) for _ in range(n_jobs)] if weighted else None
    return make_instance(jobs, m, weights)


def reachable_optimum(env):
    best = None
    stack = [env.reset()]
    while stack:
        state = stack.pop()
        if env.is_terminal(state):
            obj = env.objective(state)
            best = obj if best is None or obj < best else best
        else:
            stack.extend(env.step(state, a) for a in env.legal_actions(state))
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--env", default="1.4")
    ap.add_argument("--count", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    cfg = preset(args.env)
    hits = {True: [0, 0], False: [0, 0]}
    for i in range(args.count):
        weighted = bool(i % 2)
        inst = tiny_instance(rng, weighted)
        reach = reachable_optimum(JobShopEnv(inst, cfg))
        hits[weighted][0] += reach == oracle_exact(inst)[0]
        hits[weighted][1] += 1
    for weighted, (ok, n) in hits.items():
        label = "random weights" if weighted else "unit weights"
        print(f"{label:15s} optimum reachable on {ok}/{n} ({ok / max(n, 1):.1%})")
    total_ok = sum(v[0] for v in hits.values())
    print(f"{'overall':15s} optimum reachable on {total_ok}/{args.count} ({total_ok / args.count:.1%})")


if __name__ == "__main__":
    main()
