"""Why the estimators must randomize: breaking any deterministic algorithm.

A deterministic algorithm's queries can be simulated in advance. Each round
the breaker looks at the precomputed query q, takes the larger of {1..q} and
{q+1..n}, and feeds the algorithm samples from both ends of that side: the
feedback bit is the same either way, so the algorithm cannot distinguish a
left-heavy world from a right-heavy one. A shared tail of 1s and ns then
shifts both medians so that no single index is a 1/16-good answer for both.
"""

import json

import threshold_arena as ta
from threshold_arena.estimators import MidpointBaseline


def main():
    n, horizon = 16, 160
    pair = ta.build_breaker_pair(lambda: MidpointBaseline(n), n, horizon)
    half = horizon // 2
    print(f"breaker pair against the midpoint baseline, n={n}, T={horizon}")
    print(f"  first-phase left  support: {sorted(set(pair.left[:half]))}")
    print(f"  first-phase right support: {sorted(set(pair.right[:half]))}")
    print(f"  low-query proportion p = {pair.p}, shared tail: "
          f"{pair.tail.count(1)} ones then {pair.tail.count(n)} {n}s\n")

    for baseline in ("midpoint", "halving"):
        report = ta.breaker_report(baseline, n, horizon)
        print(f"{baseline}:")
        print(json.dumps(report.to_dict(), indent=2))
        print()

    print("both baselines emit one estimate for two incompatible worlds; the")
    print("randomized estimators dodge this because their queries cannot be")
    print("precomputed. Try it on your own deterministic strategy:")
    print("  threshold-arena breaker --baseline halving --n 16 --T 160")


if __name__ == "__main__":
    main()
