"""Measuring query complexity: how many rounds until estimates are reliable.

The empirical threshold T_hat is the smallest horizon at which a matchup
achieves error <= epsilon in at least 75% of runs (checked at T and 2T, then
bisected to +-10%). Mean estimation needs about 1/eps^2 rounds regardless of
n; full-CDF and median estimation pay an extra factor of roughly n log n.
"""

import math

import threshold_arena as ta


def main():
    runs = 400
    print("mean estimation: T_hat vs the 1/eps^2 budget (n=16, uniform opponent)")
    print(f"{'eps':>6} {'T_hat':>7} {'1/eps^2':>8}")
    for eps in (0.2, 0.1, 0.05):
        config = ta.GameConfig(n=16, horizon=1, algorithm="meanest", adversary="uniform", seed=6)
        est = ta.estimate_query_complexity(config, eps, runs=runs)
        print(f"{eps:>6} {est.t_hat:>7} {math.ceil(1 / eps**2):>8}")

    print("\nCDF estimation: T_hat grows with n (eps=0.2, uniform opponent)")
    print(f"{'n':>6} {'T_hat':>7} {'3n ln(8n)/eps^2':>16}")
    t_hats = {}
    for n in (8, 16, 32):
        config = ta.GameConfig(n=n, horizon=1, algorithm="cdfest", adversary="uniform", seed=6)
        est = ta.estimate_query_complexity(config, 0.2, runs=runs)
        t_hats[n] = est.t_hat
        print(f"{n:>6} {est.t_hat:>7} {math.ceil(3 * n * math.log(8 * n) / 0.04):>16}")
    print(f"\ngrowth check: T_hat(32)/T_hat(8) = {t_hats[32] / t_hats[8]:.2f} "
          f"(budget ratio {32 * math.log(256) / (8 * math.log(64)):.2f})")

    print("\nthe same sweep is available from the command line, with the")
    print("reference budgets attached to every cell:")
    print("  threshold-arena complexity --algo cdfest --adv uniform "
          "--n 8,16 --eps 0.2 --runs 400")


if __name__ == "__main__":
    main()
