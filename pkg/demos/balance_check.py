"""Check the complement balance of each decision rule on reduced balls.

For threshold rules, complementing a neighborhood must send the threshold
tau to 1 - tau; for the sampling rule the check couples the swapped twin
on mirrored seeds and demands opposite bits.  Deviations here would break
the global spin-flip symmetry of whole runs.
"""

import numpy as np

from naesat import bp_rule, check_balance, random_neighborhood, sp_rule, unit_clause_rule


def sampler(r):
    return random_neighborhood(r, n=50, k=3, d=1.8, radius=2, reduce_frac=0.4)


def main() -> None:
    count = 200
    for rule in (unit_clause_rule(), bp_rule(2), sp_rule(1, seed=3)):
        rng = np.random.default_rng(11)
        rep = check_balance(rule, sampler, count, rng=rng)
        print(f"{rule.name:>6}: checked {rep.checked}, "
              f"max deviation {rep.max_deviation:.3e}, ok={rep.ok}")


if __name__ == "__main__":
    main()
