"""Drift-certificate degradation on the star-with-self-loops family.

With holding probabilities gamma_n -> 1 at the far satellites, the best
feasible contraction rho of any certificate with B = {hub} is pinned below by
sup gamma_n, so the table climbs to 1 as the truncation grows: the finite
shadow of a chain with no weighted spectral gap.

Usage:
    python scripts/degradation_table.py [--truncations 10 20 40 80 160]
                                        [--gamma one_minus_inv|constant]
                                        [--value 0.5]
"""

import argparse
import sys

from treegibbs.wsg import degradation_probe


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--truncations", type=int, nargs="+", default=[10, 20, 40, 80])
    ap.add_argument("--gamma", choices=["one_minus_inv", "constant"], default="one_minus_inv")
    ap.add_argument("--value", type=float, default=0.5)
    ns = ap.parse_args(argv)
    if ns.gamma == "one_minus_inv":
        gamma = lambda n: 1.0 - 1.0 / (1.0 + abs(n))
    else:
        gamma = lambda n: ns.value
    rows = degradation_probe(gamma, lambda n: 1.0, ns.truncations)
    print(f"{'N':>6}  {'best rho':>12}  {'sup gamma':>12}  feasible")
    for r in rows:
        print(f"{r['N']:>6}  {r['rho']:>12.8f}  {r['gamma_bound']:>12.8f}  {r['feasible']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
