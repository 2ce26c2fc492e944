"""Numerical screening of the perturbation-negligibility conditions."""

from primewalks.laws import IndependentCoupling, ZetaLaw, check_negligibility, frequent_boundary

# The log LCM of the perturbed walk shares the clean walk's normal limit
# only if perturbations cannot move it by more than o(n^(-1/2)). The
# checker splits primes at hit probability n^(-1/2) into frequent and
# rare, sums the rare-prime perturbation means weighted by log p, and
# tracks that remainder against n^(-1/2) over a grid of n.
grid = [10**2, 10**3, 10**4, 10**5, 10**6]

good = IndependentCoupling(ZetaLaw(2.0), ZetaLaw(4.0))
report = check_negligibility(good, grid)
print("zeta(2) factor, zeta(4) perturbation:")
for row in report.to_dict()["rows"]:
    print(f"  n={row['n']:>9,}  boundary prime ~{row['frequent_prime_max']:>4}  "
          f"remainder/n^-0.5 = {row['ratio_to_sqrt_n']:.4f}")
print("  trend:", report.trend, " verdict consistent:", report.consistent)

# A perturbation with a barely heavier tail sends the ratio the other
# way: the remainder is NOT o(n^(-1/2)) and the normal limit for the
# perturbed LCM is no longer licensed by this criterion.
bad = IndependentCoupling(ZetaLaw(2.0), ZetaLaw(2.2))
report2 = check_negligibility(bad, grid)
print("zeta(2) factor, zeta(2.2) perturbation:")
for row in report2.to_dict()["rows"]:
    print(f"  n={row['n']:>9,}  remainder/n^-0.5 = {row['ratio_to_sqrt_n']:.4f}")
print("  trend:", report2.trend, " verdict consistent:", report2.consistent)

# The frequent/rare boundary itself grows like n^(1/(2 alpha)) for a
# zeta(alpha) law; at n = 10^8 and alpha = 2 it sits exactly at 100.
print("frequent boundary at n=1e8:", frequent_boundary(ZetaLaw(2.0), 10**8))
