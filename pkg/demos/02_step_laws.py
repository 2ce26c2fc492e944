"""Step laws: exact prime-count tails, moments, and coupled sampling."""

import numpy as np

from primewalks.laws import (
    GeometricLaw,
    IdenticalCoupling,
    IndependentCoupling,
    ParetoExponentLaw,
    ZetaLaw,
    compute_moments,
)

rng = np.random.default_rng(7)

# A zeta(alpha) step takes value n with probability n^-alpha / zeta(alpha).
# The exponent of a prime p in such a draw has the exact tail
# P{lambda_p >= k} = p^(-k alpha); no simulation needed.
law = ZetaLaw(2.0)
for p in (2, 3, 5):
    print(f"P{{lambda_{p} >= 1}} =", law.lambda_tail(p, 1), "=", p ** -2.0)

# Sampling agrees: draw 200k values and compare the empirical frequency.
draws = law.sample_rows(rng, 200_000)
emp = float(np.mean(np.asarray(draws.multiplicity_of(2)) >= 1))
print("empirical P{lambda_2 >= 1}:", round(emp, 4), " analytic:", 0.25)

# Per-prime means, variances and cross-prime covariances all have exact
# formulas; compute_moments gathers them for the experiment oracles.
mom = compute_moments(law, prime_limit=5)
print("E lambda_2 =", round(mom.mean_counts[2], 6))
print("Var lambda_2 =", round(mom.var_counts[2], 6))
print("Cov(lambda_2, lambda_3) =", round(mom.cov_counts[(2, 3)], 8))
print("E log step =", round(mom.mu_log, 6))

# A heavy-tailed exponent law: P{lambda_2 >= k} = k^(-alpha) with
# alpha < 1, so the exponent has infinite mean. This is the regime where
# maxima dominate and the Frechet limits of demo 05 appear.
heavy = ParetoExponentLaw(2, 0.5)
print("heavy tail at k=4:", heavy.lambda_tail(2, 4), "= 4^-0.5")

# Factor and perturbation can share one draw (identical coupling), be
# independent, or follow an arbitrary joint table.
same = IdenticalCoupling(ZetaLaw(2.0))
indep = IndependentCoupling(ZetaLaw(2.0), GeometricLaw(0.5))
print("identical coupling draw:", same.sample_pair(rng))
print("independent coupling draw:", indep.sample_pair(rng))
print("P{2 | xi and 2 | eta} independent:",
      round(indep.joint_count_tail({2: (1, 1)}), 6))
print("P{2 | xi and 2 | eta} identical:  ",
      round(same.joint_count_tail({2: (1, 1)}), 6))
