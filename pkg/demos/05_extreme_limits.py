"""Extreme-value checks: heavy-tailed perturbations and Frechet limits."""

import math

import numpy as np

from primewalks.experiments import ExperimentConfig, run_experiment
from primewalks.extremes import frechet_cdf, frechet_quantile, simulate_extreme

# When the perturbation puts mass k^(-alpha) on exponent k with alpha < 1,
# the exponent of that prime has infinite mean and running maxima take
# over: scaled by a(t) = t^(1/alpha), the max count at steps <= u*t
# converges to a Frechet law exp(-u c x^(-alpha)).
print("Frechet cdf at x=2 (u=1, c=1, alpha=0.5):", round(frechet_cdf(2.0, 1.0, 1.0, 0.5), 6))
print("its 90% quantile:", round(frechet_quantile(0.9, 1.0, 1.0, 0.5), 3))

# The limit process itself can be simulated directly: a Poisson cloud of
# birth times and heavy-tailed marks, with M(u) the best mark born by u.
rng = np.random.default_rng(5)
proc = simulate_extreme(c=1.0, alpha=0.5, d=1, horizon=1.0, r_min=1e-4, rng=rng)
print("extreme-process sup at u=0.5:", np.round(proc.sup_at(0.5), 3),
      " at u=1.0:", np.round(proc.sup_at(1.0), 3))

# The experiment compares simulated walks against both oracles: the
# analytic Frechet cdf (one-sample KS) and a fresh sample of the extreme
# process (two-sample KS). Primes outside the heavy set collapse to 0
# under the same scaling, and the report checks that too.
config = ExperimentConfig.from_dict({
    "kind": "max_count_frechet",
    "law": {
        "coupling": "independent",
        "factor": {"kind": "degenerate", "value": 1},
        "perturbation": {"kind": "pareto_exponent", "prime": 2, "alpha": 0.5},
    },
    "t": 2000,
    "replicas": 400,
    "seed": 1,
    "u_grid": [1.0],
    "primes": [2, 3],
})
report = run_experiment(config)
print("kind:", report.kind, " status:", report.status,
      " scaling a_t = t^(1/alpha) =", report.extras["a_t"])
for m in report.marginals:
    if m.ks is not None:
        print(f"  p={m.prime}: KS vs Frechet p={m.ks.pvalue:.3f}, "
              f"KS vs simulated process p={m.ks_oracle.pvalue:.3f}")
    else:
        print(f"  p={m.prime}: off the heavy set, median {m.extra['median']:.2e} "
              f"< {m.extra['threshold']:.0e}")

# The log LCM inherits the same limit scaled by log p of the heavy prime.
lcm_config = ExperimentConfig.from_dict({
    "kind": "log_lcm_frechet",
    "law": config.spec()["law"],
    "t": 2000,
    "replicas": 400,
    "seed": 1,
    "u_grid": [1.0],
})
lcm_report = run_experiment(lcm_config)
m = lcm_report.marginals[0]
print("log LCM limit:", m.reference, " KS p =", round(m.ks.pvalue, 3))
assert math.isclose(lcm_report.extras["weights_log_prime"]["2"], math.log(2))
