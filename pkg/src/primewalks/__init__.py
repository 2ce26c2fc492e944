"""Multiplicative perturbed random walks in prime-exponent space.

Simulates integer-valued walks Product_k = step_1 * ... * step_k together
with perturbed values Product_{k-1} * perturbation_k, tracks prime
multiplicities and running LCMs exactly, and runs Monte Carlo experiments
that check the walks' central-limit and extreme-value limit laws against
analytic or simulated oracles.
"""

__version__ = "0.1.0"

from . import engine, experiments, extremes, laws, primes, reporting, stats, walks

__all__ = [
    "__version__",
    "primes",
    "laws",
    "walks",
    "extremes",
    "stats",
    "engine",
    "experiments",
    "reporting",
]
