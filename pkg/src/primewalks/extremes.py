"""Direct simulation of the limiting extreme point process and its marginals.

The limit object behind the heavy-tailed experiments is a Poisson point
process on [0, horizon] x (0, inf]^d whose mark measure has a Pareto tail
of index alpha in (0, 1). The running coordinatewise supremum M(u) of the
marks with times <= u then has Frechet marginals exp(-u c x^-alpha). For
d > 1 the mark measure is the axis superposition matching a product of
independent heavy-tailed coordinates: each atom is large in exactly one
coordinate (joint exceedances vanish in the limit), so M(u) has
independent coordinates with their own tail constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "ExtremeProcessSample",
    "simulate_extreme",
    "frechet_cdf",
    "frechet_quantile",
    "frechet_sup_samples",
    "weighted_frechet_sum_samples",
]


def _tail_constants(c, d: int) -> tuple[float, ...]:
    if isinstance(c, (int, float, np.floating, np.integer)):
        cs = (float(c),) * d
    else:
        cs = tuple(float(v) for v in c)
        if len(cs) != d:
            raise ValueError(f"need {d} tail constants, got {len(cs)}")
    if any(v <= 0 for v in cs):
        raise ValueError("tail constants must be positive")
    return cs


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"tail index must lie in (0, 1), got {alpha}")
    return alpha


@dataclass(frozen=True)
class ExtremeProcessSample:
    """Atoms of one truncated extreme-process draw.

    times has shape (N,), marks shape (N, d); row i is the atom
    (times[i], marks[i]), already sorted by time. Marks below r_min are
    not represented: they cannot move a supremum that exceeds r_min, and
    the probability that M(horizon) falls below r_min is
    exp(-horizon * c_j * r_min^-alpha) per coordinate.
    """

    times: np.ndarray
    marks: np.ndarray
    horizon: float
    tail_constants: tuple[float, ...]
    alpha: float
    r_min: float

    @property
    def d(self) -> int:
        return self.marks.shape[1]

    @property
    def atoms(self) -> list[tuple[float, np.ndarray]]:
        """The (t_k, y_k) pairs as a plain list."""
        return [(float(t), y.copy()) for t, y in zip(self.times, self.marks)]

    def sup_at(self, u: float) -> np.ndarray:
        """Coordinatewise supremum of marks with time <= u (zeros if none)."""
        if u < 0:
            raise ValueError("time must be nonnegative")
        if u > self.horizon * (1 + 1e-12):
            raise ValueError("time exceeds the simulated horizon")
        mask = self.times <= u
        if not mask.any():
            return np.zeros(self.d)
        return self.marks[mask].max(axis=0)

    def count_above(self, r: float, u: float | None = None) -> int:
        """Number of atoms with time <= u (default: horizon) and max-norm >= r."""
        if r < self.r_min:
            raise ValueError("counts below r_min are not represented")
        mask = self.marks.max(axis=1) >= r
        if u is not None:
            mask &= self.times <= u
        return int(mask.sum())


def simulate_extreme(
    c,
    alpha: float,
    d: int = 1,
    horizon: float = 1.0,
    r_min: float = 0.01,
    rng: np.random.Generator | None = None,
) -> ExtremeProcessSample:
    """Draw the atoms above r_min of one extreme process.

    Per coordinate j the atom count is Poisson(horizon * c_j * r_min^-alpha),
    times are uniform on [0, horizon], and magnitudes are Pareto(alpha)
    above r_min; an atom is large in exactly one coordinate. c may be one
    tail constant shared by all coordinates or a sequence of d constants.
    """
    alpha = _check_alpha(alpha)
    if d < 1:
        raise ValueError("dimension must be at least 1")
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    if r_min <= 0:
        raise ValueError("r_min must be positive")
    if rng is None:
        raise ValueError("an explicit random generator is required")
    cs = _tail_constants(c, d)

    times_parts = []
    marks_parts = []
    for j, cj in enumerate(cs):
        rate = horizon * cj * r_min ** (-alpha)
        n = int(rng.poisson(rate))
        t = rng.uniform(0.0, horizon, size=n)
        y = r_min * rng.uniform(size=n) ** (-1.0 / alpha)
        m = np.zeros((n, d))
        m[:, j] = y
        times_parts.append(t)
        marks_parts.append(m)
    times = np.concatenate(times_parts) if times_parts else np.zeros(0)
    marks = np.vstack(marks_parts) if marks_parts else np.zeros((0, d))
    order = np.argsort(times, kind="stable")
    return ExtremeProcessSample(
        times=times[order],
        marks=marks[order],
        horizon=float(horizon),
        tail_constants=cs,
        alpha=alpha,
        r_min=float(r_min),
    )


def frechet_cdf(x, u: float, c: float, alpha: float):
    """P{M(u) <= x} = exp(-u c x^-alpha); zero for x <= 0.

    Accepts a scalar or array x and returns the same shape.
    """
    alpha = _check_alpha(alpha)
    if u <= 0 or c <= 0:
        raise ValueError("u and c must be positive")
    arr = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(arr)
    pos = arr > 0
    out[pos] = np.exp(-u * c * arr[pos] ** (-alpha))
    if np.isscalar(x) or arr.ndim == 0:
        return float(out)
    return out


def frechet_quantile(q: float, u: float, c: float, alpha: float) -> float:
    """Inverse of frechet_cdf in x for fixed (u, c, alpha)."""
    alpha = _check_alpha(alpha)
    if not 0.0 < q < 1.0:
        raise ValueError("quantile level must lie in (0, 1)")
    if u <= 0 or c <= 0:
        raise ValueError("u and c must be positive")
    return float((u * c / -math.log(q)) ** (1.0 / alpha))


def frechet_sup_samples(
    u: float, c: float, alpha: float, size: int, rng: np.random.Generator
) -> np.ndarray:
    """Exact draws of M(u) for d=1 via inversion (no r_min truncation).

    If E is standard exponential, (u c / E)^(1/alpha) has the Frechet law
    exp(-u c x^-alpha).
    """
    alpha = _check_alpha(alpha)
    if u <= 0 or c <= 0:
        raise ValueError("u and c must be positive")
    return (u * c / rng.exponential(1.0, size=size)) ** (1.0 / alpha)


def weighted_frechet_sum_samples(
    u: float,
    weights: Sequence[float],
    constants: Sequence[float],
    alpha: float,
    size: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Draws of sum_j w_j M_j(u) with independent Frechet coordinates.

    This is the limit of the log-LCM functionals when several heavy
    coordinates contribute: weights are the per-coordinate scale factors
    (log p for prime coordinates), constants the per-coordinate tail
    constants. Coordinates are drawn in order, one exponential block each.
    """
    if len(weights) != len(constants) or not weights:
        raise ValueError("weights and constants must be equal-length and nonempty")
    total = np.zeros(size)
    for w, cj in zip(weights, constants):
        if w <= 0:
            raise ValueError("weights must be positive")
        total += w * frechet_sup_samples(u, cj, alpha, size, rng)
    return total
