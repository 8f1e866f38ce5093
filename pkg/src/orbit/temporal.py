"""Temporally consistent water levels by dynamic programming.

The objective over a level sequence ``theta_1..theta_T`` is::

    sum_t Err_t(theta_t) + alpha * sum_t |theta_t - theta_{t+1}|

It is minimized exactly.  Mismatch and transition costs are integers; alpha
is converted to a rational ``num / den`` so the DP runs in exact integer
arithmetic and ties are decided without rounding noise.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._validation import check_alpha, check_ordering, check_stack
from .exceptions import InvalidInputError
from .orbcor import err_profiles, render_levels

__all__ = [
    "CostBreakdown",
    "AlphaSweep",
    "smooth_levels",
    "smooth_stack",
    "alpha_sweep",
    "suggest_alpha",
]

_MAX_DENOMINATOR = 10**6


@dataclass(frozen=True)
class CostBreakdown:
    mismatch_cost: int
    transition_cost: int
    alpha: float

    @property
    def total_cost(self):
        return self.mismatch_cost + self.alpha * self.transition_cost


@dataclass(frozen=True)
class AlphaSweep:
    """One row per alpha: the costs of that alpha's optimal level sequence."""

    alphas: np.ndarray
    mismatch: np.ndarray
    transition: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "alphas", np.asarray(self.alphas, dtype=float))
        object.__setattr__(self, "mismatch", np.asarray(self.mismatch, dtype=np.int64))
        object.__setattr__(self, "transition", np.asarray(self.transition, dtype=np.int64))

    @property
    def total(self):
        return self.mismatch + self.alphas * self.transition

    def __len__(self):
        return len(self.alphas)

    def rows(self):
        for a, m, tr, tot in zip(self.alphas, self.mismatch, self.transition, self.total):
            yield float(a), int(m), int(tr), float(tot)


def _rational(alpha):
    frac = Fraction(alpha).limit_denominator(_MAX_DENOMINATOR)
    return frac.numerator, frac.denominator


def _l1_envelope(values, weight):
    """``out[i] = min_j values[j] + weight * |i - j|`` in O(n)."""
    idx = np.arange(values.size, dtype=values.dtype) * weight
    left = np.minimum.accumulate(values - idx) + idx
    right = (np.minimum.accumulate((values + idx)[::-1]))[::-1] - idx
    return np.minimum(left, right)


def _check_profiles(profiles):
    profiles = np.asarray(profiles)
    if profiles.ndim != 2 or profiles.shape[0] < 1 or profiles.shape[1] < 1:
        raise InvalidInputError(
            f"profiles must have shape (T, N + 1) with T >= 1, got {profiles.shape}")
    if profiles.dtype.kind not in "iu":
        raise InvalidInputError("profiles must hold integer mismatch counts")
    if profiles.min() < 0:
        raise InvalidInputError("profiles must be non-negative")
    return profiles.astype(np.int64, copy=False)


def smooth_levels(profiles, alpha):
    """Globally optimal level sequence for the mismatch/transition trade-off.

    Parameters
    ----------
    profiles : array-like of int, shape (T, N + 1)
        Per-timestep mismatch profiles (rows of equal length).
    alpha : float
        Non-negative weight of the transition cost.

    Returns
    -------
    levels : ndarray of int64, shape (T,)
        The lexicographically smallest optimal sequence.
    costs : CostBreakdown
    """
    profiles = _check_profiles(profiles)
    alpha = check_alpha(alpha)
    num, den = _rational(alpha)
    T, width = profiles.shape

    bound = (num + den) * int(profiles.max(initial=0) + width) * T
    dtype = np.int64 if bound < 2**62 else object
    scaled = profiles.astype(dtype) * den

    # cost-to-go: best total from t to the end given level theta at t
    togo = np.empty((T, width), dtype=dtype)
    togo[-1] = scaled[-1]
    for t in range(T - 2, -1, -1):
        togo[t] = scaled[t] + _l1_envelope(togo[t + 1], num)

    grid = np.arange(width, dtype=dtype)
    levels = np.empty(T, dtype=np.int64)
    levels[0] = int(np.argmin(togo[0]))
    for t in range(1, T):
        step = togo[t] + num * np.abs(grid - levels[t - 1])
        levels[t] = int(np.argmin(step))

    mismatch = int(profiles[np.arange(T), levels].sum())
    transition = int(np.abs(np.diff(levels)).sum())
    return levels, CostBreakdown(mismatch, transition, alpha)


def smooth_stack(stack, ordering, alpha):
    """Temporally smoothed correction of a label stack.

    Returns ``(levels, corrected_stack, costs)``.
    """
    stack = check_stack(stack)
    ordering = check_ordering(ordering, shape=stack.shape[1:])
    levels, costs = smooth_levels(err_profiles(stack, ordering), alpha)
    return levels, render_levels(ordering, levels), costs


def alpha_sweep(profiles, alphas):
    """Solve ``smooth_levels`` for each alpha of a strictly increasing grid."""
    profiles = _check_profiles(profiles)
    alphas = np.asarray(alphas, dtype=float).ravel()
    if alphas.size == 0:
        raise InvalidInputError("alphas must be non-empty")
    if np.any(np.diff(alphas) <= 0):
        raise InvalidInputError("alphas must be strictly increasing")
    for a in alphas:
        check_alpha(a)
    mismatch = np.empty(alphas.size, dtype=np.int64)
    transition = np.empty(alphas.size, dtype=np.int64)
    for i, a in enumerate(alphas):
        _, costs = smooth_levels(profiles, a)
        mismatch[i] = costs.mismatch_cost
        transition[i] = costs.transition_cost
    return AlphaSweep(alphas, mismatch, transition)


def suggest_alpha(sweep, tol=1e-12):
    """Elbow of the transition-cost curve.

    The transition column is min-max normalized and the alpha with the
    largest discrete second difference is returned; near-ties (within
    ``tol``) resolve to the smallest alpha.  This is a heuristic.
    """
    if len(sweep) < 3:
        raise InvalidInputError("suggest_alpha needs at least 3 sweep rows")
    y = np.asarray(sweep.transition, dtype=float)
    span = y.max() - y.min()
    y = (y - y.min()) / span if span > 0 else np.zeros_like(y)
    second = y[:-2] - 2 * y[1:-1] + y[2:]
    best = np.flatnonzero(second >= second.max() - tol)[0]
    return float(sweep.alphas[best + 1])
