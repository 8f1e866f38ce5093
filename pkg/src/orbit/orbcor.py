"""Per-timestep ordering-based label correction and ordering learning."""

import numpy as np

from ._validation import (LAND, MISSING, WATER, check_labels, check_ordering, check_stack,
                          pixels_by_rank)
from .exceptions import InvalidInputError

__all__ = [
    "err_profile",
    "err_profiles",
    "correct_timestep",
    "correct_stack",
    "learn_ordering",
    "total_mismatch",
]


def _profiles_by_rank(by_rank):
    # by_rank: (T, N) labels sorted deepest-first
    T, n = by_rank.shape
    water = np.zeros((T, n + 1), dtype=np.int64)
    land = np.zeros((T, n + 1), dtype=np.int64)
    np.cumsum(by_rank == WATER, axis=1, out=water[:, 1:])
    np.cumsum(by_rank == LAND, axis=1, out=land[:, 1:])
    # Land predicted Water below theta, Water predicted Land at or above theta
    return land + (water[:, -1:] - water)


def err_profiles(stack, ordering):
    """Mismatch counts for every timestep and every level.

    Returns an int64 array of shape ``(T, N + 1)`` whose entry ``[t, theta]``
    counts the non-missing pixels of ``stack[t]`` that disagree with the
    consistent grid at level ``theta``.
    """
    stack = check_stack(stack)
    ordering = check_ordering(ordering, shape=stack.shape[1:])
    flat = stack.reshape(stack.shape[0], -1)
    return _profiles_by_rank(flat[:, pixels_by_rank(ordering)])


def err_profile(labels, ordering):
    """Mismatch count ``costs[theta]`` for one grid, ``theta = 0..N``.

    Missing pixels contribute nothing at any level.  Computed in one pass over
    rank-sorted prefix sums.

    Examples
    --------
    >>> import numpy as np
    >>> order = np.arange(7).reshape(1, 7)
    >>> err_profile(np.array([[1, 1, 1, 0, 0, 1, 0]]), order).tolist()
    [4, 3, 2, 1, 2, 3, 2, 3]
    """
    labels = check_labels(labels, ndim=2)
    return err_profiles(labels[None], ordering)[0]


def correct_timestep(labels, ordering):
    """Pick the consistent grid closest to ``labels``.

    Returns ``(theta_hat, corrected)``; ties go to the smallest level.
    """
    costs = err_profile(labels, ordering)
    theta = int(np.argmin(costs))
    return theta, (np.asarray(ordering) < theta).astype(np.uint8)


def correct_stack(stack, ordering):
    """Correct every timestep independently.

    Returns
    -------
    levels : ndarray of int64, shape (T,)
    corrected : ndarray of uint8, shape (T, rows, cols)
        Physically consistent; Missing labels are imputed.
    """
    profiles = err_profiles(stack, ordering)
    levels = np.argmin(profiles, axis=1)
    return levels, render_levels(ordering, levels)


def render_levels(ordering, levels):
    ordering = np.asarray(ordering)
    levels = np.asarray(levels, dtype=np.int64)
    return (ordering[None, :, :] < levels[:, None, None]).astype(np.uint8)


def total_mismatch(stack, ordering):
    """Sum over timesteps of the per-timestep minimum mismatch."""
    return int(err_profiles(stack, ordering).min(axis=1).sum())


def _frequency_ordering(flat):
    # flat: (T, N) label codes
    water = (flat == WATER).sum(axis=0)
    observed = (flat != MISSING).sum(axis=0)
    freq = np.divide(water, observed, out=np.zeros(water.shape, dtype=float),
                     where=observed > 0)
    index = np.arange(flat.shape[1])
    # deepest first: high frequency, then high raw count, then row-major
    order = np.lexsort((index, -water, -freq))
    rank = np.empty_like(index)
    rank[order] = index
    return rank


def _refine_pass(flat, rank, levels):
    """One left-to-right adjacent-transposition sweep at fixed levels.

    Swapping the pixels at ranks ``r`` and ``r + 1`` only changes the
    mismatch of timesteps whose level is exactly ``r + 1``, so only those
    boundaries are visited.  Returns the number of accepted swaps.
    """
    n = rank.size
    pix = pixels_by_rank(rank)
    by_level = {}
    for t, lv in enumerate(levels.tolist()):
        if 1 <= lv <= n - 1:
            by_level.setdefault(lv, []).append(t)
    swaps = 0
    for lv in sorted(by_level):
        r = lv - 1
        times = by_level[lv]
        p, q = pix[r], pix[r + 1]
        lp, lq = flat[times, p], flat[times, q]
        before = np.count_nonzero(lp == LAND) + np.count_nonzero(lq == WATER)
        after = np.count_nonzero(lq == LAND) + np.count_nonzero(lp == WATER)
        if after < before:
            pix[r], pix[r + 1] = q, p
            swaps += 1
    rank[pix] = np.arange(n)
    return swaps


def learn_ordering(stack, max_refine_iters=50, return_history=False):
    """Learn a depth ranking from a multi-temporal label stack.

    The ranking starts from water frequency over observed (non-missing)
    labels and is refined by alternating per-timestep correction with a
    hill-climbing pass over adjacent rank pairs that accepts only swaps
    strictly lowering the total mismatch.

    Parameters
    ----------
    stack : array-like of shape (T, rows, cols)
        Land/Water/Missing labels.
    max_refine_iters : int
        Upper bound on refinement passes; 0 returns the frequency ordering.
    return_history : bool
        Also return the total mismatch after initialization and after every
        pass that changed the ordering.

    Returns
    -------
    ordering : ndarray of int64, shape (rows, cols)
    history : list of int, only if ``return_history``
        Non-increasing.
    """
    stack = check_stack(stack)
    if int(max_refine_iters) < 0:
        raise InvalidInputError("max_refine_iters must be >= 0")
    shape = stack.shape[1:]
    flat = stack.reshape(stack.shape[0], -1)
    rank = _frequency_ordering(flat)

    profiles = _profiles_by_rank(flat[:, pixels_by_rank(rank)])
    history = [int(profiles.min(axis=1).sum())]
    for _ in range(int(max_refine_iters)):
        if history[-1] == 0:
            break
        levels = np.argmin(profiles, axis=1)
        if _refine_pass(flat, rank, levels) == 0:
            break
        profiles = _profiles_by_rank(flat[:, pixels_by_rank(rank)])
        history.append(int(profiles.min(axis=1).sum()))

    ordering = rank.reshape(shape)
    if return_history:
        return ordering, history
    return ordering
