"""Brute-force reference implementations used by the tests."""

import itertools
from fractions import Fraction

import numpy as np


def naive_err_profile(labels, ordering):
    """Mismatch of ``labels`` against every rendered level, one theta at a time."""
    labels = np.asarray(labels).ravel()
    ranks = np.asarray(ordering).ravel()
    seen = labels != 2
    out = []
    for theta in range(ranks.size + 1):
        cand = (ranks < theta).astype(labels.dtype)
        out.append(int(np.count_nonzero(seen & (cand != labels))))
    return out


def brute_force_levels(profiles, alpha):
    """Exhaustive minimiser of mismatch + alpha * transition.

    Every level sequence is enumerated in lexicographic order and scored in
    exact rational arithmetic, so the first minimum is the lexicographically
    smallest optimum.  Returns ``(cost, levels)`` with ``cost`` a Fraction.
    """
    profiles = np.asarray(profiles, dtype=np.int64)
    alpha = Fraction(alpha).limit_denominator(10**6)
    T, n1 = profiles.shape
    seqs = np.array(list(itertools.product(range(n1), repeat=T)), dtype=np.int64)
    mismatch = profiles[np.arange(T), seqs].sum(axis=1)
    transition = np.abs(np.diff(seqs, axis=1)).sum(axis=1)
    # scaled by the denominator to stay in integers
    scaled = mismatch * alpha.denominator + alpha.numerator * transition
    best = int(np.argmin(scaled))
    return Fraction(int(scaled[best]), alpha.denominator), seqs[best].tolist()
