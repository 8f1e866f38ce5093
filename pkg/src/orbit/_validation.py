"""Input validation helpers shared by every module.

Arrays are the currency of the package: a label stack is a ``uint8`` array of
shape ``(T, rows, cols)``, an ordering is an integer rank array of shape
``(rows, cols)``.  The helpers below coerce and check them once at the public
boundary so the algorithms can assume well-formed input.
"""

import numpy as np

from .exceptions import InvalidInputError

LAND, WATER, MISSING, UNKNOWN = 0, 1, 2, 3


def check_labels(labels, *, ndim=None, allow_missing=True, allow_unknown=False,
                 name="labels"):
    labels = np.asarray(labels)
    if ndim is not None and labels.ndim != ndim:
        raise InvalidInputError(
            f"{name} must be {ndim}-dimensional, got shape {labels.shape}")
    if labels.size == 0:
        raise InvalidInputError(f"{name} is empty")
    if labels.dtype.kind not in "iub":
        raise InvalidInputError(f"{name} must hold integer label codes, got {labels.dtype}")
    if labels.min() < 0 or labels.max() > UNKNOWN:
        raise InvalidInputError(f"{name} contains codes outside 0..3")
    if not allow_missing and np.any(labels == MISSING):
        raise InvalidInputError(f"{name} must not contain Missing labels")
    if not allow_unknown and np.any(labels == UNKNOWN):
        raise InvalidInputError(f"{name} must not contain Unknown labels")
    return labels.astype(np.uint8, copy=False)


def check_stack(stack, **kwargs):
    """Validate a ``(T, rows, cols)`` label stack."""
    kwargs.setdefault("name", "stack")
    return check_labels(stack, ndim=3, **kwargs)


def check_ordering(ordering, shape=None):
    ordering = np.asarray(ordering)
    if ordering.ndim != 2 or ordering.size == 0:
        raise InvalidInputError(f"ordering must be a non-empty 2-D rank array, got shape {ordering.shape}")
    if ordering.dtype.kind not in "iu":
        raise InvalidInputError(f"ordering must hold integer ranks, got {ordering.dtype}")
    if shape is not None and ordering.shape != tuple(shape):
        raise InvalidInputError(
            f"ordering shape {ordering.shape} does not match grid shape {tuple(shape)}")
    n = ordering.size
    flat = ordering.ravel()
    if flat.min() < 0 or flat.max() >= n or np.bincount(flat, minlength=n).max() != 1:
        raise InvalidInputError("ordering violates rank bijection onto 0..N-1")
    return ordering.astype(np.int64, copy=False)


def check_elevation(elevation):
    elevation = np.asarray(elevation, dtype=float)
    if elevation.ndim != 2 or elevation.size == 0:
        raise InvalidInputError(f"elevation must be a non-empty 2-D array, got shape {elevation.shape}")
    if not np.all(np.isfinite(elevation)):
        raise InvalidInputError("elevation contains non-finite values")
    return elevation


def check_alpha(alpha):
    alpha = float(alpha)
    if not np.isfinite(alpha) or alpha < 0:
        raise InvalidInputError(f"alpha must be a finite non-negative number, got {alpha}")
    return alpha


def pixels_by_rank(ordering):
    """Flat pixel index of the pixel holding each rank (inverse permutation)."""
    flat = np.asarray(ordering).ravel()
    inv = np.empty_like(flat)
    inv[flat] = np.arange(flat.size)
    return inv
