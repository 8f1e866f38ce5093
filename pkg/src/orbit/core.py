"""Label codes, elevation orderings and the ordering <-> label conversions.

Rank 0 is the deepest pixel.  A water level ``theta`` in ``0..N`` denotes the
physically consistent grid in which exactly the ``theta`` deepest pixels are
Water.
"""

from enum import IntEnum

import numpy as np

from ._validation import (LAND, MISSING, UNKNOWN, WATER, check_elevation, check_labels,
                          check_ordering)
from .exceptions import InvalidInputError

__all__ = [
    "Label",
    "LAND",
    "WATER",
    "MISSING",
    "UNKNOWN",
    "ordering_from_elevation",
    "labels_at_level",
    "level_of_labels",
]


class Label(IntEnum):
    LAND = LAND
    WATER = WATER
    MISSING = MISSING
    UNKNOWN = UNKNOWN


def ordering_from_elevation(elevation, mask=None):
    """Convert an elevation grid into a depth ranking.

    Parameters
    ----------
    elevation : array-like of shape (rows, cols)
        Finite elevations in any consistent unit.
    mask : array-like of bool, optional
        Basin mask.  Pixels where ``mask`` is False are pushed to the
        shallowest ranks, after every basin pixel.

    Returns
    -------
    ndarray of int64, shape (rows, cols)
        Rank per pixel; lower elevation gets the lower (deeper) rank and equal
        elevations are broken by row-major pixel index.
    """
    elevation = check_elevation(elevation)
    keys = [elevation.ravel()]
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != elevation.shape:
            raise InvalidInputError("mask shape does not match elevation shape")
        keys.append(~mask.ravel())
    # stable sort keeps row-major order among ties
    order = np.lexsort(keys) if len(keys) > 1 else np.argsort(keys[0], kind="stable")
    rank = np.empty(elevation.size, dtype=np.int64)
    rank[order] = np.arange(elevation.size)
    return rank.reshape(elevation.shape)


def labels_at_level(ordering, theta):
    """Physically consistent grid with the ``theta`` deepest pixels Water."""
    ordering = check_ordering(ordering)
    theta = int(theta)
    if not 0 <= theta <= ordering.size:
        raise InvalidInputError(f"theta={theta} outside 0..{ordering.size}")
    return (ordering < theta).astype(np.uint8)


def level_of_labels(labels, ordering):
    """Return the level whose consistent grid equals ``labels``, else None."""
    ordering = check_ordering(ordering)
    labels = check_labels(labels, ndim=2, allow_missing=False)
    if labels.shape != ordering.shape:
        raise InvalidInputError("labels and ordering shapes differ")
    water = labels.ravel() == WATER
    theta = int(water.sum())
    if np.array_equal(water, ordering.ravel() < theta):
        return theta
    return None
