"""Coarse-to-fine label transfer through a fine-resolution depth ranking.

Pipeline (``fuse``):

1. accept or learn the fine ordering,
2. derive the coarse ordering and the aggregation threshold ``wth``,
3. correct the coarse stack (per timestep, or temporally smoothed),
4. mark fine pixels whose label is implied by their cell's label,
5. propagate those labels along the fine ordering from two pivots.

A coarse cell is Water iff at least ``wth`` of its ``gr`` fine members are
Water, so a Land cell has at least ``gr - wth + 1`` Land members.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._validation import (LAND, UNKNOWN, WATER, check_alpha, check_labels, check_ordering,
                          check_stack, pixels_by_rank)
from .exceptions import InconsistentLabelsError, InvalidInputError
from .orbcor import _profiles_by_rank, correct_stack, learn_ordering
from .temporal import CostBreakdown, smooth_stack

__all__ = [
    "MappingGrid",
    "FusionConfig",
    "PivotPair",
    "FusionResult",
    "build_mapping_grid",
    "candidate_lsr_ordering",
    "estimate_wth",
    "confident_hsr_labels",
    "pivot_propagate",
    "fuse",
    "UNKNOWN_POLICIES",
]

UNKNOWN_POLICIES = ("keep", "fill_land", "fill_mid")


@dataclass(frozen=True)
class MappingGrid:
    """Uniform ``factor x factor`` block lattice over a fine raster.

    The lattice starts at ``offset``; fine pixels in the leading
    ``offset[0]`` rows or ``offset[1]`` columns lie outside every cell.
    """

    fine_rows: int
    fine_cols: int
    factor: int
    offset: tuple = (0, 0)

    @property
    def gr(self):
        return self.factor * self.factor

    @property
    def coarse_shape(self):
        return ((self.fine_rows - self.offset[0]) // self.factor,
                (self.fine_cols - self.offset[1]) // self.factor)

    @property
    def n_cells(self):
        rows, cols = self.coarse_shape
        return rows * cols

    def blocks(self, fine):
        """View ``fine[..., rows, cols]`` as ``[..., n_cells, gr]`` (row-major cells)."""
        fine = np.asarray(fine)
        s = self.factor
        r0, c0 = self.offset
        cr, cc = self.coarse_shape
        lead = fine.shape[:-2]
        sub = fine[..., r0:r0 + cr * s, c0:c0 + cc * s]
        sub = sub.reshape(lead + (cr, s, cc, s))
        sub = np.moveaxis(sub, -3, -2)
        return sub.reshape(lead + (cr * cc, s * s))

    def members(self):
        """Flat fine-pixel indices of each cell, shape ``(n_cells, gr)``."""
        index = np.arange(self.fine_rows * self.fine_cols).reshape(self.fine_rows, self.fine_cols)
        return self.blocks(index)

    def cell_index(self):
        """Cell id of every fine pixel, -1 outside the lattice."""
        out = np.full(self.fine_rows * self.fine_cols, -1, dtype=np.int64)
        out[self.members()] = np.arange(self.n_cells)[:, None]
        return out.reshape(self.fine_rows, self.fine_cols)


def build_mapping_grid(fine_rows, fine_cols, factor, offset=(0, 0)):
    fine_rows, fine_cols, factor = int(fine_rows), int(fine_cols), int(factor)
    r0, c0 = (int(v) for v in offset)
    if factor < 1:
        raise InvalidInputError(f"block factor must be >= 1, got {factor}")
    if not (0 <= r0 < factor and 0 <= c0 < factor):
        raise InvalidInputError(f"offset {(r0, c0)} must lie in [0, {factor})")
    for name, size, off in (("rows", fine_rows, r0), ("cols", fine_cols, c0)):
        if size - off < factor or (size - off) % factor:
            raise InvalidInputError(
                f"fine {name} minus offset ({size - off}) not divisible by factor {factor}")
    return MappingGrid(fine_rows, fine_cols, factor, (r0, c0))


@dataclass(frozen=True)
class FusionConfig:
    """``wth=None`` estimates the threshold; ``alpha=None`` skips temporal smoothing."""

    wth: Optional[int] = None
    alpha: Optional[float] = None
    unknown_policy: str = "keep"

    def __post_init__(self):
        if self.unknown_policy not in UNKNOWN_POLICIES:
            raise InvalidInputError(
                f"unknown_policy must be one of {UNKNOWN_POLICIES}, got {self.unknown_policy!r}")
        if self.wth is not None and int(self.wth) < 1:
            raise InvalidInputError("wth must be >= 1")
        if self.alpha is not None:
            check_alpha(self.alpha)


@dataclass(frozen=True)
class PivotPair:
    """Rank of the shallowest Water and deepest Land pixel (None if absent)."""

    pivot_w: Optional[int]
    pivot_l: Optional[int]

    def gap(self, n_pixels):
        """Number of ranks strictly between the pivots."""
        w = -1 if self.pivot_w is None else self.pivot_w
        l = n_pixels if self.pivot_l is None else self.pivot_l
        return l - w - 1


def _check_wth(wth, grid):
    wth = int(wth)
    if not 1 <= wth <= grid.gr:
        raise InvalidInputError(f"wth={wth} outside 1..{grid.gr}")
    return wth


def _ranks_to_ordering(values, shape):
    order = np.argsort(values, kind="stable")
    rank = np.empty(values.size, dtype=np.int64)
    rank[order] = np.arange(values.size)
    return rank.reshape(shape)


def candidate_lsr_ordering(pi_h, grid, wth):
    """Coarse ordering ranking each cell by its ``wth``-th deepest member."""
    pi_h = check_ordering(pi_h, shape=(grid.fine_rows, grid.fine_cols))
    wth = _check_wth(wth, grid)
    members = np.sort(grid.blocks(pi_h), axis=1)
    return _ranks_to_ordering(members[:, wth - 1], grid.coarse_shape)


def estimate_wth(pi_h, grid, lsr_stack, sample_every=1):
    """Threshold whose coarse ordering needs the fewest corrections.

    Every candidate ``wth = 1..gr`` is scored by the summed per-timestep
    minimum mismatch of ``lsr_stack`` under its coarse ordering; ties go to
    the smallest ``wth``.  ``sample_every`` scores only every k-th timestep.

    Returns ``(wth, coarse_ordering, scores)`` with ``scores[w - 1]`` the
    total mismatch of candidate ``w``.
    """
    pi_h = check_ordering(pi_h, shape=(grid.fine_rows, grid.fine_cols))
    lsr_stack = check_stack(lsr_stack)
    if lsr_stack.shape[1:] != grid.coarse_shape:
        raise InvalidInputError(
            f"coarse stack shape {lsr_stack.shape[1:]} does not match grid {grid.coarse_shape}")
    if int(sample_every) < 1:
        raise InvalidInputError("sample_every must be >= 1")
    sample = lsr_stack[::int(sample_every)]
    flat = sample.reshape(sample.shape[0], -1)
    members = np.sort(grid.blocks(pi_h), axis=1)

    scores = np.empty(grid.gr, dtype=np.int64)
    for w in range(1, grid.gr + 1):
        ordering = _ranks_to_ordering(members[:, w - 1], grid.coarse_shape)
        profiles = _profiles_by_rank(flat[:, pixels_by_rank(ordering)])
        scores[w - 1] = profiles.min(axis=1).sum()
    best = int(np.argmin(scores)) + 1
    return best, _ranks_to_ordering(members[:, best - 1], grid.coarse_shape), scores


def confident_hsr_labels(lsr_labels, grid, wth, pi_h):
    """Fine labels implied by a consistent coarse grid, Unknown elsewhere.

    A Water cell makes its ``wth`` deepest members Water; a Land cell makes
    its ``gr - wth + 1`` shallowest members Land.
    """
    lsr_labels = check_labels(lsr_labels, ndim=2, allow_missing=False)
    if lsr_labels.shape != grid.coarse_shape:
        raise InvalidInputError("coarse grid shape does not match mapping grid")
    pi_h = check_ordering(pi_h, shape=(grid.fine_rows, grid.fine_cols))
    wth = _check_wth(wth, grid)
    return _confident(lsr_labels.ravel(), grid, wth, _local_order(pi_h, grid))


def _local_order(pi_h, grid):
    # fine flat indices of each cell's members, deepest first
    members = grid.members()
    ranks = pi_h.ravel()[members]
    return np.take_along_axis(members, np.argsort(ranks, axis=1), axis=1)


def _confident(cell_labels, grid, wth, local):
    out = np.full(grid.fine_rows * grid.fine_cols, UNKNOWN, dtype=np.uint8)
    wet = cell_labels == WATER
    out[local[wet, :wth].ravel()] = WATER
    out[local[~wet, wth - 1:].ravel()] = LAND
    return out.reshape(grid.fine_rows, grid.fine_cols)


def pivot_propagate(labels, pi_h):
    """Extend Water below the shallowest Water and Land above the deepest Land.

    Returns ``(labels, PivotPair)``.  Raises InconsistentLabelsError when a
    Land pixel lies deeper than a Water pixel.
    """
    labels = check_labels(labels, ndim=2, allow_missing=False, allow_unknown=True)
    pi_h = check_ordering(pi_h, shape=labels.shape)
    ranks = pi_h.ravel()
    flat = labels.ravel()
    water = ranks[flat == WATER]
    land = ranks[flat == LAND]
    pivot_w = int(water.max()) if water.size else None
    pivot_l = int(land.min()) if land.size else None
    if pivot_w is not None and pivot_l is not None and pivot_l < pivot_w:
        raise InconsistentLabelsError(
            f"Land at rank {pivot_l} lies deeper than Water at rank {pivot_w}",
            deep_rank=pivot_l, shallow_rank=pivot_w)
    out = flat.copy()
    if pivot_w is not None:
        out[ranks <= pivot_w] = WATER
    if pivot_l is not None:
        out[ranks >= pivot_l] = LAND
    return out.reshape(labels.shape), PivotPair(pivot_w, pivot_l)


def _fill(ranks, pivots, policy, n):
    w = -1 if pivots.pivot_w is None else pivots.pivot_w
    if policy == "fill_land":
        theta = w + 1
    else:
        theta = w + 1 + pivots.gap(n) // 2
    return (ranks < theta).astype(np.uint8)


@dataclass
class FusionResult:
    """Output of ``fuse``.

    ``labels`` is the fine stack; ``levels`` and ``coarse_labels`` are the
    corrected coarse water levels and maps from the coarse correction step.
    """

    labels: np.ndarray
    levels: np.ndarray
    pivots: list
    wth: int
    ordering: np.ndarray
    coarse_ordering: np.ndarray
    coarse_labels: np.ndarray
    grid: MappingGrid
    costs: Optional[CostBreakdown] = None
    wth_scores: Optional[np.ndarray] = field(default=None, repr=False)


def fuse(lsr_stack, ordering=None, *, hsr_stack=None, factor=1, offset=(0, 0),
         config=None, max_refine_iters=50, sample_every=1):
    """Transfer a coarse label stack to the fine resolution.

    Parameters
    ----------
    lsr_stack : array-like of shape (T, coarse_rows, coarse_cols)
        Noisy coarse labels (Land/Water/Missing).
    ordering : array-like of shape (fine_rows, fine_cols), optional
        Fine depth ranking.  Exactly one of ``ordering`` and ``hsr_stack``.
    hsr_stack : array-like of shape (T', fine_rows, fine_cols), optional
        Fine training labels; the ordering is learned from them.
    factor, offset :
        Block lattice; see ``build_mapping_grid``.
    config : FusionConfig, optional
        Threshold, temporal weight and unknown policy.
    max_refine_iters : int
        Passed to ``learn_ordering`` when ``hsr_stack`` is given.
    sample_every : int
        Timestep stride used when estimating ``wth``.

    Returns
    -------
    FusionResult
    """
    config = FusionConfig() if config is None else config
    lsr_stack = check_stack(lsr_stack)
    if (ordering is None) == (hsr_stack is None):
        raise InvalidInputError("pass exactly one of ordering and hsr_stack")
    if ordering is None:
        ordering = learn_ordering(hsr_stack, max_refine_iters=max_refine_iters)
    ordering = check_ordering(ordering)
    grid = build_mapping_grid(ordering.shape[0], ordering.shape[1], factor, offset)
    if lsr_stack.shape[1:] != grid.coarse_shape:
        raise InvalidInputError(
            f"coarse stack shape {lsr_stack.shape[1:]} does not match grid {grid.coarse_shape}")

    scores = None
    if config.wth is None:
        wth, coarse_ordering, scores = estimate_wth(ordering, grid, lsr_stack, sample_every)
    else:
        wth = _check_wth(config.wth, grid)
        coarse_ordering = candidate_lsr_ordering(ordering, grid, wth)

    costs = None
    if config.alpha is None:
        levels, coarse = correct_stack(lsr_stack, coarse_ordering)
    else:
        levels, coarse, costs = smooth_stack(lsr_stack, coarse_ordering, config.alpha)

    local = _local_order(ordering, grid)
    ranks = ordering.ravel()
    n = ranks.size
    fine = np.empty((lsr_stack.shape[0],) + ordering.shape, dtype=np.uint8)
    pivots = []
    for t in range(lsr_stack.shape[0]):
        tri = _confident(coarse[t].ravel(), grid, wth, local)
        out, pp = pivot_propagate(tri, ordering)
        if config.unknown_policy != "keep":
            out = _fill(ranks, pp, config.unknown_policy, n).reshape(ordering.shape)
        fine[t] = out
        pivots.append(pp)
    return FusionResult(fine, levels, pivots, wth, ordering, coarse_ordering, coarse, grid,
                        costs, scores)
