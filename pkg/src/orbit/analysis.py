"""Accuracy metrics, majority-filter baselines, boundary bounds and Monte Carlo."""

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ._validation import LAND, MISSING, UNKNOWN, WATER, check_labels, check_stack
from .core import labels_at_level, ordering_from_elevation
from .exceptions import InvalidInputError
from .scale import FusionConfig, build_mapping_grid, fuse
from .synth import aggregate_to_lsr, gen_bathymetry, inject_noise, make_desk_lake

__all__ = [
    "AccuracyReport",
    "BoundQuery",
    "MCTrial",
    "accuracy_report",
    "perimeter",
    "u_ratio",
    "area_series",
    "majority_spatial",
    "majority_temporal",
    "upsample_labels",
    "bound_within_k",
    "bound_joint",
    "containment_layers",
    "mc_boundary_experiment",
    "summarize_bounds",
    "noise_robustness_experiment",
]


@dataclass(frozen=True)
class AccuracyReport:
    """Percentages over all pixel-timesteps; ``pct_total`` is their sum."""

    n_unknown: int
    n_error: int
    n_total: int

    @property
    def pct_unknown(self):
        return 100.0 * self.n_unknown / self.n_total

    @property
    def pct_error(self):
        return 100.0 * self.n_error / self.n_total

    @property
    def pct_total(self):
        return self.pct_unknown + self.pct_error


def accuracy_report(est, truth, mask=None):
    """Compare an estimated stack with ground truth.

    ``mask`` (rows, cols), if given, restricts the count to basin pixels.
    """
    est = check_labels(est, allow_unknown=True, name="est")
    truth = check_labels(truth, allow_missing=False, name="truth")
    if est.shape != truth.shape:
        raise InvalidInputError(f"est shape {est.shape} does not match truth {truth.shape}")
    if mask is not None:
        mask = np.broadcast_to(np.asarray(mask, dtype=bool), est.shape)
        est, truth = est[mask], truth[mask]
    unknown = est == UNKNOWN
    wrong = ~unknown & (est != truth)
    return AccuracyReport(int(unknown.sum()), int(wrong.sum()), int(est.size))


def perimeter(labels):
    """Water pixels with at least one non-Water 4-neighbour (edges count)."""
    labels = check_labels(labels, ndim=2, allow_missing=False)
    return int(np.count_nonzero(_boundary(labels == WATER)))


def _boundary(water):
    padded = np.pad(water, 1, constant_values=False)
    interior = padded[:-2, 1:-1] & padded[2:, 1:-1] & padded[1:-1, :-2] & padded[1:-1, 2:]
    return water & ~interior


def u_ratio(est, truth):
    """Unknown count of ``est`` per fine-resolution perimeter pixel of ``truth``."""
    est = check_labels(est, ndim=2, allow_unknown=True, name="est")
    n_unknown = int(np.count_nonzero(est == UNKNOWN))
    per = perimeter(truth)
    if per == 0:
        if n_unknown:
            raise InvalidInputError("u_ratio undefined: zero perimeter with unknown pixels")
        return 0.0
    return n_unknown / per


def area_series(stack):
    """Per timestep ``(water_count, water_plus_unknown_count)``, shape (T, 2)."""
    stack = check_stack(stack, allow_unknown=True)
    flat = stack.reshape(stack.shape[0], -1)
    water = np.count_nonzero(flat == WATER, axis=1)
    unknown = np.count_nonzero(flat == UNKNOWN, axis=1)
    return np.stack([water, water + unknown], axis=1)


def _majority(stack, count):
    water = count(stack == WATER)
    land = count(stack == LAND)
    out = stack.copy()
    out[water > land] = WATER
    out[land > water] = LAND
    return out


def majority_spatial(stack, radius=1):
    """Per-timestep majority over the ``(2r+1)^2`` window (Missing ignored, ties keep)."""
    stack = check_stack(stack)
    size = 2 * int(radius) + 1
    kernel = np.ones((1, size, size), dtype=np.int32)
    return _majority(stack, lambda m: ndimage.correlate(m.astype(np.int32), kernel,
                                                         mode="constant", cval=0))


def majority_temporal(stack, half_window=2):
    """Per-pixel majority over ``2w+1`` timesteps (Missing ignored, ties keep)."""
    stack = check_stack(stack)
    weights = np.ones(2 * int(half_window) + 1, dtype=np.int32)
    return _majority(stack, lambda m: ndimage.correlate1d(m.astype(np.int32), weights, axis=0,
                                                           mode="constant", cval=0))


def upsample_labels(coarse, grid):
    """Copy each cell label to its fine members; Missing becomes Unknown.

    Pixels outside the lattice are Unknown.  This is how the majority-filter
    baselines are brought to the fine resolution for scoring.
    """
    coarse = check_stack(coarse)
    T = coarse.shape[0]
    out = np.full((T, grid.fine_rows * grid.fine_cols), UNKNOWN, dtype=np.uint8)
    values = np.where(coarse == MISSING, UNKNOWN, coarse).reshape(T, -1)
    out[:, grid.members()] = values[:, :, None]
    return out.reshape(T, grid.fine_rows, grid.fine_cols)


@dataclass(frozen=True)
class BoundQuery:
    gr: int
    C: int
    k: int

    def __post_init__(self):
        if self.gr < 1 or self.C < 1 or not 0 <= self.k <= self.gr:
            raise InvalidInputError(
                f"bound query needs gr >= 1, C >= 1, 0 <= k <= gr; got {self}")


def bound_within_k(q):
    """Probability that the detected boundary contour is within k layers."""
    return 1.0 - (1.0 - (q.k + 1) / (q.gr + 1)) ** q.C


def bound_joint(q):
    """Probability that unknowns are confined within k contours on both sides."""
    return bound_within_k(q) ** 2


def containment_layers(pivots, theta, n_pixels, contour_width):
    """Contour layers between the pivots and the true water line.

    Layer 0 on the water side is the last filled contour (ranks
    ``theta - contour_width .. theta - 1``); layer 0 on the land side is the
    first empty one.  Returns the larger of the two layer indices, or
    ``math.inf`` when a side has no pivot although the true extent does.
    """
    width = max(int(contour_width), 1)
    if pivots.pivot_w is None:
        water_side = 0 if theta == 0 else math.inf
    else:
        water_side = (theta - 1 - pivots.pivot_w) // width
    if pivots.pivot_l is None:
        land_side = 0 if theta == n_pixels else math.inf
    else:
        land_side = (pivots.pivot_l - theta) // width
    return max(water_side, land_side, 0)


@dataclass(frozen=True)
class MCTrial:
    trial: int
    factor: int
    gr: int
    wth: int
    offset_row: int
    offset_col: int
    extent: int
    perimeter: int
    coarse_perimeter: int
    unknown: int
    u_ratio: float
    layers: float
    pct_error: float


def _coarse_perimeter(truth, grid):
    per = _boundary(truth == WATER)
    return int(np.count_nonzero(grid.blocks(per).any(axis=1)))


def _run_trial(trial, seq, kind, rows, cols, pad, level_fraction, factor, wth_fraction,
               bathymetry):
    lake_seq, offset_seq = seq
    lake_rng = np.random.default_rng(lake_seq)
    offset_rng = np.random.default_rng(offset_seq)
    r0, c0 = (int(v) for v in offset_rng.integers(0, factor, size=2))

    params = dict(bathymetry)
    if kind == "bowl":
        span = 0.15
        params.setdefault("anisotropy", float(lake_rng.uniform(0.6, 1.6)))
        params.setdefault("roughness", 1e-6)
        params.setdefault("center", (
            (rows + pad) / 2 + lake_rng.uniform(-span, span) * rows,
            (cols + pad) / 2 + lake_rng.uniform(-span, span) * cols))
    # one lake per trial, shared by every lattice; the lattice offset is a crop
    big = gen_bathymetry(kind, rows + pad, cols + pad,
                         seed=int(lake_rng.integers(2**31)), **params)
    elevation = big[r0:r0 + rows, c0:c0 + cols]

    ordering = ordering_from_elevation(elevation)
    n = ordering.size
    theta = int(round(level_fraction * n))
    truth = labels_at_level(ordering, theta)
    grid = build_mapping_grid(rows, cols, factor)
    wth = min(max(int(round(wth_fraction * grid.gr)), 1), grid.gr)
    coarse = aggregate_to_lsr(truth[None], grid, wth)
    result = fuse(coarse, ordering, factor=factor, config=FusionConfig(wth=wth))
    est = result.labels[0]
    pivots = result.pivots[0]
    per = perimeter(truth)
    report = accuracy_report(est, truth)
    return MCTrial(
        trial=trial, factor=factor, gr=grid.gr, wth=wth, offset_row=r0, offset_col=c0,
        extent=theta, perimeter=per, coarse_perimeter=_coarse_perimeter(truth, grid),
        unknown=report.n_unknown, u_ratio=u_ratio(est, truth),
        layers=containment_layers(pivots, theta, n, per), pct_error=report.pct_error)


def mc_boundary_experiment(kind="bowl", rows=200, cols=200,
                           level_fractions=(0.01, 0.02, 0.04, 0.08, 0.15, 0.25, 0.4),
                           factors=(10, 20), wth_fractions=(0.5, 0.75), trials=200, seed=0,
                           n_jobs=1, **bathymetry):
    """Unknown-pixel statistics of perfect-input fusion on random lakes.

    For every ``(factor, wth_fraction)`` configuration, ``trials`` lakes are
    drawn.  Trial ``i`` uses the same lake and extent in every configuration
    (extent fractions cycle through ``level_fractions``); the lattice offset
    is drawn per configuration.  Exact coarse labels are aggregated from the
    true fine map and fused back with the true ordering and threshold.

    Returns a list of ``MCTrial`` rows, ordered by configuration then trial.
    """
    rows, cols, trials = int(rows), int(cols), int(trials)
    if trials < 1:
        raise InvalidInputError("trials must be >= 1")
    if not level_fractions or not factors or not wth_fractions:
        raise InvalidInputError("level_fractions, factors and wth_fractions must be non-empty")
    for f in factors:
        if rows % f or cols % f:
            raise InvalidInputError(f"grid {rows}x{cols} not divisible by factor {f}")
    for w in wth_fractions:
        if not 0 < w <= 1:
            raise InvalidInputError("wth fractions must lie in (0, 1]")
    for lf in level_fractions:
        if not 0 <= lf <= 1:
            raise InvalidInputError("level fractions must lie in [0, 1]")

    pad = int(max(factors))
    root = np.random.SeedSequence(seed)
    lake_seqs = root.spawn(trials)
    jobs = []
    for ci, (factor, wfrac) in enumerate((f, w) for f in factors for w in wth_fractions):
        offset_root = np.random.SeedSequence([seed, 1 + ci])
        for i, off in enumerate(offset_root.spawn(trials)):
            frac = level_fractions[i % len(level_fractions)]
            jobs.append((i, (lake_seqs[i], off), kind, rows, cols, pad, frac, int(factor), wfrac,
                         bathymetry))
    if n_jobs == 1:
        return [_run_trial(*job) for job in jobs]
    from concurrent.futures import ThreadPoolExecutor
    with ThreadPoolExecutor(max_workers=None if n_jobs in (None, -1) else n_jobs) as pool:
        return list(pool.map(lambda job: _run_trial(*job), jobs))


def summarize_bounds(table, ks=(0, 1, 2)):
    """Empirical containment frequency against the mean per-trial bound.

    Returns one dict per ``(gr, k)`` with the empirical frequency, the mean
    bound over trials, its binomial standard error and the one-sided check
    ``empirical >= bound - 3 * se``.
    """
    out = []
    for gr in sorted({row.gr for row in table}):
        rows = [row for row in table if row.gr == gr]
        for k in ks:
            hits = np.array([row.layers <= k for row in rows])
            bounds = np.array([bound_joint(BoundQuery(gr, max(row.coarse_perimeter, 1), k))
                               for row in rows])
            p = float(bounds.mean())
            se = math.sqrt(p * (1 - p) / len(rows))
            emp = float(hits.mean())
            out.append({"gr": gr, "k": k, "trials": len(rows), "empirical": emp,
                        "bound": p, "se": se, "ok": emp >= p - 3 * se})
    return out


NOISE_METHODS = ("orbit_st", "orbit_s", "temporal_majority", "spatial_majority")


def noise_robustness_experiment(noise_levels=(0.05, 0.1, 0.2, 0.3), seeds=range(10), alpha=0.8,
                                lake=None, radius=1, half_window=2, noise_params=None):
    """Accuracy of fusion and majority-filter baselines on noisy coarse maps.

    The fine ordering is the true one and ``wth`` is estimated from the noisy
    coarse stack.  Majority-filtered coarse maps are upsampled blockwise for
    scoring (Missing becomes Unknown).

    Returns a list of dicts with keys ``method``, ``noise``, ``seed`` and
    ``report`` (an AccuracyReport against the true fine stack).
    """
    lake = make_desk_lake() if lake is None else lake
    noise_params = {} if noise_params is None else dict(noise_params)
    rows = []
    for noise in noise_levels:
        for seed in seeds:
            noisy = inject_noise(lake.coarse, noise, seed=seed, **noise_params)
            factor = lake.grid.factor
            estimates = {
                "orbit_st": fuse(noisy, lake.ordering, factor=factor,
                                 config=FusionConfig(alpha=alpha)).labels,
                "orbit_s": fuse(noisy, lake.ordering, factor=factor).labels,
                "temporal_majority": upsample_labels(majority_temporal(noisy, half_window),
                                                     lake.grid),
                "spatial_majority": upsample_labels(majority_spatial(noisy, radius), lake.grid),
            }
            for method in NOISE_METHODS:
                rows.append({"method": method, "noise": noise, "seed": seed,
                             "report": accuracy_report(estimates[method], lake.truth)})
    return rows
