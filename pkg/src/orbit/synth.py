"""Synthetic lakes: bathymetry, level dynamics, coarse aggregation and noise.

Every generator is a pure function of its arguments and ``seed``.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import LAND, MISSING, WATER, check_ordering, check_stack
from .exceptions import InvalidInputError
from .core import ordering_from_elevation
from .orbcor import render_levels
from .scale import build_mapping_grid

__all__ = [
    "gen_bathymetry",
    "simulate_level_series",
    "render_stack",
    "aggregate_to_lsr",
    "inject_noise",
    "DeskLake",
    "desk_levels",
    "make_desk_lake",
]

BATHYMETRY_KINDS = ("bowl", "gaussian_mix")
LEVEL_PATTERNS = ("sinusoid", "random_walk", "pulses")


def gen_bathymetry(kind, rows, cols, seed=0, *, center=None, anisotropy=1.0,
                   roughness=0.0, n_components=3, sigma_range=(0.08, 0.25),
                   amplitude_range=(0.5, 1.0)):
    """Synthetic basin elevation.

    Parameters
    ----------
    kind : {"bowl", "gaussian_mix"}
        ``bowl`` is a paraboloid with its minimum at ``center`` (default the
        pixel ``(rows // 2, cols // 2)``); ``anisotropy`` scales the column
        axis.  ``gaussian_mix`` is the negated sum of ``n_components`` seeded
        Gaussian bumps whose widths are fractions (``sigma_range``) of the
        grid size, shifted so the deepest point is 0.
    roughness : float
        Standard deviation of seeded white noise added to a bowl, relative to
        the bowl's depth range.  Zero keeps the bowl exactly radial.
    """
    rows, cols = int(rows), int(cols)
    if rows < 4 or cols < 4:
        raise InvalidInputError("bathymetry needs at least 4x4 pixels")
    if kind not in BATHYMETRY_KINDS:
        raise InvalidInputError(f"kind must be one of {BATHYMETRY_KINDS}, got {kind!r}")
    rng = np.random.default_rng(seed)
    r, c = np.mgrid[0:rows, 0:cols].astype(float)

    if kind == "bowl":
        if anisotropy <= 0:
            raise InvalidInputError("anisotropy must be positive")
        cr, cc = (rows // 2, cols // 2) if center is None else center
        elev = (r - cr) ** 2 + ((c - cc) / anisotropy) ** 2
        if roughness:
            elev = elev + rng.normal(0.0, roughness * (elev.max() - elev.min()), elev.shape)
        return elev

    if int(n_components) < 1:
        raise InvalidInputError("gaussian_mix needs n_components >= 1")
    size = float(max(rows, cols))
    depth = np.zeros((rows, cols))
    for _ in range(int(n_components)):
        mu_r = rng.uniform(0.2, 0.8) * (rows - 1)
        mu_c = rng.uniform(0.2, 0.8) * (cols - 1)
        sigma = rng.uniform(*sigma_range) * size
        amp = rng.uniform(*amplitude_range)
        depth += amp * np.exp(-((r - mu_r) ** 2 + (c - mu_c) ** 2) / (2 * sigma ** 2))
    return depth.max() - depth


def simulate_level_series(T, N, pattern, seed=0, **params):
    """Water level series clamped to ``0..N``.

    ``sinusoid``: ``mean``, ``amplitude`` (fractions of N, defaults 0.5 and
    0.25), ``period`` (default T), ``phase``.

    ``random_walk``: ``start`` (default N // 2) and ``step_scale``; each step
    is a Poisson(step_scale) magnitude with a random sign, reflected at 0 and
    N, so the mean absolute step is ``step_scale`` away from the bounds.

    ``pulses``: ``baseline`` and ``pulses``, a list of ``(start, height,
    width)`` rectangular excursions.
    """
    T, N = int(T), int(N)
    if T < 1 or N < 0:
        raise InvalidInputError("T must be >= 1 and N >= 0")
    if pattern not in LEVEL_PATTERNS:
        raise InvalidInputError(f"pattern must be one of {LEVEL_PATTERNS}, got {pattern!r}")
    rng = np.random.default_rng(seed)
    t = np.arange(T)

    if pattern == "sinusoid":
        unknown = set(params) - {"mean", "amplitude", "period", "phase"}
        if unknown:
            raise InvalidInputError(f"unexpected sinusoid params {sorted(unknown)}")
        period = float(params.get("period", T))
        if period <= 0:
            raise InvalidInputError("period must be positive")
        mean = params.get("mean", 0.5) * N
        amp = params.get("amplitude", 0.25) * N
        levels = np.rint(mean + amp * np.sin(2 * np.pi * t / period + params.get("phase", 0.0)))
    elif pattern == "random_walk":
        scale = float(params.get("step_scale", 1.0))
        if scale < 0:
            raise InvalidInputError("step_scale must be non-negative")
        steps = rng.poisson(scale, T - 1) * rng.choice([-1, 1], T - 1)
        level = int(params.get("start", N // 2))
        levels = np.empty(T, dtype=np.int64)
        levels[0] = level
        for i, step in enumerate(steps, start=1):
            level += int(step)
            if N > 0:
                while level < 0 or level > N:
                    level = -level if level < 0 else 2 * N - level
            else:
                level = 0
            levels[i] = level
    else:
        levels = np.full(T, int(params.get("baseline", 0)), dtype=np.int64)
        for start, height, width in params.get("pulses", ()):
            if width < 0:
                raise InvalidInputError("pulse width must be non-negative")
            levels[int(start):int(start) + int(width)] += int(height)
    return np.clip(np.asarray(levels, dtype=np.int64), 0, N)


def render_stack(ordering, levels):
    """Consistent ``(T, rows, cols)`` stack with ``levels[t]`` Water pixels."""
    ordering = check_ordering(ordering)
    levels = np.asarray(levels, dtype=np.int64).ravel()
    if levels.size == 0:
        raise InvalidInputError("levels must contain at least one timestep")
    if levels.min() < 0 or levels.max() > ordering.size:
        raise InvalidInputError(f"levels must lie in 0..{ordering.size}")
    return render_levels(ordering, levels)


def aggregate_to_lsr(fine_stack, grid, wth):
    """Coarse stack: a cell is Water iff at least ``wth`` members are Water."""
    fine_stack = check_stack(fine_stack, allow_missing=False)
    if fine_stack.shape[1:] != (grid.fine_rows, grid.fine_cols):
        raise InvalidInputError("fine stack shape does not match mapping grid")
    if not 1 <= int(wth) <= grid.gr:
        raise InvalidInputError(f"wth={wth} outside 1..{grid.gr}")
    counts = (grid.blocks(fine_stack) == WATER).sum(axis=-1)
    coarse = (counts >= int(wth)).astype(np.uint8)
    return coarse.reshape((fine_stack.shape[0],) + grid.coarse_shape)


def _grow_blob(rng, rows, cols, size):
    start = (int(rng.integers(rows)), int(rng.integers(cols)))
    blob = [start]
    seen = {start}
    frontier = []

    def push(p):
        r, c = p
        for q in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
            if 0 <= q[0] < rows and 0 <= q[1] < cols and q not in seen:
                seen.add(q)
                frontier.append(q)

    push(start)
    while len(blob) < size and frontier:
        i = int(rng.integers(len(frontier)))
        frontier[i], frontier[-1] = frontier[-1], frontier[i]
        p = frontier.pop()
        blob.append(p)
        push(p)
    return np.array(blob)


def inject_noise(stack, target_fraction, blob_mean_size=8.0, run_mean_length=2.0,
                 missing_share=0.3, seed=0):
    """Spatio-temporally correlated label errors and gaps.

    Events are drawn until ``target_fraction`` of all pixel-timesteps are
    perturbed.  Each event grows a 4-connected blob around a random seed
    pixel (geometric size, mean ``blob_mean_size``) and holds it for a
    geometric run of timesteps (mean ``run_mean_length``).  Inside the event
    every not-yet-perturbed entry becomes Missing with probability
    ``missing_share`` and is flipped otherwise.  The last event is truncated
    so the perturbed count hits the target exactly.
    """
    stack = check_stack(stack)
    for name, v in (("target_fraction", target_fraction), ("missing_share", missing_share)):
        if not 0.0 <= float(v) <= 1.0:
            raise InvalidInputError(f"{name} must lie in [0, 1], got {v}")
    if blob_mean_size < 1 or run_mean_length < 1:
        raise InvalidInputError("blob_mean_size and run_mean_length must be >= 1")
    rng = np.random.default_rng(seed)
    T, rows, cols = stack.shape
    out = stack.copy()
    touched = np.zeros(stack.shape, dtype=bool)
    target = int(np.ceil(float(target_fraction) * stack.size))
    done = 0
    while done < target:
        size = int(rng.geometric(1.0 / blob_mean_size))
        run = int(rng.geometric(1.0 / run_mean_length))
        blob = _grow_blob(rng, rows, cols, size)
        t0 = int(rng.integers(T))
        times = np.arange(t0, min(T, t0 + run))
        tt = np.repeat(times, len(blob))
        rr = np.tile(blob[:, 0], len(times))
        cc = np.tile(blob[:, 1], len(times))
        fresh = ~touched[tt, rr, cc]
        tt, rr, cc = tt[fresh][:target - done], rr[fresh][:target - done], cc[fresh][:target - done]
        touched[tt, rr, cc] = True
        done += tt.size
        gone = rng.random(tt.size) < missing_share
        old = out[tt, rr, cc]
        flipped = np.where(old == WATER, LAND, np.where(old == LAND, WATER, old))
        out[tt, rr, cc] = np.where(gone, MISSING, flipped).astype(np.uint8)
    return out


@dataclass
class DeskLake:
    """A seeded synthetic reservoir with exact fine and coarse label stacks."""

    elevation: np.ndarray
    ordering: np.ndarray
    levels: np.ndarray
    truth: np.ndarray
    grid: object
    wth: int
    coarse: np.ndarray


def desk_levels(T, N):
    """Seasonal sinusoid (30% +- 15% of N) plus two short flood pulses."""
    seasonal = simulate_level_series(T, N, "sinusoid", mean=0.3, amplitude=0.15,
                                     period=max(T / 2.5, 1.0))
    floods = simulate_level_series(
        T, N, "pulses", baseline=0,
        pulses=[(int(0.6 * T), int(0.06 * N), max(T // 40, 1)),
                (int(0.8 * T), int(0.04 * N), max(T // 50, 1))])
    return np.clip(seasonal + floods, 0, N)


def make_desk_lake(rows=120, cols=120, factor=10, T=200, wth=None, seed=0):
    """Desk-scale reservoir: gaussian-mix basin, seasonal levels plus two floods.

    ``wth`` defaults to half the cell size.
    """
    elevation = gen_bathymetry("gaussian_mix", rows, cols, seed=seed)
    ordering = ordering_from_elevation(elevation)
    levels = desk_levels(T, ordering.size)
    truth = render_stack(ordering, levels)
    grid = build_mapping_grid(rows, cols, factor)
    wth = grid.gr // 2 if wth is None else int(wth)
    return DeskLake(elevation, ordering, levels, truth, grid, wth,
                    aggregate_to_lsr(truth, grid, wth))
