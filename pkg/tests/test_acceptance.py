"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v -s`` or
``python tests/test_acceptance.py``.
"""

import time
from fractions import Fraction

import numpy as np
import pytest
from scipy.stats import spearmanr

from orbit import formats
from orbit.analysis import (NOISE_METHODS, accuracy_report, mc_boundary_experiment,
                            noise_robustness_experiment, summarize_bounds)
from orbit.core import ordering_from_elevation
from orbit.exceptions import FormatError
from orbit.orbcor import (correct_stack, err_profile, err_profiles, learn_ordering,
                          total_mismatch)
from orbit.scale import FusionConfig, build_mapping_grid, candidate_lsr_ordering, fuse
from orbit.synth import (aggregate_to_lsr, gen_bathymetry, inject_noise,
                         render_stack, simulate_level_series)
from orbit.temporal import alpha_sweep, smooth_levels, smooth_stack

from oracles import brute_force_levels, naive_err_profile

WATER, UNKNOWN = 1, 3


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, f"criterion {number} failed: {detail}"
    return emit


@pytest.fixture(scope="module")
def mc_table():
    start = time.perf_counter()
    table = mc_boundary_experiment(kind="bowl", rows=200, cols=200, factors=(10, 20),
                                   wth_fractions=(0.5, 0.75), trials=200, seed=0)
    return table, time.perf_counter() - start


def tri_monotone(labels, ordering):
    seq = labels.ravel()[np.argsort(ordering.ravel())]
    key = np.select([seq == WATER, seq == UNKNOWN], [0, 1], 2)
    return bool(np.all(np.diff(key) >= 0))


def test_criterion_01_dp_optimality(report):
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    failures = 0
    n_cases = 150
    for _ in range(n_cases):
        n = int(rng.integers(1, 7))
        T = int(rng.integers(1, 6))
        ordering = rng.permutation(n).reshape(1, n)
        stack = rng.choice([0, 1, 2], size=(T, 1, n), p=[0.45, 0.45, 0.1]).astype(np.uint8)
        profiles = err_profiles(stack, ordering)
        alpha = float(rng.choice([0, 0.25, 0.5, 1, 1.5, 2, rng.uniform(0, 3)]))
        levels, costs = smooth_levels(profiles, alpha)
        cost, seq = brute_force_levels(profiles, alpha)
        exact = levels.tolist() == seq and _rational_total(costs, alpha) == cost
        failures += not exact
    elapsed = time.perf_counter() - start
    report(1, failures == 0 and elapsed < 30,
           f"{n_cases} instances, {failures} mismatches vs exhaustive search, {elapsed:.1f}s")


def _rational_total(costs, alpha):
    return costs.mismatch_cost + Fraction(alpha).limit_denominator(10**6) * costs.transition_cost


def test_criterion_02_alpha_zero_reduction(report):
    bad = 0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        rows, cols = (int(v) for v in rng.integers(3, 12, size=2))
        ordering = rng.permutation(rows * cols).reshape(rows, cols)
        levels = simulate_level_series(25, rows * cols, "random_walk", seed=seed,
                                       step_scale=2.0)
        noisy = inject_noise(render_stack(ordering, levels), 0.25, seed=seed)
        a_levels, a = correct_stack(noisy, ordering)
        b_levels, b, _ = smooth_stack(noisy, ordering, 0)
        bad += not (np.array_equal(a, b) and np.array_equal(a_levels, b_levels))
    report(2, bad == 0, f"20 noisy stacks, {bad} differ label-for-label")


def _pulse(width, n=4, height=4):
    pad = width + 1
    levels = [0] * pad + [height] * width + [0] * pad
    ordering = np.arange(n).reshape(1, n)
    return err_profiles(render_stack(ordering, levels), ordering), levels


def test_criterion_03_pulse_thresholds(report):
    checks = []
    profiles, levels = _pulse(1)
    keep = smooth_levels(profiles, 0.4)
    flat = smooth_levels(profiles, 0.6)
    checks.append(keep[1].transition_cost == 8 and keep[0].tolist() == levels)
    checks.append(flat[1].mismatch_cost == 4 and not flat[0].any())
    profiles, levels = _pulse(3)
    keep = smooth_levels(profiles, 1.4)
    flat = smooth_levels(profiles, 1.6)
    checks.append(keep[1].transition_cost == 8 and keep[0].tolist() == levels)
    checks.append(flat[1].mismatch_cost == 12 and not flat[0].any())
    report(3, all(checks), f"pulse kept/flattened at alpha 0.4/0.6 and 1.4/1.6: {checks}")


def test_criterion_04_tradeoff_monotonicity(report, desk_lake):
    alphas = [round(0.1 * i, 10) for i in range(21)]
    sweeps = []
    for noise, seed in ((0.1, 0), (0.3, 1), (0.3, 2)):
        fine = inject_noise(desk_lake.truth, noise, seed=seed)
        sweeps.append(alpha_sweep(err_profiles(fine, desk_lake.ordering), alphas))
        coarse = inject_noise(desk_lake.coarse, noise, seed=seed)
        co = candidate_lsr_ordering(desk_lake.ordering, desk_lake.grid, desk_lake.wth)
        sweeps.append(alpha_sweep(err_profiles(coarse, co), alphas))
    ok = all(np.all(np.diff(s.mismatch) >= 0) and np.all(np.diff(s.transition) <= 0)
             for s in sweeps)
    drop = sweeps[-1].transition
    report(4, ok, f"{len(sweeps)} sweeps over alpha 0:0.1:2; "
                  f"coarse 30% transition {int(drop[0])} -> {int(drop[-1])}")


def test_criterion_05_err_profile_oracle(report):
    rng = np.random.default_rng(5)
    bad = 0
    for _ in range(50):
        n = int(rng.integers(1, 201))
        rows = int(rng.choice([d for d in range(1, n + 1) if n % d == 0]))
        ordering = rng.permutation(n).reshape(rows, n // rows)
        labels = rng.integers(0, 3, size=ordering.shape).astype(np.uint8)
        bad += err_profile(labels, ordering).tolist() != naive_err_profile(labels, ordering)
    report(5, bad == 0, f"50 instances up to N=200, {bad} disagree with naive rendering")


def test_criterion_06_zero_error_fusion(report):
    errors = 0
    non_monotone = 0
    for lake in range(50):
        rng = np.random.default_rng([6, lake])
        factor = int(rng.choice([2, 3, 4, 5]))
        off = tuple(int(v) for v in rng.integers(0, factor, size=2))
        rows = off[0] + factor * int(rng.integers(4, 9))
        cols = off[1] + factor * int(rng.integers(4, 9))
        kind = "bowl" if lake % 2 else "gaussian_mix"
        params = {"anisotropy": float(rng.uniform(0.6, 1.6)), "roughness": 1e-6} \
            if kind == "bowl" else {}
        elevation = gen_bathymetry(kind, rows, cols, seed=lake, **params)
        ordering = ordering_from_elevation(elevation)
        grid = build_mapping_grid(rows, cols, factor, off)
        wth = int(rng.integers(1, grid.gr + 1))
        levels = simulate_level_series(20, ordering.size, "random_walk", seed=lake,
                                       step_scale=ordering.size / 15)
        truth = render_stack(ordering, levels)
        coarse = aggregate_to_lsr(truth, grid, wth)
        result = fuse(coarse, ordering, factor=factor, offset=off, config=FusionConfig(wth=wth))
        errors += accuracy_report(result.labels, truth).n_error
        non_monotone += sum(not tri_monotone(g, ordering) for g in result.labels)
    report(6, errors == 0 and non_monotone == 0,
           f"50 lakes, {errors} wrong fine labels, {non_monotone} non-monotone timesteps")


def test_criterion_07_bound_validation(report, mc_table):
    table, elapsed = mc_table
    summary = summarize_bounds(table, ks=(0, 1, 2))
    detail = "; ".join(f"gr={s['gr']} k={s['k']} emp={s['empirical']:.3f} "
                       f"bound={s['bound']:.4f}" for s in summary)
    per_config = min(sum(r.gr == g and r.wth == w for r in table)
                     for g, w in {(r.gr, r.wth) for r in table})
    ok = all(s["ok"] for s in summary) and per_config >= 200 and elapsed < 300
    report(7, ok, f"{per_config} trials/config, {elapsed:.0f}s; {detail}")


def test_criterion_08_boundary_trends(report, mc_table):
    table, _ = mc_table
    rhos = []
    for gr in (100, 400):
        for wth in sorted({r.wth for r in table if r.gr == gr}):
            rows = [r for r in table if r.gr == gr and r.wth == wth]
            rhos.append(spearmanr([r.perimeter for r in rows], [r.u_ratio for r in rows])[0])
            rhos.append(spearmanr([r.extent for r in rows], [r.u_ratio for r in rows])[0])
    extents = sorted({r.extent for r in table})
    coarser = [np.median([r.u_ratio for r in table if r.gr == 400 and r.extent == e])
               > np.median([r.u_ratio for r in table if r.gr == 100 and r.extent == e])
               for e in extents]
    overlaps = []
    for gr in (100, 400):
        wths = sorted({r.wth for r in table if r.gr == gr})
        q = [np.percentile([r.u_ratio for r in table if r.gr == gr and r.wth == w], [25, 75])
             for w in wths]
        overlaps.append(q[0][0] <= q[1][1] and q[1][0] <= q[0][1])
    ok = max(rhos) < -0.5 and all(coarser) and all(overlaps)
    report(8, ok, f"max spearman {max(rhos):.3f}, gr400>gr100 at {sum(coarser)}/{len(coarser)} "
                  f"extents, IQR overlap {overlaps}")


def test_criterion_09_noise_robustness(report, desk_lake):
    start = time.perf_counter()
    rows = noise_robustness_experiment(noise_levels=(0.05, 0.1, 0.2, 0.3), seeds=range(10),
                                       lake=desk_lake)
    elapsed = time.perf_counter() - start
    mean = {(m, n): np.mean([r["report"].pct_total for r in rows
                             if r["method"] == m and r["noise"] == n])
            for m in NOISE_METHODS for n in (0.05, 0.1, 0.2, 0.3)}
    ordered = all(mean["orbit_st", n] <= mean["orbit_s", n] < mean["temporal_majority", n]
                  < mean["spatial_majority", n] for n in (0.2, 0.3))
    ok = ordered and mean["orbit_s", 0.3] < 15 and elapsed < 600
    table = ", ".join(f"{int(n * 100)}%: " + "/".join(f"{mean[m, n]:.2f}" for m in NOISE_METHODS)
                      for n in (0.05, 0.1, 0.2, 0.3))
    report(9, ok, f"mean pct_total ST/S/tmaj/smaj {table}; {elapsed:.0f}s")


def test_criterion_10_ordering_recovery(report):
    rng = np.random.default_rng(10)
    rows, cols = 12, 12
    truth_order = ordering_from_elevation(gen_bathymetry("gaussian_mix", rows, cols, seed=10))
    sweep = render_stack(truth_order, np.arange(rows * cols + 1))
    exact = np.array_equal(learn_ordering(sweep), truth_order)
    improved = []
    for seed in range(10):
        rng = np.random.default_rng([10, seed])
        levels = rng.integers(0, rows * cols + 1, size=80)
        stack = render_stack(truth_order, levels)
        flip = rng.random(stack.shape) < 0.05
        noisy = np.where(flip, 1 - stack, stack).astype(np.uint8)
        ranks, history = learn_ordering(noisy, return_history=True)
        init = learn_ordering(noisy, max_refine_iters=0)
        improved.append(total_mismatch(noisy, ranks) <= total_mismatch(noisy, init)
                        and history[0] == total_mismatch(noisy, init))
    report(10, exact and all(improved),
           f"noiseless sweep recovered exactly: {exact}; refined <= init on "
           f"{sum(improved)}/10 seeds")


def test_criterion_11_golden_files(report, tmp_path):
    golden = bytes.fromhex("4F52424C0100010000000100000001000000" "00")
    checks = {"golden bytes": formats.encode_stack(np.zeros((1, 1, 1), np.uint8)) == golden}
    rng = np.random.default_rng(11)
    stack = rng.integers(0, 4, size=(4, 6, 5)).astype(np.uint8)
    ranks = rng.permutation(30).reshape(6, 5)
    elev = rng.normal(size=(6, 5)).astype(np.float32)
    for name, write, read, value in (
            ("orbl", formats.write_stack, formats.read_stack, stack),
            ("orbo", formats.write_ordering, formats.read_ordering, ranks),
            ("orbe", formats.write_elevation, formats.read_elevation, elev)):
        a, b = tmp_path / f"a.{name}", tmp_path / f"b.{name}"
        write(a, value)
        write(b, read(a))
        checks[f"{name} round trip"] = a.read_bytes() == b.read_bytes()

    def field_of(decode, data):
        try:
            decode(data)
        except FormatError as exc:
            return exc.field
        return None

    dup = formats.encode_ordering(ranks)
    dup = dup[:-4] + dup[-8:-4]
    nan = formats.encode_elevation(elev)
    nan = nan[:-4] + np.float32(np.nan).tobytes()
    rejects = {
        "magic": field_of(formats.decode_stack, b"ORBX" + golden[4:]),
        "version": field_of(formats.decode_ordering, formats.encode_ordering(ranks)[:4]
                            + b"\x09\x00" + formats.encode_ordering(ranks)[6:]),
        "payload length": field_of(formats.decode_stack, golden[:-1]),
        "label value": field_of(formats.decode_stack, golden[:-1] + b"\x07"),
        "rank bijection": field_of(formats.decode_ordering, dup),
        "elevation finite": field_of(formats.decode_elevation, nan),
    }
    for expected, got in rejects.items():
        checks[f"rejects {expected}"] = got == expected
    failed = [k for k, v in checks.items() if not v]
    report(11, not failed, f"{len(checks)} checks, golden vector is {len(golden)} bytes; "
                           f"failed: {failed or 'none'}")


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-v", "-s"]))
