"""Acceptance criteria.

Each test records a one-line verdict through ``record_property("criterion", ...)``;
``conftest.pytest_terminal_summary`` prints the PASS/FAIL list at the end of
the run. Tolerances and runtime limits are pinned below and are not tuned to
the measured values.
"""

import math
import time

import numpy as np
import pytest

from scatterlax.bem import exact_sphere_far_field, oracle_response_matrix
from scatterlax.capacitance import mesh_capacitance
from scatterlax.directions import gauss_legendre_directions
from scatterlax.foldy import assemble, far_field, response_matrix, solve_charges, verify_mazya_bound
from scatterlax.mesh import icosphere
from scatterlax.music import GridSpec, add_noise, music, recover_capacitances
from scatterlax.scene import Scene, validate
from scatterlax.study import scaling_study

from conftest import FIG2_CENTERS, random_admissible_scene

FOUR_PI = 4 * math.pi

# criterion 1
SINGLE_REL_TOL = 0.05
SINGLE_LIMIT_S = 1.0
# criteria 2 and 3
SLOPE_RADII_A = (0.2, 0.1, 0.05)
SLOPE_CENTER_GAP = 2.0
SLOPE_LEVEL = 3
HELMHOLTZ_SLOPE = (1.7, 2.3)
LAPLACE_SLOPE = (2.6, 3.4)
SLOPE_LIMIT_S = 120.0
# criterion 4
CAP_SPHERE_TOL = 0.01
CAP_SCALING_TOL = 1e-3
CAP_LIMIT_S = 30.0
# criterion 5
MUSIC_SNR_DB = 30.0
MUSIC_SEEDS = 20
MUSIC_MIN_SUCCESS = 18
MUSIC_GRID = GridSpec(-3.0, 3.0, 0.25)
MUSIC_LIMIT_S = 120.0
# criterion 6
RECOVERY_TOL = 1e-8
RECOVERY_SCENES = 20
RECOVERY_LIMIT_S = 5.0
# criterion 7
MAZYA_SCENES = 100
MAZYA_MAX_M = 10
MAZYA_LIMIT_S = 30.0
# criterion 8
INVARIANT_SCENES = 10
INVARIANT_TOL = 1e-10
INVARIANT_LIMIT_S = 30.0
# criterion 9
STUDY_T, STUDY_S = 1 / 3, 1.0
STUDY_A = (0.2, 0.1, 0.05)
STUDY_LEVEL = 2
STUDY_LIMIT_S = 600.0


def verdict(record_property, label, ok, detail):
    line = f"{label}: {detail}"
    record_property("criterion", line)
    print(f"[{'PASS' if ok else 'FAIL'}] {line}")


def loglog_slope(a, err):
    return float(np.polyfit(np.log(a), np.log(err), 1)[0])


def pair_errors(kappa):
    dirs = gauss_legendre_directions(5)
    errs = []
    for a in SLOPE_RADII_A:
        scene = Scene.spheres([[0, 0, -SLOPE_CENTER_GAP / 2], [0, 0, SLOPE_CENTER_GAP / 2]], a / 2,
                              kappa=kappa, kappa_max=1.0)
        ref = oracle_response_matrix(scene, dirs, SLOPE_LEVEL).F
        errs.append(float(np.max(np.abs(response_matrix(scene, dirs).F - ref))))
    return errs


def test_c1_single_scatterer_accuracy(record_property):
    t0 = time.perf_counter()
    dirs = gauss_legendre_directions(5)
    scene = Scene.spheres([[0, 0, 0]], 0.1, kappa=1.0)
    F = response_matrix(scene, dirs).F
    exact = np.array([exact_sphere_far_field(0.1, 1.0, dirs.directions, th) for th in dirs.directions]).T
    rel = float(np.max(np.abs(F - exact)) / np.max(np.abs(exact)))
    dt = time.perf_counter() - t0
    ok = rel <= SINGLE_REL_TOL and dt < SINGLE_LIMIT_S
    verdict(record_property, "C1 single-scatterer accuracy", ok,
            f"rel_err={rel:.4f} (<= {SINGLE_REL_TOL}), {dt:.2f} s (< {SINGLE_LIMIT_S:g} s)")
    assert rel <= SINGLE_REL_TOL
    assert dt < SINGLE_LIMIT_S


def test_c2_helmholtz_error_slope(record_property):
    t0 = time.perf_counter()
    errs = pair_errors(1.0)
    slope = loglog_slope(SLOPE_RADII_A, errs)
    dt = time.perf_counter() - t0
    lo, hi = HELMHOLTZ_SLOPE
    ok = lo <= slope <= hi and dt < SLOPE_LIMIT_S
    verdict(record_property, "C2 error slope, kappa=1", ok,
            f"slope={slope:.3f} in [{lo}, {hi}], errors={['%.3e' % e for e in errs]}, "
            f"{dt:.1f} s (< {SLOPE_LIMIT_S:g} s)")
    assert lo <= slope <= hi
    assert dt < SLOPE_LIMIT_S


def test_c3_laplace_error_slope(record_property):
    t0 = time.perf_counter()
    errs = pair_errors(0.0)
    slope = loglog_slope(SLOPE_RADII_A, errs)
    dt = time.perf_counter() - t0
    lo, hi = LAPLACE_SLOPE
    ok = lo <= slope <= hi and dt < SLOPE_LIMIT_S
    verdict(record_property, "C3 error slope, kappa=0", ok,
            f"slope={slope:.3f} in [{lo}, {hi}], errors={['%.3e' % e for e in errs]}, "
            f"{dt:.1f} s (< {SLOPE_LIMIT_S:g} s)")
    assert lo <= slope <= hi
    assert dt < SLOPE_LIMIT_S


def test_c4_capacitance(record_property):
    t0 = time.perf_counter()
    mesh = icosphere(3)
    c1 = mesh_capacitance(mesh).capacitance
    c2 = mesh_capacitance(mesh.scaled(2.0)).capacitance
    sphere_err = abs(c1 - FOUR_PI) / FOUR_PI
    scale_err = abs(c2 / (2 * c1) - 1)
    dt = time.perf_counter() - t0
    ok = sphere_err <= CAP_SPHERE_TOL and scale_err <= CAP_SCALING_TOL and dt < CAP_LIMIT_S
    verdict(record_property, "C4 capacitance", ok,
            f"|C-4pi|/4pi={sphere_err:.2e} (<= {CAP_SPHERE_TOL}), scaling err={scale_err:.1e} "
            f"(<= {CAP_SCALING_TOL}), {dt:.1f} s (< {CAP_LIMIT_S:g} s)")
    assert sphere_err <= CAP_SPHERE_TOL
    assert scale_err <= CAP_SCALING_TOL
    assert dt < CAP_LIMIT_S


def test_c5_music_localization(record_property):
    t0 = time.perf_counter()
    scene = Scene.spheres(FIG2_CENTERS, 0.5, kappa=1.0)
    F = response_matrix(scene, gauss_legendre_directions(5))
    step = MUSIC_GRID.step
    successes = 0
    for seed in range(MUSIC_SEEDS):
        img, _ = music(add_noise(F, MUSIC_SNR_DB, seed), MUSIC_GRID)
        if len(img.peaks) != len(FIG2_CENTERS):
            continue
        # one peak per true centre, each within one grid step
        dist = np.linalg.norm(img.peaks[:, None, :] - FIG2_CENTERS[None], axis=-1)
        nearest = dist.argmin(axis=1)
        if len(set(nearest)) == len(FIG2_CENTERS) and np.all(dist.min(axis=1) <= step + 1e-12):
            successes += 1
    dt = time.perf_counter() - t0
    ok = successes >= MUSIC_MIN_SUCCESS and dt < MUSIC_LIMIT_S
    verdict(record_property, "C5 MUSIC localization", ok,
            f"{successes}/{MUSIC_SEEDS} seeds (>= {MUSIC_MIN_SUCCESS}) at {MUSIC_SNR_DB:g} dB, "
            f"{dt:.1f} s (< {MUSIC_LIMIT_S:g} s)")
    assert successes >= MUSIC_MIN_SUCCESS
    assert dt < MUSIC_LIMIT_S


def _validated_scenes(rng, count):
    """Random sphere scenes that pass the validity checks, with centres at
    least one unit apart so that ``H`` has full rank at ``kappa = 1``."""
    out = []
    while len(out) < count:
        M = int(rng.integers(1, 11))
        z = rng.uniform(-3, 3, (M, 3))
        if M > 1:
            r = np.linalg.norm(z[:, None] - z[None], axis=-1)[~np.eye(M, dtype=bool)]
            if r.min() < 1.0:
                continue
        scene = Scene.spheres(z, rng.uniform(0.05, 0.25, M), kappa=1.0)
        rep = validate(scene)
        if rep.mazya_ok or rep.dominance_ok:
            out.append(scene)
    return out


def test_c6_capacitance_recovery(record_property):
    t0 = time.perf_counter()
    dirs = gauss_legendre_directions(5)
    scenes = [Scene.spheres(FIG2_CENTERS, 0.5, kappa=1.0)]
    scenes += _validated_scenes(np.random.default_rng(6), RECOVERY_SCENES - 1)
    worst = 0.0
    for scene in scenes:
        res = recover_capacitances(response_matrix(scene, dirs), scene.centers, dirs, scene.kappa)
        C = scene.capacitances()
        worst = max(worst, float(np.max(np.abs(res.capacitances - C) / C)))
    dt = time.perf_counter() - t0
    ok = worst <= RECOVERY_TOL and dt < RECOVERY_LIMIT_S
    verdict(record_property, "C6 capacitance recovery", ok,
            f"max rel err={worst:.2e} over {len(scenes)} scenes (<= {RECOVERY_TOL:g}), "
            f"{dt:.2f} s (< {RECOVERY_LIMIT_S:g} s)")
    assert worst <= RECOVERY_TOL
    assert dt < RECOVERY_LIMIT_S


def test_c7_mazya_suite(record_property):
    t0 = time.perf_counter()
    holds = 0
    worst_ratio = 0.0
    worst_cond = 0.0
    for seed in range(MAZYA_SCENES):
        rng = np.random.default_rng(seed)
        system = assemble(random_admissible_scene(rng, max_m=MAZYA_MAX_M))
        worst_cond = max(worst_cond, float(np.linalg.cond(system.B)))
        rhs = rng.normal(size=system.M) + 1j * rng.normal(size=system.M)
        rep = verify_mazya_bound(system, rhs)
        if rep.holds:
            holds += 1
            worst_ratio = max(worst_ratio, rep.lhs / rep.rhs_bound)
    dt = time.perf_counter() - t0
    ok = holds == MAZYA_SCENES and math.isfinite(worst_cond) and dt < MAZYA_LIMIT_S
    verdict(record_property, "C7 Mazya bound", ok,
            f"holds in {holds}/{MAZYA_SCENES}, worst lhs/bound={worst_ratio:.3f}, "
            f"max cond(B)={worst_cond:.2e}, {dt:.1f} s (< {MAZYA_LIMIT_S:g} s)")
    assert holds == MAZYA_SCENES
    assert math.isfinite(worst_cond)
    assert dt < MAZYA_LIMIT_S


def _negated_index(dirs):
    D = dirs.directions
    idx = np.argmin(np.linalg.norm(D[:, None, :] + D[None, :, :], axis=-1), axis=1)
    assert np.allclose(D[idx], -D, atol=1e-12)
    return idx


def test_c8_reciprocity_and_factorization(record_property):
    t0 = time.perf_counter()
    dirs = gauss_legendre_directions(5)
    neg = _negated_index(dirs)
    rng = np.random.default_rng(8)
    worst_recip = worst_fact = 0.0
    n = 0
    while n < INVARIANT_SCENES:
        scene = random_admissible_scene(rng, max_m=10)
        rep = validate(scene)
        if not (rep.mazya_ok or rep.dominance_ok):
            continue
        n += 1
        system = assemble(scene)
        F = response_matrix(system, dirs).F
        scale = np.max(np.abs(F))
        # F(x, theta) = F(-theta, -x) on the grid, plus random off-grid pairs
        worst_recip = max(worst_recip, float(np.max(np.abs(F - F[neg][:, neg].T)) / scale))
        for _ in range(5):
            x, th = rng.normal(size=(2, 3))
            x, th = x / np.linalg.norm(x), th / np.linalg.norm(th)
            a = far_field(system, solve_charges(system, th), x)
            b = far_field(system, solve_charges(system, -x), -th)
            worst_recip = max(worst_recip, abs(a - b) / abs(a))
        H = np.exp(1j * system.kappa * system.centers @ dirs.directions.T)
        G = H.conj().T @ np.linalg.inv(system.B) @ H / FOUR_PI
        worst_fact = max(worst_fact, float(np.max(np.abs(F - G)) / scale))
    dt = time.perf_counter() - t0
    ok = worst_recip <= INVARIANT_TOL and worst_fact <= INVARIANT_TOL and dt < INVARIANT_LIMIT_S
    verdict(record_property, "C8 reciprocity and factorization", ok,
            f"reciprocity={worst_recip:.1e}, factorization={worst_fact:.1e} (<= {INVARIANT_TOL:g}), "
            f"{dt:.2f} s (< {INVARIANT_LIMIT_S:g} s)")
    assert worst_recip <= INVARIANT_TOL
    assert worst_fact <= INVARIANT_TOL
    assert dt < INVARIANT_LIMIT_S


@pytest.mark.slow
def test_c9_scaling_study(record_property):
    t0 = time.perf_counter()
    rows = scaling_study(STUDY_T, STUDY_S, STUDY_A, kappa=1.0, level=STUDY_LEVEL, d_gl=5)
    errs = [r.err for r in rows]
    decreasing = all(a > b for a, b in zip(errs, errs[1:]))
    dt = time.perf_counter() - t0
    ok = decreasing and dt < STUDY_LIMIT_S
    verdict(record_property, "C9 scaling study", ok,
            f"M={[r.M for r in rows]}, err={['%.3e' % e for e in errs]} strictly decreasing={decreasing}, "
            f"{dt:.1f} s (< {STUDY_LIMIT_S:g} s)")
    assert decreasing
    assert dt < STUDY_LIMIT_S
