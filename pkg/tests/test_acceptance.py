"""Acceptance suite: one test per criterion, one printed pass/fail line each.

Run with `pytest -v` for the per-criterion verdicts; each test also prints
a summary line with the measured quantities behind the verdict.
"""

import filecmp
import math
import time

import numpy as np
import pytest

from degenpde.barriers import (
    ModelBarrierParams,
    find_barrier_params,
    min_condition_residual,
)
from degenpde.cli import main as cli_main
from degenpde.estimates import (
    abp_check,
    harnack_quotient,
    oscillation_decay,
    poly_approx_check,
    schauder_ratio,
)
from degenpde.fields import Grid, ScalarField, sample
from degenpde.geometry import (
    ParabolicCube,
    Point,
    SPoint,
    WeightedMeasure,
    cube_measure,
    set_measure,
)
from degenpde.operators import apply_L0, model_coefficients, random_coefficients
from degenpde.regularize import BumpKernel, smooth_field, smoothing_rate
from degenpde.solver import (
    IVBProblem,
    SolverConfig,
    random_positive_solution_ensemble,
    solve_ivbp,
    solve_model,
)


def verdict(number, name, ok, detail):
    line = f"criterion {number:02d} {name}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line)
    assert ok, line


def caloric(v):
    return lambda x, y, t: (x * x + 2 * (1 + v) * x * t + v * (1 + v) * t * t
                            + 0 * y)


def test_criterion_01_manufactured_exactness():
    start = time.time()
    worst = 0.0
    grid = Grid.uniform((0, 1, 33), [(-1, 1, 33)], (0, 1, 33))
    for v in (0.25, 1.0, 4.0):
        f = lambda x, y, t: x + v * t
        u = solve_model(v, None, f, f, grid)
        exact = sample(f, grid)
        worst = max(worst, float(np.max(np.abs(u.values - exact.values))))
    elapsed = time.time() - start
    verdict(1, "manufactured exactness", worst <= 1e-10 and elapsed < 5.0,
            f"max error {worst:.3e} <= 1e-10, {elapsed:.2f}s < 5s")


def test_criterion_02_convergence_order():
    start = time.time()
    v = 1.0
    f = caloric(v)

    def final_err(grid, dt):
        u = solve_model(v, None, f, f, grid, SolverConfig(dt=dt))
        exact = sample(f, grid)
        return float(np.max(np.abs(u.values[..., -1] - exact.values[..., -1])))

    g_t = Grid.uniform((0, 1, 65), [(-1, 1, 9)], (0, 1, 5))
    t_ratio = final_err(g_t, 0.05) / final_err(g_t, 0.025)

    def sgrid(ns):
        return Grid.uniform((0, 1, ns), [(-1, 1, 9)], (0, 1, 3))

    s_ratio = final_err(sgrid(17), 1e-4) / final_err(sgrid(33), 1e-4)
    elapsed = time.time() - start
    verdict(2, "convergence order",
            t_ratio >= 1.8 and s_ratio >= 3.5 and elapsed < 120.0,
            f"temporal ratio {t_ratio:.2f} >= 1.8, spatial ratio "
            f"{s_ratio:.2f} >= 3.5, {elapsed:.1f}s < 2min")


def test_criterion_03_maximum_principle():
    worst = -math.inf
    for k in range(10):
        nodes = 49 if k % 2 == 0 else 33
        grid = Grid.uniform((0, 1, nodes), [(-1, 1, nodes)], (0, 1, nodes))
        coeffs = random_coefficients(1000 + k, 2)
        prob = IVBProblem(coeffs=coeffs, forcing=lambda x, y, t: -1.0 + 0 * x,
                          initial=lambda x, y, t: -0.1 + 0 * x,
                          lateral=lambda x, y, t: -0.1 + 0 * x)
        u = solve_ivbp(prob, grid)
        worst = max(worst, float(np.max(u.values)))
    verdict(3, "maximum principle", max(worst, 0.0) <= 1e-12,
            f"sup u+ = {max(worst, 0.0):.3e} <= 1e-12 over 10 random fields")


def _abp_setup(nodes, t_nodes, scale):
    grid = Grid.uniform((0, 1, nodes), [(-1, 1, nodes)], (0, 1, t_nodes))
    u = solve_model(1.0, lambda x, y, t: scale + 0 * x,
                    lambda x, y, t: 0 * x, lambda x, y, t: 0 * x, grid)
    g = sample(lambda x, y, t: -scale + 0 * x, grid)
    cube = ParabolicCube("C_rho", Point(0.5, [0.0], 1.0), 1.0)
    return abp_check(u, g, cube, 0.5)


def test_criterion_04_abp_scale_invariance():
    base = _abp_setup(33, 17, 1.0)
    doubled = _abp_setup(33, 17, 2.0)
    dev = abs(doubled.measured_constant - base.measured_constant)
    refined = _abp_setup(65, 33, 1.0)
    drift = refined.measured_constant / base.measured_constant
    ok = dev <= 1e-8 and 0.5 < drift < 2.0
    verdict(4, "abp scale invariance", ok,
            f"g->2g deviation {dev:.2e} <= 1e-8, refinement drift "
            f"{drift:.3f}x < 2x")


def test_criterion_05_barrier_certification():
    details = []
    ok = True
    for v in (0.25, 1.0, 4.0):
        start = time.time()
        for n in (2, 3):
            params = find_barrier_params(v, n, nodes=64)
            r64, _ = min_condition_residual(params, n, 64)
            r128, _ = min_condition_residual(params, n, 128)
            control = ModelBarrierParams(params.v, params.b, params.c, 0.0)
            r0, _ = min_condition_residual(control, n, 64)
            ok = ok and r64 > 0 and r128 > 0 and r0 <= 0
        elapsed = time.time() - start
        ok = ok and elapsed < 60.0
        details.append(f"v={v:g}: {elapsed:.1f}s")
    verdict(5, "barrier certification", ok,
            "residuals > 0 at 64 and 128 nodes, C=0 control fails, "
            + ", ".join(details))


def _ensemble():
    grid = Grid.uniform((0, 1, 33), [(-1, 1, 33)], (0, 0.5, 201))
    return grid, random_positive_solution_ensemble(
        20250823, 20, model_coefficients(1.0, 2), grid)


def test_criterion_06_harnack_robustness():
    grid, ensemble = _ensemble()
    rhos = (0.1, 0.2, 0.4)
    max_const = {}
    for rho in rhos:
        worst = 0.0
        for u in ensemble:
            rep = harnack_quotient(u, None, 0.5, [0.0], 0.5, rho, 0.5)
            worst = max(worst, rep.measured_constant)
        max_const[rho] = worst
    finite = all(math.isfinite(c) for c in max_const.values())
    spread = max(max_const.values()) / min(max_const.values())
    const_field = sample(lambda x, y, t: 4.2 + 0 * x, grid)
    unit = harnack_quotient(const_field, None, 0.5, [0.0], 0.5, 0.4, 0.5)
    ok = finite and spread < 2.0 and unit.measured_constant == 1.0
    verdict(6, "harnack robustness", ok,
            f"max constants {[round(max_const[r], 3) for r in rhos]} finite, "
            f"spread {spread:.3f}x < 2x, constant solution gives "
            f"{unit.measured_constant}")


def test_criterion_07_hoelder_content():
    grid, ensemble = _ensemble()
    worst_theta = -math.inf
    for u in ensemble:
        rep = oscillation_decay(u, (0.5, [0.0], 0.5), 0.4, 2, None, 0.5)
        if "sentinel" in rep.rhs_components:
            continue
        worst_theta = max(worst_theta, rep.lhs)
    lin_grid = Grid.uniform((0, 1, 33), [(-1, 1, 65)], (0, 1, 17))
    lin = sample(lambda x, y, t: y + 0 * x, lin_grid)
    lin_rep = oscillation_decay(lin, (0.5, [0.0], 1.0), 0.5, 3, None, 0.5)
    thetas = [lin_rep.rhs_components[f"theta_hat_{j}"] for j in range(3)]
    exact_half = all(th == 0.5 for th in thetas)
    ok = worst_theta <= 0.95 and exact_half
    verdict(7, "hoelder content", ok,
            f"ensemble worst theta {worst_theta:.3f} <= 0.95, linear "
            f"tangential solution thetas {thetas} == 0.5 exactly")


def test_criterion_08_polynomial_approximation():
    grid = Grid.uniform((0, 0.9, 33), [(-0.9, 0.9, 33)], (0.2, 1.0, 33))
    radii = (0.8, 0.4, 0.2, 0.1)
    taylor = sample(lambda x, y, t: 2.0 + 3.0 * x + 1.5 * y + 0.5 * y * y
                    - 2.0 * (t - 1.0), grid)
    rep_t = poly_approx_check(taylor, apply_L0(1.0, taylor), 0.8, radii)
    taylor_exact = all(rep_t.rhs_components[f"err_r={r:g}"] <= 1e-8
                       for r in radii)
    v = 1.0
    f = sample(caloric(v), grid)
    rep = poly_approx_check(f, apply_L0(v, f), 0.8, radii)
    anchor = Point(0.0, [0.0], 1.0)
    remainder_dev = 0.0
    meshes = grid.meshes()
    x = meshes[0] ** 2
    t = meshes[-1]
    closed = np.broadcast_to(np.abs(x * x + 4 * x * (t - 1.0)
                                    + 2 * (t - 1.0) ** 2), grid.shape)
    ratios = []
    for r in radii:
        mask = ParabolicCube("B_eta", anchor, r).node_mask(grid)
        expected = float(np.max(closed[mask]))
        err = rep.rhs_components[f"err_r={r:g}"]
        remainder_dev = max(remainder_dev, abs(err - expected))
        ratios.append(err / r ** 3)
    monotone = all(a > b for a, b in zip(ratios, ratios[1:]))
    ok = taylor_exact and remainder_dev <= 1e-8 and monotone
    verdict(8, "polynomial approximation", ok,
            f"taylor-class error <= 1e-8: {taylor_exact}, caloric remainder "
            f"matches closed form to {remainder_dev:.2e} <= 1e-8, err/r^3 "
            f"monotone {['%.3f' % q for q in ratios]}")


def test_criterion_09_schauder_stability():
    v = 1.0
    vals = []
    for nodes in (33, 65):
        grid = Grid.uniform((0, 1, nodes), [(-1, 1, nodes)], (0, 1, nodes))
        rep = schauder_ratio(sample(caloric(v), grid), v, 0.5, 0.5,
                             Point(0.0, [0.0], 0.9))
        vals.append(rep.measured_constant)
    drift = abs(vals[1] - vals[0]) / vals[0]
    verdict(9, "schauder stability", drift < 0.10,
            f"constants {vals[0]:.4f} -> {vals[1]:.4f}, drift "
            f"{100 * drift:.2f}% < 10%")


def test_criterion_10_smoothing_rate():
    grid = Grid.uniform((0, 1, 21), [(-1, 1, 21)], (0, 1, 3))
    kernel = BumpKernel(2)
    exact = sample(lambda x, y, t: np.sqrt(x) + 0 * y, grid)
    _, slope = smoothing_rate(lambda x, y, t: np.sqrt(x) + 0 * y + 0 * t,
                              exact.values, [1e-2, 1e-3, 1e-4, 1e-5],
                              kernel, grid)
    const = smooth_field(lambda x, y, t: 2.5 + 0 * x, 1e-3, kernel, grid)
    const_err = float(np.max(np.abs(const.values - 2.5)))
    odd = smooth_field(lambda x, y, t: y + 0 * x, 1e-3, kernel, grid)
    odd_exact = sample(lambda x, y, t: y + 0 * x, grid)
    odd_err = float(np.max(np.abs(odd.values - odd_exact.values)))
    ok = slope >= 0.45 and const_err <= 1e-8 and odd_err <= 1e-8
    verdict(10, "smoothing rate", ok,
            f"log-log exponent {slope:.3f} >= 0.45, constant error "
            f"{const_err:.1e} and odd-linear error {odd_err:.1e} <= 1e-8")


def test_criterion_11_measure_correctness():
    worst = 0.0
    for s0 in (0.0, 1.0, 2.0):
        for rho in (0.5, 1.0):
            for nu in (0.25, 0.5, 0.75):
                mu = WeightedMeasure(nu)
                cube = ParabolicCube("Q_rho", SPoint(s0, [0.0], 0.0).to_x(), rho)
                analytic = cube_measure(cube, mu)
                grid = Grid.uniform(
                    (max(s0 - rho, 0.0), s0 + rho, 65),
                    [(-rho, rho, 65)], (-rho, rho, 65))
                quad = set_measure(
                    lambda s, ys, t: np.ones(np.broadcast(s, *ys, t).shape,
                                             bool), grid, mu)
                worst = max(worst, abs(quad - analytic) / analytic)
    verdict(11, "measure correctness", worst <= 1e-6,
            f"worst relative deviation {worst:.2e} <= 1e-6 over 18 cases")


def test_criterion_12_cli_determinism(tmp_path):
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    assert cli_main(["run", "model_manufactured", "--out", str(out1)]) == 0
    assert cli_main(["run", "model_manufactured", "--out", str(out2)]) == 0
    names = sorted(p.name for p in out1.iterdir())
    match, mismatch, errors = filecmp.cmpfiles(out1, out2, names, shallow=False)
    ok = mismatch == [] and errors == [] and len(match) == len(names)
    verdict(12, "cli determinism", ok,
            f"{len(names)} output files bit-identical across repeated runs")
