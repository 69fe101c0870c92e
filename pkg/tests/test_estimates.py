import math

import numpy as np
import pytest

from degenpde.estimates import (
    abp_check,
    bernstein_quantity_check,
    contact_sets,
    gradient_bound_check,
    growth_lemma_check,
    harnack_quotient,
    holder_bound_check,
    oscillation_decay,
    poly_approx_check,
    schauder_ratio,
    write_series,
)
from degenpde.fields import Grid, ScalarField, sample
from degenpde.geometry import ParabolicCube, Point, SPoint
from degenpde.operators import apply_L0


def unit_grid(nodes=17):
    return Grid.uniform((0, 1, nodes), [(-1, 1, nodes)], (0, 1, nodes))


def test_contact_sets_constant_field():
    g = unit_grid()
    u = sample(lambda x, y, t: 1.0 + 0 * x, g)
    cube = ParabolicCube("Q_rho", SPoint(0.5, [0.0], 1.0).to_x(), 0.4)
    res = contact_sets(u, 0.5, cube)
    sel = cube.node_mask(g) & (g.s.reshape(-1, 1, 1) > 0)
    assert np.all(res.gamma_plus[sel])
    assert np.all(res.gamma_minus[sel])


def test_contact_sets_convex_field_in_lower_set():
    nu = 0.5
    g = Grid.uniform((0.4, 1.6, 25), [(-1, 1, 25)], (0, 1, 9))

    def f(x, y, t):
        z = np.sqrt(x) ** (2.0 - nu) / (2.0 - nu)
        return z + z * z + y * y + t

    u = sample(f, g)
    cube = ParabolicCube("Q_rho", SPoint(1.0, [0.0], 1.0).to_x(), 0.4)
    res = contact_sets(u, nu, cube)
    sel = cube.node_mask(g)
    assert np.all(res.gamma_minus[sel])
    assert not np.any(res.gamma_plus[sel])


def test_contact_sets_concave_peak_in_upper_set():
    g = Grid.uniform((0.5, 1.5, 33), [(-1, 1, 33)], (0, 1, 9))
    u = sample(lambda x, y, t: -(np.sqrt(x) - 1.0) ** 2 - y * y - 0.1 * (1.0 - t), g)
    cube = ParabolicCube("Q_rho", SPoint(1.0, [0.0], 1.0).to_x(), 0.4)
    res = contact_sets(u, 0.5, cube)
    peak = (16, 16, g.shape[-1] - 1)  # node at s = 1, y = 0, t = 1
    assert cube.node_mask(g)[peak]
    assert res.gamma_plus[peak]


def test_abp_scale_invariance_and_boundary_check():
    g = Grid.uniform((0, 1, 25), [(-1, 1, 25)], (0, 1, 13))
    cube = ParabolicCube("Q_rho", SPoint(0.5, [0.0], 1.0).to_x(), 0.45)
    t_lo, _ = cube.time_interval()

    def hump(x, y, t):
        s = np.sqrt(x)
        spatial = np.clip((0.09 - ((s - 0.5) ** 2 + y ** 2)) / 0.09, 0, None) ** 2
        return spatial * np.clip(t - (t_lo + 0.09), 0, None)

    u = sample(hump, g)
    gf = sample(lambda x, y, t: -1.0 + 0 * x, g)
    rep = abp_check(u, gf, cube, 0.5)
    assert rep.lhs > 0
    assert math.isfinite(rep.measured_constant)
    rep2 = abp_check(ScalarField(g, 2 * u.values), ScalarField(g, 2 * gf.values),
                     cube, 0.5)
    assert abs(rep2.measured_constant - rep.measured_constant) <= 1e-8

    bad = sample(lambda x, y, t: 1.0 + 0 * x, g)
    with pytest.raises(ValueError):
        abp_check(bad, gf, cube, 0.5)


def test_abp_zero_positive_part_passes():
    g = unit_grid()
    u = sample(lambda x, y, t: -1.0 - 0 * x, g)
    cube = ParabolicCube("Q_rho", SPoint(0.5, [0.0], 1.0).to_x(), 0.4)
    rep = abp_check(u, None, cube, 0.5)
    assert rep.lhs == 0.0
    assert rep.measured_constant == 0.0
    assert rep.passed


def test_harnack_quotient_constant_is_one():
    g = unit_grid(33)
    u = sample(lambda x, y, t: 7.0 + 0 * x, g)
    rep = harnack_quotient(u, None, 0.5, [0.0], 1.0, 0.4, 0.5)
    assert rep.measured_constant == 1.0
    assert rep.passed


def test_harnack_quotient_flags_vanishing_infimum():
    g = unit_grid(33)
    u = sample(lambda x, y, t: np.clip(0.9 - t, 0.0, None) + 0 * x, g)
    rep = harnack_quotient(u, None, 0.5, [0.0], 1.0, 0.4, 0.5)
    assert math.isinf(rep.measured_constant)
    assert not rep.passed


def test_harnack_quotient_rejects_negative_u():
    g = unit_grid(17)
    u = sample(lambda x, y, t: y + 0 * x, g)
    with pytest.raises(ValueError):
        harnack_quotient(u, None, 0.5, [0.0], 1.0, 0.4, 0.5)


def test_growth_lemma_constant_and_not_applicable():
    g = Grid.uniform((0, 2.5, 41), [(-4, 4, 41)], (0, 10, 41))
    u = sample(lambda x, y, t: 0.5 + 0 * x, g)
    rep = growth_lemma_check(u, None, (0.5, [0.0], 0.0), 0.5, 64.0, 0.5)
    assert rep.rhs_components["applicable"] == "yes"
    assert rep.rhs_components["fraction"] == 1.0
    assert rep.passed
    big = sample(lambda x, y, t: 5.0 + 0 * x, g)
    rep = growth_lemma_check(big, None, (0.5, [0.0], 0.0), 0.5, 0.1, 0.5)
    assert rep.rhs_components["applicable"] == "no"
    assert rep.passed


def test_oscillation_decay_linear_is_half():
    g = Grid.uniform((0, 1, 33), [(-1, 1, 65)], (0, 1, 17))
    u = sample(lambda x, y, t: y + 0 * x, g)
    rep = oscillation_decay(u, (0.5, [0.0], 1.0), 0.5, 3, None, 0.5)
    for j in range(3):
        assert rep.rhs_components[f"theta_hat_{j}"] == pytest.approx(0.5, abs=0)
    assert rep.measured_constant == pytest.approx(1.0)
    assert rep.passed


def test_oscillation_decay_constant_sentinel():
    g = unit_grid(33)
    u = sample(lambda x, y, t: 2.0 + 0 * x, g)
    rep = oscillation_decay(u, (0.5, [0.0], 1.0), 0.4, 2, None, 0.5)
    assert rep.passed
    assert "sentinel" in rep.rhs_components


def test_holder_bound_constant_and_sqrt():
    g = unit_grid(33)
    u = sample(lambda x, y, t: 1.0 + 0 * x, g)
    rep = holder_bound_check(u, None, (0.5, [0.0], 1.0), 0.3, 0.6, 0.5, 0.5)
    assert rep.measured_constant == pytest.approx(1.0)
    root = sample(lambda x, y, t: np.sqrt(x) + 0 * y, g)
    rep = holder_bound_check(root, None, (0.5, [0.0], 1.0), 0.3, 0.6, 0.5, 1.0)
    assert math.isfinite(rep.lhs)
    assert rep.passed


def test_gradient_bound_examples():
    g = Grid.uniform((0, 1, 33), [(-1, 1, 33)], (0, 1, 17))
    base = Point(0.0, [0.0], 0.81)
    const = sample(lambda x, y, t: 2.0 + 0 * x, g)
    rep = gradient_bound_check(const, 1.0, 2.0, 0.9, 0.5, base)
    assert rep.lhs <= 1e-12 and rep.passed
    lin = sample(lambda x, y, t: x + 1.0 * t, g)
    rep = gradient_bound_check(lin, 1.0, 2.0, 0.9, 0.5, base)
    assert rep.rhs_components["max_fx"] == pytest.approx(1.0, abs=1e-10)
    bad = sample(lambda x, y, t: 10.0 + 0 * x, g)
    with pytest.raises(ValueError):
        gradient_bound_check(bad, 1.0, 2.0, 0.9, 0.5, base)


def test_bernstein_quantities():
    g = Grid.uniform((0, 1, 33), [(-1, 1, 33)], (0, 1, 17))
    v = 1.0
    const = sample(lambda x, y, t: 3.0 + 0 * x, g)
    rep = bernstein_quantity_check(const, v, 8.0)
    assert rep.passed
    lin = sample(lambda x, y, t: x + v * t, g)
    rep = bernstein_quantity_check(lin, v, 8.0)
    assert rep.passed
    not_solution = sample(lambda x, y, t: x * x + 0 * y, g)
    with pytest.raises(ValueError):
        bernstein_quantity_check(not_solution, v, 8.0)
    with pytest.raises(ValueError):
        bernstein_quantity_check(lin, v, 4.0)


def poly_grid():
    return Grid.uniform((0, 0.9, 33), [(-0.9, 0.9, 33)], (0.2, 1.0, 33))


def test_poly_approx_taylor_class_exact():
    g = poly_grid()
    f = sample(lambda x, y, t: 2.0 + 3.0 * x + 1.5 * y + 0.5 * y * y
               - 2.0 * (t - 1.0), g)
    rep = poly_approx_check(f, apply_L0(1.0, f), 0.8, [0.8, 0.4, 0.2, 0.1])
    for r in (0.8, 0.4, 0.2, 0.1):
        assert rep.rhs_components[f"err_r={r:g}"] <= 1e-8


def test_poly_approx_caloric_remainder():
    g = poly_grid()
    v = 1.0
    f = sample(lambda x, y, t: x * x + 2 * (1 + v) * x * t + v * (1 + v) * t * t
               + 0 * y, g)
    rep = poly_approx_check(f, apply_L0(v, f), 0.8, [0.8, 0.4, 0.2, 0.1])
    prev = math.inf
    for r in (0.8, 0.4, 0.2, 0.1):
        err = rep.rhs_components[f"err_r={r:g}"]
        assert err <= 7.0 * r ** 4 + 1e-8
        assert err / r ** 3 < prev
        prev = err / r ** 3


def test_schauder_ratio_constant():
    g = unit_grid(33)
    u = sample(lambda x, y, t: 1.0 + 0 * x, g)
    rep = schauder_ratio(u, 1.0, 0.5, 0.5, Point(0.0, [0.0], 0.9))
    assert rep.measured_constant == pytest.approx(1.0)


def test_write_series(tmp_path):
    path = tmp_path / "series.dat"
    write_series(path, [1.0, 2.0], [3.0, 4.5])
    lines = path.read_text().splitlines()
    assert lines == ["1 3", "2 4.5"]


def test_report_serialization():
    g = unit_grid(17)
    u = sample(lambda x, y, t: 1.0 + 0 * x, g)
    rep = harnack_quotient(u, None, 0.5, [0.0], 1.0, 0.4, 0.5)
    text = rep.to_text()
    assert "result = PASS" in text
    assert "measured_constant = 1" in text
    record = rep.to_record()
    assert record.startswith("name=harnack_quotient")
    assert "\t" in record
