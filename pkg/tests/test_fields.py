import numpy as np
import pytest

from degenpde.fields import (
    Grid,
    ScalarField,
    c0_norm,
    cs_norm_2_alpha,
    fd_derivatives,
    holder_seminorm,
    load_field,
    lp_norm_weighted,
    osc,
    sample,
    save_field,
)
from degenpde.geometry import ParabolicCube, Point, SPoint, WeightedMeasure


def unit_grid(nodes=17):
    return Grid.uniform((0, 1, nodes), [(-1, 1, nodes)], (0, 1, nodes))


def test_sample_examples():
    g = unit_grid()
    assert np.all(sample(lambda x, y, t: 1.0 + 0 * x, g).values == 1.0)
    f = sample(lambda x, y, t: x + 2.0 * t, g)
    s = g.s.reshape(-1, 1, 1)
    t = g.t.reshape(1, 1, -1)
    assert np.max(np.abs(f.values - (s * s + 2.0 * t))) == 0.0
    r = sample(lambda x, y, t: np.sqrt(x) + 0 * y + 0 * t, g)
    assert np.max(np.abs(r.values - np.broadcast_to(s, g.shape))) == 0.0


def test_sample_rejects_non_finite():
    g = unit_grid(5)
    with np.errstate(divide="ignore"), pytest.raises(ValueError):
        sample(lambda x, y, t: 1.0 / (x * 0.0) + 0 * y + 0 * t, g)


def test_fd_exact_on_quadratics():
    g = unit_grid(21)
    d = fd_derivatives(sample(lambda x, y, t: x + 0 * y, g))
    s = g.s.reshape(-1, 1, 1)
    assert np.max(np.abs(d.u_s - np.broadcast_to(2 * s, g.shape))) <= 1e-12
    d = fd_derivatives(sample(lambda x, y, t: y * y + 0 * x, g))
    assert np.max(np.abs(d.u_yy[0][0] - 2.0)) <= 1e-12


def test_fd_second_order_in_s():
    def quartic_err(nodes):
        g = unit_grid(nodes)
        d = fd_derivatives(sample(lambda x, y, t: x * x + 0 * y, g))
        s = np.broadcast_to(g.s.reshape(-1, 1, 1), g.shape)
        return np.max(np.abs(d.u_ss[1:-1] - 12.0 * s[1:-1] ** 2))

    ratio = quartic_err(17) / quartic_err(33)
    assert 3.0 <= ratio <= 5.0


def test_u_x_refused_near_degenerate_edge():
    g = unit_grid(9)
    d = fd_derivatives(sample(lambda x, y, t: x + 0 * y, g))
    with pytest.raises(ValueError):
        d.u_xx()
    ux = d.u_x_xgrid()
    assert np.max(np.abs(ux - 1.0)) <= 1e-10


def test_osc_examples():
    g = unit_grid(33)
    cube = ParabolicCube("Q_rho", SPoint(0.5, [0.0], 1.0).to_x(), 0.5)
    half = ParabolicCube("Q_rho", SPoint(0.5, [0.0], 1.0).to_x(), 0.25)
    const = sample(lambda x, y, t: 3.0 + 0 * x, g)
    assert osc(const, cube) == 0.0
    lin = sample(lambda x, y, t: y + 0 * x, g)
    assert osc(lin, cube) == pytest.approx(1.0)
    assert osc(lin, half) / osc(lin, cube) == pytest.approx(0.5)
    assert osc(lin, half) <= osc(lin, cube)


def test_lp_norm_weighted_examples():
    mu = WeightedMeasure(0.5)
    g = unit_grid(65)
    cube = ParabolicCube("Q_rho", SPoint(0.5, [0.0], 1.0).to_x(), 0.4)
    zero = sample(lambda x, y, t: 0.0 * x, g)
    assert lp_norm_weighted(zero, 3, cube, mu) == 0.0
    one = sample(lambda x, y, t: 1.0 + 0 * x, g)
    f = sample(lambda x, y, t: 2.5 + 0 * x, g)
    base = lp_norm_weighted(one, 3, cube, mu)
    assert lp_norm_weighted(f, 3, cube, mu) == pytest.approx(2.5 * base)


def test_lp_norm_weighted_analytic_oracle():
    # integral of s * s^(nu-1) over s in [0, 1] is 2/3 at nu = 0.5
    grid = Grid.uniform((0, 1, 257), [(-0.02, 0.02, 3)], (0.96, 1.0, 3))
    mu = WeightedMeasure(0.5)
    cube = ParabolicCube("Q_rho", SPoint(0.5, [0.0], 1.0).to_x(), 0.5)
    f = sample(lambda x, y, t: np.sqrt(x) + 0 * y, grid)
    val = lp_norm_weighted(f, 1, cube, mu)
    y_len = grid.y[0][-1] - grid.y[0][0]
    t_len = grid.t[-1] - grid.t[0]
    assert val / (y_len * t_len) == pytest.approx(2.0 / 3.0, abs=1e-4)


def test_holder_seminorm_examples():
    g = unit_grid(21)
    cube = ParabolicCube("Q_rho", SPoint(0.5, [0.0], 1.0).to_x(), 0.5)
    const = sample(lambda x, y, t: 2.0 + 0 * x, g)
    assert holder_seminorm(const, 0.5, cube) == 0.0
    root = sample(lambda x, y, t: np.sqrt(x) + 0 * y, g)
    val = root_val = holder_seminorm(root, 1.0, cube)
    assert 0.5 <= root_val <= 2.0
    lin = sample(lambda x, y, t: y + 0 * x, g)
    assert holder_seminorm(lin, 1.0, cube) == pytest.approx(1.0, rel=0.05)
    # subadditivity
    both = ScalarField(g, root.values + lin.values)
    assert holder_seminorm(both, 1.0, cube) <= val + 1.0 + 1e-9


def test_cs_norm_examples():
    g = unit_grid(33)
    region = ParabolicCube("B_eta", Point(0.0, [0.0], 0.9), 0.5)
    const = sample(lambda x, y, t: 4.0 + 0 * x, g)
    assert cs_norm_2_alpha(const, 0.5, region) == pytest.approx(4.0)
    lin = sample(lambda x, y, t: x + 1.0 * t, g)
    v33 = cs_norm_2_alpha(lin, 0.5, region)
    g2 = unit_grid(65)
    v65 = cs_norm_2_alpha(sample(lambda x, y, t: x + 1.0 * t, g2), 0.5, region)
    assert abs(v65 - v33) / v33 <= 0.05


def test_cs_norm_rejects_edge_region():
    g = unit_grid(17)
    region = ParabolicCube("B_eta", Point(0.0, [0.0], 1.0), 1.0)
    f = sample(lambda x, y, t: x + 0 * y, g)
    with pytest.raises(ValueError):
        cs_norm_2_alpha(f, 0.5, region)


def test_c0_norm():
    g = unit_grid(9)
    f = sample(lambda x, y, t: -3.0 + 0 * x, g)
    assert c0_norm(f) == pytest.approx(3.0)


def test_save_load_round_trip(tmp_path):
    g = Grid.uniform((0, 1, 7), [(-1, 1, 5)], (0, 1, 4))
    rng = np.random.default_rng(3)
    f = ScalarField(g, rng.standard_normal(g.shape))
    path = tmp_path / "field.txt"
    save_field(f, path)
    back = load_field(path)
    assert back.grid.same_axes(g)
    assert np.array_equal(back.values, f.values)
