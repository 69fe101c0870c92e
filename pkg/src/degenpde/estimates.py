"""Verification harness for the a-priori estimates.

Every check measures the quantities of one estimate on a given field and
reports the left side, the named right-side components, the measured
constant lhs / (constant-free rhs), and pass/fail margins. Constants are
reported, never compared against theoretical values; pass criteria are
budgets, refinement stability and scale robustness chosen by the caller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fields import (
    Grid,
    ScalarField,
    c0_norm,
    fd_derivatives,
    holder_seminorm,
    lp_norm_weighted,
    osc,
)
from .fields import cs_norm_2_alpha
from .geometry import (
    ParabolicCube,
    Point,
    SPoint,
    WeightedMeasure,
    rho_nu,
)
from .operators import TransportVelocity, apply_L0

# tie tolerance for the closed contact-set conditions, applied relative to
# the magnitude of each tested quantity so membership is scale invariant
CONTACT_TOL = 1e-10


# ---------------------------------------------------------------------------
# reports


@dataclass
class EstimateReport:
    """Measured quantities of one estimate check.

    passed is true exactly when every margin is >= 0; measured_constant is
    lhs divided by the constant-free right side, 0 when both vanish and
    inf when only the right side does.
    """

    name: str
    lhs: float
    rhs_components: dict
    measured_constant: float
    margins: dict
    passed: bool
    provenance: str

    def to_text(self) -> str:
        lines = [f"name = {self.name}", f"lhs = {self.lhs:.17g}"]
        for key, val in self.rhs_components.items():
            lines.append(f"rhs.{key} = {_fmt(val)}")
        lines.append(f"measured_constant = {self.measured_constant:.17g}")
        for key, val in self.margins.items():
            lines.append(f"margin.{key} = {_fmt(val)}")
        lines.append(f"result = {'PASS' if self.passed else 'FAIL'}")
        lines.append(f"provenance = {self.provenance}")
        return "\n".join(lines) + "\n"

    def to_record(self) -> str:
        """One-line structured dump: tab-separated key=value pairs."""
        parts = [f"name={self.name}", f"lhs={self.lhs:.17g}"]
        parts += [f"rhs.{k}={_fmt(v)}" for k, v in self.rhs_components.items()]
        parts.append(f"measured_constant={self.measured_constant:.17g}")
        parts += [f"margin.{k}={_fmt(v)}" for k, v in self.margins.items()]
        parts.append(f"pass={int(self.passed)}")
        parts.append(f"provenance={self.provenance}")
        return "\t".join(parts)


def _fmt(val) -> str:
    if isinstance(val, str):
        return val
    return f"{float(val):.17g}"


def _ratio(lhs: float, rhs: float) -> float:
    if rhs == 0.0:
        return 0.0 if lhs == 0.0 else math.inf
    return lhs / rhs


def _finish(name, lhs, rhs_components, constant, margins, provenance) -> EstimateReport:
    passed = all(m >= 0 for m in margins.values())
    return EstimateReport(name, float(lhs), rhs_components, float(constant),
                          margins, passed, provenance)


def _cube_text(cube: ParabolicCube) -> str:
    b = cube.base
    ys = ",".join(f"{v:g}" for v in b.y)
    return (f"{cube.kind}(r={cube.radius:g}, base s={b.s:g} y=({ys}) "
            f"t={b.t:g}, {cube.orientation})")


def _grid_text(grid: Grid) -> str:
    return "grid " + "x".join(str(k) for k in grid.shape)


def write_series(path, xs, ys) -> None:
    """Two-column plain-text series for external plotting."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape:
        raise ValueError("series columns must have equal length")
    with open(path, "w") as fh:
        for xv, yv in zip(xs, ys):
            fh.write(f"{xv:.17g} {yv:.17g}\n")


def _zero_forcing(grid: Grid) -> ScalarField:
    return ScalarField(grid, np.zeros(grid.shape))


def _forcing_field(g, grid: Grid) -> ScalarField:
    if g is None:
        return _zero_forcing(grid)
    if not g.grid.same_axes(grid):
        raise ValueError("forcing must live on the solution's grid")
    return g


# ---------------------------------------------------------------------------
# contact sets and the ABP estimate


@dataclass
class ContactSetResult:
    """Upper/lower contact sets of a field over a cube.

    gamma_plus / gamma_minus are full-grid boolean masks; z, u_z, u_t are
    the transformed coordinate and its derivatives per node. Nodes on the
    s = 0 line are excluded (the z-map is singular there); their count is
    reported.
    """

    gamma_plus: np.ndarray
    gamma_minus: np.ndarray
    z: np.ndarray
    u_z: np.ndarray
    u_t: np.ndarray
    excluded_s_zero: int


def contact_sets(u: ScalarField, nu: float, cube: ParabolicCube) -> ContactSetResult:
    """Discrete contact sets from the (z, y)-Hessian sign conditions.

    In the variable z = s^(2-nu)/(2-nu) the Hessian of u in (z, y) is
    congruent to the matrix E with entries E_11 = u_ss + ((nu-1)/s) u_s,
    E_1i = u_{s y_i}, E_ij = u_{y_i y_j}, so the sign conditions are
    checked on E by symmetric eigenvalues. Conditions are closed: ties
    within a relative tolerance count as membership.
    """
    if not 0 < nu < 1:
        raise ValueError("nu must lie in (0, 1)")
    grid = u.grid
    if any(k < 5 for k in grid.shape):
        raise ValueError("contact sets need at least 5 nodes per axis")
    n = grid.n
    mask = cube.node_mask(grid)
    s_col = grid.s.reshape((-1,) + (1,) * (len(grid.axes) - 1))
    s_pos = np.broadcast_to(s_col > 0, grid.shape)
    excluded = int(np.count_nonzero(mask & ~s_pos))
    sel = mask & s_pos

    d = fd_derivatives(u)
    safe_s = np.where(s_col > 0, s_col, 1.0)
    u_z = np.where(s_pos, safe_s ** (nu - 1.0) * d.u_s, 0.0)
    z = np.broadcast_to(safe_s ** (2.0 - nu) / (2.0 - nu), grid.shape).copy()
    z[~s_pos] = 0.0

    e11 = d.u_ss + ((nu - 1.0) / safe_s) * d.u_s
    m = n - 1
    E = np.zeros(grid.shape + (n, n))
    E[..., 0, 0] = e11
    for i in range(m):
        E[..., 0, 1 + i] = d.u_sy[i]
        E[..., 1 + i, 0] = d.u_sy[i]
        for j in range(m):
            E[..., 1 + i, 1 + j] = d.u_yy[i][j]

    gamma_plus = np.zeros(grid.shape, dtype=bool)
    gamma_minus = np.zeros(grid.shape, dtype=bool)
    if np.any(sel):
        eigs = np.linalg.eigvalsh(E[sel])
        eig_lo = eigs[:, 0]
        eig_hi = eigs[:, -1]
        tol_e = CONTACT_TOL * float(np.max(np.abs(eigs), initial=0.0))
        uz_sel = u_z[sel]
        ut_sel = d.u_t[sel]
        tol_z = CONTACT_TOL * float(np.max(np.abs(uz_sel), initial=0.0))
        tol_t = CONTACT_TOL * float(np.max(np.abs(ut_sel), initial=0.0))
        minus = (eig_lo >= -tol_e) & (uz_sel >= -tol_z) & (ut_sel >= -tol_t)
        plus = (eig_hi <= tol_e) & (uz_sel <= tol_z) & (ut_sel >= -tol_t)
        gamma_minus[sel] = minus
        gamma_plus[sel] = plus
    return ContactSetResult(gamma_plus, gamma_minus, z, u_z, d.u_t, excluded)


def _spatial_boundary(cube: ParabolicCube, grid: Grid) -> np.ndarray:
    """In-cube nodes on the cube's lateral faces or earliest time slab."""
    mask = cube.node_mask(grid)
    spat = mask.any(axis=-1)
    core = spat
    for ax in range(spat.ndim):
        pad = [(0, 0)] * spat.ndim
        pad[ax] = (1, 1)
        padded = np.pad(spat, pad, constant_values=False)
        if ax == 0 and grid.s[0] == 0.0:
            # the degenerate edge s = 0 is not a lateral face
            padded[0] = padded[1]
        lo = tuple(slice(0, -2) if k == ax else slice(None)
                   for k in range(spat.ndim))
        hi = tuple(slice(2, None) if k == ax else slice(None)
                   for k in range(spat.ndim))
        core = core & padded[lo] & padded[hi]
    lateral = (spat & ~core)[..., None] & mask
    t_in = mask.any(axis=tuple(range(mask.ndim - 1)))
    k_first = int(np.argmax(t_in))
    bottom = np.zeros_like(mask)
    bottom[..., k_first] = mask[..., k_first]
    return lateral | bottom


def abp_check(u: ScalarField, g, cube: ParabolicCube, nu: float,
              c_max: float = math.inf, provenance: str = "") -> EstimateReport:
    """Measured constant of the maximum bound sup u+ <= C * forcing term.

    Hypothesis u <= 0 on the cube's parabolic boundary is checked first;
    the right side integrates (g-)^(n+1) over the lower contact set with
    the singular weight.
    """
    grid = u.grid
    n = grid.n
    g_field = _forcing_field(g, grid)
    mask = cube.node_mask(grid)
    if not np.any(mask):
        raise ValueError("cube contains no grid nodes")
    boundary = _spatial_boundary(cube, grid)
    scale = float(np.max(np.abs(u.values[mask]), initial=0.0))
    btol = 1e-12 * max(1.0, scale)
    worst_boundary = float(np.max(u.values[boundary], initial=-math.inf))
    if worst_boundary > btol:
        raise ValueError(
            "boundary hypothesis violated: max u on the parabolic boundary "
            f"is {worst_boundary:g} > 0")

    lhs = float(np.max(np.clip(u.values[mask], 0.0, None), initial=0.0))
    contact = contact_sets(u, nu, cube)
    g_minus = np.clip(-g_field.values, 0.0, None)
    masked = ScalarField(grid, g_minus * contact.gamma_minus)
    mu = WeightedMeasure(nu)
    integral = lp_norm_weighted(masked, n + 1, cube, mu)
    rho = cube.radius
    prefac = rho ** (n / (n + 1.0)) * rho_nu(cube.base.s, rho, nu) ** (1.0 / (n + 1.0))
    rhs = prefac * integral
    constant = _ratio(lhs, rhs)
    margins = {"constant_budget": c_max - constant}
    if math.isinf(constant):
        margins["estimate_violated"] = -1.0
    rhs_components = {
        "prefactor": prefac,
        "forcing_integral": integral,
        "gamma_minus_nodes": float(np.count_nonzero(contact.gamma_minus & mask)),
        "excluded_s_zero": float(contact.excluded_s_zero),
    }
    prov = "; ".join(filter(None, [provenance, _grid_text(grid),
                                   _cube_text(cube), f"nu={nu:g}"]))
    return _finish("abp", lhs, rhs_components, constant, margins, prov)


# ---------------------------------------------------------------------------
# Harnack quotient and the growth lemma


def harnack_quotient(u: ScalarField, g, s0: float, y0, t0: float, rho: float,
                     nu: float, c_max: float = math.inf,
                     provenance: str = "") -> EstimateReport:
    """sup over the earlier half-cube against inf over the later one."""
    grid = u.grid
    n = grid.n
    g_field = _forcing_field(g, grid)
    later = ParabolicCube("Q_rho", SPoint(s0, y0, t0).to_x(), rho / 2.0)
    earlier = ParabolicCube(
        "Q_rho", SPoint(s0, y0, t0 - 3.0 * rho * rho / 4.0).to_x(), rho / 2.0)
    norm_cube = later
    for cube in (earlier, later):
        mask = cube.node_mask(grid)
        if not np.any(mask):
            raise ValueError("cube contains no grid nodes")
        umin = float(np.min(u.values[mask]))
        if umin < -1e-12 * max(1.0, float(np.max(np.abs(u.values[mask])))):
            raise ValueError(f"u must be nonnegative on the cubes (min {umin:g})")
    sup_early = float(np.max(u.values[earlier.node_mask(grid)]))
    inf_late = float(np.min(u.values[later.node_mask(grid)]))
    mu = WeightedMeasure(nu)
    g_norm = lp_norm_weighted(g_field, n + 1, norm_cube, mu)
    prefac = rho ** (n / (n + 1.0)) * rho_nu(s0, rho, nu) ** (1.0 / (n + 1.0))
    forcing = prefac * g_norm
    constant = _ratio(sup_early, inf_late + forcing)
    margins = {"constant_budget": c_max - constant}
    if math.isinf(constant):
        margins["counterexample"] = -1.0
    rhs_components = {"inf_later": inf_late, "forcing": forcing}
    prov = "; ".join(filter(None, [provenance, _grid_text(grid),
                                   f"s0={s0:g} t0={t0:g} rho={rho:g} nu={nu:g}"]))
    return _finish("harnack_quotient", sup_early, rhs_components, constant,
                   margins, prov)


def growth_lemma_check(u: ScalarField, g, base, rho: float, K: float,
                       nu: float, k_min: float = 0.1, eps0: float = 0.1,
                       provenance: str = "") -> EstimateReport:
    """Measure fraction of the sublevel set {u <= K} in the base cube.

    base is the (s0, y0, t_anchor) anchor of the region B x (0, 18 rho^2);
    the comparison cube sits at time anchor + 10 rho^2/4, the sublevel cube
    at anchor + rho^2/4. If the hypotheses (inf over the comparison cube
    <= 1 and small forcing) fail, the report is marked not applicable and
    passes vacuously.
    """
    grid = u.grid
    n = grid.n
    g_field = _forcing_field(g, grid)
    s0, y0, t_anchor = base
    q2 = ParabolicCube(
        "Q_rho", SPoint(s0, y0, t_anchor + 10.0 * rho * rho / 4.0).to_x(),
        3.0 * rho / 2.0)
    sub_cube = ParabolicCube(
        "Q_rho", SPoint(s0, y0, t_anchor + rho * rho / 4.0).to_x(), rho)
    norm_cube = ParabolicCube(
        "Q_rho", SPoint(s0, y0, t_anchor + 18.0 * rho * rho).to_x(),
        3.0 * math.sqrt(2.0) * rho)
    mu = WeightedMeasure(nu)
    inf_q2 = float(np.min(u.values[q2.node_mask(grid)]))
    prefac = rho ** (n / (n + 1.0)) * rho_nu(s0, rho, nu) ** (1.0 / (n + 1.0))
    forcing = prefac * lp_norm_weighted(g_field, n + 1, norm_cube, mu)

    mask = sub_cube.node_mask(grid)
    if not np.any(mask):
        raise ValueError("sublevel cube contains no grid nodes")
    sub_mask = mask & (u.values <= K)
    denom = _node_measure(grid, mask, nu)
    fraction = _node_measure(grid, sub_mask, nu) / denom
    rhs_components = {
        "hypothesis_inf": inf_q2,
        "hypothesis_forcing": forcing,
        "fraction": fraction,
        "level": K,
    }
    prov = "; ".join(filter(None, [provenance, _grid_text(grid),
                                   f"rho={rho:g} K={K:g} nu={nu:g}"]))
    if inf_q2 > 1.0 or forcing > eps0:
        rhs_components["applicable"] = "no"
        margins = {"not_applicable": 0.0}
        return _finish("growth_lemma", fraction, rhs_components,
                       fraction / k_min, margins, prov)
    rhs_components["applicable"] = "yes"
    margins = {"fraction_budget": fraction - k_min}
    return _finish("growth_lemma", fraction, rhs_components,
                   fraction / k_min, margins, prov)


def _node_measure(grid: Grid, mask: np.ndarray, nu: float) -> float:
    """Weighted node-dual measure of a masked node set."""
    from .fields import _dual_s_weights, _dual_weights

    w = _dual_s_weights(grid.s, nu).reshape((-1,) + (1,) * (len(grid.axes) - 1))
    for k, ax in enumerate(grid.axes[1:], start=1):
        shape = [1] * len(grid.axes)
        shape[k] = -1
        w = w * _dual_weights(ax).reshape(shape)
    return float(np.sum(w * mask)) * nu / 2.0 ** grid.n


# ---------------------------------------------------------------------------
# oscillation decay and the Hoelder bound


def oscillation_decay(u: ScalarField, base, rho: float, levels: int, g,
                      nu: float, theta_max: float = 0.95,
                      provenance: str = "") -> EstimateReport:
    """Per-halving oscillation ratios and the implied Hoelder exponent.

    theta_hat_j = [osc over Q at radius rho/2^(j+1) minus the level's
    forcing term] / osc at radius rho/2^j; the summary ratio is the max
    over levels and alpha_hat = log2(1/theta_hat). Zero oscillation at any
    level reports the exact-constant sentinel and passes.
    """
    if levels < 2:
        raise ValueError("need at least 2 levels")
    grid = u.grid
    n = grid.n
    g_field = _forcing_field(g, grid)
    s0, y0, t0 = base
    mu = WeightedMeasure(nu)
    radii = [rho / 2.0 ** j for j in range(levels + 1)]
    cubes = [ParabolicCube("Q_rho", SPoint(s0, y0, t0).to_x(), r) for r in radii]
    oscs = [osc(u, c) for c in cubes]
    rhs_components = {}
    theta_hats = []
    sentinel = False
    for j in range(levels):
        rhs_components[f"osc_{j}"] = oscs[j]
        if oscs[j] == 0.0:
            sentinel = True
            break
        prefac = (radii[j] ** (n / (n + 1.0))
                  * rho_nu(s0, radii[j], nu) ** (1.0 / (n + 1.0)))
        forcing = prefac * lp_norm_weighted(g_field, n + 1, cubes[j], mu)
        theta_j = (oscs[j + 1] - forcing) / oscs[j]
        theta_hats.append(theta_j)
        rhs_components[f"theta_hat_{j}"] = theta_j
        rhs_components[f"forcing_{j}"] = forcing
    prov = "; ".join(filter(None, [provenance, _grid_text(grid),
                                   f"rho={rho:g} levels={levels} nu={nu:g}"]))
    if sentinel or not theta_hats:
        rhs_components["sentinel"] = "zero oscillation, exact constant"
        margins = {"theta_budget": theta_max}
        return _finish("oscillation_decay", 0.0, rhs_components, math.inf,
                       margins, prov)
    theta_hat = max(theta_hats)
    alpha_hat = math.inf if theta_hat <= 0 else math.log2(1.0 / theta_hat)
    margins = {"theta_budget": theta_max - theta_hat}
    return _finish("oscillation_decay", theta_hat, rhs_components, alpha_hat,
                   margins, prov)


def holder_bound_check(u: ScalarField, g, base, r: float, rho: float,
                       nu: float, alpha: float,
                       provenance: str = "") -> EstimateReport:
    """Hoelder norm on the inner cube against sup norm plus forcing.

    Nested cubes C_r in C_rho in C_1 share the base point; the left side
    is the sup plus the metric-adapted Hoelder-alpha seminorm on C_r.
    """
    if not 0 < r < rho <= 1.0:
        raise ValueError("need 0 < r < rho <= 1")
    grid = u.grid
    n = grid.n
    g_field = _forcing_field(g, grid)
    s0, y0, t0 = base
    anchor = SPoint(s0, y0, t0).to_x()
    c_r = ParabolicCube("C_rho", anchor, r)
    c_rho = ParabolicCube("C_rho", anchor, rho)
    c_one = ParabolicCube("C_rho", anchor, 1.0)
    mu = WeightedMeasure(nu)
    sup_inner = c0_norm(u, c_r)
    semi = holder_seminorm(u, alpha, c_r)
    lhs = sup_inner + semi
    sup_outer = c0_norm(u, c_one)
    g_norm = lp_norm_weighted(g_field, n + 1, c_rho, mu)
    rhs = sup_outer + g_norm
    constant = _ratio(lhs, rhs)
    margins = {"finite": 0.0 if math.isfinite(constant) else -1.0}
    rhs_components = {"sup_outer": sup_outer, "forcing_integral": g_norm,
                      "seminorm": semi}
    prov = "; ".join(filter(None, [provenance, _grid_text(grid),
                                   f"r={r:g} rho={rho:g} alpha={alpha:g} nu={nu:g}"]))
    return _finish("holder_bound", lhs, rhs_components, constant, margins, prov)


# ---------------------------------------------------------------------------
# model-equation interior estimates


def gradient_bound_check(f: ScalarField, v, B: float, r: float,
                         gamma_frac: float, base=None,
                         provenance: str = "") -> EstimateReport:
    """Interior gradient bound |f_x|, |f_yi| <= C B / r^2 on the inner box."""
    if isinstance(v, TransportVelocity):
        v = v.v
    if not 0 < gamma_frac < 1:
        raise ValueError("gamma_frac must lie in (0, 1)")
    grid = f.grid
    if base is None:
        base = Point(0.0, np.zeros(grid.n - 1), r * r)
    outer = ParabolicCube("B_eta", base, r)
    inner = ParabolicCube("B_eta", base, gamma_frac * r)
    outer_mask = outer.node_mask(grid)
    inner_mask = inner.node_mask(grid)
    if not np.any(inner_mask):
        raise ValueError("inner box contains no grid nodes")
    sup_f = float(np.max(np.abs(f.values[outer_mask])))
    if sup_f > B * (1.0 + 1e-12):
        raise ValueError(f"hypothesis |f| <= B fails: sup |f| = {sup_f:g} > {B:g}")
    d = fd_derivatives(f)
    max_fx = float(np.max(np.abs(d.u_x_xgrid()[inner_mask])))
    grads = {"max_fx": max_fx}
    worst = max_fx
    for i, u_yi in enumerate(d.u_y):
        gi = float(np.max(np.abs(u_yi[inner_mask])))
        grads[f"max_fy{i + 2}"] = gi
        worst = max(worst, gi)
    constant = worst * r * r / B
    margins = {"bound_hypothesis": B - sup_f}
    prov = "; ".join(filter(None, [provenance, _grid_text(grid),
                                   f"B={B:g} r={r:g} gamma={gamma_frac:g} v={v:g}"]))
    return _finish("gradient_bound", worst, grads, constant, margins, prov)


def _interior_mask(grid: Grid) -> np.ndarray:
    """Nodes at least 2 cells from every nondegenerate grid edge."""
    mask = np.zeros(grid.shape, dtype=bool)
    sl = []
    for k in range(len(grid.axes)):
        lo = 0 if (k == 0 and grid.s[0] == 0.0) else 2
        sl.append(slice(lo, grid.shape[k] - 2))
    mask[tuple(sl)] = True
    return mask


def bernstein_quantity_check(f: ScalarField, v, A: float, tol: float = 1e-6,
                             provenance: str = "") -> EstimateReport:
    """Differential inequalities of X = (A+f^2) f_x^2 and Y = (A+f^2) f_yi^2.

    For solutions of the homogeneous model equation, X satisfies
    X_t <= x X_xx + sum X_yiyi + (v+1) X_x and each Y satisfies
    Y_t <= x Y_xx + sum Y_yiyi + v Y_x - Y^2/(4A^2) up to discretization
    error; the check normalizes residuals by 1 plus the local derivative
    magnitudes and requires them below tol at interior nodes.
    """
    if isinstance(v, TransportVelocity):
        v = v.v
    if A < 8.0:
        raise ValueError("A must be >= 8")
    grid = f.grid
    residual_l0 = apply_L0(v, f)
    interior = _interior_mask(grid)
    l0_max = float(np.max(np.abs(residual_l0.values[interior])))
    f_scale = 1.0 + c0_norm(f)
    if l0_max > tol * 100.0 * f_scale:
        raise ValueError(
            f"input is not a model-equation solution (max |L0 f| = {l0_max:g})")

    d = fd_derivatives(f)
    fx = d.u_x_xgrid()
    pre = A + f.values ** 2

    def normalized_residual(q_values, drift, extra=0.0):
        q = ScalarField(grid, q_values)
        dq = fd_derivatives(q)
        ell = dq.x_times_u_xx() + drift * dq.u_x_xgrid()
        mags = np.abs(dq.u_t) + np.abs(dq.x_times_u_xx()) \
            + abs(drift) * np.abs(dq.u_x_xgrid())
        for i in range(len(grid.y)):
            ell = ell + dq.u_yy[i][i]
            mags = mags + np.abs(dq.u_yy[i][i])
        res = dq.u_t - (ell + extra)
        return float(np.max((res / (1.0 + mags + np.abs(extra)))[interior]))

    X = pre * fx * fx
    worst_x = normalized_residual(X, v + 1.0)
    margins = {"X_inequality": tol - worst_x}
    rhs_components = {"X_residual": worst_x, "L0_residual": l0_max}
    worst = worst_x
    for i, u_yi in enumerate(d.u_y):
        Y = pre * u_yi * u_yi
        worst_y = normalized_residual(Y, v, extra=-(Y * Y) / (4.0 * A * A))
        margins[f"Y{i + 2}_inequality"] = tol - worst_y
        rhs_components[f"Y{i + 2}_residual"] = worst_y
        worst = max(worst, worst_y)
    prov = "; ".join(filter(None, [provenance, _grid_text(grid),
                                   f"A={A:g} v={v:g} tol={tol:g}"]))
    return _finish("bernstein_quantity", worst, rhs_components,
                   _ratio(worst, tol), margins, prov)


# ---------------------------------------------------------------------------
# polynomial approximation and the Schauder quotient


def _axis_index(ax: np.ndarray, value: float, name: str) -> int:
    hits = np.nonzero(np.abs(ax - value) <= 1e-12)[0]
    if hits.size == 0:
        raise ValueError(f"grid has no {name}-node at {value:g}")
    return int(hits[0])


def poly_approx_check(f: ScalarField, L0f: ScalarField, s_outer: float,
                      r_list, ratio_max: float = math.inf,
                      provenance: str = "") -> EstimateReport:
    """Taylor-polynomial remainder against the cube-shrinking bound.

    The polynomial has degree 1 in x and t and degree 2 in y with
    coefficients from finite differences at (x, y, t) = (0, 0, 1); for each
    r the remainder sup over the parabolic box of size r is compared with
    (r/s)^3 |f|_s + s^2 |L0 f|_s.
    """
    grid = f.grid
    if not L0f.grid.same_axes(grid):
        raise ValueError("L0f must live on f's grid")
    r_list = [float(r) for r in r_list]
    if not r_list or any(r <= 0 or r > s_outer for r in r_list):
        raise ValueError("radii must lie in (0, s_outer]")
    if grid.s[0] != 0.0:
        raise ValueError("Taylor stencil exceeds grid: no x = 0 line")
    i0 = 0
    j0 = [_axis_index(ax, 0.0, f"y{k + 2}") for k, ax in enumerate(grid.y)]
    k1 = _axis_index(grid.t, 1.0, "t")
    if k1 < 2 or any(j < 2 or j > len(ax) - 3 for j, ax in zip(j0, grid.y)):
        raise ValueError("Taylor stencil exceeds grid")

    d = fd_derivatives(f)
    point = (i0, *j0, k1)
    f0 = float(f.values[point])
    fx = float(d.u_x()[point])
    ft = float(d.u_t[point])
    fy = [float(d.u_y[i][point]) for i in range(len(grid.y))]
    fyy = [[float(d.u_yy[i][j][point]) for j in range(len(grid.y))]
           for i in range(len(grid.y))]

    meshes = grid.meshes()
    x = meshes[0] ** 2
    ys = meshes[1:-1]
    t = meshes[-1]
    p = f0 + fx * x + ft * (t - 1.0)
    for i, yi in enumerate(ys):
        p = p + fy[i] * yi
        for j, yj in enumerate(ys):
            p = p + 0.5 * fyy[i][j] * yi * yj
    remainder = np.abs(f.values - np.broadcast_to(p, grid.shape))

    anchor = Point(0.0, np.zeros(grid.n - 1), 1.0)
    outer_mask = ParabolicCube("B_eta", anchor, s_outer).node_mask(grid)
    f_outer = float(np.max(np.abs(f.values[outer_mask])))
    l0_outer = float(np.max(np.abs(L0f.values[outer_mask])))
    rhs_components = {"f_norm_outer": f_outer, "L0f_norm_outer": l0_outer}
    ratios = []
    worst = 0.0
    for r in r_list:
        mask = ParabolicCube("B_eta", anchor, r).node_mask(grid)
        err = float(np.max(remainder[mask]))
        bound = (r / s_outer) ** 3 * f_outer + s_outer ** 2 * l0_outer
        ratio = _ratio(err, bound)
        ratios.append(ratio)
        worst = max(worst, ratio)
        rhs_components[f"err_r={r:g}"] = err
        rhs_components[f"ratio_r={r:g}"] = ratio
    margins = {"ratio_budget": ratio_max - worst if math.isfinite(worst) else -1.0}
    prov = "; ".join(filter(None, [provenance, _grid_text(grid),
                                   f"s={s_outer:g} radii=" + ",".join(f"{r:g}" for r in r_list)]))
    return _finish("poly_approx", worst, rhs_components, worst, margins, prov)


def schauder_ratio(f: ScalarField, v, r: float, alpha: float, base=None,
                   provenance: str = "") -> EstimateReport:
    """Second-order Hoelder norm on the inner box over data norms on the unit box."""
    if isinstance(v, TransportVelocity):
        v = v.v
    if not 0 < r < 1:
        raise ValueError("r must lie in (0, 1)")
    grid = f.grid
    if base is None:
        base = Point(0.0, np.zeros(grid.n - 1), 1.0)
    inner = ParabolicCube("B_eta", base, r)
    unit = ParabolicCube("B_eta", base, 1.0)
    lhs = cs_norm_2_alpha(f, alpha, inner)
    l0f = apply_L0(v, f)
    rhs_sup = c0_norm(f, unit)
    rhs_data = c0_norm(l0f, unit) + holder_seminorm(l0f, alpha, unit)
    rhs = rhs_sup + rhs_data
    constant = _ratio(lhs, rhs)
    margins = {"finite": 0.0 if math.isfinite(constant) else -1.0}
    rhs_components = {"sup_unit": rhs_sup, "data_norm": rhs_data}
    prov = "; ".join(filter(None, [provenance, _grid_text(grid),
                                   f"r={r:g} alpha={alpha:g} v={v:g}"]))
    return _finish("schauder_ratio", lhs, rhs_components, constant, margins, prov)
