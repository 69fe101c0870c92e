"""Implicit finite-difference solver for u_t = Lu + c u + g on half-space boxes.

Space is a uniform-s tensor grid; time marches by implicit Euler,

    (I - dt (L_h + c)) u^{m+1} = u^m + dt g^{m+1},

with Dirichlet rows on the lateral (nondegenerate) boundaries and an
interior-like limit row at s = 0: the equation there degenerates to
u_t = b1 u_x + sum a_ij u_{y_i y_j} + sum b_j u_{y_j}, so no boundary
condition is imposed at the degenerate edge; the transport term b1 > 0
carries information outward.

The x-direction terms are discretized on the nonuniform x-nodes x_i = s_i^2
with 3-point stencils that are exact for data quadratic in x.  The transport
term b1 u_x (b1 > 0 by the structure conditions) uses the forward difference
(u_{i+1} - u_i)/(x_{i+1} - x_i) at the first interior nodes -- exact for
data linear in x and monotone -- blended linearly into the central stencil
beyond 4 cells, where the x-diffusion dominates it.  With diagonal
coefficient matrices every row is then an M-matrix row and the discrete
maximum principle holds to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import bicgstab, splu

from .fields import Grid, ScalarField
from .operators import (CoefficientField, TransportVelocity,
                        model_coefficients, validate_coefficients)

COMPATIBILITY_TOL = 1e-8


@dataclass
class SolverConfig:
    dt: float | None = None  # substep size between output slices; None = slice spacing
    tol: float = 1e-10       # iterative linear-solve relative residual
    max_iter: int = 5000
    scheme: str = "implicit-euler"

    def __post_init__(self):
        if self.dt is not None and self.dt <= 0:
            raise ValueError("dt must be positive")
        if not 0 < self.tol <= 1e-4:
            raise ValueError("tolerance must lie in (0, 1e-4]")
        if self.scheme != "implicit-euler":
            raise ValueError("only the implicit-euler scheme is implemented")


@dataclass
class IVBProblem:
    """Initial/boundary-value problem for u_t = Lu + c u + g.

    coeffs: CoefficientField, or TransportVelocity / positive float for the
    model operator.  forcing/initial/lateral are callables f(x, y..., t)
    (forcing may also be None or a ScalarField on the solve grid).
    """

    coeffs: object
    forcing: object = None
    initial: object = None
    lateral: object = None
    c: float = 0.0

    def coefficient_field(self, n: int) -> CoefficientField:
        if isinstance(self.coeffs, CoefficientField):
            return self.coeffs
        v = self.coeffs.v if isinstance(self.coeffs, TransportVelocity) else float(self.coeffs)
        return model_coefficients(v, n)


def _spatial_meshes(grid: Grid):
    axes = [grid.s] + list(grid.y)
    return np.meshgrid(*axes, indexing="ij", sparse=True)


def _eval_spatial(fn, grid: Grid, t: float) -> np.ndarray:
    meshes = _spatial_meshes(grid)
    x = meshes[0] ** 2
    shape = tuple(len(ax) for ax in [grid.s] + list(grid.y))
    val = fn(x, *meshes[1:], t)
    return np.broadcast_to(np.asarray(val, dtype=float), shape).copy()


def _dirichlet_mask(grid: Grid) -> np.ndarray:
    shape = tuple(len(ax) for ax in [grid.s] + list(grid.y))
    mask = np.zeros(shape, dtype=bool)
    mask[-1] = True  # s = s_max face
    for k in range(1, len(shape)):
        sl_lo = [slice(None)] * len(shape)
        sl_hi = [slice(None)] * len(shape)
        sl_lo[k] = 0
        sl_hi[k] = shape[k] - 1
        mask[tuple(sl_lo)] = True
        mask[tuple(sl_hi)] = True
    return mask


@dataclass
class StepMatrix:
    """One implicit-Euler step: A u_new = u_old + dt*g_new (+ Dirichlet rows)."""

    A: sparse.csr_matrix
    dirichlet: np.ndarray  # boolean, raveled spatial shape
    dt: float
    diagonally_dominant: bool
    max_positive_offdiag: float
    _lu: object = None
    _precond_diag: np.ndarray = None
    _iterative: bool = False
    _tol: float = 1e-10
    _max_iter: int = 5000

    def solve(self, rhs: np.ndarray, x0: np.ndarray) -> np.ndarray:
        if self._iterative:
            sol, info = bicgstab(self.A, rhs, x0=x0, rtol=self._tol, atol=0.0,
                                 maxiter=self._max_iter,
                                 M=sparse.diags(1.0 / self._precond_diag))
            if info != 0:
                raise RuntimeError(f"iterative linear solve failed (info={info})")
            return sol
        return self._lu.solve(rhs)


def assemble_step_matrix(problem: IVBProblem, grid: Grid, dt: float,
                         t_eval: float | None = None,
                         config: SolverConfig | None = None) -> StepMatrix:
    """Assemble (I - dt (L_h + c)) with Dirichlet rows on lateral boundaries."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    config = config or SolverConfig()
    coeffs = problem.coefficient_field(grid.n)
    if t_eval is None:
        t_eval = float(grid.t[-1])

    meshes = _spatial_meshes(grid)
    sp_shape = tuple(len(ax) for ax in [grid.s] + list(grid.y))
    N = int(np.prod(sp_shape))
    xm = [meshes[0] ** 2, *meshes[1:], t_eval]
    A = coeffs.eval_a(xm, sp_shape)
    B = coeffs.eval_b(xm, sp_shape)
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
        raise ValueError("non-finite coefficient values on the grid")

    hs = grid.hs
    m = len(grid.y)
    hy = [grid.hy(i) for i in range(m)]
    strides = [int(np.prod(sp_shape[k + 1:])) for k in range(len(sp_shape))]
    lin = np.arange(N).reshape(sp_shape)
    dirichlet = _dirichlet_mask(grid)
    free = ~dirichlet

    s_idx = np.arange(sp_shape[0]).reshape((-1,) + (1,) * m)
    s_col = grid.s.reshape((-1,) + (1,) * m)
    interior_s = free & np.broadcast_to(s_idx >= 1, sp_shape)
    zero_s = free & np.broadcast_to(s_idx == 0, sp_shape)

    rows, cols, vals = [], [], []

    def add(mask, shift, coeff):
        r = lin[mask]
        offset = sum(sh * st for sh, st in zip(shift, strides))
        rows.append(r)
        cols.append(r + offset)
        vals.append(np.broadcast_to(coeff, sp_shape)[mask])

    def unit(axis, sign):
        sh = [0] * len(sp_shape)
        sh[axis] = sign
        return tuple(sh)

    # x-direction terms on the nonuniform x-nodes x_i = s_i^2.  Per-node
    # stencil coefficient vectors live on the s-axis (zero at the ends).
    xv = grid.s ** 2
    Ns = sp_shape[0]

    def s_vec(vals_interior):
        full = np.zeros(Ns)
        full[1:-1] = vals_interior
        return full.reshape((-1,) + (1,) * m)

    dm = xv[1:-1] - xv[:-2]
    dp = xv[2:] - xv[1:-1]
    # central 3-point second derivative (exact for quadratics in x)
    x_here = xv[1:-1]
    c2m = s_vec(2.0 / (dm * (dm + dp)) * x_here)
    c20 = s_vec(-2.0 / (dm * dp) * x_here)
    c2p = s_vec(2.0 / (dp * (dm + dp)) * x_here)
    add(interior_s, unit(0, -1), A[0, 0] * c2m)
    add(interior_s, unit(0, 0), A[0, 0] * c20)
    add(interior_s, unit(0, +1), A[0, 0] * c2p)

    # transport b1 u_x: forward difference near x = 0 (monotone, exact on
    # x-linear data), blended to the central 3-point stencil beyond 4 cells
    w = np.broadcast_to(np.clip((s_idx - 1) / 4.0, 0.0, 1.0), sp_shape)
    c1m = s_vec(-dp / (dm * (dm + dp)))
    c10 = s_vec((dp - dm) / (dm * dp))
    c1p = s_vec(dm / (dp * (dm + dp)))
    add(interior_s, unit(0, -1), w * B[0] * c1m)
    add(interior_s, unit(0, 0), w * B[0] * c10)
    add(interior_s, unit(0, +1), w * B[0] * c1p)
    fwd = s_vec(1.0 / dp)
    add(interior_s, unit(0, +1), (1 - w) * B[0] * fwd)
    add(interior_s, unit(0, 0), -(1 - w) * B[0] * fwd)

    # s = 0 limit row: b1 u_x with the monotone two-point x-stencil
    if grid.s[0] == 0.0:
        x1 = grid.s[1] ** 2
        add(zero_s, unit(0, +1), B[0] / x1)
        add(zero_s, unit(0, 0), -B[0] / x1)

    # tangential diffusion, drift, and cross terms
    for j in range(m):
        dyy = A[1 + j, 1 + j] / (hy[j] * hy[j])
        add(free, unit(1 + j, -1), dyy)
        add(free, unit(1 + j, 0), -2 * dyy)
        add(free, unit(1 + j, +1), dyy)
        drift = B[1 + j] / (2 * hy[j])
        add(free, unit(1 + j, +1), drift)
        add(free, unit(1 + j, -1), -drift)
        # mixed term 2 sqrt(x) a1j u_{x y_j} (zero for the bundled presets)
        if np.any(A[0, 1 + j] != 0):
            sqx = np.sqrt(xv).reshape((-1,) + (1,) * m)
            base = 2.0 * A[0, 1 + j] * sqx / (2 * hy[j])
            for ss, cx in ((-1, c1m), (0, c10), (+1, c1p)):
                for sy in (+1, -1):
                    sh = [0] * len(sp_shape)
                    sh[0], sh[1 + j] = ss, sy
                    add(interior_s, tuple(sh), sy * base * cx)
    for i in range(m):
        for j in range(i + 1, m):
            cross = 2 * A[1 + i, 1 + j] / (4 * hy[i] * hy[j])
            if np.any(cross != 0):
                for si in (+1, -1):
                    for sj in (+1, -1):
                        sh = [0] * len(sp_shape)
                        sh[1 + i], sh[1 + j] = si, sj
                        add(free, tuple(sh), si * sj * cross)

    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    L = sparse.coo_matrix((vals, (rows, cols)), shape=(N, N)).tocsr()

    free_flat = free.ravel()
    diag_extra = np.where(free_flat, dt * problem.c, 0.0)
    scale = sparse.diags(np.where(free_flat, dt, 0.0))
    M = sparse.identity(N, format="csr") - scale @ L - sparse.diags(diag_extra)
    M = M.tocsr()
    M.sum_duplicates()

    diag = M.diagonal()
    off = M - sparse.diags(diag)
    row_off_abs = np.abs(off).sum(axis=1).A1 if hasattr(np.abs(off).sum(axis=1), "A1") \
        else np.asarray(np.abs(off).sum(axis=1)).ravel()
    dominant = bool(np.all(np.abs(diag) >= row_off_abs - 1e-12))
    max_pos_off = float(off.data.max()) if off.nnz else 0.0

    step = StepMatrix(M, _dirichlet_mask(grid).ravel(), dt, dominant, max_pos_off)
    step._iterative = m >= 2
    step._tol = config.tol
    step._max_iter = config.max_iter
    if step._iterative:
        step._precond_diag = diag.copy()
    else:
        step._lu = splu(M.tocsc())
    return step


def _forcing_evaluator(problem: IVBProblem, grid: Grid):
    g = problem.forcing
    if g is None:
        zero = np.zeros(tuple(len(ax) for ax in [grid.s] + list(grid.y)))
        return lambda t, k: zero
    if isinstance(g, ScalarField):
        if not g.grid.same_axes(grid):
            raise ValueError("forcing field lives on a different grid")
        return lambda t, k: g.values[..., k]
    return lambda t, k: _eval_spatial(g, grid, t)


def solve_ivbp(problem: IVBProblem, grid: Grid,
               config: SolverConfig | None = None) -> ScalarField:
    """March implicit Euler over the grid's time axis.

    Returns the full space-time field; the max residual
    |u_t - L_h u - c u - g| of each accepted output step is attached as the
    `step_residuals` attribute.
    """
    config = config or SolverConfig()
    coeffs = problem.coefficient_field(grid.n)
    report = validate_coefficients(coeffs, grid)
    if not report.passed:
        raise ValueError(f"coefficient conditions violated: {report.margins}")
    if problem.initial is None or problem.lateral is None:
        raise ValueError("problem needs initial and lateral data")

    dirichlet = _dirichlet_mask(grid)
    t0 = float(grid.t[0])
    u = _eval_spatial(problem.initial, grid, t0)
    lateral0 = _eval_spatial(problem.lateral, grid, t0)
    mismatch = float(np.max(np.abs(u[dirichlet] - lateral0[dirichlet])))
    if mismatch > COMPATIBILITY_TOL:
        raise ValueError(
            f"initial and lateral data disagree on shared edges by {mismatch:g}"
        )

    forcing_at = _forcing_evaluator(problem, grid)
    substep_forcing_ok = not isinstance(problem.forcing, ScalarField)

    out = np.empty(grid.shape)
    out[..., 0] = u
    u = u.ravel()
    dir_flat = dirichlet.ravel()
    residuals = []

    static = not coeffs.time_dependent
    cache: dict[float, StepMatrix] = {}

    def step_matrix(tau: float, t_next: float) -> StepMatrix:
        if static and tau in cache:
            return cache[tau]
        sm = assemble_step_matrix(problem, grid, tau, t_next, config)
        if static:
            cache[tau] = sm
        return sm

    for k in range(len(grid.t) - 1):
        T0, T1 = float(grid.t[k]), float(grid.t[k + 1])
        span = T1 - T0
        if config.dt is None:
            nsub = 1
        else:
            nsub = max(1, int(math.ceil(span / config.dt - 1e-12)))
            if nsub > 1 and not substep_forcing_ok:
                raise ValueError("substepping needs a callable forcing, not a field")
        tau = span / nsub
        for j in range(1, nsub + 1):
            tn = T1 if j == nsub else T0 + j * tau
            sm = step_matrix(tau, tn)
            g_slice = forcing_at(tn, k + 1)
            rhs = u + tau * g_slice.ravel()
            rhs[dir_flat] = _eval_spatial(problem.lateral, grid, tn).ravel()[dir_flat]
            u = sm.solve(rhs, x0=u)
            if not np.all(np.isfinite(u)):
                raise RuntimeError(f"non-finite solution at step t={tn:g}")
            res = sm.A @ u - rhs
            residuals.append(float(np.max(np.abs(res))) / tau)
        out[..., k + 1] = u.reshape(out.shape[:-1])

    field = ScalarField(grid, out)
    object.__setattr__(field, "step_residuals", residuals)
    return field


def solve_model(v, g, f0, boundary, grid: Grid,
                config: SolverConfig | None = None, c: float = 0.0) -> ScalarField:
    """Model-operator specialization: a = I, b = (v, 0, ..., 0), optional c."""
    problem = IVBProblem(coeffs=v, forcing=g, initial=f0, lateral=boundary, c=c)
    return solve_ivbp(problem, grid, config)


def random_positive_solution_ensemble(seed: int, count: int, coeffs, grid: Grid,
                                      config: SolverConfig | None = None) -> list:
    """Seeded ensemble of nonnegative solutions of the homogeneous equation.

    Each member solves g = 0 with strictly positive time-independent data: a
    low-frequency random trigonometric polynomial rescaled into [0.1, 1],
    used as both initial and lateral data (compatibility is automatic).  The
    discrete maximum principle keeps every output >= 0; a negative value is
    an internal error.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    meshes = _spatial_meshes(grid)
    x_mesh = meshes[0] ** 2
    fields = []
    for _ in range(count):
        nmodes = 3
        w = rng.uniform(0.2, 0.9, size=(nmodes, grid.n))
        ph = rng.uniform(0, 2 * math.pi, size=nmodes)
        c = rng.uniform(0.3, 1.0, size=nmodes)

        def raw(x, *coords):
            ys = coords[:-1]
            out = 0.0
            for kk in range(nmodes):
                phase = w[kk, 0] * x + ph[kk]
                for i, yi in enumerate(ys):
                    phase = phase + w[kk, 1 + i] * yi
                out = out + c[kk] * np.cos(math.pi * phase)
            return out

        sample0 = np.broadcast_to(raw(x_mesh, *meshes[1:], grid.t[0]),
                                  tuple(len(ax) for ax in [grid.s] + list(grid.y)))
        lo, hi = float(np.min(sample0)), float(np.max(sample0))
        span = hi - lo if hi > lo else 1.0

        def data(x, *coords, _raw=raw, _lo=lo, _span=span):
            return 0.1 + 0.9 * (_raw(x, *coords) - _lo) / _span

        sol = solve_ivbp(IVBProblem(coeffs=coeffs, forcing=None,
                                    initial=data, lateral=data), grid, config)
        if float(np.min(sol.values)) < 0.0:
            raise RuntimeError(
                "maximum-principle violation in ensemble member (scheme bug)"
            )
        fields.append(sol)
    return fields
