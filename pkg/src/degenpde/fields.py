"""Grids, sampled scalar fields, discrete derivatives, and discrete norms.

Grids are uniform in s = sqrt(x), not in x: the operator written in
s-coordinates is uniformly parabolic up to a 1/s drift, so uniform-s grids
equidistribute resolution with respect to the singular metric.  A field is a
value per (s, y..., t) node.  Norms and seminorms (oscillation, weighted L^p,
Hoelder and second-order Hoelder norms) are all measured against that metric.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import ParabolicCube, WeightedMeasure, s_distance  # noqa: F401


def _uniform_spacing(nodes: np.ndarray, name: str) -> float:
    d = np.diff(nodes)
    if d.size == 0:
        raise ValueError(f"axis {name} needs at least 2 nodes")
    h = float(d[0])
    if np.max(np.abs(d - h)) > 1e-12 * max(1.0, abs(h)):
        raise ValueError(f"axis {name} is not uniformly spaced")
    return h


@dataclass(frozen=True)
class Grid:
    """Tensor grid: s-axis (nonnegative), n-1 tangential y-axes, time axis."""

    s: np.ndarray
    y: tuple
    t: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "s", np.asarray(self.s, dtype=float))
        object.__setattr__(self, "y", tuple(np.asarray(a, dtype=float) for a in self.y))
        object.__setattr__(self, "t", np.asarray(self.t, dtype=float))
        for name, ax in zip(self.axis_names, self.axes):
            if ax.size < 3:
                raise ValueError(f"axis {name} needs at least 3 nodes")
            if np.any(np.diff(ax) <= 0):
                raise ValueError(f"axis {name} must be strictly increasing")
        if self.s[0] < 0:
            raise ValueError("s-axis must be nonnegative")

    @classmethod
    def uniform(cls, s_extent, y_extents, t_extent) -> "Grid":
        """Build from (lo, hi, count) triples; y_extents is a list of triples."""

        def ax(triple):
            lo, hi, count = triple
            return np.linspace(lo, hi, int(count))

        return cls(ax(s_extent), tuple(ax(e) for e in y_extents), ax(t_extent))

    @property
    def n(self) -> int:
        return 1 + len(self.y)

    @property
    def axes(self) -> list:
        return [self.s, *self.y, self.t]

    @property
    def axis_names(self) -> list:
        return ["s", *[f"y{i + 2}" for i in range(len(self.y))], "t"]

    @property
    def shape(self) -> tuple:
        return tuple(len(ax) for ax in self.axes)

    @property
    def hs(self) -> float:
        return _uniform_spacing(self.s, "s")

    @property
    def ht(self) -> float:
        return _uniform_spacing(self.t, "t")

    def hy(self, i: int) -> float:
        return _uniform_spacing(self.y[i], f"y{i + 2}")

    @property
    def s_floor(self) -> float:
        """Below this s the chain rule to x-derivatives is refused."""
        return 0.5 * float(self.s[1]) if self.s[0] == 0.0 else 0.0

    def meshes(self, sparse: bool = True) -> list:
        return np.meshgrid(*self.axes, indexing="ij", sparse=sparse)

    def same_axes(self, other: "Grid") -> bool:
        return (
            len(self.axes) == len(other.axes)
            and all(a.shape == b.shape and np.array_equal(a, b)
                    for a, b in zip(self.axes, other.axes))
        )


@dataclass(frozen=True)
class ScalarField:
    """Grid-sampled space-time function."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != self.grid.shape:
            raise ValueError(f"values shape {vals.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(vals)):
            idx = np.argwhere(~np.isfinite(vals))[0]
            raise ValueError(f"non-finite value at node index {tuple(idx)}")
        object.__setattr__(self, "values", vals)

    def slice_t(self, k: int) -> np.ndarray:
        return self.values[..., k]


def sample(f, grid: Grid) -> ScalarField:
    """Evaluate f(x, y..., t) at every node (x = s^2)."""
    meshes = grid.meshes()
    s, ys, t = meshes[0], meshes[1:-1], meshes[-1]
    vals = np.asarray(f(s * s, *ys, t), dtype=float)
    vals = np.broadcast_to(vals, grid.shape).copy()
    bad = ~np.isfinite(vals)
    if np.any(bad):
        idx = tuple(np.argwhere(bad)[0])
        coords = tuple(float(grid.axes[k][idx[k]]) for k in range(len(idx)))
        raise ValueError(f"sampling produced non-finite value at node {coords}")
    return ScalarField(grid, vals)


def _d1(v: np.ndarray, h: float, axis: int) -> np.ndarray:
    """Second-order first derivative: central interior, one-sided at ends."""
    v = np.moveaxis(v, axis, 0)
    out = np.empty_like(v)
    out[1:-1] = (v[2:] - v[:-2]) / (2 * h)
    out[0] = (-3 * v[0] + 4 * v[1] - v[2]) / (2 * h)
    out[-1] = (3 * v[-1] - 4 * v[-2] + v[-3]) / (2 * h)
    return np.moveaxis(out, 0, axis)


def _nonuniform_coeffs(xv: np.ndarray):
    """Per-node 3-point stencil coefficients for d/dx and d2/dx2 on nodes xv.

    Node i uses the quadratic through (x_{i-1}, x_i, x_{i+1}) evaluated at
    x_i (one-sided triples at the ends).  Exact for quadratics in x.
    """
    npts = xv.size
    c1 = np.zeros((npts, 3))
    c2 = np.zeros((npts, 3))
    idx = np.zeros((npts, 3), dtype=int)
    for i in range(npts):
        k = min(max(i - 1, 0), npts - 3)
        p, q, r = xv[k], xv[k + 1], xv[k + 2]
        e = xv[i]
        c1[i] = [
            (2 * e - q - r) / ((p - q) * (p - r)),
            (2 * e - p - r) / ((q - p) * (q - r)),
            (2 * e - p - q) / ((r - p) * (r - q)),
        ]
        c2[i] = [
            2.0 / ((p - q) * (p - r)),
            2.0 / ((q - p) * (q - r)),
            2.0 / ((r - p) * (r - q)),
        ]
        idx[i] = [k, k + 1, k + 2]
    return idx, c1, c2


def _apply_stencil(v: np.ndarray, idx: np.ndarray, coef: np.ndarray) -> np.ndarray:
    v = np.moveaxis(v, 0, -1)
    out = (
        v[..., idx[:, 0]] * coef[:, 0]
        + v[..., idx[:, 1]] * coef[:, 1]
        + v[..., idx[:, 2]] * coef[:, 2]
    )
    return np.moveaxis(out, -1, 0)


def _d2(v: np.ndarray, h: float, axis: int) -> np.ndarray:
    """Second-order second derivative: central interior, one-sided at ends."""
    v = np.moveaxis(v, axis, 0)
    out = np.empty_like(v)
    out[1:-1] = (v[2:] - 2 * v[1:-1] + v[:-2]) / (h * h)
    if v.shape[0] >= 4:
        out[0] = (2 * v[0] - 5 * v[1] + 4 * v[2] - v[3]) / (h * h)
        out[-1] = (2 * v[-1] - 5 * v[-2] + 4 * v[-3] - v[-4]) / (h * h)
    else:
        out[0] = out[1]
        out[-1] = out[-2]
    return np.moveaxis(out, 0, axis)


class FieldDerivatives:
    """Finite-difference derivatives of a field on its own grid.

    s-form derivatives (u_s, u_ss, u_sy, u_y, u_yy, u_t) are defined
    everywhere.  x-form derivatives use the chain rule u_x = u_s/(2s),
    u_xx = (u_ss - u_s/s)/(4 s^2) where s exceeds the grid's s_floor; at
    s = 0 the limits are used instead: x*u_xx -> 0 and u_x from a one-sided
    stencil in x built from the first s-nodes (x-values 0, h^2, 4h^2).
    """

    def __init__(self, field: ScalarField):
        self.field = field
        g = field.grid
        v = field.values
        self.u_s = _d1(v, g.hs, 0)
        self.u_ss = _d2(v, g.hs, 0)
        self.u_t = _d1(v, g.ht, len(g.axes) - 1)
        self.u_y = [_d1(v, g.hy(i), 1 + i) for i in range(len(g.y))]
        self.u_sy = [_d1(self.u_s, g.hy(i), 1 + i) for i in range(len(g.y))]
        self.u_yy = [[None] * len(g.y) for _ in range(len(g.y))]
        for i in range(len(g.y)):
            for j in range(len(g.y)):
                if i == j:
                    self.u_yy[i][j] = _d2(v, g.hy(i), 1 + i)
                elif j > i:
                    self.u_yy[i][j] = _d1(self.u_y[i], g.hy(j), 1 + j)
                else:
                    self.u_yy[i][j] = self.u_yy[j][i]

    def _s_col(self) -> np.ndarray:
        g = self.field.grid
        return g.s.reshape((-1,) + (1,) * (len(g.axes) - 1))

    def u_x(self) -> np.ndarray:
        """du/dx everywhere; at s = 0 a one-sided x-stencil replaces the chain rule."""
        g = self.field.grid
        s = self._s_col()
        safe = np.where(s > 0, s, 1.0)
        out = self.u_s / (2 * safe)
        if g.s[0] == 0.0:
            v = self.field.values
            h2 = g.hs * g.hs
            # derivative at x = 0 through the points x = 0, h^2, 4h^2
            out[0] = (-5 * v[0] / 4 + 4 * v[1] / 3 - v[2] / 12) / h2
        return out

    def x_times_u_xx(self) -> np.ndarray:
        """x * d2u/dx2 = (u_ss - u_s/s)/4, with limit value 0 at s = 0."""
        g = self.field.grid
        s = self._s_col()
        safe = np.where(s > 0, s, 1.0)
        out = (self.u_ss - self.u_s / safe) / 4.0
        if g.s[0] == 0.0:
            out[0] = 0.0
        return out

    def u_x_xgrid(self) -> np.ndarray:
        """du/dx by 3-point stencils on the nonuniform x-nodes x_i = s_i^2.

        Exact for fields polynomial of degree <= 2 in x; defined at s = 0.
        """
        g = self.field.grid
        idx, c1, _ = _nonuniform_coeffs(g.s ** 2)
        return _apply_stencil(self.field.values, idx, c1)

    def u_xx_xgrid(self) -> np.ndarray:
        """d2u/dx2 by 3-point stencils on the nonuniform x-nodes."""
        g = self.field.grid
        idx, _, c2 = _nonuniform_coeffs(g.s ** 2)
        return _apply_stencil(self.field.values, idx, c2)

    def u_xx(self) -> np.ndarray:
        """d2u/dx2 by the chain rule; refused if the grid reaches below s_floor."""
        g = self.field.grid
        if g.s[0] < g.s_floor or g.s[0] == 0.0:
            raise ValueError(
                "u_xx is not available at s below the floor "
                f"{g.s_floor:g}; use the s-form operators there"
            )
        s = self._s_col()
        return (self.u_ss - self.u_s / s) / (4 * s * s)


def fd_derivatives(field: ScalarField) -> FieldDerivatives:
    return FieldDerivatives(field)


def osc(field: ScalarField, cube: ParabolicCube) -> float:
    """max - min of the field over grid nodes inside the cube."""
    mask = cube.node_mask(field.grid)
    if not np.any(mask):
        raise ValueError("cube contains no grid nodes")
    vals = field.values[mask]
    return float(np.max(vals) - np.min(vals))


def _dual_weights(nodes: np.ndarray) -> np.ndarray:
    """Lengths of node-centered dual cells, clipped to the axis extent."""
    edges = np.empty(nodes.size + 1)
    edges[1:-1] = (nodes[:-1] + nodes[1:]) / 2.0
    edges[0] = nodes[0]
    edges[-1] = nodes[-1]
    return np.diff(edges)


def _dual_s_weights(nodes: np.ndarray, nu: float) -> np.ndarray:
    """Exact integrals of s^(nu-1) over node-centered dual cells."""
    edges = np.empty(nodes.size + 1)
    edges[1:-1] = (nodes[:-1] + nodes[1:]) / 2.0
    edges[0] = nodes[0]
    edges[-1] = nodes[-1]
    return (edges[1:] ** nu - edges[:-1] ** nu) / nu


def lp_norm_weighted(field: ScalarField, p: float, cube: ParabolicCube,
                     mu: WeightedMeasure) -> float:
    """(sum |u|^p s^(nu-1) d(cell))^(1/p) over nodes inside the cube.

    Node-dual quadrature: each node carries the exact integral of the
    singular density over its dual s-cell times the dual lengths of the
    other axes.  No normalization prefactor (it would cancel in every
    measured constant anyway).
    """
    if not np.isfinite(p) or p < 1:
        raise ValueError("p must be a finite real >= 1")
    g = field.grid
    mask = cube.node_mask(g)
    if not np.any(mask):
        raise ValueError("cube contains no grid nodes")
    w = _dual_s_weights(g.s, mu.nu).reshape((-1,) + (1,) * (len(g.axes) - 1))
    for k, ax in enumerate(g.axes[1:], start=1):
        shape = [1] * len(g.axes)
        shape[k] = -1
        w = w * _dual_weights(ax).reshape(shape)
    total = np.sum((np.abs(field.values) ** p) * w * mask)
    return float(total ** (1.0 / p))


# pair-sampling rule for Hoelder seminorms: all pairs up to this many nodes,
# a fixed-seed random sample of 10^6 pairs above
_HOLDER_ALL_PAIRS_LIMIT = 2000
_HOLDER_SAMPLED_PAIRS = 1_000_000


def _region_coords(field: ScalarField, region: ParabolicCube):
    g = field.grid
    mask = region.node_mask(g)
    idx = np.argwhere(mask)
    if idx.shape[0] < 2:
        raise ValueError("region must contain at least 2 grid nodes")
    coords = [g.axes[k][idx[:, k]] for k in range(len(g.axes))]
    vals = field.values[mask]
    return coords, vals


def _pair_ratio_max(coords, vals, alpha: float) -> float:
    npts = vals.size
    if npts <= _HOLDER_ALL_PAIRS_LIMIT:
        ii, jj = np.triu_indices(npts, k=1)
    else:
        rng = np.random.default_rng(0)
        ii = rng.integers(0, npts, _HOLDER_SAMPLED_PAIRS)
        jj = rng.integers(0, npts, _HOLDER_SAMPLED_PAIRS)
        keep = ii != jj
        ii, jj = ii[keep], jj[keep]
    s, t = coords[0], coords[-1]
    dist = np.abs(s[ii] - s[jj])
    dy2 = np.zeros_like(dist)
    for yk in coords[1:-1]:
        dy2 += (yk[ii] - yk[jj]) ** 2
    dist = dist + np.sqrt(dy2) + np.sqrt(np.abs(t[ii] - t[jj]))
    du = np.abs(vals[ii] - vals[jj])
    pos = dist > 0
    if not np.any(pos):
        return 0.0
    return float(np.max(du[pos] / dist[pos] ** alpha))


def holder_seminorm(field: ScalarField, alpha: float, region: ParabolicCube) -> float:
    """sup |u(P)-u(Q)| / s_distance(P,Q)^alpha over node pairs in the region."""
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    coords, vals = _region_coords(field, region)
    return _pair_ratio_max(coords, vals, alpha)


def c0_norm(field: ScalarField, region: ParabolicCube | None = None) -> float:
    if region is None:
        return float(np.max(np.abs(field.values)))
    mask = region.node_mask(field.grid)
    if not np.any(mask):
        raise ValueError("region contains no grid nodes")
    return float(np.max(np.abs(field.values[mask])))


def _check_region_interior(grid: Grid, mask: np.ndarray):
    """Require 2-cell margins against every nondegenerate grid edge.

    The degenerate edge s = 0 is exempt: the scaled derivatives used by the
    second-order norm have well-defined limit stencils there.
    """
    idx = np.argwhere(mask)
    lo = idx.min(axis=0)
    hi = idx.max(axis=0)
    shape = grid.shape
    k_t = len(shape) - 1
    problems = []
    if hi[0] > shape[0] - 3:
        problems.append("s-top")
    if grid.s[0] > 0 and lo[0] < 2:
        problems.append("s-bottom")
    for k in range(1, k_t):
        if lo[k] < 2 or hi[k] > shape[k] - 3:
            problems.append(grid.axis_names[k])
    if lo[k_t] < 2 or hi[k_t] > shape[k_t] - 3:
        problems.append("t")
    if problems:
        raise ValueError(
            "region touches grid edges (" + ", ".join(problems) +
            "); one-sided stencils would pollute the seminorm"
        )


def cs_norm_2_alpha(field: ScalarField, alpha: float, region: ParabolicCube) -> float:
    """Second-order Hoelder norm adapted to the singular metric.

    C0 norm of u plus C0 norms and Hoelder-alpha seminorms of the scaled
    derivatives that enter the model operator: u_t, x*u_xx, u_{y_i y_j},
    u_x, u_{y_i}.  The region must sit at least 2 cells inside every
    nondegenerate grid edge.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    g = field.grid
    mask = region.node_mask(g)
    if not np.any(mask):
        raise ValueError("region contains no grid nodes")
    _check_region_interior(g, mask)
    d = fd_derivatives(field)
    pieces = [d.u_t, d.x_times_u_xx(), d.u_x()]
    pieces.extend(d.u_y)
    for i in range(len(g.y)):
        for j in range(i, len(g.y)):
            pieces.append(d.u_yy[i][j])
    total = c0_norm(field, region)
    idx_coords = [g.axes[k][np.argwhere(mask)[:, k]] for k in range(len(g.axes))]
    for arr in pieces:
        vals = arr[mask]
        total += float(np.max(np.abs(vals)))
        total += _pair_ratio_max(idx_coords, vals, alpha)
    return total


def save_field(field: ScalarField, path) -> None:
    """Plain-text dump: header with grid metadata, one node per line."""
    g = field.grid
    shape = ",".join(str(k) for k in g.shape)
    meshes = np.meshgrid(*g.axes, indexing="ij")
    cols = [m.ravel() for m in meshes] + [field.values.ravel()]
    with open(path, "w") as fh:
        fh.write(f"# degenpde scalarfield n={g.n} shape={shape}\n")
        fh.write("# columns: s " + " ".join(f"y{i + 2}" for i in range(len(g.y)))
                 + " t value\n")
        for row in zip(*cols):
            fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")


def load_field(path) -> ScalarField:
    """Inverse of save_field; bit-exact round trip."""
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("# degenpde scalarfield"):
            raise ValueError(f"{path}: not a scalar field dump")
        meta = dict(tok.split("=") for tok in header.split()[3:])
        shape = tuple(int(k) for k in meta["shape"].split(","))
        fh.readline()  # column names
        data = np.loadtxt(fh)
    if data.shape[0] != int(np.prod(shape)):
        raise ValueError(f"{path}: expected {np.prod(shape)} rows, got {data.shape[0]}")
    axes = []
    for k, size in enumerate(shape):
        stride = int(np.prod(shape[k + 1:]))
        axes.append(data[:: stride, k][:size].copy())
    grid = Grid(axes[0], tuple(axes[1:-1]), axes[-1])
    return ScalarField(grid, data[:, -1].reshape(shape))
