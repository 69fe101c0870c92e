"""Singular metric, parabolic cubes, and the weighted volume measure.

The degenerate direction x >= 0 carries the metric ds^2 = dx^2/x + sum dy_i^2,
under which distances scale like |sqrt(x1) - sqrt(x2)|.  Everything here works
in the variable s = sqrt(x) where convenient.  Volumes are weighted by the
density s^(nu - 1) ds dy with nu in (0, 1), normalized so that the measure of
the standard cube Q_rho(s0, y0, t0) has the closed form

    |Q_rho|_mu = [(s0 + rho)^nu - max(s0 - rho, 0)^nu] * rho^n.

The closed form treats the tangential *and* time extents as slabs of
half-width rho (normalization nu / 2^n); `measure_region` returns that slab
for a given cube so quadrature and closed form integrate the same set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# slack for closed (<=) cube membership on floating-point grids
MEMBERSHIP_TOL = 1e-12


def _as_y(y) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(y, dtype=float))
    return arr


@dataclass(frozen=True)
class Point:
    """Point in the half-space, x-coordinates: x >= 0, y in R^(n-1), time t."""

    x: float
    y: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "y", _as_y(self.y))
        if self.x < 0:
            raise ValueError(f"x must be nonnegative, got {self.x}")

    @property
    def n(self) -> int:
        return 1 + self.y.size

    @property
    def s(self) -> float:
        return math.sqrt(self.x)

    def to_s(self) -> "SPoint":
        return SPoint(self.s, self.y, self.t)


@dataclass(frozen=True)
class SPoint:
    """Point in (s, y, t) coordinates with s = sqrt(x)."""

    s: float
    y: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "y", _as_y(self.y))
        if self.s < 0:
            raise ValueError(f"s must be nonnegative, got {self.s}")

    @property
    def x(self) -> float:
        return self.s * self.s

    def to_x(self) -> Point:
        return Point(self.x, self.y, self.t)


def _check_pair(p: Point, q: Point):
    if p.x < 0 or q.x < 0:
        raise ValueError("points must have x >= 0")
    if p.y.size != q.y.size:
        raise ValueError("points have different tangential dimension")


def d_gamma(p: Point, q: Point, gamma: float) -> float:
    """Spatial distance d_gamma, with the degenerate direction measured in s.

    d_gamma^2 = (sqrt(x_p) - sqrt(x_q))^2 + gamma^2 * sum (y_p - y_q)^2
    """
    _check_pair(p, q)
    ds = math.sqrt(p.x) - math.sqrt(q.x)
    dy = p.y - q.y
    return math.sqrt(ds * ds + gamma * gamma * float(dy @ dy))


def d_bar(p: Point, q: Point, gamma: float) -> float:
    """Companion distance with (x_p - x_q)^2 / (x_p + x_q) in place of ds^2.

    Comparable to d_gamma: d_gamma <= d_bar <= sqrt(2) d_gamma.  The first
    term is defined as 0 when x_p = x_q = 0 (its limit value).
    """
    _check_pair(p, q)
    val = d_bar_sq(p.x, list(p.y), q.x, q.y, gamma)
    return math.sqrt(float(val))


def d_bar_sq(x, y, x0: float, y0, gamma: float):
    """Vectorized d_bar^2 between (x, y) and the fixed point (x0, y0).

    x: array; y: sequence of n-1 arrays broadcastable against x.
    """
    x = np.asarray(x, dtype=float)
    denom = x + x0
    safe = np.where(denom > 0, denom, 1.0)
    first = np.where(denom > 0, (x - x0) ** 2 / safe, 0.0)
    dy2 = sum((np.asarray(yi, dtype=float) - y0i) ** 2 for yi, y0i in zip(y, y0))
    return first + gamma * gamma * dy2


def s_distance(p: Point, q: Point) -> float:
    """Parabolic distance |s_p - s_q| + |y_p - y_q| + sqrt(|t_p - t_q|)."""
    _check_pair(p, q)
    return (
        abs(math.sqrt(p.x) - math.sqrt(q.x))
        + float(np.linalg.norm(p.y - q.y))
        + math.sqrt(abs(p.t - q.t))
    )


def rho_nu(s0: float, rho: float, nu: float) -> float:
    """The scaling factor (s0 + rho)^(2 - nu) - s0^(2 - nu)."""
    if s0 < 0 or rho <= 0:
        raise ValueError("need s0 >= 0, rho > 0")
    if not 0 < nu < 1:
        raise ValueError("nu must lie in (0, 1)")
    return (s0 + rho) ** (2.0 - nu) - s0 ** (2.0 - nu)


@dataclass(frozen=True)
class WeightedMeasure:
    """Volume measure with density s^(nu - 1) ds dy, normalized by nu / 2^n."""

    nu: float

    def __post_init__(self):
        if not 0 < self.nu < 1:
            raise ValueError("nu must lie in (0, 1)")


_CUBE_KINDS = ("B_eta", "C_rho", "Q_rho", "B_r_gamma")


@dataclass(frozen=True)
class ParabolicCube:
    """One of the four cube flavors, all intersected with x >= 0.

    kind        spatial membership (base x0, y0; radius r)
    ----        -------------------------------------------
    B_eta       |x - x0| <= r^2,  |y_i - y0_i| <= r per coordinate
    C_rho       |x - x0| <= r,    |y - y0|_2 <= r
    Q_rho       |s - s0| <= r,    |y - y0|_2 <= r
    B_r_gamma   |s - s0| <= r,    gamma |y - y0|_2 <= r

    Time extent is r^2, looking backward from base.t by default
    (base.t - r^2 <= t <= base.t); orientation="forward" flips it.
    Membership is closed with a small absolute slack so grid nodes sitting
    exactly on a face count as inside.
    """

    kind: str
    base: Point
    radius: float
    gamma: float | None = None
    orientation: str = "backward"

    def __post_init__(self):
        if self.kind not in _CUBE_KINDS:
            raise ValueError(f"unknown cube kind {self.kind!r}")
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.kind == "B_r_gamma" and (self.gamma is None or self.gamma <= 0):
            raise ValueError("B_r_gamma cube needs gamma > 0")
        if self.orientation not in ("backward", "forward"):
            raise ValueError("orientation must be 'backward' or 'forward'")

    @property
    def n(self) -> int:
        return self.base.n

    def time_interval(self) -> tuple[float, float]:
        depth = self.radius ** 2
        if self.orientation == "backward":
            return (self.base.t - depth, self.base.t)
        return (self.base.t, self.base.t + depth)

    def contains_s(self, s, y, t):
        """Vectorized membership for coordinates given in (s, y, t) form.

        s, t: arrays (broadcastable); y: sequence of n-1 arrays.
        """
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        ys = [np.asarray(yi, dtype=float) for yi in y]
        if len(ys) != self.base.y.size:
            raise ValueError("tangential dimension mismatch")
        x = s * s
        x0, s0, y0 = self.base.x, self.base.s, self.base.y
        r, tol = self.radius, MEMBERSHIP_TOL

        if self.kind == "B_eta":
            spatial = np.abs(x - x0) <= r * r + tol
            for yi, y0i in zip(ys, y0):
                spatial = spatial & (np.abs(yi - y0i) <= r + tol)
        else:
            dy2 = sum((yi - y0i) ** 2 for yi, y0i in zip(ys, y0))
            if self.kind == "C_rho":
                spatial = (np.abs(x - x0) <= r + tol) & (dy2 <= r * r + tol)
            elif self.kind == "Q_rho":
                spatial = (np.abs(s - s0) <= r + tol) & (dy2 <= r * r + tol)
            else:  # B_r_gamma
                g = self.gamma
                spatial = (np.abs(s - s0) <= r + tol) & (g * g * dy2 <= r * r + tol)

        t_lo, t_hi = self.time_interval()
        return spatial & (t >= t_lo - tol) & (t <= t_hi + tol)

    def node_mask(self, grid) -> np.ndarray:
        """Boolean mask of grid nodes inside the cube, full grid shape."""
        coords = np.meshgrid(*grid.axes, indexing="ij", sparse=True)
        s, ys, t = coords[0], coords[1:-1], coords[-1]
        return np.broadcast_to(
            self.contains_s(s, ys, t), grid.shape
        ).copy()


def measure_region(cube: ParabolicCube) -> tuple[tuple[float, float], list[tuple[float, float]], tuple[float, float]]:
    """Slab over which the weighted measure of a Q_rho cube is computed.

    Returns (s-interval, list of y-intervals, t-interval): s in
    [max(s0 - rho, 0), s0 + rho], every tangential coordinate and time in a
    slab of half-width rho around the base.  The closed-form cube measure is
    the integral of the normalized density over exactly this set.
    """
    if cube.kind != "Q_rho":
        raise ValueError("measure bookkeeping is defined for Q_rho cubes")
    s0, r = cube.base.s, cube.radius
    s_iv = (max(s0 - r, 0.0), s0 + r)
    y_ivs = [(y0i - r, y0i + r) for y0i in cube.base.y]
    t_iv = (cube.base.t - r, cube.base.t + r)
    return s_iv, y_ivs, t_iv


def cube_measure(cube: ParabolicCube, mu: WeightedMeasure, method: str = "analytic",
                 cells: int = 64) -> float:
    """Weighted measure of a Q_rho cube.

    Analytic path: [(s0 + rho)^nu - max(s0 - rho, 0)^nu] * rho^n.
    Quadrature path: cell-decomposed integration of the normalized density
    over `measure_region(cube)` with `cells` cells per axis; the singular
    s-factor is integrated exactly per cell.
    """
    nu, n = mu.nu, cube.n
    s0, r = cube.base.s, cube.radius
    if method == "analytic":
        s_bar = max(s0 - r, 0.0)
        return ((s0 + r) ** nu - s_bar ** nu) * r ** n
    if method != "quadrature":
        raise ValueError("method must be 'analytic' or 'quadrature'")
    (s_lo, s_hi), y_ivs, (t_lo, t_hi) = measure_region(cube)
    edges = np.linspace(s_lo, s_hi, cells + 1)
    s_weight = float(np.sum((edges[1:] ** nu - edges[:-1] ** nu) / nu))
    vol = s_weight
    for lo, hi in y_ivs:
        vol *= hi - lo
    vol *= t_hi - t_lo
    return vol * nu / 2.0 ** n


def set_measure(indicator, grid, mu: WeightedMeasure) -> float:
    """Weighted measure of the set marked by `indicator` on a grid.

    The grid is decomposed into cells between consecutive nodes; a cell
    belongs to the set when the indicator is true at its center.  The
    singular weight s^(nu - 1) is integrated exactly over each cell's
    s-extent; tangential and time extents contribute their lengths.  The
    total carries the normalization nu / 2^n.

    indicator: callable over broadcastable (s, y..., t) center coordinates
    returning a boolean array.
    """
    axes = grid.axes
    if any(len(ax) < 2 for ax in axes):
        raise ValueError("set_measure needs at least one cell per axis")
    n = len(axes) - 1  # spatial dimension (s plus tangential axes)
    nu = mu.nu

    s_nodes = axes[0]
    centers = [(ax[:-1] + ax[1:]) / 2.0 for ax in axes]
    meshes = np.meshgrid(*centers, indexing="ij", sparse=True)
    mask = np.asarray(indicator(meshes[0], meshes[1:-1], meshes[-1]))
    mask = np.broadcast_to(mask, tuple(len(c) for c in centers))

    s_w = (s_nodes[1:] ** nu - s_nodes[:-1] ** nu) / nu
    w = s_w.reshape((-1,) + (1,) * (len(axes) - 1))
    for k, ax in enumerate(axes[1:], start=1):
        shape = [1] * len(axes)
        shape[k] = -1
        w = w * np.diff(ax).reshape(shape)
    return float(np.sum(w * mask)) * nu / 2.0 ** n
