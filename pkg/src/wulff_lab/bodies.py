"""Convex bodies: support-function curves, polygons, and facet polytopes.

Three representations cover the desk-scale experiments:

* :class:`SupportCurve2` -- a smooth strictly convex planar body given by
  support function samples h(theta_j) on a uniform periodic grid. All
  derivatives are trigonometric (spectral), so smooth bodies are resolved
  to roundoff. Boundary point, normal and curvature come from the classic
  support parametrization x = h u + h' u_perp, kappa = 1/(h + h'').
* :class:`Polygon2` -- strictly convex CCW polygon, exact per-edge geometry.
* :class:`PolytopeN` -- facet-based convex polytope for n >= 3.
"""

import functools
import math

import numpy as np

from ._fourier import evaluate_series, periodic_derivative, series_coefficients
from .errors import (
    ConfigError,
    DegenerateCut,
    EmptyCut,
    NotConvex,
    UnsupportedDimension,
)


class AngleGrid:
    """Uniform periodic grid theta_j = 2 pi j / n, with cached trig tables."""

    def __init__(self, n):
        n = int(n)
        if n < 64 or n & (n - 1) != 0:
            raise ConfigError(f"grid size must be a power of two >= 64, got {n}")
        self.n = n
        self.delta = 2.0 * math.pi / n
        self.theta = self.delta * np.arange(n)
        self.unit = np.stack([np.cos(self.theta), np.sin(self.theta)], axis=-1)
        self.unit_perp = np.stack([-np.sin(self.theta), np.cos(self.theta)], axis=-1)
        for arr in (self.theta, self.unit, self.unit_perp):
            arr.setflags(write=False)

    def derivative(self, values, order):
        """Spectral derivative of periodic samples on this grid."""
        return periodic_derivative(values, order)

    def integrate(self, values):
        """Periodic trapezoid rule (plain scaled sum)."""
        return float(np.sum(values) * self.delta)

    def __repr__(self):
        return f"AngleGrid(n={self.n})"


@functools.lru_cache(maxsize=32)
def angle_grid(n=1024):
    """Shared AngleGrid instance for the given size."""
    return AngleGrid(n)


class SupportCurve2:
    """Strictly convex planar body from support-function samples.

    Validates h + h'' > 0 at every node on construction (raises NotConvex,
    reporting the worst node). Derived arrays are precomputed and frozen.
    """

    dim = 2

    def __init__(self, grid, h, fourier=None):
        h = np.ascontiguousarray(h, dtype=float)
        if h.shape != (grid.n,):
            raise ConfigError(f"h must have shape ({grid.n},), got {h.shape}")
        self.grid = grid
        self.h = h
        self.h1 = grid.derivative(h, 1)
        self.h2 = grid.derivative(h, 2)
        self.support_weight = self.h + self.h2  # ds/dtheta = h + h''
        worst = int(np.argmin(self.support_weight))
        if self.support_weight[worst] <= 0.0:
            raise NotConvex(
                f"h + h'' = {self.support_weight[worst]:.6g} <= 0 at "
                f"theta = {grid.theta[worst]:.6g} (node {worst})"
            )
        self.fourier = fourier
        self._series = None
        for arr in (self.h, self.h1, self.h2, self.support_weight):
            arr.setflags(write=False)

    # -- geometry ----------------------------------------------------------

    def points(self):
        """Boundary points x(theta_j) = h u + h' u_perp, shape (n, 2)."""
        return self.h[:, None] * self.grid.unit + self.h1[:, None] * self.grid.unit_perp

    def normals(self):
        """Outward unit Euclidean normals (the grid directions)."""
        return self.grid.unit

    def curvatures(self):
        """Euclidean curvature 1/(h + h'') at the nodes."""
        return 1.0 / self.support_weight

    def point_at(self, theta):
        h = self.eval_h(theta)
        h1 = self.eval_h(theta, derivative=1)
        u = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        up = np.stack([-np.sin(theta), np.cos(theta)], axis=-1)
        return h[..., None] * u + h1[..., None] * up

    def eval_h(self, theta, derivative=0):
        """Trigonometric interpolation of h (and derivatives) off-grid."""
        if self._series is None:
            self._series = series_coefficients(self.h)
        a0, a, b = self._series
        return evaluate_series(a0, a, b, theta, derivative=derivative)

    def scaled(self, factor):
        """Dilation about the origin by ``factor`` > 0."""
        if factor <= 0:
            raise ConfigError("scale factor must be positive")
        return SupportCurve2(self.grid, factor * self.h)

    def translated(self, offset):
        offset = np.asarray(offset, dtype=float)
        return SupportCurve2(self.grid, self.h + self.grid.unit @ offset)

    def to_polygon(self):
        """Inscribed polygon through the boundary nodes."""
        return Polygon2(self.points())

    def __repr__(self):
        return f"SupportCurve2(n={self.grid.n})"


def wulff_curve(norm, radius, center=(0.0, 0.0), grid=None):
    """Support curve of the Wulff shape {F*(x - center) < radius}.

    Its support function is radius * F(u) + <center, u>.
    """
    if norm.dim != 2:
        raise UnsupportedDimension("wulff_curve is 2D only")
    if radius <= 0:
        raise ConfigError(f"radius must be positive, got {radius}")
    grid = grid or angle_grid()
    f, _, _ = norm.support_profile(grid)
    center = np.asarray(center, dtype=float)
    return SupportCurve2(grid, radius * f + grid.unit @ center)


def curve_from_fourier(grid, a0, coeffs=()):
    """Support curve h = a0 + sum_k (a_k cos k theta + b_k sin k theta).

    ``coeffs`` lists (a_k, b_k) pairs for k = 1, 2, ... Raises NotConvex if
    the resulting h has h + h'' <= 0 anywhere (the worst node is reported).
    """
    h = np.full(grid.n, float(a0))
    for k, (ak, bk) in enumerate(coeffs, start=1):
        h += ak * np.cos(k * grid.theta) + bk * np.sin(k * grid.theta)
    return SupportCurve2(grid, h, fourier=(float(a0), [tuple(map(float, c)) for c in coeffs]))


def ellipse_body(semi_axes, grid=None):
    """Origin-centered ellipse with the given semi-axes, as a support curve.

    The support function of {(x/A)^2 + (y/B)^2 <= 1} is
    sqrt((A cos t)^2 + (B sin t)^2).
    """
    grid = grid or angle_grid()
    a, b = semi_axes
    if a <= 0 or b <= 0:
        raise ConfigError("semi-axes must be positive")
    return SupportCurve2(grid, np.hypot(a * grid.unit[:, 0], b * grid.unit[:, 1]))


def ellipse_excess_body(eps, axes=(1.0, 2.0), grid=None):
    """The positive-excess ellipse {a^2(1-eps)^2 x^2 + b^2(1+eps)^2 y^2 <= 1}.

    Equivalently the unit Wulff shape of the elliptic norm with adjusted
    axes (a(1-eps), b(1+eps)); realized directly through its semi-axes.
    """
    if not 0 < eps < 1:
        raise ConfigError(f"eps must lie in (0, 1), got {eps}")
    a, b = axes
    return ellipse_body((1.0 / (a * (1.0 - eps)), 1.0 / (b * (1.0 + eps))), grid)


class Polygon2:
    """Strictly convex polygon, vertices in counterclockwise order."""

    dim = 2

    def __init__(self, vertices):
        vertices = np.ascontiguousarray(vertices, dtype=float)
        if vertices.ndim != 2 or vertices.shape[1] != 2 or len(vertices) < 3:
            raise ConfigError("polygon needs >= 3 planar vertices")
        edges = np.roll(vertices, -1, axis=0) - vertices
        cross = edges[:, 0] * np.roll(edges, -1, axis=0)[:, 1] - edges[:, 1] * np.roll(
            edges, -1, axis=0
        )[:, 0]
        if np.any(cross <= 0.0):
            raise NotConvex("polygon is not strictly convex in CCW order")
        self.vertices = vertices
        self.edge_lengths = np.linalg.norm(edges, axis=1)
        self.edge_normals = (
            np.stack([edges[:, 1], -edges[:, 0]], axis=-1) / self.edge_lengths[:, None]
        )
        for arr in (self.vertices, self.edge_lengths, self.edge_normals):
            arr.setflags(write=False)

    def support(self, direction):
        """max <v, direction> over vertices."""
        return float(np.max(self.vertices @ np.asarray(direction, dtype=float)))

    def support_samples(self, grid):
        """h(theta_j) = max_v <v, u(theta_j)>; for fitting, not for curves."""
        return np.max(grid.unit @ self.vertices.T, axis=1)

    def __len__(self):
        return len(self.vertices)

    def __repr__(self):
        return f"Polygon2(m={len(self.vertices)})"


def halfspace_cut(polygon, direction, offset):
    """Clip a convex polygon with the halfspace {<x, direction> <= offset}.

    Exact segment-line intersection arithmetic. Returns the polygon
    unchanged (vertex-identical) when the halfspace contains it; raises
    EmptyCut when the halfspace misses the body, DegenerateCut when the
    intersection has zero area.
    """
    direction = np.asarray(direction, dtype=float)
    nrm = np.linalg.norm(direction)
    if nrm == 0.0:
        raise ConfigError("cut direction must be nonzero")
    direction = direction / nrm
    heights = polygon.vertices @ direction
    if offset >= heights.max():
        return polygon
    if offset < heights.min():
        raise EmptyCut(f"halfspace at offset {offset:.6g} misses the body")
    verts = polygon.vertices
    kept = []
    m = len(verts)
    for i in range(m):
        j = (i + 1) % m
        hi, hj = heights[i], heights[j]
        if hi <= offset:
            kept.append(verts[i])
        if (hi - offset) * (hj - offset) < 0.0:
            t = (offset - hi) / (hj - hi)
            kept.append(verts[i] + t * (verts[j] - verts[i]))
    kept = _dedupe_ring(np.asarray(kept))
    if len(kept) < 3:
        raise DegenerateCut("cut region has zero area")
    try:
        return Polygon2(kept)
    except NotConvex:
        kept = _drop_collinear(kept)
        if len(kept) < 3:
            raise DegenerateCut("cut region has zero area") from None
        return Polygon2(kept)


def _dedupe_ring(verts, rel_tol=1e-14):
    if len(verts) == 0:
        return verts
    scale = max(1.0, float(np.abs(verts).max()))
    keep = np.ones(len(verts), dtype=bool)
    for i in range(len(verts)):
        j = (i + 1) % len(verts)
        if np.all(np.abs(verts[i] - verts[j]) <= rel_tol * scale):
            keep[j] = False
    return verts[keep]


def _drop_collinear(verts, rel_tol=1e-13):
    scale = max(1.0, float(np.abs(verts).max()))
    out = []
    m = len(verts)
    for i in range(m):
        prev, cur, nxt = verts[i - 1], verts[i], verts[(i + 1) % m]
        cross = (cur[0] - prev[0]) * (nxt[1] - cur[1]) - (cur[1] - prev[1]) * (nxt[0] - cur[0])
        if cross > rel_tol * scale**2:
            out.append(cur)
    return np.asarray(out)


def convex_hull_2d(points):
    """Monotone-chain convex hull; collinear points are dropped."""
    pts = np.unique(np.asarray(points, dtype=float), axis=0)
    if len(pts) < 3:
        raise ConfigError("need at least 3 distinct points")
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]

    def build(seq):
        chain = []
        for q in seq:
            while len(chain) >= 2:
                a, b = chain[-2], chain[-1]
                if (b[0] - a[0]) * (q[1] - a[1]) - (b[1] - a[1]) * (q[0] - a[0]) <= 0:
                    chain.pop()
                else:
                    break
            chain.append(q)
        return chain

    lower = build(pts)
    upper = build(pts[::-1])
    hull = np.asarray(lower[:-1] + upper[:-1])
    if len(hull) < 3:
        raise ConfigError("points are collinear")
    return Polygon2(hull)


class PolytopeN:
    """Facet-based convex polytope in R^n, n >= 3.

    Facets are (vertex index tuple, outward unit normal, offset) with
    <normal, v> = offset on the facet and <normal, w> <= offset for all
    vertices w. Planarity is validated to 1e-10.
    """

    def __init__(self, vertices, facets):
        vertices = np.ascontiguousarray(vertices, dtype=float)
        self.dim = vertices.shape[1]
        if self.dim < 3:
            raise ConfigError("PolytopeN requires dim >= 3; use Polygon2 in 2D")
        self.vertices = vertices
        self.facets = []
        scale = max(1.0, float(np.abs(vertices).max()))
        for idx, normal, offset in facets:
            idx = tuple(int(i) for i in idx)
            normal = np.asarray(normal, dtype=float)
            normal = normal / np.linalg.norm(normal)
            offset = float(offset)
            heights = vertices @ normal
            if np.max(np.abs(heights[list(idx)] - offset)) > 1e-10 * scale:
                raise ConfigError("facet vertices are not coplanar with the facet")
            if np.any(heights > offset + 1e-10 * scale):
                raise ConfigError("a vertex lies outside a facet halfspace")
            normal.setflags(write=False)
            self.facets.append((idx, normal, offset))
        centroid = vertices.mean(axis=0)
        for _, normal, offset in self.facets:
            if centroid @ normal >= offset - 1e-12 * scale:
                raise ConfigError("polytope has empty interior")
        self.vertices.setflags(write=False)

    def facet_vertex_loops(self):
        """Facet vertices ordered around each facet (dim == 3 only)."""
        loops = []
        for idx, normal, offset in self.facets:
            pts = self.vertices[list(idx)]
            loops.append((_order_facet_loop(pts, normal), normal, offset))
        return loops

    def __repr__(self):
        return f"PolytopeN(dim={self.dim}, m={len(self.vertices)}, facets={len(self.facets)})"


def _order_facet_loop(pts, normal):
    """Order coplanar points CCW around their centroid in the facet plane."""
    center = pts.mean(axis=0)
    basis = _plane_basis(normal)
    local = (pts - center) @ basis.T
    order = np.argsort(np.arctan2(local[:, 1], local[:, 0]))
    return pts[order]


def _plane_basis(normal):
    """Two orthonormal vectors spanning the hyperplane normal^perp (dim 3)."""
    n = normal / np.linalg.norm(normal)
    a = np.zeros_like(n)
    a[int(np.argmin(np.abs(n)))] = 1.0
    e1 = a - (a @ n) * n
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(n, e1)
    return np.stack([e1, e2])


def box(halfwidths):
    """Axis-aligned box centered at the origin; Polygon2 in 2D, PolytopeN above."""
    hw = np.asarray(halfwidths, dtype=float)
    if np.any(hw <= 0):
        raise ConfigError("halfwidths must be positive")
    n = hw.size
    if n == 2:
        a, b = hw
        return Polygon2(np.array([[a, -b], [a, b], [-a, b], [-a, -b]]))
    if n < 2:
        raise ConfigError("box needs at least 2 halfwidths")
    corners = np.array(
        [[s * w for s, w in zip(signs, hw)] for signs in _sign_patterns(n)]
    )
    facets = []
    for axis in range(n):
        for sign in (1.0, -1.0):
            normal = np.zeros(n)
            normal[axis] = sign
            idx = [i for i, c in enumerate(corners) if c[axis] * sign > 0]
            facets.append((idx, normal, hw[axis]))
    return PolytopeN(corners, facets)


def _sign_patterns(n):
    for bits in range(2**n):
        yield [1.0 if bits >> i & 1 else -1.0 for i in range(n)]


def cross_polytope(dim, radius=1.0):
    """The l1 ball of the given radius: vertices +-radius e_i."""
    if dim < 3:
        raise ConfigError("cross_polytope here is for dim >= 3")
    vertices = np.concatenate([radius * np.eye(dim), -radius * np.eye(dim)])
    facets = []
    for signs in _sign_patterns(dim):
        normal = np.asarray(signs) / math.sqrt(dim)
        idx = [i if s > 0 else dim + i for i, s in enumerate(signs)]
        facets.append((idx, normal, radius / math.sqrt(dim)))
    return PolytopeN(vertices, facets)


def convex_hull(points):
    """Brute-force facet enumeration hull for <= 64 points (dim >= 3).

    Desk-scale only: every dim-subset spanning a hyperplane with all points
    on one side contributes; coplanar subsets are merged into one facet.
    """
    pts = np.unique(np.asarray(points, dtype=float), axis=0)
    m, n = pts.shape
    if n == 2:
        return convex_hull_2d(pts)
    if m > 64:
        raise ConfigError("brute-force hull is limited to 64 points")
    if m < n + 1:
        raise ConfigError("not enough points for a full-dimensional hull")
    import itertools

    scale = max(1.0, float(np.abs(pts).max()))
    planes = {}
    for subset in itertools.combinations(range(m), n):
        base = pts[subset[0]]
        span = pts[list(subset[1:])] - base
        normal = _null_direction(span)
        if normal is None:
            continue
        offset = normal @ base
        heights = pts @ normal
        if np.all(heights <= offset + 1e-10 * scale):
            pass
        elif np.all(heights >= offset - 1e-10 * scale):
            normal, offset = -normal, -offset
            heights = -heights
        else:
            continue
        key = (tuple(np.round(normal, 9)), round(float(offset), 9))
        members = planes.setdefault(key, (normal, offset, set()))
        members[2].update(np.nonzero(heights >= offset - 1e-10 * scale)[0])
    facets = [(sorted(members), normal, offset) for (normal, offset, members) in planes.values()]
    if not facets:
        raise ConfigError("hull has no facets (degenerate input)")
    return PolytopeN(pts, facets)


def _null_direction(span):
    """Unit normal of the hyperplane spanned by rows of span, or None if degenerate."""
    _, s, vt = np.linalg.svd(span)
    if s[-1] <= 1e-10 * max(1.0, s[0]):
        return None
    return vt[-1]
