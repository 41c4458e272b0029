"""Finsler norms, their polars, and first-order calculus.

A Finsler norm here is one of three smooth kinds:

* ``euclidean`` -- F(v) = |v|, self-dual;
* ``elliptic``  -- F(v) = sqrt(v' A v) for a symmetric positive-definite A,
  with polar F*(v) = sqrt(v' A^-1 v);
* ``lp``        -- the q-norm with 1 < q < infinity, polar the dual-exponent
  norm q/(q-1).

The endpoint exponents q = 1 and q = infinity are rejected: they are not
C^2 away from the origin. All evaluators are vectorized over leading axes,
so an (N, dim) array of points is evaluated in one call.
"""

import math

import numpy as np

from ._fourier import periodic_derivative
from .errors import ConfigError, ZeroVector

_ZERO_TOL = 1e-14


def unit_ball_volume(dim):
    """Lebesgue measure of the Euclidean unit ball in R^dim."""
    return math.pi ** (dim / 2) / math.gamma(dim / 2 + 1)


class FinslerNorm:
    """A smooth Finsler norm with closed-form polar and gradients.

    Instances are immutable value objects: build them with the module
    factories :func:`euclidean_norm`, :func:`elliptic_norm`, :func:`lp_norm`.

    Attributes
    ----------
    kind : str
        ``"euclidean"``, ``"elliptic"`` or ``"lp"``.
    dim : int
    lower, upper : float
        Tight constants with ``lower*|v| <= F(v) <= upper*|v|``.
    wulff_convexity : float
        Lower bound on the principal curvatures of the unit Wulff shape
        boundary (exact for euclidean/elliptic; a dense numerical minimum
        for lp, which degenerates to ~0 when q < 2).
    """

    def __init__(self, kind, dim, matrix=None, q=None):
        if dim < 2:
            raise ConfigError(f"dim must be >= 2, got {dim}")
        self.kind = kind
        self.dim = int(dim)
        self._profiles = {}
        self._cache = {}
        if kind == "euclidean":
            self.lower = self.upper = 1.0
            self.wulff_convexity = 1.0
        elif kind == "elliptic":
            matrix = np.asarray(matrix, dtype=float)
            if matrix.shape != (dim, dim):
                raise ConfigError(f"matrix must be {dim}x{dim}, got {matrix.shape}")
            if not np.allclose(matrix, matrix.T, atol=1e-12 * np.abs(matrix).max()):
                raise ConfigError("matrix must be symmetric")
            eigvals = np.linalg.eigvalsh(matrix)
            if eigvals[0] <= 0:
                raise ConfigError("matrix must be positive definite")
            self.matrix = matrix
            self.matrix_inv = np.linalg.inv(matrix)
            self.lower = math.sqrt(eigvals[0])
            self.upper = math.sqrt(eigvals[-1])
            # Wulff = ellipsoid with semi-axes sqrt(eig(A)); min curvature
            # of an ellipsoid is min-axis / max-axis^2.
            semi = np.sqrt(eigvals)
            self.wulff_convexity = float(semi[0] / semi[-1] ** 2)
        elif kind == "lp":
            q = float(q)
            if not 1.0 < q < math.inf:
                raise ConfigError(f"lp exponent q must satisfy 1 < q < inf, got {q}")
            self.q = q
            self.q_dual = q / (q - 1.0)
            m = dim ** (1.0 / q - 0.5)
            self.lower, self.upper = min(1.0, m), max(1.0, m)
            self.wulff_convexity = self._lp_wulff_convexity()
        else:
            raise ConfigError(f"unknown norm kind {kind!r}")
        for arr in ("matrix", "matrix_inv"):
            if hasattr(self, arr):
                getattr(self, arr).setflags(write=False)

    # -- evaluation -----------------------------------------------------

    def value(self, v):
        """F(v); accepts arrays of shape (..., dim)."""
        v = np.asarray(v, dtype=float)
        if self.kind == "euclidean":
            return np.linalg.norm(v, axis=-1)
        if self.kind == "elliptic":
            return np.sqrt(np.einsum("...i,ij,...j->...", v, self.matrix, v))
        return np.sum(np.abs(v) ** self.q, axis=-1) ** (1.0 / self.q)

    def polar(self, v):
        """The polar (dual) norm F*(v), closed form per kind."""
        v = np.asarray(v, dtype=float)
        if self.kind == "euclidean":
            return np.linalg.norm(v, axis=-1)
        if self.kind == "elliptic":
            return np.sqrt(np.einsum("...i,ij,...j->...", v, self.matrix_inv, v))
        return np.sum(np.abs(v) ** self.q_dual, axis=-1) ** (1.0 / self.q_dual)

    def __call__(self, v):
        return self.value(v)

    def gradient(self, v):
        """grad F at v != 0 (0-homogeneous). Raises ZeroVector near 0."""
        v = self._check_nonzero(v)
        if self.kind == "euclidean":
            return v / np.linalg.norm(v, axis=-1, keepdims=True)
        if self.kind == "elliptic":
            return v @ self.matrix.T / self.value(v)[..., None]
        return self._lp_gradient(v, self.q)

    def polar_gradient(self, v):
        """grad F* at v != 0."""
        v = self._check_nonzero(v)
        if self.kind == "euclidean":
            return v / np.linalg.norm(v, axis=-1, keepdims=True)
        if self.kind == "elliptic":
            return v @ self.matrix_inv.T / self.polar(v)[..., None]
        return self._lp_gradient(v, self.q_dual)

    # -- angle-grid profile (2D) ----------------------------------------

    def support_profile(self, grid):
        """(f, f', f'') with f(theta) = F(cos theta, sin theta), cached per grid size.

        f is the support function of the unit Wulff shape, so f + f'' > 0.
        """
        if self.dim != 2:
            raise ConfigError("support_profile requires dim == 2")
        cached = self._profiles.get(grid.n)
        if cached is None:
            f = self.value(grid.unit)
            cached = (f, grid.derivative(f, 1), grid.derivative(f, 2))
            for arr in cached:
                arr.setflags(write=False)
            self._profiles[grid.n] = cached
        return cached

    # -- metadata --------------------------------------------------------

    def spec(self):
        """Serializable specification record (round-trips via specs module)."""
        if self.kind == "euclidean":
            return {"kind": "euclidean", "dim": self.dim}
        if self.kind == "elliptic":
            return {"kind": "elliptic", "matrix": self.matrix.tolist()}
        return {"kind": "lp", "q": self.q, "dim": self.dim}

    def cache_key(self):
        if self.kind == "elliptic":
            return ("elliptic", self.matrix.tobytes())
        if self.kind == "lp":
            return ("lp", self.dim, self.q)
        return ("euclidean", self.dim)

    def __repr__(self):
        if self.kind == "elliptic":
            return f"FinslerNorm(elliptic, dim={self.dim})"
        if self.kind == "lp":
            return f"FinslerNorm(lp, q={self.q}, dim={self.dim})"
        return f"FinslerNorm(euclidean, dim={self.dim})"

    # -- internals --------------------------------------------------------

    def _check_nonzero(self, v):
        v = np.asarray(v, dtype=float)
        norms = np.linalg.norm(v, axis=-1)
        if np.any(norms < _ZERO_TOL):
            raise ZeroVector("gradient undefined at the zero vector")
        return v

    def _lp_gradient(self, v, q):
        scale = np.sum(np.abs(v) ** q, axis=-1) ** (1.0 / q - 1.0)
        return np.sign(v) * np.abs(v) ** (q - 1.0) * scale[..., None]

    def _lp_wulff_convexity(self, n_grid=4096):
        # Unit Wulff support function is f(theta) = F(u(theta)); its boundary
        # curvature is 1/(f + f''). Evaluated on a 2D section; for q < 2 the
        # Wulff boundary flattens at the axes and the bound degenerates to ~0.
        theta = 2.0 * math.pi * np.arange(n_grid) / n_grid
        u = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        if self.dim > 2:
            u = np.concatenate([u, np.zeros((n_grid, self.dim - 2))], axis=-1)
        f = self.value(u)
        f2 = periodic_derivative(f, 2)
        return float(1.0 / np.max(f + f2))


def euclidean_norm(dim=2):
    """The Euclidean norm as a FinslerNorm."""
    return FinslerNorm("euclidean", dim)


def elliptic_norm(matrix=None, axes=None):
    """Elliptic norm sqrt(v' A v).

    Either pass ``matrix`` (symmetric positive definite) or ``axes``
    (a1, ..., an), meaning F(v) = sqrt(sum (v_i/a_i)^2). The polar is then
    F*(v) = sqrt(sum (a_i v_i)^2) and the unit Wulff shape is the ellipsoid
    {sum (a_i v_i)^2 <= 1} with semi-axes 1/a_i.
    """
    if (matrix is None) == (axes is None):
        raise ConfigError("elliptic norm needs exactly one of matrix= or axes=")
    if axes is not None:
        axes = np.asarray(axes, dtype=float)
        if np.any(axes <= 0):
            raise ConfigError("axes must be positive")
        matrix = np.diag(1.0 / axes**2)
    matrix = np.asarray(matrix, dtype=float)
    return FinslerNorm("elliptic", matrix.shape[0], matrix=matrix)


def lp_norm(q, dim=2):
    """The q-norm, 1 < q < infinity."""
    return FinslerNorm("lp", dim, q=q)


def duality_residuals(norm, v):
    """Residuals of the four polar-duality identities at v != 0.

    Returns a dict with
    ``value_of_polar_grad`` = |F(grad F*(v)) - 1|,
    ``polar_of_grad``      = |F*(grad F(v)) - 1|,
    ``roundtrip_via_polar``= |F*(v) grad F(grad F*(v)) - v|,
    ``roundtrip_via_value``= |F(v) grad F*(grad F(v)) - v|.
    """
    v = np.asarray(v, dtype=float)
    g = norm.gradient(v)
    gp = norm.polar_gradient(v)
    return {
        "value_of_polar_grad": float(np.max(np.abs(norm.value(gp) - 1.0))),
        "polar_of_grad": float(np.max(np.abs(norm.polar(g) - 1.0))),
        "roundtrip_via_polar": float(
            np.max(np.linalg.norm(norm.polar(v)[..., None] * norm.gradient(gp) - v, axis=-1))
        ),
        "roundtrip_via_value": float(
            np.max(np.linalg.norm(norm.value(v)[..., None] * norm.polar_gradient(g) - v, axis=-1))
        ),
    }


def polar_by_support(value_fn, v, dim=2, n_dirs=4096, refine=True):
    """Generic sup-based polar: sup_u <u, v>/value_fn(u) over directions u.

    Independent oracle for the closed-form polars; 2D uses a dense angle
    sweep plus golden-section refinement, higher dimensions a seeded
    direction cloud without refinement. Not for hot paths.
    """
    v = np.asarray(v, dtype=float)
    if np.linalg.norm(v) == 0.0:
        return 0.0
    if dim == 2:
        angles = 2.0 * math.pi * np.arange(n_dirs) / n_dirs

        def objective(phi):
            u = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
            return (u @ v) / value_fn(u)

        vals = objective(angles)
        j = int(np.argmax(vals))
        best = float(vals[j])
        if not refine:
            return best
        lo = angles[j] - 2.0 * math.pi / n_dirs
        hi = angles[j] + 2.0 * math.pi / n_dirs
        return max(best, _golden_max(objective, lo, hi))
    rng = np.random.default_rng(0)
    u = rng.standard_normal((n_dirs, dim))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    return float(np.max((u @ v) / value_fn(u)))


def _golden_max(fn, lo, hi, tol=1e-13, max_iter=200):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(max_iter):
        if b - a < tol:
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    return float(max(fc, fd))
