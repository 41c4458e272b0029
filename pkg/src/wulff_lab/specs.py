"""Norm and shape specification records (the file/CLI interchange format).

Norm records:
    {"kind": "euclidean", "dim": 2}
    {"kind": "elliptic", "matrix": [[...], ...]}
    {"kind": "elliptic", "axes": [a, b]}          # F = sqrt((x/a)^2 + (y/b)^2)
    {"kind": "lp", "q": 3.0, "dim": 2}

Shape records:
    {"kind": "wulff", "r": 1.0, "center": [0, 0]}          # needs the norm
    {"kind": "support_fourier", "a0": 1.0, "coeffs": [[a1, b1], ...]}
    {"kind": "polygon", "vertices": [[x, y], ...]}
    {"kind": "box", "halfwidths": [...]}
    {"kind": "polytope", "vertices": [...], "facets": [{"vertices": [...],
        "normal": [...], "offset": d}, ...]}
"""

from .bodies import (
    Polygon2,
    PolytopeN,
    SupportCurve2,
    angle_grid,
    box,
    curve_from_fourier,
    ellipse_body,
    ellipse_excess_body,
    wulff_curve,
)
from .errors import ConfigError
from .finsler import elliptic_norm, euclidean_norm, lp_norm


def norm_from_spec(spec):
    """Build a FinslerNorm from its specification record."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError("norm spec must be a record with a 'kind' key")
    kind = spec["kind"]
    if kind == "euclidean":
        return euclidean_norm(int(spec.get("dim", 2)))
    if kind == "elliptic":
        if "matrix" in spec:
            return elliptic_norm(matrix=spec["matrix"])
        if "axes" in spec:
            return elliptic_norm(axes=spec["axes"])
        raise ConfigError("elliptic norm spec needs 'matrix' or 'axes'")
    if kind == "lp":
        if "q" not in spec:
            raise ConfigError("lp norm spec needs 'q'")
        return lp_norm(float(spec["q"]), int(spec.get("dim", 2)))
    raise ConfigError(f"unknown norm kind {kind!r}")


def shape_from_spec(spec, grid=None, norm=None):
    """Build a body from its specification record.

    ``wulff`` shapes need the norm; support-curve shapes use the given
    grid (default 1024).
    """
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError("shape spec must be a record with a 'kind' key")
    grid = grid or angle_grid()
    kind = spec["kind"]
    if kind == "wulff":
        if norm is None:
            raise ConfigError("wulff shape spec requires a norm")
        return wulff_curve(norm, float(spec.get("r", 1.0)), spec.get("center", (0.0, 0.0)), grid)
    if kind == "support_fourier":
        return curve_from_fourier(grid, float(spec.get("a0", 1.0)), spec.get("coeffs", ()))
    if kind == "polygon":
        if "vertices" not in spec:
            raise ConfigError("polygon shape spec needs 'vertices'")
        return Polygon2(spec["vertices"])
    if kind == "box":
        if "halfwidths" not in spec:
            raise ConfigError("box shape spec needs 'halfwidths'")
        return box(spec["halfwidths"])
    if kind == "polytope":
        facets = [(f["vertices"], f["normal"], f["offset"]) for f in spec.get("facets", ())]
        return PolytopeN(spec["vertices"], facets)
    if kind == "ellipse_excess":
        return ellipse_excess_body(float(spec["eps"]), tuple(spec.get("axes", (1.0, 2.0))), grid)
    if kind == "ellipse_semi_axes":
        return ellipse_body(tuple(spec["semi_axes"]), grid)
    raise ConfigError(f"unknown shape kind {kind!r}")


def shape_to_spec(body):
    """Specification record of a body (support curves via their samples)."""
    if isinstance(body, SupportCurve2):
        if body.fourier is not None:
            a0, coeffs = body.fourier
            return {"kind": "support_fourier", "a0": a0, "coeffs": [list(c) for c in coeffs]}
        from ._fourier import series_coefficients

        a0, a, b = series_coefficients(body.h)
        return {
            "kind": "support_fourier",
            "a0": float(a0),
            "coeffs": [[float(x), float(y)] for x, y in zip(a, b)],
        }
    if isinstance(body, Polygon2):
        return {"kind": "polygon", "vertices": body.vertices.tolist()}
    if isinstance(body, PolytopeN):
        return {
            "kind": "polytope",
            "vertices": body.vertices.tolist(),
            "facets": [
                {"vertices": list(idx), "normal": normal.tolist(), "offset": offset}
                for idx, normal, offset in body.facets
            ],
        }
    raise ConfigError(f"cannot serialize body type {type(body).__name__}")
