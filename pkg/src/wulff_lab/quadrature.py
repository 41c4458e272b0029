"""Low-level quadrature: adaptive Simpson on segments, refined midpoint
rule on triangles with Richardson stopping.

Both integrators are deterministic and report failure through
QuadratureNotConverged (carrying the achieved tolerance) instead of
returning silently degraded values.
"""

import numpy as np

from .errors import QuadratureNotConverged

_MAX_DEPTH = 48


def adaptive_simpson(fn, a, b, rel_tol=1e-10, abs_floor=0.0):
    """Classic recursive adaptive Simpson for scalar fn on [a, b].

    The stopping test compares the two-panel refinement against the
    one-panel estimate; accepted panels contribute the Richardson-corrected
    value (S2 + (S2 - S1)/15).
    """
    fa, fm, fb = fn(a), fn(0.5 * (a + b)), fn(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    tol = max(rel_tol * abs(whole), abs_floor, 1e-300)
    return _simpson_rec(fn, a, b, fa, fm, fb, whole, tol, _MAX_DEPTH)


def _simpson_rec(fn, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = fn(lm), fn(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    err = left + right - whole
    if abs(err) <= 15.0 * tol:
        return left + right + err / 15.0
    if depth <= 0:
        raise QuadratureNotConverged(
            f"adaptive Simpson stalled on [{a:.6g}, {b:.6g}]", achieved=abs(err) / 15.0
        )
    return _simpson_rec(fn, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + _simpson_rec(
        fn, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1
    )


def segment_integral(fn, start, end, rel_tol=1e-10):
    """Integrate a pointwise integrand along the segment start -> end.

    ``fn`` maps an array of points (m, dim) to values (m,); the arclength
    measure is included.
    """
    start = np.asarray(start, dtype=float)
    end = np.asarray(end, dtype=float)
    length = float(np.linalg.norm(end - start))
    if length == 0.0:
        return 0.0

    def scalar(t):
        return float(fn((start + t * (end - start))[None, :])[0])

    return length * adaptive_simpson(scalar, 0.0, 1.0, rel_tol=rel_tol)


def triangle_integral(fn, tri, rel_tol=1e-9, max_level=12):
    """Integrate fn over a triangle embedded in R^n.

    Uses the degree-2 edge-midpoint rule under uniform 4-way subdivision;
    stops when the Richardson error estimate (geometric ratio measured
    from the last three levels) meets rel_tol, returning the extrapolated
    value.
    """
    tri = np.asarray(tri, dtype=float)
    area = _triangle_area(tri)
    if area == 0.0:
        return 0.0
    tris = tri[None, :, :]
    estimates = []
    for _ in range(max_level):
        mids = 0.5 * (tris + np.roll(tris, -1, axis=1))
        vals = fn(mids.reshape(-1, tri.shape[1])).reshape(-1, 3)
        total = area / len(tris) * float(np.mean(vals, axis=1).sum())
        estimates.append(total)
        if len(estimates) >= 2:
            diff = abs(estimates[-1] - estimates[-2])
            scale = max(abs(estimates[-1]), 1e-300)
            if len(estimates) >= 3 and abs(estimates[-2] - estimates[-3]) > 0:
                ratio = diff / abs(estimates[-2] - estimates[-3])
            else:
                ratio = 0.25
            ratio = min(ratio, 0.9)
            est_err = diff * ratio / (1.0 - ratio)
            if est_err <= rel_tol * scale:
                return estimates[-1] + (estimates[-1] - estimates[-2]) * ratio / (1.0 - ratio)
        tris = _subdivide(tris)
    raise QuadratureNotConverged(
        "triangle quadrature did not converge",
        achieved=abs(estimates[-1] - estimates[-2]) / max(abs(estimates[-1]), 1e-300),
    )


def _subdivide(tris):
    a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
    ab, bc, ca = 0.5 * (a + b), 0.5 * (b + c), 0.5 * (c + a)
    return np.concatenate(
        [
            np.stack([a, ab, ca], axis=1),
            np.stack([ab, b, bc], axis=1),
            np.stack([ca, bc, c], axis=1),
            np.stack([ab, bc, ca], axis=1),
        ]
    )


def _triangle_area(tri):
    e1, e2 = tri[1] - tri[0], tri[2] - tri[0]
    g11, g22, g12 = e1 @ e1, e2 @ e2, e1 @ e2
    return 0.5 * float(np.sqrt(max(g11 * g22 - g12 * g12, 0.0)))
