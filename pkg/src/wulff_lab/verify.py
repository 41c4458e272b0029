"""Batch verification suites, random shape families, and direct minimization.

Each suite evaluates one inequality of the theory over a seeded family of
convex bodies plus fixed canonical cases (Wulff shapes, an off-center
Wulff, the unit square, the thin box R_eps, the perturbed ellipse E_eps)
and records signed margins: negative margin = violation. Suites are
deterministic in (seed, config) down to the produced bytes.

The minimizer searches for the quotient minimizer by gradient descent
driven by the analytic first-variation density. Shapes are parametrized
by the logarithm of the curvature weight w = h + h'' (modes 0, 2..K) plus
a free center: strict convexity is then intrinsic, which matters because
descent paths in raw support coefficients provably graze the h + h'' = 0
boundary and stall a backtracking-only search there.
"""

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._fourier import periodic_derivative
from .bodies import (
    Polygon2,
    SupportCurve2,
    angle_grid,
    box,
    convex_hull_2d,
    curve_from_fourier,
    ellipse_body,
    ellipse_excess_body,
    wulff_curve,
)
from .errors import ConfigError, LineSearchFailed, RejectionExhausted
from .finsler import elliptic_norm
from .functionals import (
    anisotropic_perimeter,
    boundary_momentum,
    evaluate,
    heintze_karcher,
    max_polar_radius,
    quotient,
    unit_wulff_volume,
    volume,
)
from .iamcf import fit_wulff_support
from .specs import norm_from_spec, shape_from_spec
from .variation import (
    cut_experiment,
    first_variation_density,
    quotient_rate_iamcf,
    second_inequality_value,
    trend_nonpositive,
)

SUITES = ("main", "iso", "hk", "ratio", "secineq", "excessdescent", "cuts")

_SUITE_TOLERANCE = {
    "main": 1e-8,
    "iso": 1e-8,
    "hk": 1e-8,
    "ratio": 1e-8,
    "secineq": 1e-8,
    "excessdescent": 0.0,
    "cuts": 1e-9,
}

_SMOOTH_ONLY = {"hk", "excessdescent"}


def random_body(seed, family, grid=None, **params):
    """Deterministic pseudo-random convex body from the named family.

    Families: ``fourier`` (support curve, unit mean radius, modes 2..K with
    coefficients bounded by rho/k^2, rejection-sampled until
    h + h'' > margin), ``polygon`` (hull of Gaussian points), ``box``
    (axis-aligned; ``eps`` gives the thin box (1/eps, eps)), ``ellipse``
    (the perturbed-axes ellipse E_eps).
    """
    grid = grid or angle_grid()
    if family == "fourier":
        return _random_fourier(seed, grid, **params)
    if family == "polygon":
        return _random_polygon(seed, **params)
    if family == "box":
        if "eps" in params:
            eps = float(params["eps"])
            return box((1.0 / eps, eps))
        return box(params.get("halfwidths", (1.0, 1.0)))
    if family == "ellipse":
        return ellipse_excess_body(params.get("eps", 0.05), params.get("axes", (1.0, 2.0)), grid)
    raise ConfigError(f"unknown body family {family!r}")


def _random_fourier(seed, grid, modes=6, rho=0.3, margin=0.1, max_tries=200):
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        coeffs = [(0.0, 0.0)]  # k = 1 excluded: no translation mode
        for k in range(2, modes + 1):
            bound = rho / k**2
            coeffs.append((rng.uniform(-bound, bound), rng.uniform(-bound, bound)))
        h = np.full(grid.n, 1.0)
        for k, (ak, bk) in enumerate(coeffs, start=1):
            h += ak * np.cos(k * grid.theta) + bk * np.sin(k * grid.theta)
        if (h + periodic_derivative(h, 2)).min() > margin:
            return curve_from_fourier(grid, 1.0, coeffs)
    raise RejectionExhausted(f"no convex fourier body after {max_tries} draws (seed {seed})")


def _random_polygon(seed, n_points=12, center_spread=0.3, max_tries=50):
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        pts = rng.standard_normal((n_points, 2))
        pts += rng.uniform(-center_spread, center_spread, size=2)
        try:
            hull = convex_hull_2d(pts)
        except Exception:
            continue
        if len(hull) >= 5:
            return hull
    raise RejectionExhausted(f"no usable polygon hull after {max_tries} draws (seed {seed})")


@dataclass(eq=False)
class SuiteReport:
    """Outcome of one verification suite run."""

    name: str
    norm_spec: dict
    p: float
    seed: int
    n_cases: int
    tolerance: float
    rows: list = field(default_factory=list)
    violations: list = field(default_factory=list)

    @property
    def worst_margin(self):
        return min((row["margin"] for row in self.rows), default=math.inf)

    @property
    def worst_case(self):
        if not self.rows:
            return None
        return min(self.rows, key=lambda row: row["margin"])["case"]

    @property
    def passed(self):
        return self.worst_margin >= -self.tolerance and not self.violations

    def summary(self):
        state = "pass" if self.passed else "FAIL"
        return (
            f"suite {self.name}: {state}, {len(self.rows)} cases, "
            f"worst margin {self.worst_margin:.3e} at {self.worst_case!r}"
        )


def suite_cases(name, n_cases, seed, grid_n):
    """Deterministic case descriptors: canonical shapes plus seeded families."""
    smooth_only = name in _SMOOTH_ONLY
    cases = [
        ("wulff_r1", {"kind": "wulff", "r": 1.0, "center": [0.0, 0.0]}),
        ("wulff_r1_off", {"kind": "wulff", "r": 1.0, "center": [0.3, 0.0]}),
        ("ellipse_eps_0.05", {"kind": "ellipse_excess", "eps": 0.05, "axes": [1.0, 2.0]}),
        ("stretched_ellipse", {"kind": "ellipse_semi_axes", "semi_axes": [3.0, 0.4]}),
    ]
    if not smooth_only:
        cases.append(("square", {"kind": "box", "halfwidths": [1.0, 1.0]}))
        cases.append(("thin_box_eps_0.1", {"kind": "box", "halfwidths": [10.0, 0.1]}))
    rng = np.random.default_rng(seed)
    sub = rng.integers(0, 2**62, size=2 * max(n_cases, 0))
    for i in range(n_cases):
        cases.append((f"fourier_{i}", {"kind": "random", "family": "fourier", "seed": int(sub[i])}))
    if not smooth_only and name != "hk":
        for i in range(max(n_cases // 5, 0)):
            cases.append(
                (
                    f"polygon_{i}",
                    {"kind": "random", "family": "polygon", "seed": int(sub[n_cases + i])},
                )
            )
    return cases


def _build_case_body(desc, grid, norm):
    kind = desc["kind"]
    if kind == "wulff":
        return wulff_curve(norm, desc["r"], desc.get("center", (0.0, 0.0)), grid)
    if kind == "ellipse_excess":
        return ellipse_excess_body(desc["eps"], tuple(desc.get("axes", (1.0, 2.0))), grid)
    if kind == "ellipse_semi_axes":
        return ellipse_body(tuple(desc["semi_axes"]), grid)
    if kind == "box":
        return box(desc["halfwidths"])
    if kind == "random":
        return random_body(desc["seed"], desc["family"], grid=grid)
    return shape_from_spec(desc, grid=grid, norm=norm)


def _eval_case(args):
    """Worker entry: evaluate one suite case. Must stay module-level picklable."""
    suite, norm_json, p, grid_n, label, desc, cut_eps = args
    norm = _cached_norm(norm_json)
    grid = angle_grid(grid_n)
    body = _build_case_body(desc, grid, norm)
    row = {"case": label}
    if suite == "main":
        report = evaluate(body, norm, p)
        row["margin"] = report.margin
        row["F_quotient"] = report.quotient
        row["E_F"] = report.excess
        if report.margin <= 1e-5:
            if isinstance(body, SupportCurve2):
                fit = fit_wulff_support(grid, body.h, norm)
            else:
                fit = fit_wulff_support(grid, body.support_samples(grid), norm)
            row["fit_distance"] = fit.distance
            row["fit_center"] = math.hypot(*fit.center)
    elif suite == "iso":
        v = volume(body)
        per = anisotropic_perimeter(body, norm)
        n = body.dim
        bound = n * unit_wulff_volume(norm) ** (1.0 / n) * v ** (1.0 - 1.0 / n)
        row["margin"] = per / bound - 1.0
        row["P_F"] = per
    elif suite == "hk":
        v = volume(body)
        hk = heintze_karcher(body, norm)
        row["margin"] = hk / (2.0 * v) - 1.0
        row["hk"] = hk
    elif suite == "ratio":
        report = evaluate(body, norm, p)
        row["margin"] = 1.0 - report.momentum / (report.perimeter * report.r_max**p)
        row["ratio"] = report.momentum / report.perimeter
    elif suite == "secineq":
        value = second_inequality_value(body, norm, p)
        scale = boundary_momentum(body, norm, p) / volume(body)
        row["margin"] = -value / scale
        row["value"] = value
    elif suite == "excessdescent":
        report = evaluate(body, norm, p)
        row["E_F"] = report.excess
        if report.excess < -1e-6:
            rate = quotient_rate_iamcf(body, norm, p)
            row["rate"] = rate
            row["margin"] = -rate
        else:
            row["margin"] = math.inf  # not in scope for this suite
    elif suite == "cuts":
        reports = cut_experiment(body, norm, p, cut_eps)
        v = volume(body)
        per = anisotropic_perimeter(body, norm)
        m_dv = min(-r.d_volume / v for r in reports)
        m_dp = min(-r.d_perimeter / per for r in reports)
        ratios = [r.excess_ratio for r in reports]
        bound_consts = [abs(r.d_volume) / abs(r.d_perimeter) for r in reports]
        trend_ok = trend_nonpositive(ratios)
        row["margin"] = min(m_dv, m_dp, 0.0 if trend_ok else -abs(ratios[-1]))
        row["dv_dp_bound"] = max(bound_consts)
        row["excess_ratio_final"] = ratios[-1]
    else:
        raise ConfigError(f"unknown suite {suite!r}")
    return row


_NORM_CACHE = {}


def _cached_norm(norm_json):
    norm = _NORM_CACHE.get(norm_json)
    if norm is None:
        norm = norm_from_spec(json.loads(norm_json))
        _NORM_CACHE[norm_json] = norm
    return norm


def parallel_map(fn, items):
    """Map honoring the WULFF_LAB_THREADS cap; order-preserving."""
    workers = int(os.environ.get("WULFF_LAB_THREADS", "1"))
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def run_suite(name, norm, p, n_cases=200, seed=0, grid_n=1024, cut_eps=None):
    """Evaluate the named inequality suite; violations are reported, not raised."""
    if name not in SUITES:
        raise ConfigError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    if name == "cuts":
        cut_eps = list(cut_eps or (0.1 / 2**k for k in range(5)))
        cases = [
            (label, desc)
            for label, desc in suite_cases(name, n_cases, seed, grid_n)
            if desc["kind"] in ("box",) or desc.get("family") == "polygon"
        ]
    else:
        cases = suite_cases(name, n_cases, seed, grid_n)
    norm_json = json.dumps(norm.spec(), sort_keys=True)
    args = [(name, norm_json, p, grid_n, label, desc, cut_eps) for label, desc in cases]
    rows = parallel_map(_eval_case, args)
    report = SuiteReport(
        name=name,
        norm_spec=norm.spec(),
        p=p,
        seed=seed,
        n_cases=len(rows),
        tolerance=_SUITE_TOLERANCE[name],
        rows=rows,
    )
    for row in rows:
        if row["margin"] < -report.tolerance:
            report.violations.append(f"{row['case']}: margin {row['margin']:.3e}")
        if name == "main" and row.get("fit_distance", 0.0) > 1e-2:
            report.violations.append(f"{row['case']}: near-equality but fit distance {row['fit_distance']:.3e}")
        if name == "main" and row.get("fit_center", 0.0) > 1e-2:
            report.violations.append(f"{row['case']}: near-equality but fit center {row['fit_center']:.3e}")
    return report


def zero_excess_dichotomy(body, norm, p, grid=None, cut_eps=(0.01, 0.02, 0.05, 0.1)):
    """Classify a near-zero-excess body: Wulff-close or cut-improvable.

    Returns ("wulff", fit_distance) when the body fits an origin-centered
    Wulff to 1e-2, otherwise ("improvable", best d_quotient) when some cut
    decreases the quotient, otherwise ("violation", 0.0).
    """
    grid = grid or angle_grid()
    if isinstance(body, SupportCurve2):
        samples, polygon = body.h, body.to_polygon()
    else:
        samples, polygon = body.support_samples(grid), body
    fit = fit_wulff_support(grid, samples, norm)
    scale = max(abs(fit.radius), 1e-12)
    if fit.distance <= 1e-2 * scale and math.hypot(*fit.center) <= 1e-2 * scale:
        return ("wulff", fit.distance)
    r_scale, _ = max_polar_radius(polygon, norm)
    reports = cut_experiment(polygon, norm, p, [e * r_scale for e in cut_eps])
    best = min(r.d_quotient for r in reports)
    if best < 0:
        return ("improvable", best)
    return ("violation", 0.0)


def thin_box_momentum_exact(a, b, eps):
    """Exact p = 2 momentum of the thin box (|x| <= 1/eps, |y| <= eps) under
    the elliptic axes-(a, b) norm, by edgewise closed-form integration:
    top/bottom edges contribute 4a^2/(3 b eps^3) + 4 b eps, left/right
    4a/eps + 4 b^2 eps^3/(3a).
    """
    return (
        4.0 * a**2 / (3.0 * b * eps**3)
        + 4.0 * a / eps
        + 4.0 * b * eps
        + 4.0 * b**2 * eps**3 / (3.0 * a)
    )


def paper_example_rows(axes=(1.0, 2.0), eps_list=(0.2, 0.1, 0.05, 0.025, 0.0125), grid_n=2048):
    """The two worked-example tables: thin boxes R_eps and ellipses E_eps.

    Returns (box_rows, ellipse_rows). Box rows compare the quadrature
    momentum against the exact edgewise formula and its eps^-3 leading
    term; ellipse rows tabulate the excess against its eps asymptote.
    """
    a, b = axes
    norm = elliptic_norm(axes=(a, b))
    grid = angle_grid(grid_n)
    box_rows = []
    for eps in eps_list:
        body = box((1.0 / eps, eps))
        mom = boundary_momentum(body, norm, 2.0)
        r, _ = max_polar_radius(body, norm)
        box_rows.append(
            {
                "eps": eps,
                "M_F_exact": thin_box_momentum_exact(a, b, eps),
                "M_F_quadrature": mom,
                "leading_term": 4.0 * a**2 / (3.0 * b * eps**3),
                "r_max": r,
                "a_over_eps": a / eps,
                "E_F": r - mom / (2.0 * volume(body)),
            }
        )
    ellipse_rows = []
    for eps in eps_list:
        body = ellipse_excess_body(eps, axes, grid)
        report = evaluate(body, norm, 2.0)
        ellipse_rows.append({"eps": eps, "E_F": report.excess, "E_F_over_eps": report.excess / eps})
    return box_rows, ellipse_rows


# -- direct minimization ----------------------------------------------------


@dataclass(frozen=True)
class SearchConfig:
    modes: int = 16
    grid_n: int = 256
    gtol: float = 1e-8
    max_iter: int = 1000
    armijo: float = 1e-4
    max_backtracks: int = 60
    step_clip: tuple = (1e-4, 1e4)


@dataclass(eq=False)
class SearchResult:
    """Trajectory and terminal state of a quotient minimization run."""

    trajectory: list
    final_curve: SupportCurve2
    final_quotient: float
    iterations: int
    converged: bool
    fit: object

    def shape_spec(self, tol=1e-15):
        """Reloadable support_fourier record of the final shape."""
        from ._fourier import series_coefficients

        a0, a, b = series_coefficients(self.final_curve.h)
        scale = max(abs(a0), 1.0)
        coeffs = []
        for k in range(len(a)):
            if max(abs(a[k]), abs(b[k])) > tol * scale or k == 0:
                coeffs.append([float(a[k]), float(b[k])])
            else:
                coeffs.append([0.0, 0.0])
        while len(coeffs) > 1 and coeffs[-1] == [0.0, 0.0]:
            coeffs.pop()
        return {"kind": "support_fourier", "a0": float(a0), "coeffs": coeffs}


class _LogCurvatureShape:
    """Shape coordinates: psi modes {0, 2..K} with w = exp(psi), plus center.

    h = L w + <center, u> where L is the Fourier multiplier 1/(1 - k^2)
    with the k = 1 modes removed (they are pure translations of the
    curvature function and never close up).
    """

    def __init__(self, grid, modes):
        self.grid = grid
        self.modes = modes
        k = np.fft.rfftfreq(grid.n, d=1.0 / grid.n)
        mult = np.zeros_like(k)
        mask = k != 1
        mult[mask] = 1.0 / (1.0 - k[mask] ** 2)
        self._mult = mult
        self._klist = [0] + list(range(2, modes + 1))

    def solve_support(self, w):
        return np.fft.irfft(np.fft.rfft(w) * self._mult, self.grid.n)

    def unpack(self, z):
        psi = np.full(self.grid.n, z[0])
        for i, k in enumerate(self._klist[1:]):
            psi += z[1 + 2 * i] * np.cos(k * self.grid.theta)
            psi += z[2 + 2 * i] * np.sin(k * self.grid.theta)
        w = np.exp(psi)
        h = self.solve_support(w) + self.grid.unit @ z[-2:]
        return h, w

    def pack(self, curve):
        """Project a support curve into the coordinate space (truncating)."""
        w = curve.support_weight
        spec = np.fft.rfft(np.log(w)) / self.grid.n
        z = np.zeros(2 * len(self._klist) - 1 + 2)
        z[0] = spec[0].real
        for i, k in enumerate(self._klist[1:]):
            z[1 + 2 * i] = 2.0 * spec[k].real
            z[2 + 2 * i] = -2.0 * spec[k].imag
        hspec = np.fft.rfft(curve.h) / self.grid.n
        z[-2] = 2.0 * hspec[1].real
        z[-1] = -2.0 * hspec[1].imag
        return z

    def gradient(self, z, rho, w):
        """Chain rule: d(int rho dh) through h = L exp(psi) + <x0, u>."""
        dth = self.grid.delta
        gpsi = w * self.solve_support(rho) * dth  # L is self-adjoint
        g = np.zeros(2 * len(self._klist) - 1 + 2)
        g[0] = gpsi.sum()
        for i, k in enumerate(self._klist[1:]):
            g[1 + 2 * i] = float(np.sum(gpsi * np.cos(k * self.grid.theta)))
            g[2 + 2 * i] = float(np.sum(gpsi * np.sin(k * self.grid.theta)))
        g[-2] = float(np.sum(rho * self.grid.unit[:, 0])) * dth
        g[-1] = float(np.sum(rho * self.grid.unit[:, 1])) * dth
        return g


def minimize(norm, p, init, config=SearchConfig()):
    """Gradient descent on the quotient from the given initial curve.

    Monotone in the quotient; each accepted step is followed by a volume
    renormalization to kappa (a pure gauge fix under scale invariance).
    Stops at gradient norm <= gtol or after max_iter iterations.
    """
    grid = angle_grid(config.grid_n)
    if init.grid.n != grid.n:
        init = SupportCurve2(grid, init.eval_h(grid.theta))
    coords = _LogCurvatureShape(grid, config.modes)
    z = coords.pack(init)
    kappa = unit_wulff_volume(norm)

    def rebuild(zv):
        h, w = coords.unpack(zv)
        return SupportCurve2(grid, h), w

    curve, w = rebuild(z)
    fq = quotient(curve, norm, p)
    traj = [fq]
    g = coords.gradient(z, first_variation_density(curve, norm, p), w)
    step = 0.1 / max(float(np.linalg.norm(g)), 1e-12)
    accepted = 0
    n_iter = 0
    stalled = False
    for n_iter in range(config.max_iter):
        gnorm = float(np.linalg.norm(g))
        if gnorm <= config.gtol:
            break
        ok, st = False, step
        for _ in range(config.max_backtracks):
            z_try = z - st * g
            try:
                curve_try, w_try = rebuild(z_try)
            except Exception:
                st *= 0.5
                continue
            fq_try = quotient(curve_try, norm, p)
            if fq_try <= fq - config.armijo * st * gnorm**2:
                ok = True
                break
            st *= 0.5
        if not ok:
            stalled = True
            break
        z = z_try
        # volume gauge fix: h -> lam h is psi0 += log lam, center *= lam
        lam = math.sqrt(kappa / volume(curve_try))
        z[0] += math.log(lam)
        z[-2:] *= lam
        curve, w = rebuild(z)
        fq = quotient(curve, norm, p)
        traj.append(fq)
        accepted += 1
        g_new = coords.gradient(z, first_variation_density(curve, norm, p), w)
        dg = g_new - g
        dz_dot_dg = -st * float(np.dot(g, dg))
        if dz_dot_dg > 1e-18:
            step = st * st * gnorm**2 / dz_dot_dg  # Barzilai-Borwein
        else:
            step = st * 2.0
        step = float(np.clip(step, *config.step_clip))
        g = g_new
    gnorm = float(np.linalg.norm(g))
    if stalled and accepted == 0 and gnorm > 1e3 * config.gtol:
        raise LineSearchFailed(f"no acceptable step from the initial shape (|g| = {gnorm:.3e})")
    return SearchResult(
        trajectory=traj,
        final_curve=curve,
        final_quotient=fq,
        iterations=accepted,
        converged=gnorm <= config.gtol,
        fit=fit_wulff_support(grid, curve.h, norm),
    )
