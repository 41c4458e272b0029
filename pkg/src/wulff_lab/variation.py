"""First variations of V, P, M and the quotient, plus halfspace-cut experiments.

Smooth-track operations act on support curves perturbed along the
Cahn-Hoffman field: moving the boundary with normal speed phi changes the
support function by phi * F(u) (Euler identity), so the perturbed curve is
h_t = h + t * phi * f. The predicted rates are the classical shape
derivatives; central finite differences of the exact functionals under
``perturb`` validate them to second order.

The nonsmooth track cuts convex polygons with supporting halfspaces at
depth eps below the polar-radius maximizer and tabulates the signed
functional differences together with the first-order bound
p r^(p-1) dV + r^p dP.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .bodies import Polygon2, SupportCurve2, halfspace_cut
from .errors import ConfigError, NotSmooth, OriginOutside
from .functionals import (
    anisotropic_curvature,
    anisotropic_perimeter,
    boundary_momentum,
    cahn_hoffman_field,
    evaluate,
    max_polar_radius,
    quotient,
    volume,
)
from .quadrature import segment_integral


@dataclass(eq=False)
class PerturbationField:
    """Normal speed phi sampled at the grid nodes, with a description tag."""

    values: np.ndarray
    label: str = ""

    @staticmethod
    def constant(grid, value=1.0, label="constant"):
        return PerturbationField(np.full(grid.n, float(value)), label)

    @staticmethod
    def from_function(grid, fn, label=""):
        return PerturbationField(np.asarray(fn(grid.theta), dtype=float), label)

    @staticmethod
    def inverse_curvature(curve, norm):
        """The IAMCF speed phi = 1/H_F (positive on convex curves)."""
        return PerturbationField(1.0 / anisotropic_curvature(curve, norm), "1/H_F")


def perturb(curve, norm, phi, t):
    """Move the boundary by t * phi along the Cahn-Hoffman field.

    Exact at the support-function level: h_t = h + t phi F(u). Raises
    NotConvex when |t| is large enough to destroy convexity.
    """
    f, _, _ = norm.support_profile(curve.grid)
    return SupportCurve2(curve.grid, curve.h + t * _phi_values(phi, curve) * f)


def volume_rate(curve, norm, phi):
    """dV/dt = int phi F(nu) dS."""
    f, _, _ = norm.support_profile(curve.grid)
    return curve.grid.integrate(_phi_values(phi, curve) * f * curve.support_weight)


def perimeter_rate(curve, norm, phi):
    """dP/dt = int H_F phi F(nu) dS = int phi f (f + f'') dtheta."""
    f, _, f2 = norm.support_profile(curve.grid)
    return curve.grid.integrate(_phi_values(phi, curve) * f * (f + f2))


def momentum_rate(curve, norm, p, phi):
    """dM/dt for the normal speed phi; requires the origin strictly inside."""
    f, _, f2 = norm.support_profile(curve.grid)
    phi_v = _phi_values(phi, curve)
    polar, inner = _polar_pairing(curve, norm)
    w = curve.support_weight
    transport = p * curve.grid.integrate(polar ** (p - 1.0) * inner * phi_v * f * w)
    stretch = curve.grid.integrate(polar**p * f * (f + f2) * phi_v)
    return transport + stretch


def quotient_rate_iamcf(curve, norm, p):
    """d/dt of M/(P V^(p/n)) along the inverse anisotropic mean curvature flow.

    Equals (p / (P V^(p/n))) int [F*(x)^(p-1) <grad F*, nu_F> - M/(nV)]
    F(nu)/H_F dS; strictly negative whenever the excess is negative.
    """
    f, _, f2 = norm.support_profile(curve.grid)
    polar, inner = _polar_pairing(curve, norm)
    w = curve.support_weight
    v = volume(curve)
    per = anisotropic_perimeter(curve, norm)
    mom = boundary_momentum(curve, norm, p)
    integrand = (polar ** (p - 1.0) * inner - mom / (2.0 * v)) * f * w**2 / (f + f2)
    return p / (per * math.exp(p / 2.0 * math.log(v))) * curve.grid.integrate(integrand)


def first_variation_density(curve, norm, p):
    """Density rho with d(quotient) = int rho(theta) dh(theta) dtheta.

    Used by the minimizer to push the quotient gradient into coefficient
    space. Derived from the quotient rule with dV = int (h+h'') dh,
    dP = int (f+f'') dh and the momentum rate under dh = phi f.
    """
    f, _, f2 = norm.support_profile(curve.grid)
    polar, inner = _polar_pairing(curve, norm)
    w = curve.support_weight
    v = volume(curve)
    per = anisotropic_perimeter(curve, norm)
    mom = boundary_momentum(curve, norm, p)
    density = p * (polar ** (p - 1.0) * inner - mom / (2.0 * v)) * w
    density += (polar**p - mom / per) * (f + f2)
    return density / (per * math.exp(p / 2.0 * math.log(v)))


def second_inequality_value(body, norm, p):
    """int [F*(x)^(p-1) <grad F*(x), nu_F> - M/(nV)] F(nu) dS (must be <= 0)."""
    if isinstance(body, SupportCurve2):
        f, _, _ = norm.support_profile(body.grid)
        polar, inner = _polar_pairing(body, norm)
        mom = boundary_momentum(body, norm, p)
        v = volume(body)
        return body.grid.integrate(
            (polar ** (p - 1.0) * inner - mom / (2.0 * v)) * f * body.support_weight
        )
    if isinstance(body, Polygon2):
        mom = boundary_momentum(body, norm, p)
        v = volume(body)
        total = 0.0
        verts = body.vertices
        for i in range(len(verts)):
            nu = body.edge_normals[i]
            nu_f = norm.gradient(nu)

            def integrand(pts, nu_f=nu_f):
                return _pairing_at(norm, pts, p) @ nu_f

            total += float(norm.value(nu)) * segment_integral(
                integrand, verts[i], verts[(i + 1) % len(verts)]
            )
        return total - mom / (2.0 * v) * anisotropic_perimeter(body, norm)
    raise NotSmooth("second_inequality_value supports curves and polygons")


def zero_identity_residual(body, norm, p):
    """int [F*(x)^p - M/P] F(nu) dS; identically zero by construction."""
    mom = boundary_momentum(body, norm, p)
    per = anisotropic_perimeter(body, norm)
    return mom - (mom / per) * per


@dataclass(eq=False)
class CutReport:
    """Signed functional changes for one halfspace cut (cut minus original)."""

    eps: float
    d_volume: float
    d_perimeter: float
    d_momentum: float
    r_max: float
    bound_rhs: float
    d_quotient: float

    def to_row(self):
        return {
            "eps": self.eps,
            "dV": self.d_volume,
            "dP_F": self.d_perimeter,
            "dM_F": self.d_momentum,
            "r_max": self.r_max,
            "bound_rhs": self.bound_rhs,
            "dF_quotient": self.d_quotient,
            "excess_ratio": self.excess_ratio,
        }

    @property
    def excess_ratio(self):
        """(dM - bound)/(|dV| + |dP|): must trend to a nonpositive limit."""
        denom = abs(self.d_volume) + abs(self.d_perimeter)
        if denom == 0.0:
            return 0.0
        return (self.d_momentum - self.bound_rhs) / denom


def cut_direction(polygon, norm):
    """Euclidean cut direction at the polar-radius maximizer.

    The Taylor-bound cut removes the cap beyond a supporting line at
    x_max. For a polygon x_max is a vertex; the supporting-line normal
    maximizing <., x_max> over the vertex's normal fan is the radial
    direction clamped into the fan (ties resolve to the fan midpoint).
    """
    r, x_max = max_polar_radius(polygon, norm)
    verts = polygon.vertices
    i = int(np.argmin(np.linalg.norm(verts - x_max, axis=1)))
    nu_prev = polygon.edge_normals[i - 1]
    nu_next = polygon.edge_normals[i]
    a_prev = math.atan2(nu_prev[1], nu_prev[0])
    a_next = math.atan2(nu_next[1], nu_next[0])
    width = (a_next - a_prev) % (2.0 * math.pi)
    radial = math.atan2(x_max[1], x_max[0])
    offset = (radial - a_prev) % (2.0 * math.pi)
    if offset <= width:
        angle = radial
    else:
        to_next = (offset - width) % (2.0 * math.pi)
        to_prev = (2.0 * math.pi - offset) % (2.0 * math.pi)
        if abs(to_next - to_prev) <= 1e-15:
            angle = a_prev + 0.5 * width
        elif to_next < to_prev:
            angle = a_next
        else:
            angle = a_prev
    return np.array([math.cos(angle), math.sin(angle)]), verts[i]


def cut_experiment(polygon, norm, p, eps_list, rel_tol=1e-10):
    """CutReports for halfspace cuts at each depth in eps_list."""
    if not isinstance(polygon, Polygon2):
        raise ConfigError("cut_experiment operates on convex polygons")
    base = evaluate(polygon, norm, p, rel_tol)
    direction, x_vertex = cut_direction(polygon, norm)
    support = polygon.support(direction)
    reports = []
    for eps in eps_list:
        if eps <= 0:
            raise ConfigError(f"cut depth must be positive, got {eps}")
        cut = halfspace_cut(polygon, direction, support - eps)
        dv = volume(cut) - base.volume
        dp = anisotropic_perimeter(cut, norm) - base.perimeter
        dm = boundary_momentum(cut, norm, p, rel_tol) - base.momentum
        dq = quotient(cut, norm, p) - base.quotient
        reports.append(
            CutReport(
                eps=float(eps),
                d_volume=dv,
                d_perimeter=dp,
                d_momentum=dm,
                r_max=base.r_max,
                bound_rhs=p * base.r_max ** (p - 1.0) * dv + base.r_max**p * dp,
                d_quotient=dq,
            )
        )
    return reports


def validate_rates(curve, norm, p, phi, t_values=(1e-2, 5e-3, 2.5e-3)):
    """Central-difference validation rows for dV, dP, dM under ``perturb``.

    Returns one row per (quantity, t) with the finite difference, the
    predicted rate, the relative error, and per-quantity observed orders.
    """
    predicted = {
        "dV": volume_rate(curve, norm, phi),
        "dP_F": perimeter_rate(curve, norm, phi),
        "dM_F": momentum_rate(curve, norm, p, phi),
    }
    exact = {
        "dV": lambda c: volume(c),
        "dP_F": lambda c: anisotropic_perimeter(c, norm),
        "dM_F": lambda c: boundary_momentum(c, norm, p),
    }
    rows = []
    orders = {}
    for name, pred in predicted.items():
        errs = []
        for t in t_values:
            plus = exact[name](perturb(curve, norm, phi, t))
            minus = exact[name](perturb(curve, norm, phi, -t))
            fd = (plus - minus) / (2.0 * t)
            errs.append(abs(fd - pred))
            rows.append(
                {
                    "quantity": name,
                    "t": t,
                    "fd_value": fd,
                    "predicted": pred,
                    "rel_error": abs(fd - pred) / max(abs(pred), 1e-300),
                }
            )
        orders[name] = observed_order(errs, floor=1e-11 * max(abs(pred), 1.0))
    for row in rows:
        row["order_estimate"] = orders[row["quantity"]]
    return rows


def observed_order(errors, floor=1e-11):
    """Minimum dyadic convergence order of an error sequence under t-halving.

    Sequences already at the noise floor count as converged (order inf).
    """
    errors = [max(e, 0.0) for e in errors]
    if max(errors) <= floor:
        return math.inf
    orders = []
    for e0, e1 in zip(errors, errors[1:]):
        if e0 <= floor and e1 <= floor:
            continue
        orders.append(math.log2(max(e0, 1e-300) / max(e1, 1e-300)))
    return min(orders) if orders else math.inf


def trend_nonpositive(values, shrink=0.8, atol=1e-9):
    """True when a sequence decreases monotonically toward a limit <= 0.

    Used for the o(.) claims: assert each term does not increase (within
    atol) and the final term is negative, below atol, or still shrinking
    geometrically.
    """
    for a, b in zip(values, values[1:]):
        if b > a + atol:
            return False
    last = values[-1]
    if last <= atol:
        return True
    return len(values) >= 2 and last <= shrink * values[-2] + atol


# -- internals -------------------------------------------------------------


def _phi_values(phi, curve):
    values = phi.values if isinstance(phi, PerturbationField) else np.asarray(phi, float)
    if values.shape != (curve.grid.n,):
        raise ConfigError("perturbation field does not match the curve grid")
    return values


def _polar_pairing(curve, norm):
    """(F*(x), <grad F*(x), nu_F>) at the nodes; origin must be interior."""
    pts = curve.points()
    polar = norm.polar(pts)
    if polar.min() <= 1e-12 * max(polar.max(), 1.0):
        raise OriginOutside("origin is not strictly inside the body")
    inner = np.einsum("ij,ij->i", norm.polar_gradient(pts), cahn_hoffman_field(curve, norm))
    return polar, inner


def _pairing_at(norm, pts, p):
    """F*(x)^(p-1) grad F*(x), continuously extended by 0 at the origin."""
    polar = norm.polar(pts)
    out = np.zeros_like(pts)
    good = polar > 1e-300
    if np.any(good):
        out[good] = polar[good, None] ** (p - 1.0) * norm.polar_gradient(pts[good])
    return out
