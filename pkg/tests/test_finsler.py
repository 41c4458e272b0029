"""Norm evaluation, polars, gradients, and the duality identities."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import wulff_lab as wl

FAST = settings(max_examples=40, deadline=None, derandomize=True)

nonzero_vec = st.tuples(
    st.floats(-50, 50, allow_nan=False), st.floats(-50, 50, allow_nan=False)
).filter(lambda v: math.hypot(*v) > 1e-3)


def test_euclidean_value():
    assert wl.euclidean_norm().value([3.0, 4.0]) == pytest.approx(5.0, abs=0)


def test_elliptic_value_and_polar(elliptic12):
    assert elliptic12.value([0.0, 2.0]) == pytest.approx(1.0, abs=1e-15)
    assert elliptic12.polar([0.0, 1.0]) == pytest.approx(2.0, abs=1e-15)


def test_lp_value_and_polar(lp3):
    assert lp3.value([1.0, 1.0]) == pytest.approx(2.0 ** (1.0 / 3.0), rel=1e-15)
    # dual exponent 3/2: (1 + 1)^(2/3)
    assert lp3.polar([1.0, 1.0]) == pytest.approx(2.0 ** (2.0 / 3.0), rel=1e-15)


def test_lp_polar_against_sup_oracle(lp3):
    got = wl.polar_by_support(lp3.value, np.array([1.0, 1.0]))
    assert got == pytest.approx(2.0 ** (2.0 / 3.0), rel=1e-9)
    got = wl.polar_by_support(lp3.value, np.array([2.0, -1.0]))
    assert got == pytest.approx(lp3.polar([2.0, -1.0]), rel=1e-9)


def test_gradients_closed_forms(euclid, elliptic12):
    np.testing.assert_allclose(euclid.gradient([0.0, 2.0]), [0.0, 1.0], atol=1e-15)
    np.testing.assert_allclose(elliptic12.gradient([1.0, 0.0]), [1.0, 0.0], atol=1e-15)


def test_gradient_zero_vector_raises(euclid):
    with pytest.raises(wl.ZeroVector):
        euclid.gradient([0.0, 0.0])


def test_endpoint_exponents_rejected():
    with pytest.raises(wl.ConfigError):
        wl.lp_norm(1.0)
    with pytest.raises(wl.ConfigError):
        wl.lp_norm(math.inf)


def test_elliptic_requires_spd():
    with pytest.raises(wl.ConfigError):
        wl.elliptic_norm(matrix=[[1.0, 2.0], [2.0, 1.0]])  # eigenvalues -1, 3
    with pytest.raises(wl.ConfigError):
        wl.elliptic_norm(matrix=[[1.0, 0.5], [0.0, 1.0]])  # not symmetric


def test_bounds_are_tight_on_sphere(norms):
    angles = np.linspace(0.0, 2.0 * np.pi, 20001)
    u = np.stack([np.cos(angles), np.sin(angles)], axis=-1)
    for name, norm in norms.items():
        vals = norm.value(u)
        assert vals.min() == pytest.approx(norm.lower, rel=1e-6)
        assert vals.max() == pytest.approx(norm.upper, rel=1e-6)


def test_wulff_convexity_constants(euclid, elliptic12):
    assert euclid.wulff_convexity == 1.0
    # Wulff of axes (1, 2) is the ellipse with semi-axes 1 and 1/2:
    # min curvature = (1/2) / 1^2.
    assert elliptic12.wulff_convexity == pytest.approx(0.5, rel=1e-10)


def test_wulff_convexity_degenerates_below_q2():
    # q < 2 gives a dual exponent > 2 whose ball flattens at the axes.
    soft = wl.lp_norm(1.5)
    assert 0.0 <= soft.wulff_convexity < 0.2
    assert wl.lp_norm(3.0).wulff_convexity > 0.3


@FAST
@given(v=nonzero_vec, t=st.floats(-100, 100, allow_nan=False))
def test_homogeneity(norms, v, t):
    for norm in norms.values():
        fv = norm.value(np.array(v))
        ftv = norm.value(t * np.array(v))
        assert abs(ftv - abs(t) * fv) <= 1e-12 * (1.0 + abs(t) * fv)


@FAST
@given(v=nonzero_vec, w=nonzero_vec)
def test_anisotropic_cauchy_schwarz(norms, v, w):
    v, w = np.array(v), np.array(w)
    for norm in norms.values():
        lhs = abs(float(v @ w))
        assert lhs <= norm.value(v) * norm.polar(w) * (1.0 + 1e-12)


@FAST
@given(v=nonzero_vec)
def test_bipolarity_via_sup_oracle(norms, v):
    v = np.array(v)
    for norm in norms.values():
        # (F*)* computed generically must recover F.
        bipolar = wl.polar_by_support(norm.polar, v)
        assert bipolar == pytest.approx(norm.value(v), rel=1e-6)


@FAST
@given(v=nonzero_vec)
def test_duality_identities(norms, v):
    for name, norm in norms.items():
        res = wl.duality_residuals(norm, np.array(v))
        tol = 1e-9 if name == "lp3" else 1e-12
        scale = max(1.0, float(np.linalg.norm(v)))
        for value in res.values():
            assert value <= tol * scale


def test_duality_examples(euclid, elliptic12, lp3):
    for res in wl.duality_residuals(euclid, np.array([0.7, -1.3])).values():
        assert res <= 1e-14
    for res in wl.duality_residuals(elliptic12, np.array([1.0, 1.0])).values():
        assert res <= 1e-12
    for res in wl.duality_residuals(lp3, np.array([2.0, -1.0])).values():
        assert res <= 1e-9


def test_gradients_match_finite_differences(norms, rng):
    # 4th-order central differences, step tuned for ~1e-10 truncation.
    for norm in norms.values():
        for _ in range(25):
            v = rng.uniform(-2.0, 2.0, size=2)
            if np.linalg.norm(v) < 0.3 or min(abs(v)) < 0.05:
                continue
            for fn, grad in ((norm.value, norm.gradient), (norm.polar, norm.polar_gradient)):
                g = grad(v)
                step = 1e-3
                fd = np.empty(2)
                for i in range(2):
                    e = np.zeros(2)
                    e[i] = step
                    fd[i] = (
                        -fn(v + 2 * e) + 8 * fn(v + e) - 8 * fn(v - e) + fn(v - 2 * e)
                    ) / (12 * step)
                np.testing.assert_allclose(g, fd, rtol=1e-7, atol=1e-10)


def test_gradient_zero_homogeneity(norms, rng):
    for norm in norms.values():
        v = rng.uniform(0.2, 2.0, size=2)
        np.testing.assert_allclose(norm.gradient(v), norm.gradient(2.0 * v), atol=1e-14)


def test_euler_identity(norms, rng):
    for norm in norms.values():
        for _ in range(10):
            v = rng.uniform(-3.0, 3.0, size=2)
            if np.linalg.norm(v) < 0.1:
                continue
            assert float(norm.gradient(v) @ v) == pytest.approx(norm.value(v), rel=1e-12)


def test_vectorized_evaluation(elliptic12, rng):
    pts = rng.uniform(-2, 2, size=(64, 2))
    vals = elliptic12.value(pts)
    for i in range(64):
        assert vals[i] == pytest.approx(elliptic12.value(pts[i]), rel=1e-15)


def test_norm_spec_roundtrip(norms):
    for norm in norms.values():
        again = wl.norm_from_spec(norm.spec())
        v = np.array([0.3, -1.7])
        assert again.value(v) == pytest.approx(norm.value(v), rel=1e-15)
        assert again.polar(v) == pytest.approx(norm.polar(v), rel=1e-15)
