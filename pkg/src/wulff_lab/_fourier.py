"""Spectral helpers for 2*pi-periodic samples on uniform grids.

All boundary geometry in this package lives on uniform angle grids, where
trigonometric differentiation and interpolation are exact to roundoff for
band-limited data and spectrally accurate for smooth data.
"""

import numpy as np


def periodic_derivative(values, order):
    """Differentiate 2*pi-periodic samples spectrally.

    For odd orders the Nyquist mode is zeroed (it has no consistent
    odd-derivative representation on an even grid).
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[-1]
    k = np.fft.rfftfreq(n, d=1.0 / n)
    spec = np.fft.rfft(values)
    if order % 2 == 1:
        mult = (1j * k) ** order
        if n % 2 == 0:
            mult = mult.copy()
            mult[-1] = 0.0
    else:
        mult = (-(k**2)) ** (order // 2)
    return np.fft.irfft(spec * mult, n)


def series_coefficients(values):
    """Return (a0, a[k], b[k]) of the trigonometric interpolant, k = 1..n//2."""
    values = np.asarray(values, dtype=float)
    n = values.size
    spec = np.fft.rfft(values) / n
    a0 = spec[0].real
    a = 2.0 * spec[1:].real
    b = -2.0 * spec[1:].imag
    if n % 2 == 0:
        a[-1] *= 0.5  # Nyquist mode appears once in the rfft
        b[-1] = 0.0
    return a0, a, b


def evaluate_series(a0, a, b, theta, derivative=0):
    """Evaluate the trigonometric series (or a derivative) at arbitrary angles."""
    theta = np.asarray(theta, dtype=float)
    k = np.arange(1, a.size + 1)
    kt = np.multiply.outer(theta, k)
    ck, sk = np.cos(kt), np.sin(kt)
    if derivative == 0:
        return a0 + ck @ a + sk @ b
    if derivative == 1:
        return ck @ (k * b) - sk @ (k * a)
    if derivative == 2:
        return -(ck @ (k**2 * a) + sk @ (k**2 * b))
    raise ValueError(f"unsupported derivative order {derivative}")


def lowpass(values, cutoff):
    """Zero all Fourier modes with wavenumber above ``cutoff``."""
    values = np.asarray(values, dtype=float)
    n = values.shape[-1]
    k = np.fft.rfftfreq(n, d=1.0 / n)
    spec = np.fft.rfft(values)
    spec[..., k > cutoff] = 0.0
    return np.fft.irfft(spec, n)
