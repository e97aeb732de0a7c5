"""Complex gamma, reciprocal gamma and digamma (Lanczos, g = 7, 9 terms)."""

from __future__ import annotations

import math

import numpy as np

_G = 7.0
_P = np.array([
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
])

EULER_GAMMA = 0.57721566490153286061


class GammaPole(ValueError):
    pass


def _is_pole(z):
    return (z.imag == 0) & (z.real <= 0) & (z.real == np.round(z.real))


def _lanczos_parts(z):
    """For Re z >= 0.5 return (A, A', t) with Gamma(z) = sqrt(2 pi) t^(z-1/2) e^-t A, t = z + g - 1/2."""
    zm = z - 1.0
    A = np.full_like(z, _P[0])
    dA = np.zeros_like(z)
    for k in range(1, len(_P)):
        d = zm + k
        A = A + _P[k] / d
        dA = dA - _P[k] / (d * d)
    t = zm + _G + 0.5
    return A, dA, t


def _gamma_right(z):
    A, _, t = _lanczos_parts(z)
    return math.sqrt(2 * math.pi) * np.exp((z - 0.5) * np.log(t) - t) * A


def _prep(z):
    arr = np.asarray(z)
    return arr, np.atleast_1d(arr).astype(complex)


def _finish(arr, out, real_ok=True):
    if not np.iscomplexobj(arr) and real_ok:
        out = out.real
    if np.ndim(arr) == 0:
        return out[0].item()
    return out.reshape(np.shape(arr))


def complex_gamma(z):
    arr, zc = _prep(z)
    if np.any(_is_pole(zc)):
        raise GammaPole(f"Gamma has a pole at {zc[_is_pole(zc)][0].real:g}")
    out = np.empty_like(zc)
    right = zc.real >= 0.5
    if np.any(right):
        out[right] = _gamma_right(zc[right])
    left = ~right
    if np.any(left):
        zl = zc[left]
        out[left] = np.pi / (np.sin(np.pi * zl) * _gamma_right(1.0 - zl))
    return _finish(arr, out)


def rgamma(z):
    """1/Gamma(z), entire; exactly zero at the poles of Gamma."""
    arr, zc = _prep(z)
    out = np.empty_like(zc)
    pole = _is_pole(zc)
    out[pole] = 0.0
    right = (zc.real >= 0.5) & ~pole
    if np.any(right):
        out[right] = 1.0 / _gamma_right(zc[right])
    left = ~right & ~pole
    if np.any(left):
        zl = zc[left]
        out[left] = np.sin(np.pi * zl) * _gamma_right(1.0 - zl) / np.pi
    return _finish(arr, out)


def _digamma_right(z):
    A, dA, t = _lanczos_parts(z)
    # d/dz log Gamma(z) = log t + (z - 1/2)/t - 1 + A'/A
    return np.log(t) + (z - 0.5) / t - 1.0 + dA / A


def digamma(z):
    arr, zc = _prep(z)
    if np.any(_is_pole(zc)):
        raise GammaPole("digamma has a pole at a nonpositive integer")
    out = np.empty_like(zc)
    right = zc.real >= 0.5
    if np.any(right):
        # shift up a few steps where the Lanczos derivative loses digits
        zr = zc[right]
        acc = np.zeros_like(zr)
        small = np.abs(zr) < 6
        shift = np.where(small, 6, 0)
        for k in range(6):
            m = shift > k
            acc[m] -= 1.0 / (zr[m] + k)
        out[right] = acc + _digamma_right(zr + shift)
    left = ~right
    if np.any(left):
        zl = zc[left]
        out[left] = digamma(1.0 - zl) - np.pi / np.tan(np.pi * zl)
    return _finish(arr, out)


def pochhammer(a, k: int):
    out = 1.0 + 0j
    for j in range(k):
        out *= a + j
    return out
