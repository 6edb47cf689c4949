"""Numba kernel backend: per-frequency loops compiled with @njit.

Mirrors _numpy_impl function by function; the two backends are
interchangeable and compared elementwise in the test suite. Compiled
artifacts are cached on disk, so only the first process pays compilation.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from ._common import COTH_SERIES_CUTOFF, COTH_UNITY_CUTOFF, SINGULAR_RTOL

BACKEND = "numba"


@njit(cache=True)
def _coth(x):
    if x < COTH_SERIES_CUTOFF:
        return 1.0 / x + x / 3.0 - x**3 / 45.0
    if x > COTH_UNITY_CUTOFF:
        return 1.0
    return 1.0 / np.tanh(x)


def coth_stable(x):
    # Scalar helper kept API-compatible with the numpy backend.
    return _coth_arr(np.atleast_1d(np.asarray(x, dtype=float)))


@njit(cache=True)
def _coth_arr(x):
    out = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        out[i] = _coth(x[i])
    return out


@njit(cache=True)
def effective_energy_grid(omega, temperature, hbar, k_B):
    n = omega.shape[0]
    out = np.empty(n)
    for i in range(n):
        zero_point = 0.5 * hbar * abs(omega[i])
        if temperature == 0.0:
            out[i] = zero_point
        else:
            out[i] = zero_point * _coth(zero_point / (k_B * temperature))
    return out


@njit(cache=True)
def columns_high_gain(xi_p, xi_s, e_p, e_s, e_a, rho, target_cage):
    n = xi_p.shape[0]
    cols = np.empty((n, 5))
    for i in range(n):
        xp = xi_p[i]
        xs = xi_s[i]
        inv_p2 = 1.0 / abs(xp) ** 2
        mag_s = abs(xs)
        cols[i, 0] = 2.0 * e_p[i] * xp.real * inv_p2
        cols[i, 1] = 2.0 * e_s[i] * xs.real * inv_p2
        cols[i, 2] = 4.0 * e_a * rho * mag_s * inv_p2
        if target_cage:
            weight = abs((xs + xp) / xp) ** 2
        else:
            weight = abs(xs / xp) ** 2
        cols[i, 3] = weight * 4.0 * e_a / (rho * mag_s)
        cols[i, 4] = 0.0
    return cols


@njit(cache=True)
def columns_finite_gain(xi_p, xi_c, xi_s, gain, e_p, e_s, e_c, e_a, rho,
                        sigma_fc_ext, target_cage):
    n = xi_p.shape[0]
    cols = np.empty((n, 5))
    first_singular = -1
    for i in range(n):
        xp = xi_p[i]
        xc = xi_c[i]
        xs = xi_s[i]
        g = gain[i]
        a = xp + xs
        b = -xs
        c = -xs - g
        d = xc + xs + g
        det = a * d - b * c
        norm2 = abs(a) ** 2 + abs(b) ** 2 + abs(c) ** 2 + abs(d) ** 2
        if abs(det) <= SINGULAR_RTOL * norm2:
            first_singular = i
            break
        mag_s = abs(xs)
        sigma_fp = 2.0 * e_p[i] * xp.real
        sigma_fs = 2.0 * e_s[i] * xs.real
        sigma_ft = 4.0 * e_a * rho * mag_s
        sigma_vse = 4.0 * e_a / (rho * mag_s)
        sigma_fc = 2.0 * e_c[i] * xc.real + sigma_fc_ext[i]
        if target_cage:
            h_fp = -c / det
            h_fs = (-a - c) / det
            h_fc = a / det
            h_vse = -a * g / det
        else:
            h_fp = d / det
            h_fs = (d + b) / det
            h_fc = -b / det
            h_vse = b * g / det
        cols[i, 0] = abs(h_fp) ** 2 * sigma_fp
        cols[i, 1] = abs(h_fs) ** 2 * sigma_fs
        cols[i, 2] = abs(h_fs) ** 2 * sigma_ft
        cols[i, 3] = abs(h_vse) ** 2 * sigma_vse
        cols[i, 4] = abs(h_fc) ** 2 * sigma_fc
    return cols, first_singular
