"""Pure-numpy kernel backend.

Vectorized reference implementations of the per-frequency hot paths. The
numba backend must produce identical results; tests compare the two
elementwise.
"""

from __future__ import annotations

import numpy as np

from ._common import COTH_SERIES_CUTOFF, COTH_UNITY_CUTOFF, SINGULAR_RTOL

BACKEND = "numpy"


def coth_stable(x):
    """coth(x) for x > 0, stable at both extremes.

    Below the series cutoff the Laurent expansion 1/x + x/3 - x**3/45 avoids
    cancellation; above the unity cutoff coth is 1 to double precision.
    """
    x = np.asarray(x, dtype=float)
    small = x < COTH_SERIES_CUTOFF
    large = x > COTH_UNITY_CUTOFF
    safe = np.where(small | large, 1.0, x)
    direct = 1.0 / np.tanh(safe)
    xs = np.where(small, x, 1.0)
    series = 1.0 / xs + xs / 3.0 - xs**3 / 45.0
    return np.where(small, series, np.where(large, 1.0, direct))


def effective_energy_grid(omega, temperature, hbar, k_B):
    """Energy per mode k_B*Theta on a frequency grid, one bath temperature."""
    zero_point = 0.5 * hbar * np.abs(omega)
    if temperature == 0.0:
        return zero_point
    return zero_point * coth_stable(zero_point / (k_B * temperature))


def columns_high_gain(xi_p, xi_s, e_p, e_s, e_a, rho, target_cage):
    """Per-source velocity-noise contributions in the large-gain limit.

    Columns: f_p, f_s, f_t, v_se, f_c. The cage-disturbance column is
    identically zero here (perfect drag-free rejection). Inputs are assumed
    prevalidated: |xi_p| > 0 and |xi_s| > 0 everywhere.
    """
    inv_p2 = 1.0 / np.abs(xi_p) ** 2
    mag_s = np.abs(xi_s)
    cols = np.empty((xi_p.shape[0], 5))
    cols[:, 0] = 2.0 * e_p * xi_p.real * inv_p2
    cols[:, 1] = 2.0 * e_s * xi_s.real * inv_p2
    cols[:, 2] = 4.0 * e_a * rho * mag_s * inv_p2
    sigma_vse = 4.0 * e_a / (rho * mag_s)
    if target_cage:
        weight = np.abs((xi_s + xi_p) / xi_p) ** 2
    else:
        weight = np.abs(xi_s / xi_p) ** 2
    cols[:, 3] = weight * sigma_vse
    cols[:, 4] = 0.0
    return cols


def columns_finite_gain(xi_p, xi_c, xi_s, gain, e_p, e_s, e_c, e_a, rho,
                        sigma_fc_ext, target_cage):
    """Per-source contributions at finite servo gain via 2x2 closed-loop solves.

    Returns (columns, first_singular_index); the index is -1 when the
    closed-loop matrix is well conditioned on the whole grid, otherwise the
    columns must be discarded by the caller.
    """
    a = xi_p + xi_s
    b = -xi_s
    c = -xi_s - gain
    d = xi_c + xi_s + gain
    det = a * d - b * c
    norm2 = (np.abs(a) ** 2 + np.abs(b) ** 2 + np.abs(c) ** 2 + np.abs(d) ** 2)
    singular = np.abs(det) <= SINGULAR_RTOL * norm2
    first_singular = int(np.argmax(singular)) if bool(np.any(singular)) else -1

    mag_s = np.abs(xi_s)
    sigma_fp = 2.0 * e_p * xi_p.real
    sigma_fs = 2.0 * e_s * xi_s.real
    sigma_ft = 4.0 * e_a * rho * mag_s
    sigma_vse = 4.0 * e_a / (rho * mag_s)
    sigma_fc = 2.0 * e_c * xi_c.real + sigma_fc_ext

    with np.errstate(divide="ignore", invalid="ignore"):
        # Cramer solutions for the five right-hand sides of the loop equations.
        h_fp = (d / det, -c / det)                    # rhs (1, 0)
        h_fs = ((d + b) / det, (-a - c) / det)        # rhs (1, -1), shared with f_t
        h_fc = (-b / det, a / det)                    # rhs (0, 1)
        h_vse = (b * gain / det, -a * gain / det)     # rhs (0, -gain)

    pick = 1 if target_cage else 0
    cols = np.empty((xi_p.shape[0], 5))
    cols[:, 0] = np.abs(h_fp[pick]) ** 2 * sigma_fp
    cols[:, 1] = np.abs(h_fs[pick]) ** 2 * sigma_fs
    cols[:, 2] = np.abs(h_fs[pick]) ** 2 * sigma_ft
    cols[:, 3] = np.abs(h_vse[pick]) ** 2 * sigma_vse
    cols[:, 4] = np.abs(h_fc[pick]) ** 2 * sigma_fc
    return cols, first_singular
