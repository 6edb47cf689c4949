"""Velocity-noise budgets: per-source assembly, closed forms, matching optimum.

The total output spectrum is the uncorrelated-source sum of |H|^2 * sigma
over the five loop sources. In the large-gain limit this reproduces the
closed forms

    |Xi_p|^2 sigma_VpVp = 2 k_B Theta_p Re Xi_p + 2 k_B Theta_s Re Xi_s
                          + 4 k_B Theta_a |Xi_s| (rho + 1/rho)

for the proof mass, and for the cage the same expression with the bracket
rho + |Xi_p + Xi_s|^2 / (rho |Xi_s|^2). The additive rho + c**2/rho bracket
is exactly what the uncorrelated back-action/sensing-error pair produces, and
is unimodal in rho > 0: the proof mass optimum sits at rho = 1 (amplifier
term 8 k_B Theta_a |Xi_s|), the cage optimum at rho = |Xi_p + Xi_s| / |Xi_s|
(amplifier term 8 k_B Theta_a |Xi_p + Xi_s|).

Bath energies are evaluated at the mechanical grid frequency, the amplifier
energy at the fixed transducer frequency.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .closed_loop import (SystemParams, gain_at, high_gain_solution, noise_sources,
                          solve_finite_gain)
from .constants import NATURAL, Units
from .errors import (DegenerateCouplingError, SingularMatrixError, ValidationError)
from .fdt import effective_energy
from .kernels import SOURCE_ORDER

TARGETS = ("proof-mass", "cage")
REGIMES = ("high-gain", "finite-gain")


@dataclass(frozen=True)
class SpectrumTable:
    """Frequency grid with per-source contributions and totals, m^2/s.

    ``columns[target]`` is an (n, 5) array in SOURCE_ORDER; ``totals`` are the
    row sums.
    """

    grid: np.ndarray
    source_labels: tuple[str, ...]
    columns: dict[str, np.ndarray]
    totals: dict[str, np.ndarray]

    @property
    def targets(self) -> tuple[str, ...]:
        return tuple(self.columns)


@dataclass(frozen=True)
class OptimizationResult:
    """Matching ratio optimum for one output and the spectrum value there."""

    rho_star: float
    minimum: float
    target: str
    method: str


def _check_target(target: str):
    if target not in TARGETS:
        raise ValidationError(f"target must be one of {TARGETS}, got {target!r}")


def _check_regime(regime: str):
    if regime not in REGIMES:
        raise ValidationError(f"regime must be one of {REGIMES}, got {regime!r}")


def assemble_spectrum(params: SystemParams, omega, target: str = "proof-mass",
                      regime: str = "high-gain", units: Units = NATURAL):
    """Uncorrelated-source assembly of one output spectrum at one frequency.

    Returns (contributions, total) where contributions maps each source label
    to |H(source, omega)|^2 * sigma_source(omega). This is the transfer-
    function route; the closed forms must agree with it and the test suite
    holds the two to 1e-12.
    """
    _check_target(target)
    _check_regime(regime)
    solve = high_gain_solution if regime == "high-gain" else solve_finite_gain
    contributions = {}
    for source in noise_sources(params, units):
        h_p, h_c = solve(params, omega, source)
        h = h_c if target == "cage" else h_p
        contributions[source.label] = abs(h) ** 2 * source.spectrum(omega)
    return contributions, sum(contributions.values())


def _closed_form_pieces(params: SystemParams, omega, units: Units):
    xp = np.asarray(params.proof_mass.eval(omega), dtype=complex)
    xs = np.asarray(params.coupling.eval(omega), dtype=complex)
    mag_p = np.abs(xp)
    mag_s = np.abs(xs)
    if np.any(mag_p == 0):
        raise SingularMatrixError("proof-mass impedance vanishes on the requested grid")
    if np.any(mag_s == 0):
        raise DegenerateCouplingError()
    e_p = effective_energy(omega, params.proof_mass_temperature, units)
    e_s = effective_energy(omega, params.coupling_temperature, units)
    e_a = params.amplifier.energy_per_mode(units)
    thermal = 2.0 * e_p * xp.real + 2.0 * e_s * xs.real
    return xp, xs, mag_p, mag_s, thermal, e_a


def proof_mass_closed_form(params: SystemParams, omega, units: Units = NATURAL):
    """Closed-form residual proof-mass velocity noise in the large-gain limit."""
    _, _, mag_p, mag_s, thermal, e_a = _closed_form_pieces(params, omega, units)
    rho = params.amplifier.matching_ratio
    bracket = rho + 1.0 / rho
    out = (thermal + 4.0 * e_a * mag_s * bracket) / mag_p**2
    return float(out) if np.ndim(omega) == 0 else out


def cage_closed_form(params: SystemParams, omega, units: Units = NATURAL):
    """Closed-form controlled cage velocity noise in the large-gain limit."""
    xp, xs, mag_p, mag_s, thermal, e_a = _closed_form_pieces(params, omega, units)
    rho = params.amplifier.matching_ratio
    bracket = rho + np.abs(xp + xs) ** 2 / (rho * mag_s**2)
    out = (thermal + 4.0 * e_a * mag_s * bracket) / mag_p**2
    return float(out) if np.ndim(omega) == 0 else out


def zero_temperature_spectrum(params: SystemParams, omega, units: Units = NATURAL):
    """Proof-mass noise with every bath at T = 0 and matched amplifier (rho = 1).

    Reduces to hbar*|omega|*Re(Xi_p + Xi_s) + 4*hbar*omega_t*|Xi_s| over
    |Xi_p|^2; the transducer-frequency term usually dominates, the price the
    motion control pays for operating the sensor far above the mechanical
    band.
    """
    amp = params.amplifier
    if amp.matching_ratio != 1.0:
        raise ValidationError("zero-temperature form assumes matched amplifier (rho = 1), "
                              f"got rho = {amp.matching_ratio!r}")
    if (params.proof_mass_temperature != 0.0 or params.coupling_temperature != 0.0
            or amp.noise_temperature != 0.0):
        raise ValidationError("zero-temperature form requires all bath temperatures = 0")
    xp = np.asarray(params.proof_mass.eval(omega), dtype=complex)
    xs = np.asarray(params.coupling.eval(omega), dtype=complex)
    mag_p = np.abs(xp)
    mag_s = np.abs(xs)
    if np.any(mag_p == 0):
        raise SingularMatrixError("proof-mass impedance vanishes on the requested grid")
    if np.any(mag_s == 0):
        raise DegenerateCouplingError()
    hbar = units.hbar
    out = (hbar * np.abs(omega) * (xp + xs).real
           + 4.0 * hbar * amp.operating_frequency * mag_s) / mag_p**2
    return float(out) if np.ndim(omega) == 0 else out


def golden_section(f, lower: float, upper: float, tol: float = 1e-8, max_iter: int = 200):
    """Bracketed golden-section minimum of a unimodal scalar function.

    Returns (x, f(x)). tol is the absolute width of the final bracket.
    """
    if not upper > lower:
        raise ValidationError("golden_section needs upper > lower")
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lower, upper
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = f(x2)
    x = 0.5 * (a + b)
    return x, f(x)


def _with_rho(params: SystemParams, rho: float) -> SystemParams:
    amp = dataclasses.replace(params.amplifier, matching_ratio=rho)
    return dataclasses.replace(params, amplifier=amp)


def optimize_rho(params: SystemParams, omega: float, target: str = "proof-mass",
                 method: str = "analytic", units: Units = NATURAL,
                 rho_bounds: tuple[float, float] = (1e-6, 1e6)) -> OptimizationResult:
    """Matching ratio minimizing one output spectrum at one frequency.

    The analytic branch evaluates the known optimum (rho = 1 for the proof
    mass, |Xi_p + Xi_s|/|Xi_s| for the cage); the numeric branch runs a
    golden-section search on log rho over rho_bounds and must agree with it.
    """
    _check_target(target)
    closed_form = cage_closed_form if target == "cage" else proof_mass_closed_form
    if method == "analytic":
        if target == "cage":
            xp = params.proof_mass.eval(omega)
            xs = params.coupling.eval(omega)
            if abs(xs) == 0:
                raise DegenerateCouplingError(omega=float(omega))
            rho_star = abs(xp + xs) / abs(xs)
        else:
            rho_star = 1.0
        minimum = closed_form(_with_rho(params, rho_star), omega, units)
        return OptimizationResult(rho_star, minimum, target, "analytic")
    if method == "numeric":
        def objective(log_rho):
            return closed_form(_with_rho(params, math.exp(log_rho)), omega, units)

        log_star, minimum = golden_section(objective, math.log(rho_bounds[0]),
                                           math.log(rho_bounds[1]))
        return OptimizationResult(math.exp(log_star), minimum, target, "numeric")
    raise ValidationError(f"method must be 'analytic' or 'numeric', got {method!r}")


def _check_grid(grid) -> np.ndarray:
    arr = np.asarray(grid, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValidationError("frequency grid must be a non-empty 1-D array")
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise ValidationError("frequency grid must be finite and strictly positive")
    if np.any(np.diff(arr) <= 0):
        raise ValidationError("frequency grid must be strictly increasing")
    return arr


def budget_decomposition(params: SystemParams, grid, target: str = "proof-mass",
                         regime: str = "high-gain", units: Units = NATURAL,
                         allow_degenerate: bool = False) -> SpectrumTable:
    """Tabulate per-source contributions and totals over a frequency grid.

    ``target`` may also be "both". Where the coupling magnitude vanishes the
    sensor cannot operate: the whole run is refused unless allow_degenerate
    is set, in which case the back-action and sensing-error columns carry NaN
    at the degenerate points (partial budgets are reported, never silently
    completed).
    """
    _check_regime(regime)
    if target == "both":
        wanted = TARGETS
    else:
        _check_target(target)
        wanted = (target,)
    arr = _check_grid(grid)

    xi_p = np.asarray(params.proof_mass.eval(arr), dtype=complex)
    xi_c = np.asarray(params.cage.eval(arr), dtype=complex)
    xi_s = np.asarray(params.coupling.eval(arr), dtype=complex)
    mag_p = np.abs(xi_p)
    mag_s = np.abs(xi_s)
    if regime == "high-gain" and np.any(mag_p == 0):
        raise SingularMatrixError("proof-mass impedance vanishes",
                                  omega=float(arr[int(np.argmax(mag_p == 0))]))
    degenerate = mag_s == 0
    if np.any(degenerate) and not allow_degenerate:
        raise DegenerateCouplingError(omega=float(arr[int(np.argmax(degenerate))]))

    e_p = np.asarray(effective_energy(arr, params.proof_mass_temperature, units))
    e_s = np.asarray(effective_energy(arr, params.coupling_temperature, units))
    e_c = np.asarray(effective_energy(arr, params.effective_cage_temperature, units))
    e_a = params.amplifier.energy_per_mode(units)
    rho = params.amplifier.matching_ratio
    if params.cage_disturbance is not None:
        sigma_ext = np.asarray(params.cage_disturbance(arr), dtype=float)
        if sigma_ext.shape != arr.shape or np.any(sigma_ext < 0) or not np.all(np.isfinite(sigma_ext)):
            raise ValidationError("cage disturbance spectrum must be finite, >= 0, grid-shaped")
    else:
        sigma_ext = np.zeros_like(arr)

    ok = ~degenerate
    columns: dict[str, np.ndarray] = {}
    totals: dict[str, np.ndarray] = {}
    for tgt in wanted:
        cage_flag = tgt == "cage"
        cols = np.full((arr.size, len(SOURCE_ORDER)), np.nan)
        if np.all(ok):
            cols = _kernel_columns(params, arr, xi_p, xi_c, xi_s, e_p, e_s, e_c, e_a,
                                   rho, sigma_ext, cage_flag, regime)
        else:
            idx = np.nonzero(ok)[0]
            if idx.size:
                cols[idx] = _kernel_columns(params, arr[idx], xi_p[idx], xi_c[idx],
                                            xi_s[idx], e_p[idx], e_s[idx], e_c[idx],
                                            e_a, rho, sigma_ext[idx], cage_flag, regime)
            for i in np.nonzero(degenerate)[0]:
                cols[i] = _degenerate_row(params, float(arr[i]), float(e_p[i]),
                                          float(e_c[i]), float(sigma_ext[i]),
                                          cage_flag, regime)
        columns[tgt] = cols
        totals[tgt] = cols.sum(axis=1)
    return SpectrumTable(arr, SOURCE_ORDER, columns, totals)


def _kernel_columns(params, arr, xi_p, xi_c, xi_s, e_p, e_s, e_c, e_a, rho,
                    sigma_ext, cage_flag, regime):
    if regime == "high-gain":
        return kernels.columns_high_gain(xi_p, xi_s, e_p, e_s, e_a, rho, cage_flag)
    g = gain_at(params, arr)
    gain_arr = np.full(arr.shape, g, dtype=complex) if np.ndim(g) == 0 \
        else np.asarray(g, dtype=complex)
    cols, bad = kernels.columns_finite_gain(xi_p, xi_c, xi_s, gain_arr, e_p, e_s, e_c,
                                            e_a, rho, sigma_ext, cage_flag)
    if bad >= 0:
        raise SingularMatrixError("closed-loop matrix is singular", omega=float(arr[bad]))
    return cols


def _degenerate_row(params, omega, e_p, e_c, sigma_ext, cage_flag, regime):
    # Sensor columns are unreportable with zero coupling; Langevin columns stay exact.
    row = np.full(len(SOURCE_ORDER), np.nan)
    solve = high_gain_solution if regime == "high-gain" else solve_finite_gain
    pick = 1 if cage_flag else 0
    sigma_fp = 2.0 * e_p * float(np.real(params.proof_mass.eval(omega)))
    row[0] = abs(solve(params, omega, "f_p")[pick]) ** 2 * sigma_fp
    row[1] = 0.0  # coupling with |Xi_s| = 0 has Re Xi_s = 0: no Langevin force
    sigma_fc = 2.0 * e_c * float(np.real(params.cage.eval(omega))) + sigma_ext
    row[4] = abs(solve(params, omega, "f_c")[pick]) ** 2 * sigma_fc
    return row
