"""Built-in consistency suite behind the ``verify`` subcommand.

Four relations every valid configuration must satisfy are measured and held
to thresholds: the closed forms against uncorrelated-source assembly, the
1/|G| approach of the finite-gain solve to the large-gain solution, the
zero-temperature identity, and the fixed product of the sensor's conjugate
noise pair. Each check reports a measured defect; the cage-disturbance
source is excluded from the gain sweep because its large-gain reference is
identically zero (its rejection is a separate transfer-function statement).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .budget import assemble_spectrum, proof_mass_closed_form, cage_closed_form, \
    zero_temperature_spectrum, TARGETS
from .closed_loop import SystemParams, convergence_defect
from .constants import NATURAL, Units
from .errors import NumericalError, ValidationError
from .fdt import AmplifierParams, amplifier_spectra

SWEEP_SOURCES = ("f_p", "f_s", "f_t", "v_se")


@dataclass(frozen=True)
class CheckThresholds:
    """Pass/fail limits of the consistency suite."""

    closed_form_rel: float = 1e-12
    gain_slope_tol: float = 0.1
    zero_temp_rel: float = 1e-12
    conjugate_rel: float = 1e-12


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: float
    threshold: float
    detail: str = ""
    numerical_error: bool = False


def _subsample(grid: np.ndarray, count: int) -> np.ndarray:
    if grid.size <= count:
        return grid
    idx = np.unique(np.linspace(0, grid.size - 1, count).astype(int))
    return grid[idx]


def check_closed_form_assembly(params: SystemParams, grid, units: Units = NATURAL,
                               threshold: float = 1e-12) -> CheckResult:
    """Closed forms vs transfer-function assembly, both outputs, max relative defect."""
    worst = 0.0
    for omega in _subsample(np.asarray(grid, dtype=float), 32):
        omega = float(omega)
        for target, closed in (("proof-mass", proof_mass_closed_form),
                               ("cage", cage_closed_form)):
            reference = closed(params, omega, units)
            _, assembled = assemble_spectrum(params, omega, target, "high-gain", units)
            worst = max(worst, abs(assembled - reference) / abs(reference))
    return CheckResult("closed_form_assembly", worst <= threshold, worst, threshold)


def check_gain_sweep(params: SystemParams, grid, units: Units = NATURAL,
                     slope_tol: float = 0.1,
                     gains=(1e3, 1e4, 1e5, 1e6, 1e7, 1e8)) -> CheckResult:
    """Finite-gain -> large-gain convergence falls off one decade per gain decade."""
    omegas = _subsample(np.asarray(grid, dtype=float), 8)
    defects = []
    for g in gains:
        worst = 0.0
        for omega in omegas:
            for label in SWEEP_SOURCES:
                worst = max(worst, convergence_defect(params, float(omega), label, g))
        defects.append(worst)
    defects = np.asarray(defects)
    if np.any(defects == 0):
        # Exact agreement at finite gain: trivially converged.
        return CheckResult("gain_sweep", True, 0.0, slope_tol, "defect identically zero")
    slope = float(np.polyfit(np.log10(gains), np.log10(defects), 1)[0])
    measured = abs(slope + 1.0)
    detail = f"slope={slope:.4f}, defect@1e6={defects[3]:.3e}"
    return CheckResult("gain_sweep", measured <= slope_tol, measured, slope_tol, detail)


def check_zero_temperature_identity(params: SystemParams, grid, units: Units = NATURAL,
                                    threshold: float = 1e-12) -> CheckResult:
    """Zero-temperature closed form equals the general one at T = 0, rho = 1."""
    amp = dataclasses.replace(params.amplifier, noise_temperature=0.0, matching_ratio=1.0)
    cold = dataclasses.replace(params, proof_mass_temperature=0.0,
                               coupling_temperature=0.0, cage_temperature=0.0,
                               amplifier=amp)
    omegas = _subsample(np.asarray(grid, dtype=float), 256)
    direct = np.asarray(zero_temperature_spectrum(cold, omegas, units))
    general = np.asarray(proof_mass_closed_form(cold, omegas, units))
    worst = float(np.max(np.abs(direct - general) / np.abs(general)))
    return CheckResult("zero_temperature_identity", worst <= threshold, worst, threshold)


def check_conjugate_product(units: Units = NATURAL, threshold: float = 1e-12,
                            samples: int = 100_000, seed: int = 20211) -> CheckResult:
    """sigma_FtFt * sigma_VseVse stays pinned at (4 k_B Theta_a)^2 for random matchings."""
    rng = np.random.default_rng(seed)
    groups = 100
    per_group = samples // groups
    worst = 0.0
    for _ in range(groups):
        rho = float(10.0 ** rng.uniform(-2, 2))
        omega_t = float(10.0 ** rng.uniform(-2, 3))
        temp = 0.0 if rng.random() < 0.1 else float(10.0 ** rng.uniform(-3, 3))
        amp = AmplifierParams(temp, omega_t, rho)
        mags = 10.0 ** rng.uniform(-6, 6, size=per_group)
        back_action, sensing = amplifier_spectra(amp, mags, units)
        expected = (4.0 * amp.energy_per_mode(units)) ** 2
        worst = max(worst, float(np.max(np.abs(back_action * sensing / expected - 1.0))))
    return CheckResult("conjugate_noise_product", worst <= threshold, worst, threshold)


def run_consistency_checks(params: SystemParams, grid, units: Units = NATURAL,
                           thresholds: CheckThresholds | None = None) -> list[CheckResult]:
    """Run the full suite; numerical failures become failed results, not crashes."""
    t = thresholds or CheckThresholds()
    plan = (
        ("closed_form_assembly",
         lambda: check_closed_form_assembly(params, grid, units, t.closed_form_rel)),
        ("gain_sweep", lambda: check_gain_sweep(params, grid, units, t.gain_slope_tol)),
        ("zero_temperature_identity",
         lambda: check_zero_temperature_identity(params, grid, units, t.zero_temp_rel)),
        ("conjugate_noise_product",
         lambda: check_conjugate_product(units, t.conjugate_rel)),
    )
    results = []
    for name, run in plan:
        try:
            results.append(run())
        except (NumericalError, ValidationError) as err:
            results.append(CheckResult(name, False, float("nan"), float("nan"),
                                       f"{type(err).__name__}: {err}",
                                       numerical_error=isinstance(err, NumericalError)))
    return results
