"""Fluctuation-dissipation noise spectra and the sensor's conjugate noise pair.

The Langevin force accompanying any dissipative coupling has the double-sided
spectral density sigma_FF = 2*k_B*Theta*Re Xi, where k_B*Theta is the energy
per mode: (hbar*|omega|/2)*coth(hbar*|omega|/(2*k_B*T)). It interpolates
between the classical k_B*T at high temperature and the zero-point
hbar*|omega|/2 at T = 0.

The position sensor is modelled as a phase-independent amplifier with noise
temperature T_a operating at the transducer frequency omega_t. Its back
action and sensing error form a conjugate pair whose product is fixed at
(4*k_B*Theta_a)**2 for every impedance-matching ratio rho; back action and
sensing error are treated as mutually uncorrelated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .constants import NATURAL, Units
from .errors import DegenerateCouplingError, DomainError, ValidationError


@dataclass(frozen=True)
class ThermalBath:
    """An equilibrium bath at temperature T >= 0 (kelvin in SI mode)."""

    temperature: float

    def __post_init__(self):
        t = float(self.temperature)
        if not math.isfinite(t) or t < 0:
            raise ValidationError(f"bath temperature must be finite and >= 0, got {t!r}")
        object.__setattr__(self, "temperature", t)

    def energy_per_mode(self, omega, units: Units = NATURAL):
        return effective_energy(omega, self.temperature, units)


@dataclass(frozen=True)
class AmplifierParams:
    """Phase-independent amplifier: noise temperature, transducer frequency, matching ratio."""

    noise_temperature: float
    operating_frequency: float
    matching_ratio: float

    def __post_init__(self):
        t = float(self.noise_temperature)
        w = float(self.operating_frequency)
        r = float(self.matching_ratio)
        if not math.isfinite(t) or t < 0:
            raise ValidationError(f"amplifier noise temperature must be >= 0, got {t!r}")
        if not math.isfinite(w) or w <= 0:
            raise ValidationError(f"amplifier operating frequency must be > 0, got {w!r}")
        if not math.isfinite(r) or r <= 0:
            raise ValidationError(f"amplifier matching ratio must be > 0, got {r!r}")
        object.__setattr__(self, "noise_temperature", t)
        object.__setattr__(self, "operating_frequency", w)
        object.__setattr__(self, "matching_ratio", r)

    def energy_per_mode(self, units: Units = NATURAL) -> float:
        """k_B*Theta_a, evaluated at the fixed transducer frequency."""
        return effective_energy(self.operating_frequency, self.noise_temperature, units)


def effective_energy(omega, temperature, units: Units = NATURAL):
    """Energy per mode k_B*Theta at angular frequency omega and temperature T.

    Accepts scalar or array omega; T = 0 returns the zero-point value
    hbar*|omega|/2 exactly. Monotone non-decreasing in T and bounded below by
    max(hbar*|omega|/2, k_B*T).
    """
    t = float(temperature)
    if not math.isfinite(t) or t < 0:
        raise ValidationError(f"temperature must be finite and >= 0, got {t!r}")
    arr = np.asarray(omega, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("omega must be finite")
    if np.any(arr == 0):
        raise DomainError("omega = 0 has no mode energy in this model")
    out = kernels.effective_energy_grid(np.atleast_1d(arr).ravel(), t, units.hbar, units.k_B)
    if arr.ndim == 0:
        return float(out[0])
    return out.reshape(arr.shape)


def langevin_spectrum(model, omega, temperature, units: Units = NATURAL):
    """Force noise sigma_FF = 2*k_B*Theta*Re Xi of a passive impedance, N^2*s."""
    dissipative = model.real_part(omega)
    if np.any(np.asarray(dissipative) < 0):
        raise ValidationError("impedance has negative dissipative part; "
                              "fluctuation-dissipation spectrum would be negative")
    return 2.0 * effective_energy(omega, temperature, units) * dissipative


def amplifier_spectra(amp: AmplifierParams, coupling_magnitude, units: Units = NATURAL):
    """Back-action and sensing-error spectra of the position sensor.

    Returns (sigma_FtFt, sigma_VseVse) for the given |Xi_s| (scalar or
    array). The two scale as rho*|Xi_s| and 1/(rho*|Xi_s|); their product is
    (4*k_B*Theta_a)**2 regardless of matching.
    """
    mag = np.asarray(coupling_magnitude, dtype=float)
    if np.any(mag < 0) or not np.all(np.isfinite(mag)):
        raise ValidationError("coupling impedance magnitude must be finite and >= 0")
    if np.any(mag == 0):
        raise DegenerateCouplingError()
    e_a = amp.energy_per_mode(units)
    rho = amp.matching_ratio
    back_action = 4.0 * e_a * rho * mag
    sensing = 4.0 * e_a / (rho * mag)
    if mag.ndim == 0:
        return float(back_action), float(sensing)
    return back_action, sensing
