"""Complex mechanical impedances: force per unit velocity in the frequency domain.

Conventions
-----------
The quantum Fourier convention is used throughout: a time derivative maps to
multiplication by -i*omega. Hence a point mass has impedance -i*omega*M, a
viscous damper gamma, and a spring k/(-i*omega). Substituting j for -i
recovers the electronics convention. Spectra are double-sided densities in
angular frequency.

All built-in elements are passive (Re Xi >= 0 away from omega = 0) and
satisfy the reality condition Xi(-omega) = conj(Xi(omega)). omega = 0 is
excluded everywhere: the spring impedance diverges and the free proof-mass
response 1/Xi_p diverges at DC.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, RangeError, ValidationError


def _check_omega(omega):
    arr = np.asarray(omega)
    if not np.all(np.isfinite(arr)):
        raise DomainError("omega must be finite")
    if np.any(arr == 0):
        raise DomainError("omega = 0 is outside the model domain (rigid-body divergence)")


def _check_nonnegative_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value < 0:
        raise ValidationError(f"{name} must be finite and >= 0, got {value!r}")
    return value


class Impedance:
    """Base class for composable impedance models.

    Subclasses implement ``eval``; ``real_part`` and ``magnitude`` derive
    from it. Models are immutable after construction and evaluation is pure,
    so instances may be shared freely across threads.
    """

    def eval(self, omega):
        """Complex impedance at angular frequency omega (scalar or array), N*s/m."""
        raise NotImplementedError

    def real_part(self, omega):
        """Dissipative part Re Xi(omega); the channel that fluctuates."""
        return np.real(self.eval(omega))

    def magnitude(self, omega):
        """Modulus |Xi(omega)|."""
        return np.abs(self.eval(omega))

    def __add__(self, other):
        if isinstance(other, Impedance):
            return SumImpedance((self, other))
        return NotImplemented


@dataclass(frozen=True)
class Mass(Impedance):
    """Inertial element: Xi = -i*omega*M."""

    mass: float

    def __post_init__(self):
        object.__setattr__(self, "mass", _check_nonnegative_finite("mass", self.mass))

    def eval(self, omega):
        _check_omega(omega)
        return -1j * omega * self.mass


@dataclass(frozen=True)
class Damper(Impedance):
    """Viscous element: Xi = gamma, frequency independent and purely real."""

    damping: float

    def __post_init__(self):
        object.__setattr__(self, "damping", _check_nonnegative_finite("damping", self.damping))

    def eval(self, omega):
        _check_omega(omega)
        return self.damping + 0j * omega


@dataclass(frozen=True)
class Spring(Impedance):
    """Restoring element: Xi = k/(-i*omega)."""

    stiffness: float

    def __post_init__(self):
        object.__setattr__(self, "stiffness", _check_nonnegative_finite("stiffness", self.stiffness))

    def eval(self, omega):
        _check_omega(omega)
        return self.stiffness / (-1j * omega)


@dataclass(frozen=True)
class SumImpedance(Impedance):
    """Elements sharing one velocity; impedances add."""

    terms: tuple[Impedance, ...]

    def __post_init__(self):
        terms = tuple(self.terms)
        if not terms:
            raise ValidationError("sum impedance needs at least one term")
        for t in terms:
            if not isinstance(t, Impedance):
                raise ValidationError(f"sum term {t!r} is not an impedance model")
        object.__setattr__(self, "terms", terms)

    def eval(self, omega):
        total = self.terms[0].eval(omega)
        for t in self.terms[1:]:
            total = total + t.eval(omega)
        return total


@dataclass(frozen=True)
class Tabulated(Impedance):
    """Measured impedance on a strictly increasing frequency grid.

    Linear interpolation is applied to the real and imaginary parts
    separately, so passivity at the nodes (checked at construction) implies
    passivity everywhere in range. Evaluation outside the table range is a
    RangeError; no symmetry extension to negative frequencies is attempted.
    """

    omegas: tuple[float, ...]
    values: tuple[complex, ...]
    _om: np.ndarray = field(init=False, repr=False, compare=False)
    _re: np.ndarray = field(init=False, repr=False, compare=False)
    _im: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        om = tuple(float(w) for w in self.omegas)
        vals = tuple(complex(v) for v in self.values)
        if len(om) != len(vals):
            raise ValidationError("tabulated impedance needs as many values as frequencies")
        if len(om) < 2:
            raise ValidationError("tabulated impedance needs at least two nodes")
        arr = np.asarray(om, dtype=float)
        if not np.all(np.isfinite(arr)) or np.any(np.diff(arr) <= 0):
            raise ValidationError("tabulated frequency grid must be finite and strictly increasing")
        if np.any(arr == 0):
            raise ValidationError("tabulated frequency grid must not contain omega = 0")
        varr = np.asarray(vals, dtype=complex)
        if not np.all(np.isfinite(varr)):
            raise ValidationError("tabulated impedance values must be finite")
        bad = np.nonzero(varr.real < 0)[0]
        if bad.size:
            i = int(bad[0])
            raise ValidationError(
                f"tabulated impedance is not passive: Re Xi = {varr.real[i]!r} < 0 at node {i} "
                f"(omega = {arr[i]!r})")
        object.__setattr__(self, "omegas", om)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "_om", arr)
        object.__setattr__(self, "_re", varr.real.copy())
        object.__setattr__(self, "_im", varr.imag.copy())

    def eval(self, omega):
        _check_omega(omega)
        arr = np.asarray(omega, dtype=float)
        if np.any(arr < self._om[0]) or np.any(arr > self._om[-1]):
            raise RangeError(
                f"omega outside tabulated range [{self._om[0]!r}, {self._om[-1]!r}]")
        out = np.interp(arr, self._om, self._re) + 1j * np.interp(arr, self._om, self._im)
        if np.ndim(omega) == 0:
            return complex(out)
        return out
