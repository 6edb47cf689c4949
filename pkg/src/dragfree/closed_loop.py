"""Two-body loop equations of the drag-free system and their solutions.

The proof mass and the cage exchange force through the coupling impedance;
the sensed relative velocity, corrupted by the sensing error, is fed back
onto the cage with an impedance-dimensioned gain. At finite gain the 2x2
complex system is solved directly; in the large-gain limit the closed-form
solution makes the cage disturbance drop out entirely and reduces the proof
mass response to its free motion plus sensor-induced terms.

Five labelled noise sources enter the right-hand side:

==========  =======================================  ==================
label       physical origin                          injection
==========  =======================================  ==================
``f_p``     unscreened force on the proof mass       (1, 0)
``f_s``     Langevin force of the coupling           (1, -1)
``f_t``     sensor back action                       (1, -1)
``f_c``     environmental force on the cage          (0, 1)
``v_se``    sensing error, entering via the servo    (0, -G)
==========  =======================================  ==================

Action and reaction through the coupling are taken equal (delays neglected
at the low mechanical frequencies of interest).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .constants import NATURAL, Units
from .errors import RangeError, SingularMatrixError, ValidationError
from .fdt import AmplifierParams, amplifier_spectra, langevin_spectrum
from .impedance import Impedance
from .kernels import SINGULAR_RTOL, SOURCE_ORDER


@dataclass(frozen=True)
class TabulatedGain:
    """Frequency-shaped complex servo gain, linearly interpolated.

    No stability claim is attached to any particular shaping; the high-gain
    results are gain-independent anyway.
    """

    omegas: tuple[float, ...]
    values: tuple[complex, ...]
    _om: np.ndarray = field(init=False, repr=False, compare=False)
    _re: np.ndarray = field(init=False, repr=False, compare=False)
    _im: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        om = tuple(float(w) for w in self.omegas)
        vals = tuple(complex(v) for v in self.values)
        if len(om) != len(vals) or len(om) < 2:
            raise ValidationError("tabulated gain needs matching omega/value lists with >= 2 nodes")
        arr = np.asarray(om, dtype=float)
        if not np.all(np.isfinite(arr)) or np.any(np.diff(arr) <= 0):
            raise ValidationError("tabulated gain grid must be finite and strictly increasing")
        varr = np.asarray(vals, dtype=complex)
        if not np.all(np.isfinite(varr)):
            raise ValidationError("tabulated gain values must be finite")
        object.__setattr__(self, "omegas", om)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "_om", arr)
        object.__setattr__(self, "_re", varr.real.copy())
        object.__setattr__(self, "_im", varr.imag.copy())

    def __call__(self, omega):
        arr = np.asarray(omega, dtype=float)
        if np.any(arr < self._om[0]) or np.any(arr > self._om[-1]):
            raise RangeError(f"omega outside tabulated gain range [{self._om[0]!r}, {self._om[-1]!r}]")
        out = np.interp(arr, self._om, self._re) + 1j * np.interp(arr, self._om, self._im)
        if arr.ndim == 0:
            return complex(out)
        return out


@dataclass(frozen=True)
class TabulatedSpectrum:
    """Non-negative spectral density on a strictly increasing grid (e.g. a measured
    cage disturbance), linearly interpolated, zero outside the table range."""

    omegas: tuple[float, ...]
    values: tuple[float, ...]
    _om: np.ndarray = field(init=False, repr=False, compare=False)
    _val: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        om = tuple(float(w) for w in self.omegas)
        vals = tuple(float(v) for v in self.values)
        if len(om) != len(vals) or len(om) < 2:
            raise ValidationError("tabulated spectrum needs matching omega/value lists with >= 2 nodes")
        arr = np.asarray(om, dtype=float)
        if not np.all(np.isfinite(arr)) or np.any(np.diff(arr) <= 0):
            raise ValidationError("tabulated spectrum grid must be finite and strictly increasing")
        varr = np.asarray(vals, dtype=float)
        if not np.all(np.isfinite(varr)) or np.any(varr < 0):
            raise ValidationError("tabulated spectral densities must be finite and >= 0")
        object.__setattr__(self, "omegas", om)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "_om", arr)
        object.__setattr__(self, "_val", varr)

    def __call__(self, omega):
        arr = np.asarray(omega, dtype=float)
        out = np.interp(arr, self._om, self._val, left=0.0, right=0.0)
        if arr.ndim == 0:
            return float(out)
        return out


@dataclass(frozen=True)
class SystemParams:
    """Full physical description of one drag-free configuration.

    ``proof_mass``, ``cage`` and ``coupling`` are the three impedances of the
    two-body layout. The proof-mass and coupling baths drive the f_p and f_s
    Langevin forces; the cage bath (defaulting to the coupling bath) plus the
    optional measured ``cage_disturbance`` drive f_c, which only matters at
    finite gain. ``gain`` is a complex scalar or a TabulatedGain.
    """

    proof_mass: Impedance
    cage: Impedance
    coupling: Impedance
    proof_mass_temperature: float = 0.0
    coupling_temperature: float = 0.0
    amplifier: AmplifierParams = AmplifierParams(0.0, 1.0, 1.0)
    gain: complex | TabulatedGain = 0j
    cage_temperature: float | None = None
    cage_disturbance: Callable | None = None

    def __post_init__(self):
        for name in ("proof_mass", "cage", "coupling"):
            if not isinstance(getattr(self, name), Impedance):
                raise ValidationError(f"{name} must be an impedance model")
        for name in ("proof_mass_temperature", "coupling_temperature"):
            t = float(getattr(self, name))
            if not math.isfinite(t) or t < 0:
                raise ValidationError(f"{name} must be finite and >= 0, got {t!r}")
            object.__setattr__(self, name, t)
        if self.cage_temperature is not None:
            t = float(self.cage_temperature)
            if not math.isfinite(t) or t < 0:
                raise ValidationError(f"cage_temperature must be finite and >= 0, got {t!r}")
            object.__setattr__(self, "cage_temperature", t)
        if not isinstance(self.amplifier, AmplifierParams):
            raise ValidationError("amplifier must be an AmplifierParams instance")
        if not isinstance(self.gain, TabulatedGain):
            g = complex(self.gain)
            if not cmath.isfinite(g):
                raise ValidationError(f"servo gain must be finite, got {g!r}")
            object.__setattr__(self, "gain", g)
        if self.cage_disturbance is not None and not callable(self.cage_disturbance):
            raise ValidationError("cage_disturbance must be callable omega -> density")

    @property
    def effective_cage_temperature(self) -> float:
        if self.cage_temperature is None:
            return self.coupling_temperature
        return self.cage_temperature


def gain_at(params: SystemParams, omega):
    """Servo gain at omega: the scalar itself, or the tabulated value."""
    if isinstance(params.gain, TabulatedGain):
        return params.gain(omega)
    return params.gain


@dataclass(frozen=True)
class NoiseSource:
    """A labelled spectral density plus its injection into the loop equations."""

    label: str
    spectrum: Callable
    injection: Callable

    def __post_init__(self):
        if self.label not in SOURCE_ORDER:
            raise ValidationError(f"unknown source label {self.label!r}; expected one of {SOURCE_ORDER}")


def injection_vector(label: str, params: SystemParams, omega) -> np.ndarray:
    """Right-hand-side weights of one unit source in the closed-loop equations."""
    if label == "f_p":
        return np.array([1.0, 0.0], dtype=complex)
    if label in ("f_s", "f_t"):
        return np.array([1.0, -1.0], dtype=complex)
    if label == "f_c":
        return np.array([0.0, 1.0], dtype=complex)
    if label == "v_se":
        return np.array([0.0, -gain_at(params, omega)], dtype=complex)
    raise ValidationError(f"unknown source label {label!r}; expected one of {SOURCE_ORDER}")


def noise_sources(params: SystemParams, units: Units = NATURAL) -> tuple[NoiseSource, ...]:
    """The five standard sources of the drag-free budget, bound to one system."""
    amp = params.amplifier

    def ft_spectrum(omega):
        return amplifier_spectra(amp, params.coupling.magnitude(omega), units)[0]

    def vse_spectrum(omega):
        return amplifier_spectra(amp, params.coupling.magnitude(omega), units)[1]

    def fc_spectrum(omega):
        sigma = langevin_spectrum(params.cage, omega, params.effective_cage_temperature, units)
        if params.cage_disturbance is not None:
            sigma = sigma + params.cage_disturbance(omega)
        return sigma

    def make(label, spectrum):
        return NoiseSource(label, spectrum,
                           lambda omega, _l=label: injection_vector(_l, params, omega))

    return (
        make("f_p", lambda omega: langevin_spectrum(params.proof_mass, omega,
                                                    params.proof_mass_temperature, units)),
        make("f_s", lambda omega: langevin_spectrum(params.coupling, omega,
                                                    params.coupling_temperature, units)),
        make("f_t", ft_spectrum),
        make("v_se", vse_spectrum),
        make("f_c", fc_spectrum),
    )


def open_loop_matrix(params: SystemParams, omega) -> np.ndarray:
    """Impedance matrix of the uncontrolled two-body system; symmetric."""
    xp = params.proof_mass.eval(omega)
    xc = params.cage.eval(omega)
    xs = params.coupling.eval(omega)
    return np.array([[xp + xs, -xs], [-xs, xc + xs]], dtype=complex)


def closed_loop_matrix(params: SystemParams, omega) -> np.ndarray:
    """Impedance matrix with the velocity feedback folded into the cage row."""
    xp = params.proof_mass.eval(omega)
    xc = params.cage.eval(omega)
    xs = params.coupling.eval(omega)
    g = gain_at(params, omega)
    return np.array([[xp + xs, -xs], [-xs - g, xc + xs + g]], dtype=complex)


def _source_label(source) -> str:
    if isinstance(source, NoiseSource):
        return source.label
    if isinstance(source, str):
        if source not in SOURCE_ORDER:
            raise ValidationError(f"unknown source label {source!r}; expected one of {SOURCE_ORDER}")
        return source
    raise ValidationError(f"source must be a NoiseSource or a label string, got {source!r}")


def solve_finite_gain(params: SystemParams, omega, source) -> tuple[complex, complex]:
    """Unit-source responses (H_p, H_c) of the two velocities at finite gain.

    Solves the 2x2 complex loop equations by Cramer's rule; a determinant
    below SINGULAR_RTOL of the squared matrix norm is reported as a physical
    pole rather than returned as a huge number.
    """
    matrix = closed_loop_matrix(params, omega)
    a, b = matrix[0]
    c, d = matrix[1]
    det = a * d - b * c
    norm2 = abs(a) ** 2 + abs(b) ** 2 + abs(c) ** 2 + abs(d) ** 2
    if abs(det) <= SINGULAR_RTOL * norm2:
        raise SingularMatrixError("closed-loop matrix is singular", omega=float(omega))
    if isinstance(source, NoiseSource):
        r1, r2 = source.injection(omega)
    else:
        r1, r2 = injection_vector(_source_label(source), params, omega)
    h_p = (r1 * d - b * r2) / det
    h_c = (a * r2 - c * r1) / det
    return complex(h_p), complex(h_c)


def high_gain_solution(params: SystemParams, omega, source) -> tuple[complex, complex]:
    """(H_p, H_c) in the large-gain limit.

    Force sources see the free proof-mass response on both bodies, the
    sensing error maps through the coupling, and the cage disturbance is
    rejected exactly. H_c - H_p is 0 for forces and -1 for the sensing
    error, bit for bit.
    """
    label = _source_label(source)
    xp = params.proof_mass.eval(omega)
    if xp == 0:
        raise SingularMatrixError("proof-mass impedance vanishes; free response diverges",
                                  omega=float(omega))
    if label in ("f_p", "f_s", "f_t"):
        h = 1.0 / xp
        return complex(h), complex(h)
    if label == "v_se":
        xs = params.coupling.eval(omega)
        h_p = -xs / xp
        return complex(h_p), complex(h_p - 1.0)
    return 0j, 0j  # f_c: perfect drag-free rejection


def free_motion(params: SystemParams, omega):
    """Response of the unperturbed proof-mass velocity to its residual force: 1/Xi_p."""
    xp = params.proof_mass.eval(omega)
    if np.any(np.asarray(xp) == 0):
        raise SingularMatrixError("proof-mass impedance vanishes; free response diverges")
    return 1.0 / xp


def convergence_defect(params: SystemParams, omega, source, gain_magnitude: float) -> float:
    """Relative deviation of the finite-gain solve from the large-gain solution.

    The sweep gain is applied as a real positive scalar of the given
    magnitude. Falls off as 1/|G|. For the f_c source the large-gain
    reference is identically zero, so the ratio is against the tiny epsilon
    floor alone; aggregate drag-free rejection is better judged against the
    zero-gain response.
    """
    swept = _replace_gain(params, complex(float(gain_magnitude)))
    finite = solve_finite_gain(swept, omega, source)
    analytic = high_gain_solution(params, omega, source)
    eps = 1e-30
    return max(abs(f - a) / (abs(a) + eps) for f, a in zip(finite, analytic))


def _replace_gain(params: SystemParams, gain) -> SystemParams:
    import dataclasses

    return dataclasses.replace(params, gain=gain)
