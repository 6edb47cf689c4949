"""Frequency-domain noise budgets for servo-controlled drag-free proof-mass/cage systems.

Builds complex mechanical impedance networks, injects quantum and thermal
fluctuations through the fluctuation-dissipation theorem, solves the
feedback loop at finite or large gain, and decomposes the residual velocity
noise of the proof mass and the cage per source, including the optimal
amplifier impedance matching for either output.
"""

from .budget import (OptimizationResult, SpectrumTable, assemble_spectrum,
                     budget_decomposition, cage_closed_form, golden_section,
                     optimize_rho, proof_mass_closed_form, zero_temperature_spectrum)
from .checks import CheckResult, CheckThresholds, run_consistency_checks
from .closed_loop import (NoiseSource, SystemParams, TabulatedGain, TabulatedSpectrum,
                          closed_loop_matrix, convergence_defect, free_motion, gain_at,
                          high_gain_solution, injection_vector, noise_sources,
                          open_loop_matrix, solve_finite_gain)
from .config import GridSpec, RunConfig, emit_config, load_config, parse_config
from .constants import NATURAL, SI, Units, get_units
from .errors import (ConfigError, DegenerateCouplingError, DomainError, DragfreeError,
                     NumericalError, RangeError, SingularMatrixError, ValidationError)
from .fdt import (AmplifierParams, ThermalBath, amplifier_spectra, effective_energy,
                  langevin_spectrum)
from .impedance import Damper, Impedance, Mass, Spring, SumImpedance, Tabulated

__version__ = "0.1.0"

__all__ = [
    "AmplifierParams", "CheckResult", "CheckThresholds", "ConfigError", "Damper",
    "DegenerateCouplingError", "DomainError", "DragfreeError", "GridSpec", "Impedance",
    "Mass", "NATURAL", "NoiseSource", "NumericalError", "OptimizationResult",
    "RangeError", "RunConfig", "SI", "SingularMatrixError", "SpectrumTable", "Spring",
    "SumImpedance", "SystemParams", "Tabulated", "TabulatedGain", "TabulatedSpectrum",
    "ThermalBath", "Units", "ValidationError", "amplifier_spectra", "assemble_spectrum",
    "budget_decomposition", "cage_closed_form", "closed_loop_matrix",
    "convergence_defect", "effective_energy", "emit_config", "free_motion", "gain_at",
    "get_units", "golden_section", "high_gain_solution", "injection_vector",
    "langevin_spectrum", "load_config", "noise_sources", "open_loop_matrix",
    "optimize_rho", "parse_config", "proof_mass_closed_form", "run_consistency_checks",
    "solve_finite_gain", "zero_temperature_spectrum",
]
