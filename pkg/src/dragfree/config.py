"""YAML run configuration: parsing with line-referenced diagnostics, canonical emission.

A run is described by a nested document::

    units: natural            # si | natural
    target: proof-mass        # proof-mass | cage | both
    regime: high-gain         # high-gain | finite-gain
    system:
      proof_mass: {type: mass, mass: 1.0}
      cage:       {type: mass, mass: 2.0}
      coupling:   {type: damper, damping: 0.1}
      proof_mass_temperature: 0.0
      coupling_temperature: 0.0
      amplifier:  {temperature: 0.0, frequency: 2.0, rho: 1.0}
      gain: 1.0e6
    grid:
      omega_min: 0.1
      omega_max: 10.0
      points: 1000
      spacing: log            # log | linear

Impedance records compose: ``{type: sum, terms: [...]}`` adds elements,
``{type: tabulated, points: [[omega, re, im], ...]}`` ingests measured data
(rejected at load when not passive). ``gain`` may be a number, a
``{real, imag}`` pair, or ``{points: [[omega, re, im], ...]}``. An optional
``system.cage_temperature`` (defaults to the coupling temperature) and
``system.cage_disturbance: {points: [[omega, density], ...]}`` feed the
cage-force source used at finite gain. In SI mode the three temperatures
must be stated explicitly; in natural units they default to zero.

Every validation failure names the offending dotted key and, when it can be
located, the source line.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import yaml

from .closed_loop import SystemParams, TabulatedGain, TabulatedSpectrum
from .errors import ConfigError, ValidationError
from .fdt import AmplifierParams
from .impedance import Damper, Impedance, Mass, Spring, SumImpedance, Tabulated

UNITS_CHOICES = ("si", "natural")
TARGET_CHOICES = ("proof-mass", "cage", "both")
REGIME_CHOICES = ("high-gain", "finite-gain")
SPACING_CHOICES = ("log", "linear")


@dataclass(frozen=True)
class GridSpec:
    """Strictly positive frequency grid description."""

    omega_min: float
    omega_max: float
    points: int
    spacing: str = "log"

    def omegas(self) -> np.ndarray:
        if self.points == 1:
            return np.array([self.omega_min])
        if self.spacing == "log":
            return np.geomspace(self.omega_min, self.omega_max, self.points)
        return np.linspace(self.omega_min, self.omega_max, self.points)


@dataclass(frozen=True)
class RunConfig:
    """A fully validated run: system, grid, and mode switches."""

    system: SystemParams
    grid: GridSpec
    units: str = "natural"
    target: str = "proof-mass"
    regime: str = "high-gain"


class _MarkedLoader(yaml.SafeLoader):
    """SafeLoader that records the source line of every mapping key."""

    def __init__(self, stream):
        super().__init__(stream)
        self.key_lines: dict[int, dict[str, int]] = {}

    def construct_mapping(self, node, deep=False):
        mapping = super().construct_mapping(node, deep=deep)
        lines = {}
        for key_node, _ in node.value:
            lines[str(key_node.value)] = key_node.start_mark.line + 1
        self.key_lines[id(mapping)] = lines
        return mapping


class _Ctx:
    def __init__(self, key_lines, filename):
        self.key_lines = key_lines
        self.filename = filename

    def line(self, mapping, key):
        return self.key_lines.get(id(mapping), {}).get(key)

    def fail(self, message, path, mapping=None, key=None):
        line = self.line(mapping, key) if mapping is not None and key is not None else None
        raise ConfigError(message, path=path, line=line, filename=self.filename)


def _join(path, key):
    return f"{path}.{key}" if path else key


def _require_mapping(ctx, value, path):
    if not isinstance(value, dict):
        ctx.fail(f"expected a mapping, got {type(value).__name__}", path)
    return value


def _known_keys(ctx, mapping, path, allowed):
    for key in mapping:
        if key not in allowed:
            ctx.fail(f"unknown key (expected one of {sorted(allowed)})",
                     _join(path, key), mapping, key)


def _get_number(ctx, mapping, path, key, default=None, required=False):
    if key not in mapping:
        if required:
            ctx.fail("required key is missing", _join(path, key))
        return default
    value = mapping[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        ctx.fail(f"expected a number, got {value!r}", _join(path, key), mapping, key)
    return float(value)


def _get_int(ctx, mapping, path, key, default=None, required=False):
    if key not in mapping:
        if required:
            ctx.fail("required key is missing", _join(path, key))
        return default
    value = mapping[key]
    if isinstance(value, bool) or not isinstance(value, int):
        ctx.fail(f"expected an integer, got {value!r}", _join(path, key), mapping, key)
    return int(value)


def _get_choice(ctx, mapping, path, key, choices, default=None):
    if key not in mapping:
        return default
    value = mapping[key]
    if value not in choices:
        ctx.fail(f"expected one of {list(choices)}, got {value!r}", _join(path, key),
                 mapping, key)
    return value


def _pairs(ctx, value, path, width):
    if not isinstance(value, list) or not value:
        ctx.fail("expected a non-empty list of rows", path)
    rows = []
    for i, row in enumerate(value):
        if (not isinstance(row, list) or len(row) != width
                or any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in row)):
            ctx.fail(f"row {i} must hold {width} numbers, got {row!r}", path)
        rows.append([float(x) for x in row])
    return rows


def _impedance(ctx, value, path) -> Impedance:
    rec = _require_mapping(ctx, value, path)
    kind = _get_choice(ctx, rec, path, "type", ("mass", "damper", "spring", "sum", "tabulated"))
    if kind is None:
        ctx.fail("required key is missing", _join(path, "type"))
    try:
        if kind == "mass":
            _known_keys(ctx, rec, path, {"type", "mass"})
            return Mass(_get_number(ctx, rec, path, "mass", required=True))
        if kind == "damper":
            _known_keys(ctx, rec, path, {"type", "damping"})
            return Damper(_get_number(ctx, rec, path, "damping", required=True))
        if kind == "spring":
            _known_keys(ctx, rec, path, {"type", "stiffness"})
            return Spring(_get_number(ctx, rec, path, "stiffness", required=True))
        if kind == "sum":
            _known_keys(ctx, rec, path, {"type", "terms"})
            terms = rec.get("terms")
            if not isinstance(terms, list) or not terms:
                ctx.fail("expected a non-empty list of impedance records",
                         _join(path, "terms"), rec, "terms")
            return SumImpedance(tuple(
                _impedance(ctx, t, f"{path}.terms[{i}]") for i, t in enumerate(terms)))
        _known_keys(ctx, rec, path, {"type", "points"})
        rows = _pairs(ctx, rec.get("points"), _join(path, "points"), 3)
        return Tabulated(tuple(r[0] for r in rows),
                         tuple(complex(r[1], r[2]) for r in rows))
    except ConfigError:
        raise
    except ValidationError as err:
        ctx.fail(str(err), path)


def _gain(ctx, value, path):
    if isinstance(value, bool):
        ctx.fail(f"expected a number or mapping, got {value!r}", path)
    if isinstance(value, (int, float)):
        return complex(float(value), 0.0)
    rec = _require_mapping(ctx, value, path)
    if "points" in rec:
        _known_keys(ctx, rec, path, {"points"})
        rows = _pairs(ctx, rec["points"], _join(path, "points"), 3)
        try:
            return TabulatedGain(tuple(r[0] for r in rows),
                                 tuple(complex(r[1], r[2]) for r in rows))
        except ValidationError as err:
            ctx.fail(str(err), path)
    _known_keys(ctx, rec, path, {"real", "imag"})
    return complex(_get_number(ctx, rec, path, "real", default=0.0),
                   _get_number(ctx, rec, path, "imag", default=0.0))


def _system(ctx, value, path, units) -> SystemParams:
    rec = _require_mapping(ctx, value, path)
    allowed = {"proof_mass", "cage", "coupling", "proof_mass_temperature",
               "coupling_temperature", "cage_temperature", "amplifier", "gain",
               "cage_disturbance"}
    _known_keys(ctx, rec, path, allowed)
    for key in ("proof_mass", "cage", "coupling"):
        if key not in rec:
            ctx.fail("required key is missing", _join(path, key))
    temps_required = units == "si"
    t_p = _get_number(ctx, rec, path, "proof_mass_temperature",
                      default=None if temps_required else 0.0, required=temps_required)
    t_s = _get_number(ctx, rec, path, "coupling_temperature",
                      default=None if temps_required else 0.0, required=temps_required)
    t_c = None
    if rec.get("cage_temperature") is not None:
        t_c = _get_number(ctx, rec, path, "cage_temperature")

    amp_rec = _require_mapping(ctx, rec.get("amplifier"), _join(path, "amplifier"))
    amp_path = _join(path, "amplifier")
    _known_keys(ctx, amp_rec, amp_path, {"temperature", "frequency", "rho"})
    t_a = _get_number(ctx, amp_rec, amp_path, "temperature",
                      default=None if temps_required else 0.0, required=temps_required)
    freq = _get_number(ctx, amp_rec, amp_path, "frequency", required=True)
    rho = _get_number(ctx, amp_rec, amp_path, "rho", default=1.0)
    try:
        amp = AmplifierParams(t_a, freq, rho)
    except ValidationError as err:
        key = ("rho" if "matching ratio" in str(err)
               else "frequency" if "frequency" in str(err) else "temperature")
        ctx.fail(str(err), _join(amp_path, key), amp_rec, key)

    disturbance = None
    if rec.get("cage_disturbance") is not None:
        drec = _require_mapping(ctx, rec["cage_disturbance"], _join(path, "cage_disturbance"))
        _known_keys(ctx, drec, _join(path, "cage_disturbance"), {"points"})
        rows = _pairs(ctx, drec.get("points"), _join(path, "cage_disturbance.points"), 2)
        try:
            disturbance = TabulatedSpectrum(tuple(r[0] for r in rows),
                                            tuple(r[1] for r in rows))
        except ValidationError as err:
            ctx.fail(str(err), _join(path, "cage_disturbance"))

    try:
        return SystemParams(
            proof_mass=_impedance(ctx, rec["proof_mass"], _join(path, "proof_mass")),
            cage=_impedance(ctx, rec["cage"], _join(path, "cage")),
            coupling=_impedance(ctx, rec["coupling"], _join(path, "coupling")),
            proof_mass_temperature=t_p,
            coupling_temperature=t_s,
            amplifier=amp,
            gain=_gain(ctx, rec.get("gain", 0.0), _join(path, "gain")),
            cage_temperature=t_c,
            cage_disturbance=disturbance,
        )
    except ConfigError:
        raise
    except ValidationError as err:
        ctx.fail(str(err), path)


def parse_config(text: str, filename: str | None = None) -> RunConfig:
    """Parse and validate a run configuration document."""
    loader = _MarkedLoader(text)
    try:
        data = loader.get_single_data()
    except yaml.YAMLError as err:
        mark = getattr(err, "problem_mark", None)
        raise ConfigError(f"config syntax error: {err}",
                          line=None if mark is None else mark.line + 1,
                          filename=filename) from err
    finally:
        loader.dispose()
    ctx = _Ctx(loader.key_lines, filename)
    root = _require_mapping(ctx, data, "<document>")
    _known_keys(ctx, root, "", {"units", "target", "regime", "system", "grid"})

    units = _get_choice(ctx, root, "", "units", UNITS_CHOICES, default="natural")
    target = _get_choice(ctx, root, "", "target", TARGET_CHOICES, default="proof-mass")
    regime = _get_choice(ctx, root, "", "regime", REGIME_CHOICES, default="high-gain")

    if "system" not in root:
        ctx.fail("required key is missing", "system")
    system = _system(ctx, root["system"], "system", units)

    if "grid" not in root:
        ctx.fail("required key is missing", "grid")
    grec = _require_mapping(ctx, root["grid"], "grid")
    _known_keys(ctx, grec, "grid", {"omega_min", "omega_max", "points", "spacing"})
    omega_min = _get_number(ctx, grec, "grid", "omega_min", required=True)
    omega_max = _get_number(ctx, grec, "grid", "omega_max", required=True)
    points = _get_int(ctx, grec, "grid", "points", required=True)
    spacing = _get_choice(ctx, grec, "grid", "spacing", SPACING_CHOICES, default="log")
    if omega_min <= 0:
        ctx.fail(f"must be > 0, got {omega_min!r}", "grid.omega_min", grec, "omega_min")
    if points < 1:
        ctx.fail(f"must be >= 1, got {points!r}", "grid.points", grec, "points")
    if points == 1:
        if omega_max != omega_min:
            ctx.fail("a single-point grid needs omega_max == omega_min",
                     "grid.omega_max", grec, "omega_max")
    elif omega_max <= omega_min:
        ctx.fail(f"must be > omega_min, got {omega_max!r}", "grid.omega_max",
                 grec, "omega_max")
    grid = GridSpec(omega_min, omega_max, points, spacing)
    return RunConfig(system=system, grid=grid, units=units, target=target, regime=regime)


def load_config(path: str) -> RunConfig:
    """Read and parse a configuration file."""
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), filename=path)


def _impedance_record(model: Impedance) -> dict:
    if isinstance(model, Mass):
        return {"type": "mass", "mass": model.mass}
    if isinstance(model, Damper):
        return {"type": "damper", "damping": model.damping}
    if isinstance(model, Spring):
        return {"type": "spring", "stiffness": model.stiffness}
    if isinstance(model, SumImpedance):
        return {"type": "sum", "terms": [_impedance_record(t) for t in model.terms]}
    if isinstance(model, Tabulated):
        return {"type": "tabulated",
                "points": [[w, v.real, v.imag] for w, v in zip(model.omegas, model.values)]}
    raise ValidationError(f"cannot serialize impedance model {model!r}")


def config_to_dict(cfg: RunConfig) -> dict:
    """Canonical plain-data form; parse_config(emit) round-trips it."""
    sys_rec = {
        "proof_mass": _impedance_record(cfg.system.proof_mass),
        "cage": _impedance_record(cfg.system.cage),
        "coupling": _impedance_record(cfg.system.coupling),
        "proof_mass_temperature": cfg.system.proof_mass_temperature,
        "coupling_temperature": cfg.system.coupling_temperature,
        "amplifier": {
            "temperature": cfg.system.amplifier.noise_temperature,
            "frequency": cfg.system.amplifier.operating_frequency,
            "rho": cfg.system.amplifier.matching_ratio,
        },
    }
    if cfg.system.cage_temperature is not None:
        sys_rec["cage_temperature"] = cfg.system.cage_temperature
    gain = cfg.system.gain
    if isinstance(gain, TabulatedGain):
        sys_rec["gain"] = {"points": [[w, v.real, v.imag]
                                      for w, v in zip(gain.omegas, gain.values)]}
    elif gain.imag != 0.0:
        sys_rec["gain"] = {"real": gain.real, "imag": gain.imag}
    else:
        sys_rec["gain"] = gain.real
    if cfg.system.cage_disturbance is not None:
        dist = cfg.system.cage_disturbance
        if not isinstance(dist, TabulatedSpectrum):
            raise ValidationError("only tabulated cage disturbances can be serialized")
        sys_rec["cage_disturbance"] = {"points": [[w, v]
                                                  for w, v in zip(dist.omegas, dist.values)]}
    return {
        "units": cfg.units,
        "target": cfg.target,
        "regime": cfg.regime,
        "system": sys_rec,
        "grid": {
            "omega_min": cfg.grid.omega_min,
            "omega_max": cfg.grid.omega_max,
            "points": cfg.grid.points,
            "spacing": cfg.grid.spacing,
        },
    }


def emit_config(cfg: RunConfig) -> str:
    """Emit the canonical YAML form of a RunConfig."""
    return yaml.safe_dump(config_to_dict(cfg), sort_keys=False, default_flow_style=False)
