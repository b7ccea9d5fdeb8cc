"""Config file parsing and the desk-scale default run configuration.

Format: UTF-8, one ``section.key = value`` per line, ``#`` comments, blank
lines ignored.  Values are floats, ints, booleans (true/false), strings, or
comma-separated float lists.  Every key has a default; unknown keys are hard
errors.  The defaults describe the desk-scale scenario: a 100 um slice of
the amplifier, eleven spectral groups on a 1 meV line centered at 1565 nm,
340 fs dephasing, 150 fs pulses at 1550 nm, and the four nominal delays
with 1 fs fine scans.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError
from .medium import EnsembleSpec, MediumSpec
from .pulses import PulseSpec, ScanPlan


@dataclass(frozen=True)
class GridConfig:
    cells_per_wavelength: int = 20
    courant: float = 0.98
    pad_vacuum_m: float = 12e-6
    taper_m: float = 4e-6


@dataclass(frozen=True)
class InjectionConfig:
    mode_area_m2: float = 0.5e-12
    pump_coupling_factor: float = 1.3e-3
    probe_coupling_factor: float = 3.0e-4

    def __post_init__(self):
        if self.mode_area_m2 <= 0:
            raise ConfigError("injection.mode_area_m2 must be > 0")
        if not 0 < self.pump_coupling_factor <= 1:
            raise ConfigError("injection.pump_coupling_factor must be in (0, 1]")
        if not 0 < self.probe_coupling_factor <= 1:
            raise ConfigError("injection.probe_coupling_factor must be in (0, 1]")


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "results"
    emit_spectrograms: bool = False
    emit_field_dumps: bool = False
    separation_mode: str = "peak"  # or "centroid"

    def __post_init__(self):
        if self.separation_mode not in ("peak", "centroid"):
            raise ConfigError("outputs.separation_mode must be 'peak' or 'centroid'")


@dataclass(frozen=True)
class RunConfig:
    medium: MediumSpec
    ensemble: EnsembleSpec
    grid: GridConfig
    pump: PulseSpec
    probe: PulseSpec
    injection: InjectionConfig
    scan: ScanPlan
    outputs: OutputConfig
    parallelism: int = 0  # 0 = one worker per CPU


# (section, key) -> (type tag, default); types: f float, i int, b bool,
# s string, fl float list
_SCHEMA = {
    "medium": {
        "length_m": ("f", 100e-6),
        "background_index": ("f", 3.2),
        "dot_sheet_density_per_m2": ("f", 6e14),
        "num_layers": ("i", 6),
        "modal_gain_peak_per_m": ("f", 9000.0),
        "pump_rate_per_s": ("f", 4.5428e9),
        "tau_res_to_es_s": ("f", 2e-12),
        "tau_es_to_gs_s": ("f", 1e-12),
        "tau_recomb_s": ("f", 200e-12),
        "t2_s": ("f", 340e-15),
        "tpa_coeff_m_per_W": ("f", 0.0),
        "kerr_index_m2_per_W": ("f", 0.0),
        "facet_reflectivity": ("f", 1e-4),
    },
    "ensemble": {
        "center_wavelength_m": ("f", 1.565e-6),
        "inhomog_fwhm_eV": ("f", 1e-3),
        "num_groups": ("i", 11),
    },
    "grid": {
        "cells_per_wavelength": ("i", 20),
        "courant": ("f", 0.98),
        "pad_vacuum_m": ("f", 12e-6),
        "taper_m": ("f", 4e-6),
    },
    "pump": {
        "center_wavelength_m": ("f", 1.55e-6),
        "fwhm_s": ("f", 150e-15),
        "energy_J": ("f", 35e-12),
        "carrier_phase_rad": ("f", 0.0),
        "spectral_phase_coeffs": ("fl", ()),
    },
    "probe": {
        "center_wavelength_m": ("f", 1.55e-6),
        "fwhm_s": ("f", 150e-15),
        "energy_J": ("f", 20e-12),
        "carrier_phase_rad": ("f", 0.0),
        "spectral_phase_coeffs": ("fl", ()),
    },
    "injection": {
        "mode_area_m2": ("f", 0.5e-12),
        "pump_coupling_factor": ("f", 1.3e-3),
        "probe_coupling_factor": ("f", 3.0e-4),
    },
    "scan": {
        "nominal_delays_s": ("fl", (600e-15, 650e-15, 750e-15, 900e-15)),
        "fine_span_s": ("f", 12e-15),
        "fine_step_s": ("f", 1e-15),
    },
    "outputs": {
        "directory": ("s", "results"),
        "emit_spectrograms": ("b", False),
        "emit_field_dumps": ("b", False),
        "separation_mode": ("s", "peak"),
    },
    "": {
        "parallelism": ("i", 0),
    },
}


def _parse_value(tag: str, raw: str, line_no: int):
    raw = raw.strip()
    try:
        if tag == "f":
            return float(raw)
        if tag == "i":
            val = float(raw)
            if val != int(val):
                raise ValueError("not an integer")
            return int(val)
        if tag == "b":
            low = raw.lower()
            if low in ("true", "1", "yes"):
                return True
            if low in ("false", "0", "no"):
                return False
            raise ValueError("not a boolean")
        if tag == "s":
            return raw.strip("\"'")
        if tag == "fl":
            if not raw:
                return ()
            return tuple(float(x) for x in raw.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad value {raw!r}: {exc}", line=line_no) from None
    raise ConfigError(f"unknown schema tag {tag}", line=line_no)


def parse_config(text: str) -> RunConfig:
    """Parse and fully validate a config; omitted keys take their defaults."""
    values: dict[tuple[str, str], object] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"expected 'key = value', got {stripped!r}", line=line_no)
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if "." in key:
            section, name = key.split(".", 1)
        else:
            section, name = "", key
        if section not in _SCHEMA or name not in _SCHEMA[section]:
            raise ConfigError(f"unknown key {key!r}", line=line_no)
        if (section, name) in values:
            raise ConfigError(f"duplicate key {key!r}", line=line_no)
        tag, _default = _SCHEMA[section][name]
        values[(section, name)] = _parse_value(tag, raw, line_no)

    def section_kwargs(section: str) -> dict:
        out = {}
        for name, (tag, default) in _SCHEMA[section].items():
            out[name] = values.get((section, name), default)
        return out

    try:
        medium = MediumSpec(**section_kwargs("medium"))
        ensemble = EnsembleSpec(**section_kwargs("ensemble"))
        grid = GridConfig(**section_kwargs("grid"))
        pump = PulseSpec(**section_kwargs("pump"))
        probe = PulseSpec(**section_kwargs("probe"))
        injection = InjectionConfig(**section_kwargs("injection"))
        scan = ScanPlan(**section_kwargs("scan"))
        outputs = OutputConfig(**section_kwargs("outputs"))
        parallelism = section_kwargs("")["parallelism"]
        if parallelism < 0:
            raise ConfigError("parallelism must be >= 0")
        return RunConfig(
            medium=medium, ensemble=ensemble, grid=grid, pump=pump, probe=probe,
            injection=injection, scan=scan, outputs=outputs, parallelism=parallelism,
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def default_config() -> RunConfig:
    return parse_config("")


def format_value(tag: str, value) -> str:
    if tag == "fl":
        return ", ".join(repr(v) for v in value)
    if tag == "b":
        return "true" if value else "false"
    if tag == "f":
        return repr(float(value))
    return str(value)


def default_config_text() -> str:
    """The full default config in round-trippable form."""
    lines = [
        "# fringesim run configuration (desk-scale defaults)",
        "# One 'section.key = value' per line; '#' starts a comment.",
        "",
    ]
    for section, keys in _SCHEMA.items():
        for name, (tag, default) in keys.items():
            prefix = f"{section}." if section else ""
            lines.append(f"{prefix}{name} = {format_value(tag, default)}")
        lines.append("")
    return "\n".join(lines)
