"""Configuration loading and validation.

One TOML file holds the device parameters, pulse conventions, and all SAW
designs. Unknown keys are rejected so a config snapshot fully describes a run.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Mapping

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

from .device import ConfigError, DeviceParams, NodeParams, PulseDefaults, SawDesign

__all__ = ["Config", "load_config", "default_config_path", "apply_overrides"]

GHZ = 1e9
MHZ = 1e6
US = 1e-6
NS = 1e-9
UM = 1e-6
NM = 1e-9

_NODE_KEYS = {
    "qubit_idle_frequency_ghz": ("f_qubit_idle", GHZ),
    "anharmonicity_mhz": ("anharmonicity", MHZ),
    "qubit_t1_us": ("t1_qubit", US),
    "qubit_t2_ramsey_us": ("t2_ramsey", US),
    "f_state_t1_us": ("t1_f_state", US),
    "e_state_t1_during_swap_ns": ("t1_e_during_swap", NS),
    "resonator_frequency_ghz": ("f_resonator", GHZ),
    "resonator_t1_ns": ("t1_resonator", NS),
    "resonator_t2_ns": ("t2_resonator", NS),
    "g_ge_mhz": ("g_ge", MHZ),
    "g_ef_mhz": ("g_ef", MHZ),
    "readout_fidelity_g": ("readout_fidelity_g", 1.0),
    "readout_fidelity_e": ("readout_fidelity_e", 1.0),
    "readout_fidelity_f": ("readout_fidelity_f", 1.0),
    "swap_duration_ns": ("swap_duration", NS),
}

_PULSE_KEYS = {
    "coupler_rise_ns": ("coupler_rise", NS),
    "z_ramp_ns": ("z_ramp", NS),
    "xy_mode": ("xy_mode", None),
    "xy_sigma_ns": ("xy_sigma", NS),
    "displacement_mode": ("displacement_mode", None),
    "displacement_sigma_ns": ("displacement_sigma", NS),
}

_SAW_KEYS = {
    "wavelength_um": ("wavelength", UM),
    "cavity_length_um": ("cavity_length", UM),
    "sound_speed_m_s": ("sound_speed", 1.0),
    "coupling_k2": ("k2", 1.0),
    "idt_finger_pairs": ("idt_finger_pairs", None),
    "mirror_lines": ("mirror_lines", None),
    "idt_pitch_nm": ("idt_pitch", NM),
    "mirror_pitch_nm": ("mirror_pitch", NM),
    "idt_duty": ("idt_duty", 1.0),
    "mirror_duty": ("mirror_duty", 1.0),
    "aperture_um": ("aperture", UM),
    "metal_thickness_nm": ("metal_thickness", NM),
    "idt_reflection": ("r_idt", None),
    "mirror_reflection": ("r_mirror", None),
    "propagation_loss_per_m": ("propagation_loss", 1.0),
}


@dataclass(frozen=True)
class Config:
    device: DeviceParams
    pulses: PulseDefaults
    saw: dict[str, SawDesign]
    raw: dict[str, Any]
    source: str

    def saw_design(self, name: str) -> SawDesign:
        key = name.lower()
        if key not in self.saw:
            raise ConfigError(f"no SAW design named {name!r} in {self.source}")
        return self.saw[key]


def default_config_path() -> Path:
    return Path(importlib.resources.files("phononlab") / "data" / "default_device.toml")


def _reject_unknown(section: Mapping[str, Any], known: Mapping[str, Any], where: str) -> None:
    unknown = sorted(set(section) - set(known))
    if unknown:
        raise ConfigError(f"unknown key(s) in [{where}]: {', '.join(unknown)}")


def _require(section: Mapping[str, Any], key: str, where: str) -> Any:
    if key not in section:
        raise ConfigError(f"missing key {key!r} in [{where}]")
    return section[key]


def _as_number(value: Any, key: str, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"[{where}] {key} must be a number, got {value!r}")
    return float(value)


def _parse_node(section: Mapping[str, Any], name: str, where: str) -> NodeParams:
    _reject_unknown(section, _NODE_KEYS, where)
    kwargs: dict[str, Any] = {"name": name}
    for key, (field, scale) in _NODE_KEYS.items():
        value = _require(section, key, where)
        kwargs[field] = _as_number(value, key, where) * scale
    return NodeParams(**kwargs)


def _parse_pulses(section: Mapping[str, Any], where: str) -> PulseDefaults:
    _reject_unknown(section, _PULSE_KEYS, where)
    kwargs: dict[str, Any] = {}
    for key, (field, scale) in _PULSE_KEYS.items():
        if key not in section:
            continue
        value = section[key]
        if scale is None:
            kwargs[field] = value
        else:
            kwargs[field] = _as_number(value, key, where) * scale
    return PulseDefaults(**kwargs)


def _parse_complex(value: Any, key: str, where: str) -> complex:
    if isinstance(value, str):
        try:
            return complex(value.replace(" ", ""))
        except ValueError as exc:
            raise ConfigError(f"[{where}] {key}: cannot parse complex {value!r}") from exc
    if isinstance(value, (int, float)):
        return complex(value)
    raise ConfigError(f"[{where}] {key} must be a complex-valued string")


def _parse_saw(section: Mapping[str, Any], name: str, where: str) -> SawDesign:
    _reject_unknown(section, _SAW_KEYS, where)
    kwargs: dict[str, Any] = {"name": name}
    for key, (field, scale) in _SAW_KEYS.items():
        if key not in section:
            if key == "propagation_loss_per_m":
                continue
            raise ConfigError(f"missing key {key!r} in [{where}]")
        value = section[key]
        if field in ("r_idt", "r_mirror"):
            kwargs[field] = _parse_complex(value, key, where)
        elif field in ("idt_finger_pairs", "mirror_lines"):
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"[{where}] {key} must be an integer")
            kwargs[field] = value
        else:
            kwargs[field] = _as_number(value, key, where) * scale
    design = SawDesign(**kwargs)
    # Aperture feeds the static capacitance unless explicitly configured.
    return replace(design, cap_per_pair=4.6e-10 * design.aperture)


def load_config(path: str | Path | None = None) -> Config:
    """Load, convert, and validate a device configuration file."""
    src = Path(path) if path is not None else default_config_path()
    if not src.exists():
        raise ConfigError(f"config file not found: {src}")
    try:
        with open(src, "rb") as fh:
            raw = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {src}: {exc}") from exc
    return _build_config(raw, str(src))


def _build_config(raw: Mapping[str, Any], source: str) -> Config:
    known_sections = {"node_a", "node_b", "coupling", "pulses"}
    saw_sections = {k for k in raw if k.startswith("saw_")}
    unknown = sorted(set(raw) - known_sections - saw_sections)
    if unknown:
        raise ConfigError(f"unknown section(s) in {source}: {', '.join(unknown)}")

    for required in ("node_a", "node_b", "coupling"):
        if required not in raw:
            raise ConfigError(f"missing section [{required}] in {source}")

    node_a = _parse_node(raw["node_a"], "A", "node_a")
    node_b = _parse_node(raw["node_b"], "B", "node_b")
    coupling = raw["coupling"]
    _reject_unknown(coupling, {"qubit_qubit_mhz": None}, "coupling")
    g_q = _as_number(_require(coupling, "qubit_qubit_mhz", "coupling"),
                     "qubit_qubit_mhz", "coupling") * MHZ

    device = DeviceParams(node_a=node_a, node_b=node_b, g_qubit_qubit=g_q)
    device.validate()

    pulses = _parse_pulses(raw.get("pulses", {}), "pulses")
    pulses.validate()

    saw: dict[str, SawDesign] = {}
    for section in sorted(saw_sections):
        short = section[len("saw_"):]
        design = _parse_saw(raw[section], short.upper(), section)
        design.validate()
        saw[short] = design

    return Config(device=device, pulses=pulses, saw=saw,
                  raw={k: dict(v) for k, v in raw.items()}, source=source)


def apply_overrides(config: Config, overrides: Mapping[str, str]) -> Config:
    """Re-build a config with dotted-key overrides, e.g. 'node_a.g_ge_mhz=6.0'.

    Values are parsed as TOML scalars so types match the file format.
    """
    if not overrides:
        return config
    raw = {k: dict(v) for k, v in config.raw.items()}
    for dotted, text in overrides.items():
        parts = dotted.split(".")
        if len(parts) != 2:
            raise ConfigError(f"override key must be section.key, got {dotted!r}")
        section, key = parts
        if section not in raw:
            raise ConfigError(f"override section [{section}] not in config")
        try:
            parsed = tomllib.loads(f"value = {text}")["value"]
        except tomllib.TOMLDecodeError:
            parsed = text  # bare strings allowed for convenience
        raw[section][key] = parsed
    return _build_config(raw, config.source + " (+overrides)")
