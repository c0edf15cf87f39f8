"""Device and resonator-design parameter records.

All quantities are stored in SI units (Hz, s, m). The shipped default
configuration file carries the human-friendly units (GHz, MHz, ns, us, um)
and is converted on load by :mod:`phononlab.config`.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields

__all__ = ["NodeParams", "DeviceParams", "SawDesign", "PulseDefaults", "ConfigError"]


class ConfigError(ValueError):
    """Raised for invalid, missing, or unknown configuration values."""


@dataclass(frozen=True)
class NodeParams:
    """One node: a tunable three-level qubit coupled to one mechanical mode."""

    name: str
    f_qubit_idle: float          # qubit g-e idle frequency (Hz)
    anharmonicity: float         # f_ef - f_ge (Hz, negative)
    t1_qubit: float              # intrinsic qubit lifetime (s)
    t2_ramsey: float             # qubit Ramsey dephasing time (s)
    t1_f_state: float            # f-state lifetime (s)
    t1_e_during_swap: float      # e-state lifetime while the coupler is active (s)
    f_resonator: float           # mechanical resonator frequency (Hz)
    t1_resonator: float          # resonator energy relaxation time (s)
    t2_resonator: float          # resonator dephasing time (s)
    g_ge: float                  # max qubit-resonator coupling, g-e transition (Hz)
    g_ef: float                  # qubit-resonator coupling, e-f transition (Hz)
    readout_fidelity_g: float
    readout_fidelity_e: float
    readout_fidelity_f: float
    swap_duration: float         # calibrated full-swap coupler window (s)

    def validate(self) -> None:
        positive = [
            "f_qubit_idle", "t1_qubit", "t2_ramsey", "t1_f_state",
            "t1_e_during_swap", "f_resonator", "t1_resonator", "t2_resonator",
            "g_ge", "g_ef", "swap_duration",
        ]
        for name in positive:
            if getattr(self, name) <= 0:
                raise ConfigError(f"node {self.name}: {name} must be > 0")
        if self.anharmonicity >= 0:
            raise ConfigError(f"node {self.name}: anharmonicity must be negative")
        if self.t2_ramsey > 2 * self.t1_qubit + 1e-15:
            raise ConfigError(f"node {self.name}: qubit T2 exceeds 2*T1")
        if self.t2_resonator > 2 * self.t1_resonator + 1e-15:
            raise ConfigError(f"node {self.name}: resonator T2m exceeds 2*T1m")
        for name in ("readout_fidelity_g", "readout_fidelity_e", "readout_fidelity_f"):
            v = getattr(self, name)
            if not 0.5 < v <= 1.0:
                raise ConfigError(f"node {self.name}: {name}={v} outside (0.5, 1]")

    @property
    def f_ef(self) -> float:
        """e-f transition frequency at idle (Hz)."""
        return self.f_qubit_idle + self.anharmonicity

    @property
    def qubit_pure_dephasing_rate(self) -> float:
        """1/T2R - 1/(2 T1), using the intrinsic T1 (s^-1)."""
        rate = 1.0 / self.t2_ramsey - 0.5 / self.t1_qubit
        if rate < 0:
            raise ConfigError(f"node {self.name}: negative qubit pure-dephasing rate")
        return rate

    @property
    def resonator_pure_dephasing_rate(self) -> float:
        rate = 1.0 / self.t2_resonator - 0.5 / self.t1_resonator
        if rate < 0:
            raise ConfigError(f"node {self.name}: negative resonator pure-dephasing rate")
        return rate


@dataclass(frozen=True)
class DeviceParams:
    """Both nodes plus the fixed qubit-qubit coupling."""

    node_a: NodeParams
    node_b: NodeParams
    g_qubit_qubit: float  # Hz

    def validate(self) -> None:
        self.node_a.validate()
        self.node_b.validate()
        if self.g_qubit_qubit <= 0:
            raise ConfigError("g_qubit_qubit must be > 0")
        # Trip the dephasing-rate sign checks at load time.
        for node in (self.node_a, self.node_b):
            node.qubit_pure_dephasing_rate
            node.resonator_pure_dephasing_rate

    def node(self, which: str) -> NodeParams:
        which = which.upper()
        if which == "A":
            return self.node_a
        if which == "B":
            return self.node_b
        raise KeyError(f"unknown node {which!r}")


@dataclass(frozen=True)
class PulseDefaults:
    """Shared pulse-shaping conventions used by the schedule builders."""

    coupler_rise: float = 1e-9      # coupler gate linear ramp time (s)
    z_ramp: float = 2e-9            # qubit frequency move duration (s)
    xy_mode: str = "instant"        # 'instant' or 'gaussian'
    xy_sigma: float = 5e-9          # Gaussian XY pulse sigma (s)
    displacement_mode: str = "instant"
    displacement_sigma: float = 10e-9

    def validate(self) -> None:
        if self.coupler_rise <= 0 or self.z_ramp <= 0:
            raise ConfigError("pulse ramp times must be > 0")
        if self.xy_mode not in ("instant", "gaussian"):
            raise ConfigError(f"unknown xy_mode {self.xy_mode!r}")
        if self.displacement_mode not in ("instant", "gaussian"):
            raise ConfigError(f"unknown displacement_mode {self.displacement_mode!r}")


@dataclass(frozen=True)
class SawDesign:
    """Geometry and per-element scattering parameters of one SAW resonator."""

    name: str
    wavelength: float            # design SAW wavelength lambda0 (m)
    cavity_length: float         # inner mirror-to-mirror distance (m)
    sound_speed: float           # SAW velocity (m/s)
    k2: float                    # piezoelectric coupling coefficient (dimensionless)
    idt_finger_pairs: int
    mirror_lines: int            # reflective lines per mirror
    idt_pitch: float             # finger center-to-center spacing (m)
    mirror_pitch: float          # mirror line spacing (m)
    idt_duty: float = 0.5
    mirror_duty: float = 0.5
    aperture: float = 180e-6     # m
    metal_thickness: float = 10e-9  # m
    r_idt: complex = -0.042j     # reflection per IDT finger
    r_mirror: complex = -0.0267j  # reflection per mirror line
    cap_per_pair: float = 4.6e-10 * 180e-6  # static capacitance per finger pair (F)
    propagation_loss: float = 0.0  # amplitude loss per meter (1/m)

    def validate(self) -> None:
        if self.wavelength <= 0 or self.sound_speed <= 0:
            raise ConfigError(f"saw {self.name}: wavelength and sound speed must be > 0")
        if self.cavity_length <= 0 or self.idt_pitch <= 0 or self.mirror_pitch <= 0:
            raise ConfigError(f"saw {self.name}: lengths must be > 0")
        for r, label in ((self.r_idt, "r_idt"), (self.r_mirror, "r_mirror")):
            if abs(r) >= 1:
                raise ConfigError(f"saw {self.name}: |{label}| must be < 1")
        if self.idt_finger_pairs < 1 or self.mirror_lines < 1:
            raise ConfigError(f"saw {self.name}: element counts must be >= 1")
        if self.idt_extent >= self.cavity_length:
            raise ConfigError(f"saw {self.name}: IDT does not fit inside the cavity")

    @property
    def f0_idt(self) -> float:
        """IDT synchronous frequency v/lambda0 (Hz)."""
        return self.sound_speed / self.wavelength

    @property
    def f0_mirror(self) -> float:
        """Mirror Bragg frequency v/(2 p_mirror) (Hz)."""
        return self.sound_speed / (2.0 * self.mirror_pitch)

    @property
    def idt_extent(self) -> float:
        """Distance between the outermost IDT finger centers (m)."""
        return (2 * self.idt_finger_pairs - 1) * self.idt_pitch

    @property
    def gap_length(self) -> float:
        """Free propagation length between each mirror and the IDT (m)."""
        return 0.5 * (self.cavity_length - self.idt_extent)


def _field_names(cls) -> set[str]:
    return {f.name for f in fields(cls)}
