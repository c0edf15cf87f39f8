"""Two-node qubit/SAW-resonator experiment simulator and analysis toolkit."""

__version__ = "0.1.0"

from .config import Config, load_config
from .device import ConfigError, DeviceParams, NodeParams, PulseDefaults, SawDesign

__all__ = [
    "Config",
    "ConfigError",
    "DeviceParams",
    "NodeParams",
    "PulseDefaults",
    "SawDesign",
    "load_config",
    "__version__",
]
