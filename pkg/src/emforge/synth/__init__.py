"""Ground-truth-labeled signal synthesis: modulations, radar trains,
protocol bursts, jamming scenes, noise, and channel/device impairments."""

from .channel import apply_awgn, complex_gaussian, gen_noise
from .impairments import CFO_CARRIER_FRACTION, DeviceProfile, apply_device_profile
from .jamming import JAMMER_KINDS, Jammer, JammingScene, gen_jamming_scene
from .modulations import (
    ANALOG_KINDS,
    BITS_PER_SYMBOL,
    CPM_KINDS,
    LINEAR_KINDS,
    ModulationKind,
    constellation,
    cyclic_filter,
    modulate,
    rrc_taps,
)
from .protocol import (
    PROTOCOL_CLASSES,
    ProtocolBurstSpec,
    default_burst_spec,
    gen_protocol_burst,
)
from .radar import (
    Cw,
    IntraPulse,
    Lfm,
    PhaseCode,
    RadarPulseSpec,
    gen_radar_pulse_train,
    pulse_support_indices,
)

__all__ = [
    "ANALOG_KINDS",
    "BITS_PER_SYMBOL",
    "CFO_CARRIER_FRACTION",
    "CPM_KINDS",
    "Cw",
    "DeviceProfile",
    "IntraPulse",
    "JAMMER_KINDS",
    "Jammer",
    "JammingScene",
    "LINEAR_KINDS",
    "Lfm",
    "ModulationKind",
    "PROTOCOL_CLASSES",
    "PhaseCode",
    "ProtocolBurstSpec",
    "RadarPulseSpec",
    "apply_awgn",
    "apply_device_profile",
    "complex_gaussian",
    "constellation",
    "cyclic_filter",
    "default_burst_spec",
    "gen_jamming_scene",
    "gen_noise",
    "gen_protocol_burst",
    "gen_radar_pulse_train",
    "modulate",
    "pulse_support_indices",
    "rrc_taps",
]
