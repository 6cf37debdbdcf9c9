"""Broadband airborne ultrasound beam-steering simulator and analysis toolkit.

Simulates the transmit chain of a staggered two-row MEMS loudspeaker
array: element geometry, per-element time delays and their integer-sample
quantization, waveform synthesis, 12-bit DAC code matrices, far-field
frequency-angle energy maps, and a virtual pan-tilt measurement with a
point receiver, plus the spectral and beam-pattern analytics to verify
grating-lobe behavior.
"""

__version__ = "0.1.0"

from .analysis import (
    LobeReport,
    band_power_pattern,
    grating_onset_from_map,
    lobe_metrics,
    spectrogram,
    sweep_frequency_map,
    welch_psd,
)
from .emission import (
    DacMatFormatError,
    EmissionMatrix,
    assemble_emission_matrix,
    read_dacmat,
    write_dacmat,
)
from .fieldsim import (
    FieldGrid,
    ReceiverSpec,
    frequency_angle_map,
    narrowband_array_factor,
    pan_tilt_sweep,
    synthesize_received_signal,
)
from .geometry import ArrayGeometry, Vec3, build_staggered_array, projected_pitch
from .steering import (
    SPEED_OF_SOUND,
    DelayProfile,
    SampleDelayProfile,
    SteerAngles,
    horizontal_plane_delays,
    nyquist_steering_limit,
    quantize_delays,
    steering_vector,
    transmit_delays,
    visible_grating_onset,
)
from .waveform import (
    ChirpSpec,
    DacCodes,
    Waveform,
    dequantize_dac,
    log_chirp,
    multisine,
    quantize_to_dac,
    sine_burst,
)

__all__ = [
    "__version__",
    "ArrayGeometry",
    "Vec3",
    "build_staggered_array",
    "projected_pitch",
    "SPEED_OF_SOUND",
    "SteerAngles",
    "DelayProfile",
    "SampleDelayProfile",
    "steering_vector",
    "transmit_delays",
    "horizontal_plane_delays",
    "quantize_delays",
    "nyquist_steering_limit",
    "visible_grating_onset",
    "Waveform",
    "ChirpSpec",
    "DacCodes",
    "log_chirp",
    "sine_burst",
    "multisine",
    "quantize_to_dac",
    "dequantize_dac",
    "EmissionMatrix",
    "DacMatFormatError",
    "assemble_emission_matrix",
    "write_dacmat",
    "read_dacmat",
    "FieldGrid",
    "ReceiverSpec",
    "narrowband_array_factor",
    "frequency_angle_map",
    "synthesize_received_signal",
    "pan_tilt_sweep",
    "LobeReport",
    "welch_psd",
    "spectrogram",
    "lobe_metrics",
    "grating_onset_from_map",
    "band_power_pattern",
    "sweep_frequency_map",
]
