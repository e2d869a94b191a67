"""Overlapped-MIMO radar beampatterns and null-space projection for
radar/communications spectrum sharing."""

from omimo.array_model import (
    UniformLinearArray,
    steering_vector,
    virtual_steering_full_mimo,
)
from omimo.waveforms import PulseShape, WaveformBank, gram_matrix, matched_filter
from omimo.overlapped import (
    SubarrayPartition,
    VirtualSteering,
    beampattern,
    beampattern_ula_closed_form,
    build_mixing_matrix,
    c_vector,
    diversity_vector,
    effective_aperture,
    make_partition,
    optimal_subarrays,
    transmit_weights,
    virtual_steering,
)
from omimo.nsp import (
    Feasibility,
    ProjectionMatrix,
    feasibility,
    null_space_dim,
    null_space_projection,
    project_signal,
)

__version__ = "0.1.0"

__all__ = [
    "UniformLinearArray",
    "steering_vector",
    "virtual_steering_full_mimo",
    "PulseShape",
    "WaveformBank",
    "gram_matrix",
    "matched_filter",
    "SubarrayPartition",
    "VirtualSteering",
    "beampattern",
    "beampattern_ula_closed_form",
    "build_mixing_matrix",
    "c_vector",
    "diversity_vector",
    "effective_aperture",
    "make_partition",
    "optimal_subarrays",
    "transmit_weights",
    "virtual_steering",
    "Feasibility",
    "ProjectionMatrix",
    "feasibility",
    "null_space_dim",
    "null_space_projection",
    "project_signal",
]
