"""Bell-CHSH tests with locally amplified entangled coherent states.

The package computes dichotomized-homodyne Bell-CHSH values for the state
|alpha, alpha> + |-alpha, -alpha> under local rotations (ideal 2x2 rotations or
Kerr-displacement-Kerr effective rotations), noiseless amplification (full or
first order) and lossy detectors, and cross-checks every result against a
truncated Fock-space oracle.
"""

from .bell import (
    AngleSet,
    BellResult,
    ThresholdResult,
    bell_value,
    optimize_bell,
    required_gain,
    violation_threshold,
)
from .correlators import (
    CorrelationValue,
    OutcomeProbabilities,
    amp_before_rotation_state_check,
    correlation,
    joint_amplitude,
    outcome_probabilities,
)
from .kernels import AmplifierKind, AmplifierModel
from .scenario import Method, Ordering, Rotation, ScenarioConfig

__version__ = "0.1.0"

__all__ = [
    "AmplifierKind",
    "AmplifierModel",
    "AngleSet",
    "BellResult",
    "CorrelationValue",
    "Method",
    "Ordering",
    "OutcomeProbabilities",
    "Rotation",
    "ScenarioConfig",
    "ThresholdResult",
    "amp_before_rotation_state_check",
    "bell_value",
    "correlation",
    "joint_amplitude",
    "optimize_bell",
    "outcome_probabilities",
    "required_gain",
    "violation_threshold",
]
