"""Conditional squeezing of a levitated mechanical oscillator.

A pulsed blue-detuned drive entangles the oscillator with one temporal
mode of the light leaking from the cavity; homodyne detection of that mode
projects the mechanics onto a squeezed thermal state.  The package
computes the joint Gaussian state from the linear quantum Langevin
dynamics without adiabatic elimination of the cavity, applies detection
loss and mode mismatch, and quantifies the resulting conditional
squeezing.
"""

from .conditioning import (
    ConditionalResult,
    condition_homodyne,
    condition_homodyne_pseudoinverse,
    phase_scan,
    squeezing_db,
)
from .core import (
    JointCM,
    NoiseSpec,
    PhysicalityReport,
    SystemParams,
    physicality_check,
    symplectic_eigenvalues,
)
from .covariance import (
    FilteredState,
    apply_loss,
    assemble_cm,
    binned_cm,
    cm_json,
    cross_block,
    filtered_state,
    mechanical_block,
    output_block,
)
from .expsum import ExpSum
from .modes import (
    GainReport,
    TemporalMode,
    adiabatic_input_mode,
    adiabatic_output_mode,
    amplification_gain,
    mode_overlap,
    optimal_input_mode,
    optimal_output_mode,
    pulse_duration_for_gain,
)
from .propagator import Propagator, drift_matrix, m13_closed_form, rate_lambda
from .sweep import (
    PRESETS,
    SweepConfig,
    SweepRow,
    emit_mode_profiles,
    run_point,
    run_sweep,
    selftest,
)

__version__ = "0.1.0"

__all__ = [
    "ConditionalResult",
    "ExpSum",
    "FilteredState",
    "GainReport",
    "JointCM",
    "NoiseSpec",
    "PhysicalityReport",
    "PRESETS",
    "Propagator",
    "SweepConfig",
    "SweepRow",
    "SystemParams",
    "TemporalMode",
    "adiabatic_input_mode",
    "adiabatic_output_mode",
    "amplification_gain",
    "apply_loss",
    "assemble_cm",
    "binned_cm",
    "cm_json",
    "condition_homodyne",
    "condition_homodyne_pseudoinverse",
    "cross_block",
    "drift_matrix",
    "emit_mode_profiles",
    "filtered_state",
    "m13_closed_form",
    "mechanical_block",
    "mode_overlap",
    "optimal_input_mode",
    "optimal_output_mode",
    "output_block",
    "phase_scan",
    "physicality_check",
    "pulse_duration_for_gain",
    "rate_lambda",
    "run_point",
    "run_sweep",
    "selftest",
    "squeezing_db",
    "symplectic_eigenvalues",
    "__version__",
]
