"""Ramsey-fringe formation in a quantum-dot optical amplifier, on a desk.

A 1-D FDTD Maxwell-Bloch simulator: two delayed ultrashort pulses propagate
through an electrically pumped, inhomogeneously broadened two-level-emitter
ensemble, and the analysis pipeline extracts fringe visibility, coherence
time and the intensity/separation phase lag from the output records.
"""

from .analysis import (
    CoherenceFit,
    EnvelopeRecord,
    FringeRecord,
    FringeSeriesFit,
    demodulate,
    fit_coherence,
    fringe_series,
    window_observables,
    xfrog_trace,
)
from .errors import (
    ConfigError,
    NumericalBlowupError,
    OverlapError,
    PhysicsInvariantError,
    ValidationError,
    WindowError,
)
from .grid import GridLayout, GridSpec, make_grid, make_uniform_grid
from .medium import (
    EnsembleSpec,
    MediumSpec,
    SpectralGroup,
    build_ensemble,
    calibrate_dipole_moment,
    pump_rate_for_inversion,
    small_signal_gain,
    steady_state_occupations,
)
from .pulses import (
    PulseSpec,
    ScanPlan,
    apply_phase_mask,
    compose_pair,
    plan_scan,
    synthesize,
)
from .solver import (
    FieldState,
    ProbeTap,
    PropagationResult,
    run_propagation,
    step_bloch,
    step_field,
)

__version__ = "0.1.0"
