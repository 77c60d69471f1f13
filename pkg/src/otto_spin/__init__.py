"""Quantum Otto engine with a coupled two-spin Heisenberg working medium."""
from .otto_cycle import (
    BoundAudit,
    CycleParams,
    CycleResult,
    RegimeReport,
    SignLink,
    bound_audit,
    classify,
    efficiency_bound,
    run_cycle,
    sign_link,
)
from .spin_model import (
    DomainError,
    LevelProbabilities,
    ModelPoint,
    SingleSpinState,
    Spectrum,
    gibbs_state_oracle,
    local_temperature,
    reduced_state,
    spectrum,
    thermal_probs,
)
from .sweep import Crossover, SweepRow, SweepSpec, find_crossover, run_sweep

__version__ = "0.1.0"
