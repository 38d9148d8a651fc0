"""Numerical laboratory for resonant energy beating in the quintic NLS on the circle.

Layers, from exact to floating:

* :mod:`nlsbeat.resonance`   -- integer certificates: resonant sextuples,
  cluster families, closure verification, admissible-sequence search.
* :mod:`nlsbeat.model`       -- the one-degree-of-freedom beating model:
  phase-plane flow, half-periods, band edges, period inversion, and the
  four-mode action-angle oracle it reduces from.
* :mod:`nlsbeat.spectral`    -- de-aliased split-step Fourier integrator
  for  i u_t + u_xx = nu |u|^4 u  with conservation diagnostics.
* :mod:`nlsbeat.experiments` -- beating scenarios: initial data, PDE-vs-
  model comparison, leakage scaling, scheduling, report artifacts.
* :mod:`nlsbeat.cli`         -- the ``nlsbeat`` command.
"""

__version__ = "0.1.0"

from .errors import (
    ActionSingularityError,
    AmplitudeUnderflowError,
    BlowUpError,
    BranchScanError,
    ConfigError,
    DomainError,
    HeteroclinicError,
    LabError,
    OscillationBandError,
    OverflowGuardError,
    PeriodDivergenceError,
    PeriodUnreachableError,
    ReportWriteError,
    ShortSeriesError,
)
from .resonance import (
    Cluster,
    ClusterFamily,
    ResonantSextuple,
    closure_violations,
    cluster,
    growth_ok,
    intra_cluster_check,
    is_perfect_square,
    is_resonant,
    next_admissible,
    pair_solutions,
)
from .model import (
    MODEL_TIME_DILATION,
    ActionAngleState,
    ModelParams,
    PhasePlaneState,
    actions_from,
    cluster_params,
    full_model_integrate,
    gamma,
    half_period,
    hstar,
    integrate,
    invert_period,
    limit_period,
    reduce_state,
    separatrix_level,
    vector_field,
)
from .spectral import (
    EvolutionRecord,
    SimParams,
    SpectralField,
    evolve,
    hamiltonian,
    linear_step,
    nonlinear_step,
    quintic_product,
    strang_step,
)
from .experiments import (
    BeatingReport,
    LeakageCheck,
    ScenarioConfig,
    Schedule,
    beating_window_check,
    commensurate_schedule,
    conserved_triple,
    emit_report,
    estimate_period,
    leakage_check,
    load_report,
    multi_cluster_initial_data,
    run_beating,
    single_cluster_initial_data,
)

__all__ = [name for name in dir() if not name.startswith("_")]
