"""Riemann solver and Godunov simulator for a two-to-one traffic merge.

The library works in supply-demand space: each link state is the pair
U = (D, S) of its traffic demand and supply, and junction fluxes apportion
the downstream supply among the upstream demands according to a pluggable
merge distribution scheme.
"""

from .analysis import (
    AsymptoticStates,
    ComparisonReport,
    ConvergenceRow,
    ConvergenceTable,
    asymptotic_states,
    compare_to_riemann,
    convergence_study,
    l1_difference,
)
from .ctm import (
    DemandBoundary,
    Link,
    MergeNetwork,
    SupplyBoundary,
    Trajectory,
    cfl_dt,
    run,
    step,
)
from .errors import (
    ConfigurationError,
    DomainError,
    InadmissibleFluxError,
    IncompatibleTrajectoriesError,
    InfeasibleFlowError,
    MalformedStateError,
    OracleFailureError,
    SdmergeError,
    UnsupportedDiagramError,
    UnsupportedModelError,
)
from .fundamental import FundamentalDiagram, diagram_from_spec
from .models import (
    FluxTriple,
    InvarianceResult,
    MergeModel,
    ModelKind,
    check_invariance,
    is_invariant,
    model_from_spec,
    optimal_total_flux,
)
from .riemann import (
    RiemannProblem,
    RiemannSolution,
    Side,
    WaveFan,
    WaveKind,
    check_admissible_interior,
    check_admissible_stationary,
    classify_wave,
    fixed_point_oracle,
    solve,
    stationary_from_flux,
)
from .scenario import LinkSpec, Scenario, load_scenario, loads_scenario
from .state import REL_TOL, Regime, SDState, state_of_density

__version__ = "0.1.0"

__all__ = [
    "AsymptoticStates",
    "ComparisonReport",
    "ConfigurationError",
    "ConvergenceRow",
    "ConvergenceTable",
    "DemandBoundary",
    "DomainError",
    "FluxTriple",
    "FundamentalDiagram",
    "InadmissibleFluxError",
    "IncompatibleTrajectoriesError",
    "InfeasibleFlowError",
    "InvarianceResult",
    "Link",
    "LinkSpec",
    "MalformedStateError",
    "MergeModel",
    "MergeNetwork",
    "ModelKind",
    "OracleFailureError",
    "REL_TOL",
    "Regime",
    "RiemannProblem",
    "RiemannSolution",
    "SDState",
    "Scenario",
    "SdmergeError",
    "Side",
    "SupplyBoundary",
    "Trajectory",
    "UnsupportedDiagramError",
    "UnsupportedModelError",
    "WaveFan",
    "WaveKind",
    "asymptotic_states",
    "cfl_dt",
    "check_admissible_interior",
    "check_admissible_stationary",
    "check_invariance",
    "classify_wave",
    "compare_to_riemann",
    "convergence_study",
    "diagram_from_spec",
    "fixed_point_oracle",
    "is_invariant",
    "l1_difference",
    "load_scenario",
    "loads_scenario",
    "model_from_spec",
    "optimal_total_flux",
    "run",
    "solve",
    "state_of_density",
    "stationary_from_flux",
    "step",
]
