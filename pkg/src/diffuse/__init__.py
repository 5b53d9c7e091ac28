"""Adoption dynamics on random graphs.

Exact simulation of the contact process on explicit graphs, the graph-free
configuration-model exploration coupled to contact clocks, the closed-form and
ODE limit curves, and seeded Monte Carlo ensembles comparing the two.
"""
from .analytic import (
    cycle_limit,
    expected_delta_complete,
    expected_early_time,
    f_sleep,
    g_active,
    j_alpha,
    large_k_limit_check,
    limit_curve,
    logistic_s,
    mean_field_rate,
    mean_field_theta,
    ode_generalized,
    s_tilde,
    theta,
    theta_tilde,
    timing_curve,
)
from .curves import CurveSeries
from .errors import (
    ComponentDeathError,
    DegreeSequenceError,
    DiffuseError,
    EnsembleError,
    InsufficientAdoptionsError,
    ODEStepError,
    SamplingError,
    UnreachableNodesError,
)
from .experiments import (
    EnsembleConfig,
    EnsembleSummary,
    asymmetry_report,
    compare_to_limit,
    early_adoption_study,
    figure3_reproduction,
    run_ensemble,
)
from .exploration import (
    ExplorationHistory,
    ExplorationState,
    coupled_run,
    coupled_run_innovators,
    explore,
    explore_step,
    fluid_deviation,
    initial_state,
    tree_check,
    wake_probability,
)
from .graphs import (
    DegreeSpec,
    Graph,
    check,
    complete_graph,
    cycle_graph,
    pair_configuration,
    read_edgelist,
    sample_simple_connected,
    write_edgelist,
)
from .model import Clock, ModelParams, Variant, replica_rng, replica_seed
from .simulate import simulate, simulate_complete_exact
from .trace import AdoptionTrace, adoption_curve, delta

__version__ = "0.1.0"
