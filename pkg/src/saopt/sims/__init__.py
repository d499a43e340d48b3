"""Evaluation targets: two stochastic plant simulators and a PSA-shaped proxy."""

from .plant import (
    CPS1_GENES,
    CPS2_GENES,
    MAINTENANCE_MAX_HOURS,
    CostTable,
    CpsConfig,
    SimOutcome,
    alpha_mean,
    check_genome,
    default_config_path,
    load_cps_config,
    maintenance_pause,
    revenue,
    run_trains,
    sample_alpha,
    simulate_cps1,
    simulate_cps2,
    write_outcomes_csv,
)
from .psa import (
    PSA_GENES,
    MoleAccounting,
    analytic_front,
    evaluate_psa_proxy,
    normalize_objectives,
    psa_objectives,
    purity,
    recovery,
)
