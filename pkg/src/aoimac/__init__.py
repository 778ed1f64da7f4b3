"""Age-of-information scheduling for a grid-powered node and an energy
harvesting status updater sharing a multiple access channel."""
from .channel import (
    BOTH,
    DECISIONS,
    IDLE,
    ONLY_S1,
    ONLY_S2,
    STRONG_MPR,
    WEAK_MPR,
    Decision,
    LinkBudget,
    SuccessMatrix,
    build_matrix,
    conditional_probs,
    interfered_success,
    mpr_class,
    mpr_ratio_sum,
    solo_success,
)
from .analysis import (
    AnalyticInputs,
    OptimalProbabilities,
    RenewalMoments,
    avg_aoi_closed_form,
    avg_aoi_moment_path,
    avg_paoi_closed_form,
    grid_search_optimum,
    is_stable,
    optimal_probabilities,
    pmf_T,
    prob_queue_nonempty,
    renewal_moments,
    s2_success_prob,
    service_probability,
    stability_threshold,
)
from .engine import (
    Metrics,
    NetworkState,
    SimConfig,
    SlotEvents,
    Streams,
    run,
    run_reference,
    settling_time,
    step,
    trace,
)
from .pra import PraParams, PraPolicy, pra_decide
from .dpp import (
    DppAoiParams,
    DppAoiPolicy,
    DppPaoiParams,
    DppPaoiPolicy,
    alpha_select,
    backlog_bound,
    dpp_aoi_decide,
    dpp_paoi_decide,
    virtual_queue_update,
)

__version__ = "0.1.0"
