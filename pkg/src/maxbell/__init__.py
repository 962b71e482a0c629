"""Tree maximal operator, its Bellman function, and sharp integral inequalities
evaluated exactly on step functions over the homogeneous m-adic tree."""
from ._accel import HAVE_NUMBA, USE_NUMBA
from .bellman import (
    Params,
    a0,
    bellman_value,
    coefficients_18,
    beta_balance_sides,
    g_beta,
    h_p,
    omega_p,
    solve_beta,
)
from .extremal import (
    SpineSpec,
    extremal_experiment,
    extremal_sequence,
    q_integral_track,
    spine_construct,
    stability_metric,
)
from .hardy import PowerLaw, hardy_average, ineq_110_report, sharpness_g, sharpness_sweep
from .maximal import (
    GapReport,
    Linearization,
    linearization_slack,
    linearize,
    lp_bound_gap,
    maximal_function,
    maximal_function_bruteforce,
    weak_type_gap,
)
from .tree import (
    NodeId,
    Rearranged,
    StepFunction,
    TreeConfig,
    decreasing_rearrangement,
    integrate,
    make_tree,
    node_measure,
    power_integral,
)
from .verify import elementary_oracles, ineq_18_report, ineq_41_report, theorem_a_report

__version__ = "0.1.0"
