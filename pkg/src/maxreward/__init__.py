"""Monte-Carlo simulation of maximum-reward motion on 2-D lattices and
continuous Poisson reward fields, with a Bayesian data-gathering layer and a
reproducible experiment harness."""

from .distributions import (
    Bernoulli,
    Constant,
    Exponential,
    Geometric,
    Pareto,
    SeededRng,
    TailClass,
    parse_distribution,
)
from .lattice import (
    LatticeField,
    LatticePlanResult,
    StoppingOutcome,
    StoppingRule,
    estimate_r_star,
    iterative_plan,
    optimal_reward_to_vertex,
    optimal_total_reward,
    r_star_closed_form,
    run_until_suboptimal,
    shape_function_closed_form,
)
from .poisson_field import (
    Cone,
    MarkedPointField,
    RobotConfig,
    Strip,
    StripLazyField,
    Target,
    agility_transform,
    generate,
    visible_targets,
)
from .continuous import (
    ContinuousPlan,
    RobotState,
    WorkloadCounters,
    estimate_continuous_r_star,
    optimal_plan,
    receding_horizon_plan,
    reachable,
)
from .bayes import (
    GaussianBelief,
    Measurement,
    compare_ugs_strategies,
    simulate_mission_estimation,
    update,
)
from .harness import ExperimentSpec, FitResult, fit, fit_xy, make_spec, run, workload_report

__version__ = "0.1.0"
