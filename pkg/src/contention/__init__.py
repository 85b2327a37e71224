"""Simulation and exact analysis of a 3-player slotted contention game
with an age-based backoff protocol."""

from .schedule import (
    Schedule,
    build_schedule,
    check_domination,
    parse_rational,
    transmission_probability,
)
from .protocols import (
    AgeBased,
    ConstantProb,
    Deadline,
    FixedProb,
    FollowAgeBased,
    PersonalHistory,
    Quiet,
    decision_probability,
    is_anonymous,
    profile_from_json,
    profile_to_json,
)
from .engine import (
    GameConfig,
    LatencyStats,
    TrialOutcome,
    empirical_distribution,
    monte_carlo,
    run_trial,
    run_trials,
)
from .analysis import (
    bound_report,
    deadline_comparison,
    delta_bound,
    derive_constants,
    feasibility,
    min_truncation_k1,
    min_truncation_k2,
    persistent_distribution,
    solve_expectations,
    y1_upper,
    y30_upper,
)

__all__ = [name for name in dir() if not name.startswith("_")]
