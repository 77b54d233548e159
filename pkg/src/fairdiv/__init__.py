"""Fair division of goods with market values: competitive and egalitarian
solvers, elicitation via private bids or star ratings, fairness audits, a
session-based mediation service, and a batch CLI."""

from .model import (
    Agent,
    Allocation,
    DimensionMismatch,
    DivisionProblem,
    Good,
    InfeasibleAllocation,
    UtilityProfile,
    ValidationReport,
    Violation,
    evaluate,
    split_count,
    validate_problem,
)
from .bids import (
    BidRange,
    BidSheet,
    ScalingError,
    bids_to_utilities,
    scale_bids_to_budget,
    suggest_ranges,
    validate_bids,
)
from .ratings import (
    DEFAULT_K,
    BundleMetrics,
    RatingSheet,
    TranslationError,
    bundle_metrics,
    central_rating,
    check_appreciation_factor,
    ratings_to_utilities,
    translate_ratings,
    validate_ratings,
)
from .nash import (
    ConvergenceError,
    NashSolution,
    PriceVector,
    PurchaseExplanation,
    equilibrium_prices,
    purchase_explanation,
    solve_nash,
    verify_clearing,
)
from .egalitarian import EgalitarianSolution, EqualityReport, equality_certificate, solve_egalitarian
from .audit import AuditReport, RatingContext, audit, equal_utility_point, frontier_2agent
from .cases import CASE_IDS, CaseFixture, load_case, run_all_regressions, run_regression
from .fileformat import CaseDocument, parse_case, load_case_file

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
