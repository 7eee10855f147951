"""Mixture-of-Markov-chains clustering of categorical symptom trajectories."""

__version__ = "0.1.0"

from .association import ContingencyTable2x2, log_odds_ratio  # noqa: E402
from .ingestion import build_trajectories, count_transitions, parse_records, pool_counts  # noqa: E402
from .intervention import improve_mood, improve_pain, intervene, max_feasible_beta  # noqa: E402
from .mixture import EMConfig, MixtureModel, assign_clusters, em_fit, log_likelihood, select_k  # noqa: E402
from .residuals import fit_model1, fit_model2, pearson_residuals, residual_normality  # noqa: E402
from .simulate import PRESETS, simulate_chain, simulate_cohort  # noqa: E402
from .stationary import is_regular, stationary  # noqa: E402
from .states import DEFAULT_SPACE, REDUCED_LABELS, ReducedState, binarize, index_of  # noqa: E402

__all__ = [
    "ContingencyTable2x2", "log_odds_ratio",
    "build_trajectories", "count_transitions", "parse_records", "pool_counts",
    "improve_mood", "improve_pain", "intervene", "max_feasible_beta",
    "EMConfig", "MixtureModel", "assign_clusters", "em_fit", "log_likelihood", "select_k",
    "fit_model1", "fit_model2", "pearson_residuals", "residual_normality",
    "PRESETS", "simulate_chain", "simulate_cohort",
    "is_regular", "stationary",
    "DEFAULT_SPACE", "REDUCED_LABELS", "ReducedState", "binarize", "index_of",
]
