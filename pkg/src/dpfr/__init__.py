"""Joint evaluation of fairness and relevance in recommender runs via distance to an empirical Pareto frontier."""

from .distance import DpfrScore, ReferencePoint, dpfr, len_pf, midpoint_error, reference_point
from .measures import FIT_PAIRS, MeasureId, ScorePoint, evaluate
from .pareto import EdgeCaseError, ParetoFrontier, build_frontier, oracle, oracle_to_fair, plan_checkpoints
from .runs import ExposureVector, RunTable, exposure, load_run

__version__ = "0.1.0"

__all__ = [
    "DpfrScore", "EdgeCaseError", "ExposureVector", "FIT_PAIRS", "MeasureId", "ParetoFrontier",
    "ReferencePoint", "RunTable", "ScorePoint", "build_frontier", "dpfr", "evaluate", "exposure",
    "len_pf", "load_run", "midpoint_error", "oracle", "oracle_to_fair", "plan_checkpoints",
    "reference_point",
]
