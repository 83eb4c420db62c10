"""
Experiment registry.

Every experiment id maps to a BaseExperiment subclass; the CLI resolves
ids through get_experiment().
"""

from typing import Dict, List, Tuple, Type

from ..errors import UnknownExperimentError
from .base import BaseExperiment, make_graph
from .gnp import (
    GnpUnanimity,
    MinorityResidue,
    MixingLemma,
    exp_gnp_unanimity,
    exp_minority_residue,
    exp_mixing_lemma,
)
from .invariants import FourierOracles, PeriodTwoExhaustive, PotentialIdentity
from .level import LevelGraphExperiment, exp_level_graph
from .moments import (
    GrowthHeuristic,
    InitialMeanSquare,
    TimeOneMoments,
    exp_growth_heuristic,
    exp_initial_mean_sq,
    exp_time1_moments,
)
from .report import ExperimentReport, Gate, Table, TrialRecord
from .rrg import (
    FlipBound,
    NearPeriodTwoBalance,
    RrgDisagreement,
    exp_flip_bound,
    exp_near_period2_balance,
    exp_rrg_disagreement,
)
from .sweep import PhaseSweep

REGISTRY: Dict[str, Type[BaseExperiment]] = {
    cls.experiment_id: cls
    for cls in (
        InitialMeanSquare,
        TimeOneMoments,
        GrowthHeuristic,
        GnpUnanimity,
        MinorityResidue,
        MixingLemma,
        RrgDisagreement,
        FlipBound,
        NearPeriodTwoBalance,
        LevelGraphExperiment,
        PotentialIdentity,
        PeriodTwoExhaustive,
        FourierOracles,
        PhaseSweep,
    )
}


def get_experiment(experiment_id: str) -> Type[BaseExperiment]:
    try:
        return REGISTRY[experiment_id]
    except KeyError:
        raise UnknownExperimentError(experiment_id) from None


def list_experiments() -> List[Tuple[str, str]]:
    """(id, description) pairs sorted by id."""
    return sorted((eid, cls.description) for eid, cls in REGISTRY.items())


__all__ = [
    "REGISTRY",
    "BaseExperiment",
    "ExperimentReport",
    "Gate",
    "Table",
    "TrialRecord",
    "get_experiment",
    "list_experiments",
    "make_graph",
    "exp_initial_mean_sq",
    "exp_time1_moments",
    "exp_growth_heuristic",
    "exp_gnp_unanimity",
    "exp_minority_residue",
    "exp_mixing_lemma",
    "exp_rrg_disagreement",
    "exp_flip_bound",
    "exp_near_period2_balance",
    "exp_level_graph",
]
