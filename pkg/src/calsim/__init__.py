"""Streaming active learning under oblivious label corruption.

Passive ERM, RobustCAL (vanilla and enlarged thresholds) and CALruption on
finite instances, with exact oracle quantities for checking them.
"""
from .adversary import (CorruptionSchedule, LabelStream, corruption_mass, schedule_burst,
                        schedule_misspecification, schedule_none, schedule_segments, stream_draw)
from .baseline_learners import ThresholdVariant, run_passive_erm, run_robustcal
from .calruption import CalruptionConfig, run_calruption
from .errors import ConfigError, EstimatorFailure, InvalidInstanceError, SolverError
from .estimators import CatoniConfig, catoni_estimate
from .instance import (Instance, build_oracle, counterexample_instance, disagreement_coefficient,
                       random_instance)
from .report import RunReport

__all__ = [
    "CalruptionConfig", "CatoniConfig", "ConfigError", "CorruptionSchedule", "EstimatorFailure",
    "Instance", "InvalidInstanceError", "LabelStream", "RunReport", "SolverError",
    "ThresholdVariant", "build_oracle", "catoni_estimate", "corruption_mass",
    "counterexample_instance", "disagreement_coefficient", "random_instance", "run_calruption",
    "run_passive_erm", "run_robustcal", "schedule_burst", "schedule_misspecification",
    "schedule_none", "schedule_segments", "stream_draw",
]
__version__ = "0.1.0"
