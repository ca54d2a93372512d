"""Model-backend boundary: protocols, cost accounting, sim and remote providers."""

from .base import BackendSet, DirectorBackend, EnhancerBackend, EvaluatorBackend, ExtractorBackend, GeneratorBackend
from .cost import CALL_KINDS, CostMeter, CostModel, CostTotals, default_cost_model
from .sim import (
    SimDirector,
    SimEvaluator,
    SimExtractor,
    SimGenerator,
    SimParams,
    build_sim_backends,
    calibrate_recovery,
    default_sim_params,
    sim_generate,
)

__all__ = [
    "BackendSet",
    "DirectorBackend",
    "EnhancerBackend",
    "EvaluatorBackend",
    "ExtractorBackend",
    "GeneratorBackend",
    "CALL_KINDS",
    "CostMeter",
    "CostModel",
    "CostTotals",
    "default_cost_model",
    "SimDirector",
    "SimEvaluator",
    "SimExtractor",
    "SimGenerator",
    "SimParams",
    "build_sim_backends",
    "calibrate_recovery",
    "default_sim_params",
    "sim_generate",
]
