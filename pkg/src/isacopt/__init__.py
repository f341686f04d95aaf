"""Multi-UAV ISAC communication/sensing trade-off testbed.

Physics model (``model``), decomposition optimizer (``moead``), classical and
LLM offspring operators (``operators``, ``llm``), hypervolume metrics
(``metrics``) and experiment orchestration (``experiment``, ``cli``).
"""
from .model import Scenario, make_scenario, objectives
from .moead import AlgoParams, run

__version__ = "0.1.0"

__all__ = ["AlgoParams", "Scenario", "make_scenario", "objectives", "run"]
