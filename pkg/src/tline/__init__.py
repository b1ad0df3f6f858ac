"""Coupled thermo-electro-mechanical degradation of overhead transmission
lines, with collocation-based uncertainty quantification."""

from .coupled_solver import LineModel, MaterialParams, SimulationConfig, SimulationResult, run
from .scenario import Scenario

__all__ = ["LineModel", "MaterialParams", "SimulationConfig", "SimulationResult", "Scenario", "run"]
