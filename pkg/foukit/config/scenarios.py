"""Pre-configured Monte Carlo scenarios."""

from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from foukit.config.schemas import McStudyConfig, ModelDocument
from foukit.errors import DomainError
from foukit.model.fou_model import FouModel

STUDY_T = (25.0, 50.0, 100.0)
STUDY_N = (1000, 5000, 10000)


@dataclass
class ScenarioConfig:
    """A named simulate-and-fit study."""

    name: str
    description: str
    model: FouModel
    T_values: Tuple[float, ...] = STUDY_T
    n_values: Tuple[int, ...] = STUDY_N
    replications: int = 100
    master_seed: int = 0
    reference: Dict[str, str] = field(default_factory=dict)

    def to_study_config(self) -> McStudyConfig:
        return McStudyConfig(
            model=ModelDocument.from_model(self.model),
            T_values=list(self.T_values),
            n_values=list(self.n_values),
            m=self.replications,
            master_seed=self.master_seed,
        )


def _double_root(hurst: float) -> FouModel:
    return FouModel.repeated(0.8, 2, sigma=1.0, hurst=hurst)


def _two_roots(hurst: float) -> FouModel:
    return FouModel.from_lambdas((0.3, 0.8), sigma=1.0, hurst=hurst)


# Full-size studies: every (T, n) cell with m = 100
DOUBLE_ROOT_H03 = ScenarioConfig(
    name="FOU(0.8^(2)), H=0.3",
    description="Double root λ=0.8, σ=1, H=0.3",
    model=_double_root(0.3),
)

DOUBLE_ROOT_H05 = ScenarioConfig(
    name="FOU(0.8^(2)), H=0.5",
    description="Double root λ=0.8, σ=1, H=0.5",
    model=_double_root(0.5),
)

DOUBLE_ROOT_H07 = ScenarioConfig(
    name="FOU(0.8^(2)), H=0.7",
    description="Double root λ=0.8, σ=1, H=0.7",
    model=_double_root(0.7),
)

TWO_ROOTS_H03 = ScenarioConfig(
    name="FOU(0.3, 0.8), H=0.3",
    description="Distinct roots λ=(0.3, 0.8), σ=1, H=0.3",
    model=_two_roots(0.3),
)

TWO_ROOTS_H05 = ScenarioConfig(
    name="FOU(0.3, 0.8), H=0.5",
    description="Distinct roots λ=(0.3, 0.8), σ=1, H=0.5",
    model=_two_roots(0.5),
)

TWO_ROOTS_H07 = ScenarioConfig(
    name="FOU(0.3, 0.8), H=0.7",
    description="Distinct roots λ=(0.3, 0.8), σ=1, H=0.7",
    model=_two_roots(0.7),
)

# Desk-scale spot checks: one cell, m = 20
DESK_DOUBLE_ROOT_H07 = ScenarioConfig(
    name="Desk FOU(0.8^(2)), H=0.7",
    description="T=50, n=5000, m=20 spot check of the double-root study",
    model=_double_root(0.7),
    T_values=(50.0,),
    n_values=(5000,),
    replications=20,
    reference={"H": "0.6995 (0.015)", "sigma": "0.9933 (0.087)", "lambda_1": "0.8379 (0.187)"},
)

DESK_DOUBLE_ROOT_H03 = ScenarioConfig(
    name="Desk FOU(0.8^(2)), H=0.3",
    description="T=100, n=5000, m=20 spot check of the double-root study",
    model=_double_root(0.3),
    T_values=(100.0,),
    n_values=(5000,),
    replications=20,
    reference={"H": "0.3004 (0.017)", "sigma": "0.9877"},
)


# Scenario registry
SCENARIOS: Dict[str, ScenarioConfig] = {
    "double_root_h03": DOUBLE_ROOT_H03,
    "double_root_h05": DOUBLE_ROOT_H05,
    "double_root_h07": DOUBLE_ROOT_H07,
    "two_roots_h03": TWO_ROOTS_H03,
    "two_roots_h05": TWO_ROOTS_H05,
    "two_roots_h07": TWO_ROOTS_H07,
    "desk_double_root_h07": DESK_DOUBLE_ROOT_H07,
    "desk_double_root_h03": DESK_DOUBLE_ROOT_H03,
}


def get_scenario(scenario_name: str) -> ScenarioConfig:
    """
    Get a scenario configuration by name.

    Args:
        scenario_name: Registry key

    Returns:
        ScenarioConfig instance

    Raises:
        DomainError: If scenario not found
    """
    if scenario_name not in SCENARIOS:
        available = ", ".join(SCENARIOS.keys())
        raise DomainError(f"Scenario '{scenario_name}' not found. Available: {available}")

    return SCENARIOS[scenario_name]


def list_scenarios() -> List[Dict[str, str]]:
    """
    List all available scenarios.

    Returns:
        List of scenario info dictionaries
    """
    return [
        {
            "id": key,
            "name": config.name,
            "description": config.description,
            "model": str(config.model),
            "cells": f"{len(config.T_values)} T x {len(config.n_values)} n, m={config.replications}",
        }
        for key, config in SCENARIOS.items()
    ]
