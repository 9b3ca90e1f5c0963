from foukit.config.scenarios import SCENARIOS, ScenarioConfig, get_scenario, list_scenarios
from foukit.config.schemas import (
    FitReportDocument,
    McStudyConfig,
    ModelDocument,
    WhittleDocument,
    load_model,
)
from foukit.config.settings import ENV_THREADS, echo_resolved, merge_settings, resolve_threads

__all__ = [
    "ENV_THREADS",
    "SCENARIOS",
    "FitReportDocument",
    "McStudyConfig",
    "ModelDocument",
    "ScenarioConfig",
    "WhittleDocument",
    "echo_resolved",
    "get_scenario",
    "list_scenarios",
    "load_model",
    "merge_settings",
    "resolve_threads",
]
