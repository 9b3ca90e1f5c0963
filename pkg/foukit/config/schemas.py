"""
JSON documents read and written by the command line.

Each document validates with pydantic and converts to the frozen
configuration objects the library works with. Validation failures are
reported as DataError.
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Type, TypeVar, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from foukit.errors import DataError, DomainError
from foukit.estimate.filters import get_filter
from foukit.estimate.pipeline import FitOptions
from foukit.estimate.whittle import FitReport, WeightSpec, WhittleConfig
from foukit.model.fou_model import FouModel, FouRoot
from foukit.simcore.sampler import SimConfig
from foukit.simcore.study import MonteCarloStudy

_Doc = TypeVar("_Doc", bound="Document")


class Document(BaseModel):
    """Base for documents: unknown keys are rejected."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    @classmethod
    def parse_document(cls: Type[_Doc], data: Any) -> _Doc:
        """
        Validate a decoded JSON value.

        Raises:
            DataError: If the value does not match the schema
        """
        try:
            return cls.model_validate(data)
        except ValidationError as err:
            raise DataError(f"invalid {cls.__name__}: {err}") from err

    @classmethod
    def parse_json_text(cls: Type[_Doc], text: str) -> _Doc:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as err:
            raise DataError(f"{cls.__name__} is not valid JSON: {err}") from err
        return cls.parse_document(data)

    @classmethod
    def load(cls: Type[_Doc], path: Union[str, Path]) -> _Doc:
        """Read and validate a JSON file."""
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as err:
            raise DataError(f"cannot read {path}: {err}") from err
        return cls.parse_json_text(text)

    def to_json(self, indent: Optional[int] = 2) -> str:
        return self.model_dump_json(indent=indent, by_alias=True)


class RootDocument(Document):
    value: float = Field(gt=0)
    mult: int = Field(default=1, ge=1)


class ModelDocument(Document):
    """{"lambdas": [{"value": r, "mult": k}, ...], "sigma": r, "hurst": r}"""

    lambdas: List[RootDocument] = Field(min_length=1)
    sigma: float = Field(default=1.0, gt=0)
    hurst: float = Field(gt=0, lt=1)

    @model_validator(mode="after")
    def _ascending(self) -> "ModelDocument":
        values = [r.value for r in self.lambdas]
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError(f"lambda values must be strictly ascending, got {values}")
        return self

    def to_model(self) -> FouModel:
        roots = tuple(FouRoot(r.value, r.mult) for r in self.lambdas)
        return FouModel(roots=roots, sigma=self.sigma, hurst=self.hurst)

    @classmethod
    def from_model(cls, model: FouModel) -> "ModelDocument":
        return cls.parse_document(model.to_dict())


class WeightDocument(Document):
    a: float = Field(ge=0)
    b: float = Field(gt=0)

    def to_spec(self) -> WeightSpec:
        return WeightSpec(self.a, self.b)


class WhittleDocument(Document):
    """λ search settings; omitted keys keep the library defaults."""

    weight: Optional[WeightDocument] = None
    lambda_box: Union[Tuple[float, float], List[Tuple[float, float]]] = (0.01, 1.5)
    min_gap: float = Field(default=0.01, gt=0)
    optimizer: Literal["nelder-mead", "grid-refine"] = "nelder-mead"
    freq_nodes: Optional[int] = Field(default=None, ge=1)
    multistart: int = Field(default=8, ge=1)
    grid_points: int = Field(default=50, ge=2)
    max_iter: int = Field(default=4000, ge=1)
    xatol: float = Field(default=1.0e-7, gt=0)
    fatol: float = Field(default=1.0e-10, gt=0)
    periodogram_method: Literal["direct", "czt"] = "direct"
    start_seed: int = Field(default=0, ge=0)
    lattice_start: bool = True

    def to_config(self, threads: int = 1) -> WhittleConfig:
        """
        Build the WhittleConfig.

        Raises:
            DataError: If the box and gap are inconsistent
        """
        values = self.model_dump(exclude={"weight"})
        try:
            return WhittleConfig(
                weight=None if self.weight is None else self.weight.to_spec(),
                threads=threads,
                **values,
            )
        except DomainError as err:
            raise DataError(f"invalid Whittle settings: {err}") from err


class McStudyConfig(Document):
    """A Monte Carlo study: model, (T, n) cells, replications and fit settings."""

    model: ModelDocument
    T_values: List[float] = Field(default_factory=lambda: [50.0], min_length=1)
    n_values: List[int] = Field(default_factory=lambda: [5000], min_length=1)
    replications: int = Field(default=20, ge=1, alias="m")
    master_seed: int = Field(default=0, ge=0, lt=2**64)
    rate_exponent_alpha: Optional[float] = Field(default=None, gt=0, lt=1)
    method: Literal["exact_gaussian", "operator_path"] = "exact_gaussian"
    filter: str = "daubechies2"
    fixed_sigma: Optional[float] = Field(default=None, gt=0)
    fixed_hurst: Optional[float] = Field(default=None, gt=0, lt=1)
    estimate_lambda: bool = True
    whittle: WhittleDocument = Field(default_factory=WhittleDocument)

    @model_validator(mode="after")
    def _positive_grid(self) -> "McStudyConfig":
        if any(t <= 0 for t in self.T_values):
            raise ValueError("T_values must be positive")
        if any(n < 2 for n in self.n_values):
            raise ValueError("n_values must be >= 2")
        return self

    def to_study(self, threads: int = 1) -> MonteCarloStudy:
        return MonteCarloStudy(
            model=self.model.to_model(),
            T_values=tuple(self.T_values),
            n_values=tuple(self.n_values),
            replications=self.replications,
            master_seed=self.master_seed,
            whittle=self.whittle.to_config(threads=1),
            options=FitOptions(
                filt=get_filter(self.filter), sigma=self.fixed_sigma, hurst=self.fixed_hurst
            ),
            sim=SimConfig(seed=self.master_seed, method=self.method),
            rate_exponent=self.rate_exponent_alpha,
            estimate_lambda=self.estimate_lambda,
            threads=threads,
        )


class FitReportDocument(Document):
    """Serialized FitReport; "model" is a derived view and is ignored on read."""

    h_hat: float
    sigma_hat: float
    lambda_hat: List[float] = Field(min_length=1)
    multiplicities: List[int] = Field(min_length=1)
    contrast_value: float
    converged: bool
    n_evals: int = Field(ge=0)
    asymptotic_cov: Optional[List[List[float]]] = None
    horizon: Optional[float] = None
    n: Optional[int] = None
    hurst_estimated: bool = True
    sigma_estimated: bool = True
    loglik: Optional[float] = None
    aic: Optional[float] = None
    diagnostics: List[str] = Field(default_factory=list)
    model: Optional[Dict[str, Any]] = None

    @model_validator(mode="after")
    def _matching_lengths(self) -> "FitReportDocument":
        if len(self.lambda_hat) != len(self.multiplicities):
            raise ValueError("lambda_hat and multiplicities differ in length")
        return self

    def to_report(self) -> FitReport:
        return FitReport(
            h_hat=self.h_hat,
            sigma_hat=self.sigma_hat,
            lambda_hat=tuple(self.lambda_hat),
            multiplicities=tuple(self.multiplicities),
            contrast_value=self.contrast_value,
            converged=self.converged,
            n_evals=self.n_evals,
            asymptotic_cov=None if self.asymptotic_cov is None else np.array(self.asymptotic_cov),
            horizon=self.horizon,
            n=self.n,
            hurst_estimated=self.hurst_estimated,
            sigma_estimated=self.sigma_estimated,
            loglik=self.loglik,
            aic=self.aic,
            diagnostics=list(self.diagnostics),
        )


def load_model(source: Union[str, Path, Dict[str, Any]]) -> FouModel:
    """
    Load a FouModel from a document, a JSON file or inline JSON text.

    Raises:
        DataError: If the source cannot be read or validated
    """
    if isinstance(source, dict):
        return ModelDocument.parse_document(source).to_model()
    text = str(source)
    if text.lstrip().startswith("{"):
        return ModelDocument.parse_json_text(text).to_model()
    return ModelDocument.load(text).to_model()
