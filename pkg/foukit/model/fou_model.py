"""The FOU(p) parameter object."""

import json
import math
from dataclasses import dataclass, replace
from typing import Any, Dict, Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from foukit.errors import DomainError
from foukit.special.fh import check_hurst


@dataclass(frozen=True)
class FouRoot:
    """A distinct λ value and how many times its operator is composed."""

    value: float
    multiplicity: int = 1

    def __post_init__(self):
        value = float(self.value)
        if not math.isfinite(value) or value <= 0:
            raise DomainError(f"λ values must be positive and finite, got {self.value}")
        if int(self.multiplicity) != self.multiplicity or self.multiplicity < 1:
            raise DomainError(
                f"multiplicity must be a positive integer, got {self.multiplicity}"
            )
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "multiplicity", int(self.multiplicity))


RootLike = Union[FouRoot, Tuple[float, int], float]


def _as_root(root: RootLike) -> FouRoot:
    if isinstance(root, FouRoot):
        return root
    if isinstance(root, (tuple, list)):
        return FouRoot(*root)
    return FouRoot(float(root))


@dataclass(frozen=True)
class FouModel:
    """
    Parameters of a fractional iterated Ornstein-Uhlenbeck process.

    The process is the composition T_{λ1}^{p1} ∘ … ∘ T_{λq}^{pq} applied to
    σB_H. Distinct λ values are stored strictly ascending; the order of the
    process is p = Σ p_i. Instances are immutable and hashable, so they can
    key caches and be shared between threads.
    """

    roots: Tuple[FouRoot, ...]
    sigma: float = 1.0
    hurst: float = 0.5

    def __post_init__(self):
        roots = tuple(_as_root(r) for r in self.roots)
        if not roots:
            raise DomainError("a FOU model needs at least one λ")
        values = [r.value for r in roots]
        if any(b <= a for a, b in zip(values, values[1:])):
            raise DomainError(
                f"λ values must be strictly ascending, got {values}; "
                "use multiplicities for repeated roots"
            )
        sigma = float(self.sigma)
        if not math.isfinite(sigma) or sigma <= 0:
            raise DomainError(f"sigma must be positive, got {self.sigma}")
        object.__setattr__(self, "roots", roots)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "hurst", check_hurst(self.hurst))

    @classmethod
    def from_lambdas(
        cls,
        lambdas: Iterable[float],
        sigma: float = 1.0,
        hurst: float = 0.5,
        multiplicities: Optional[Sequence[int]] = None,
    ) -> "FouModel":
        """
        Build a model from λ values and optional multiplicities.

        Args:
            lambdas: Distinct λ values, strictly ascending
            sigma: Scale of the driving fBm
            hurst: Hurst parameter in (0, 1)
            multiplicities: One positive integer per λ (default all ones)

        Returns:
            FouModel instance
        """
        values = [float(v) for v in lambdas]
        if multiplicities is None:
            multiplicities = [1] * len(values)
        if len(multiplicities) != len(values):
            raise DomainError("one multiplicity per λ value is required")
        roots = tuple(FouRoot(v, m) for v, m in zip(values, multiplicities))
        return cls(roots=roots, sigma=sigma, hurst=hurst)

    @classmethod
    def repeated(
        cls, value: float, multiplicity: int, sigma: float = 1.0, hurst: float = 0.5
    ) -> "FouModel":
        """Build FOU(λ^(k)) with a single repeated root."""
        return cls(roots=(FouRoot(value, multiplicity),), sigma=sigma, hurst=hurst)

    @property
    def lambdas(self) -> np.ndarray:
        """Distinct λ values, ascending."""
        return np.array([r.value for r in self.roots], dtype=float)

    @property
    def multiplicities(self) -> Tuple[int, ...]:
        return tuple(r.multiplicity for r in self.roots)

    @property
    def p(self) -> int:
        """Order of the process."""
        return sum(self.multiplicities)

    @property
    def q(self) -> int:
        """Number of distinct λ values."""
        return len(self.roots)

    @property
    def is_distinct(self) -> bool:
        return all(m == 1 for m in self.multiplicities)

    def expanded_lambdas(self) -> np.ndarray:
        """λ values repeated by multiplicity (length p)."""
        return np.repeat(self.lambdas, self.multiplicities)

    def with_lambdas(self, values: Sequence[float]) -> "FouModel":
        """Same structure, σ and H with new λ values."""
        if len(values) != self.q:
            raise DomainError(f"expected {self.q} λ values, got {len(values)}")
        roots = tuple(
            FouRoot(float(v), r.multiplicity) for v, r in zip(values, self.roots)
        )
        return replace(self, roots=roots)

    def with_scale(
        self, sigma: Optional[float] = None, hurst: Optional[float] = None
    ) -> "FouModel":
        """Same λ structure with σ and/or H replaced."""
        return replace(
            self,
            sigma=self.sigma if sigma is None else sigma,
            hurst=self.hurst if hurst is None else hurst,
        )

    def to_dict(self) -> Dict[str, Any]:
        """Serialize to the JSON document layout used by the CLI."""
        return {
            "lambdas": [{"value": r.value, "mult": r.multiplicity} for r in self.roots],
            "sigma": self.sigma,
            "hurst": self.hurst,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "FouModel":
        """
        Build a model from its JSON document.

        Raises:
            DataError: If the document does not match the model schema
        """
        from foukit.config.schemas import ModelDocument

        return ModelDocument.parse_document(data).to_model()

    def to_json(self, indent: Optional[int] = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_json(cls, text: str) -> "FouModel":
        from foukit.config.schemas import ModelDocument

        return ModelDocument.parse_json_text(text).to_model()

    def __str__(self) -> str:
        parts = [
            f"{r.value:g}" if r.multiplicity == 1 else f"{r.value:g}^({r.multiplicity})"
            for r in self.roots
        ]
        return f"FOU({', '.join(parts)}; sigma={self.sigma:g}, H={self.hurst:g})"
