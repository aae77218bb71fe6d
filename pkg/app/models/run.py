import math
from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class ModelKind(str, Enum):
    model1 = "model1"
    model2 = "model2"
    chain = "chain"


class FeedbackMode(str, Enum):
    both = "both"
    on = "on"
    off = "off"

    @property
    def variants(self) -> List[bool]:
        if self is FeedbackMode.both:
            return [True, False]
        return [self is FeedbackMode.on]


class ObservableKind(str, Enum):
    log_negativity = "log_negativity"
    abs_correlator = "abs_correlator"
    occupation = "occupation"
    adiabatic_abs_correlator = "adiabatic_abs_correlator"


class Observable(BaseModel):
    kind: ObservableKind
    modes: List[str] = Field(..., min_length=1, max_length=2)

    model_config = ConfigDict(extra="forbid")

    @model_validator(mode="after")
    def _check_arity(self):
        if self.kind is ObservableKind.occupation:
            if len(self.modes) != 1:
                raise ValueError("occupation takes exactly one mode")
        elif len(self.modes) != 2 or self.modes[0] == self.modes[1]:
            raise ValueError(f"{self.kind.value} takes two distinct modes")
        return self

    @property
    def name(self) -> str:
        return f"{self.kind.value}({','.join(self.modes)})"


class SweepAxis(BaseModel):
    name: str = Field(..., min_length=1)
    values: List[float] = Field(..., min_length=1)

    model_config = ConfigDict(extra="forbid")

    @field_validator("values")
    @classmethod
    def _finite(cls, v: List[float]) -> List[float]:
        for x in v:
            if not math.isfinite(x):
                raise ValueError(f"grid values must be finite, got {x}")
        return v


class RunConfig(BaseModel):
    name: str = Field(default="run", pattern=r"^[A-Za-z0-9_.-]+$")
    model: ModelKind
    parameters: Dict[str, Any] = Field(default_factory=dict)
    sweep: List[SweepAxis] = Field(default_factory=list)
    observables: List[Observable] = Field(..., min_length=1)
    feedback: FeedbackMode = FeedbackMode.both

    model_config = ConfigDict(extra="forbid")

    @property
    def grid_size(self) -> int:
        return math.prod(len(axis.values) for axis in self.sweep)

    @property
    def expected_rows(self) -> int:
        return self.grid_size * len(self.observables) * len(self.feedback.variants)


class SweepRow(BaseModel):
    point: Dict[str, float]
    observable: str
    feedback: bool
    value: Optional[float] = None
    error: str = ""


class SweepMetadata(BaseModel):
    name: str
    version: str
    model: ModelKind
    feedback: FeedbackMode
    swept: List[str]
    observables: List[str]
    mode_ordering: List[str]
    conventions: Dict[str, str]
    grid_size: int
    generated_at: Optional[str] = None


class SweepResult(BaseModel):
    rows: List[SweepRow]
    metadata: SweepMetadata

    @model_validator(mode="after")
    def _check_rows(self):
        expected = self.metadata.grid_size * len(self.metadata.observables) * len(self.metadata.feedback.variants)
        if len(self.rows) != expected:
            raise ValueError(f"expected {expected} rows, got {len(self.rows)}")
        for row in self.rows:
            if row.value is not None and not math.isfinite(row.value):
                raise ValueError(f"non-finite value in row {row.observable} at {row.point}")
            if row.value is None and not row.error:
                raise ValueError(f"row {row.observable} at {row.point} has neither value nor error")
        return self

    def values(self, observable: str, feedback: bool) -> List[Optional[float]]:
        """Column of values for one observable and feedback variant, in grid order"""
        return [r.value for r in self.rows if r.observable == observable and r.feedback == feedback]
