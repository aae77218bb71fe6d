import math
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.config import settings
from app.exceptions import InvalidParameter

MAX_CHAIN_PORTS = 16


def _require(params: BaseModel, rates: List[str], couplings: List[str]) -> None:
    for name in rates + couplings:
        value = getattr(params, name)
        if value is None:
            continue
        if not math.isfinite(value):
            raise InvalidParameter(f"{name} must be finite, got {value}")
        if name in rates and value < 0:
            raise InvalidParameter(f"{name} must be non-negative, got {value}")


class Model1Params(BaseModel):
    """Two optomechanical cavities, blue-driven (1) and red-driven (2), rates in units of Gamma"""
    g1: float = 0.01
    g2: float = 0.05
    kappa: float = 0.1
    Gamma1: float = 1.0
    Gamma2: float = 1.0
    gamma: float = 0.01
    gamma2: Optional[float] = None  # defaults to gamma
    nbar: float = 0.0
    nbar2: Optional[float] = None  # defaults to nbar
    feedback: bool = True

    model_config = ConfigDict(extra="forbid")

    @model_validator(mode="after")
    def _check(self):
        _require(self, ["Gamma1", "Gamma2", "gamma", "gamma2", "nbar", "nbar2"], ["g1", "g2", "kappa"])
        return self

    @property
    def mechanical_damping(self):
        return self.gamma, self.gamma if self.gamma2 is None else self.gamma2

    @property
    def mechanical_occupation(self):
        return self.nbar, self.nbar if self.nbar2 is None else self.nbar2


class Model2Params(BaseModel):
    """Two cavities sharing one mechanical mode"""
    g1: float = 0.01
    g2: float = 0.05
    Gamma1: float = 1.0
    Gamma2: float = 1.0
    gamma1: float = 0.01
    nbar: float = 0.0
    feedback: bool = True

    model_config = ConfigDict(extra="forbid")

    @model_validator(mode="after")
    def _check(self):
        _require(self, ["Gamma1", "Gamma2", "gamma1", "nbar"], ["g1", "g2"])
        return self


class ChainParams(BaseModel):
    """Open chain of Model 1 ports coupled through chi (a_{i,2}, a_{i+1,1})"""
    n_ports: int = 10
    port: Model1Params = Field(default_factory=Model1Params)
    ports: Optional[List[Model1Params]] = None
    chi: Optional[float] = None  # None couples with the left port's kappa

    model_config = ConfigDict(extra="forbid")

    @model_validator(mode="after")
    def _check(self):
        if not 1 <= self.n_ports <= MAX_CHAIN_PORTS:
            raise InvalidParameter(f"n_ports must be between 1 and {MAX_CHAIN_PORTS}, got {self.n_ports}")
        if self.ports is not None and len(self.ports) != self.n_ports:
            raise InvalidParameter(f"ports lists {len(self.ports)} entries for n_ports={self.n_ports}")
        _require(self, [], ["chi"])
        return self

    def port_params(self, i: int) -> Model1Params:
        """Parameters of port i (1-based)"""
        return self.ports[i - 1] if self.ports is not None else self.port

    def coupling(self, i: int) -> float:
        """chi between port i and port i+1"""
        return self.port_params(i).kappa if self.chi is None else self.chi


class AdiabaticParams(BaseModel):
    """Zero-temperature, equal-linewidth parameters for the adiabatic closed forms"""
    g1: float
    g2: float
    kappa: float = 0.0
    Gamma: float = 1.0
    gamma: float = 0.01

    model_config = ConfigDict(extra="forbid")

    @model_validator(mode="after")
    def _check(self):
        _require(self, ["Gamma", "gamma"], ["g1", "g2", "kappa"])
        if self.Gamma == 0:
            raise InvalidParameter("Gamma must be positive")
        return self

    @property
    def regime_warning(self) -> Optional[str]:
        largest = max(abs(self.g1), abs(self.g2), abs(self.kappa))
        if self.Gamma < settings.adiabatic_ratio * largest:
            return (
                f"Gamma={self.Gamma} is below {settings.adiabatic_ratio:g}x the largest coupling ({largest}); "
                "adiabatic elimination is not controlled"
            )
        return None
