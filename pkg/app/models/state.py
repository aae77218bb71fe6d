from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from app.config import settings
from app.exceptions import InvalidParameter
from app.models.network import ModeRegistry
from app.numerics import heisenberg_min_eigenvalue

QUADRATURE_CONVENTION = "q=(a+a^dagger)/sqrt2, p=-i(a-a^dagger)/sqrt2, vacuum variance 1/2"
SYMMETRY_TOL = 1e-10


def _real_matrix(value, name: str) -> np.ndarray:
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError) as e:
        raise InvalidParameter(f"{name} must be a real matrix: {e}") from e
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InvalidParameter(f"{name} must be square, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidParameter(f"{name} has non-finite entries")
    arr.setflags(write=False)
    return arr


def _is_symmetric(a: np.ndarray) -> bool:
    return float(np.max(np.abs(a - a.T), initial=0.0)) <= SYMMETRY_TOL * (1.0 + float(np.max(np.abs(a), initial=0.0)))


class DriftDiffusion(BaseModel):
    """dr/dt = S r and dV/dt = S V + V S^T + D over quadratures (q_1, p_1, ...)"""
    drift: np.ndarray
    diffusion: np.ndarray
    labels: Tuple[str, ...]
    convention: str = QUADRATURE_CONVENTION

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("drift", "diffusion", mode="before")
    @classmethod
    def _coerce(cls, v, info):
        return _real_matrix(v, info.field_name)

    @model_validator(mode="after")
    def _check(self):
        if self.drift.shape != self.diffusion.shape or self.drift.shape[0] != len(self.labels):
            raise InvalidParameter(
                f"Drift {self.drift.shape}, diffusion {self.diffusion.shape} and {len(self.labels)} labels disagree"
            )
        if not _is_symmetric(self.diffusion):
            raise InvalidParameter("Diffusion matrix must be symmetric")
        return self

    @property
    def S(self) -> np.ndarray:
        return self.drift

    @property
    def D(self) -> np.ndarray:
        return self.diffusion


class CovarianceState(BaseModel):
    """Gaussian state: V_ij = <{dr_i, dr_j}>/2 and mean <r>"""
    registry: ModeRegistry
    V: np.ndarray
    mean: np.ndarray

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("V", mode="before")
    @classmethod
    def _coerce_v(cls, v):
        return _real_matrix(v, "Covariance matrix")

    @field_validator("mean", mode="before")
    @classmethod
    def _coerce_mean(cls, v):
        try:
            mean = np.array(v, dtype=float)
        except (TypeError, ValueError) as e:
            raise InvalidParameter(f"Mean must be a real vector: {e}") from e
        if mean.ndim != 1:
            raise InvalidParameter("Mean must be a vector")
        if not np.all(np.isfinite(mean)):
            raise InvalidParameter("Mean has non-finite entries")
        mean.setflags(write=False)
        return mean

    @model_validator(mode="after")
    def _check(self):
        dim = self.registry.dimension
        if self.V.shape != (dim, dim) or self.mean.shape != (dim,):
            raise InvalidParameter(f"Covariance {self.V.shape} / mean {self.mean.shape} do not match {self.registry.size} modes")
        if not _is_symmetric(self.V):
            raise InvalidParameter("Covariance matrix must be symmetric")
        min_eig = heisenberg_min_eigenvalue(self.V)
        if min_eig < -settings.admissibility_tol:
            raise InvalidParameter(f"Covariance violates the uncertainty principle (min eigenvalue {min_eig:.3e})")
        return self

    @classmethod
    def vacuum(cls, registry: ModeRegistry) -> "CovarianceState":
        dim = registry.dimension
        return cls(registry=registry, V=0.5 * np.eye(dim), mean=np.zeros(dim))

    def heisenberg_min_eigenvalue(self) -> float:
        return heisenberg_min_eigenvalue(self.V)

    def purity_determinant(self) -> float:
        """det(2V); equals 1 for pure states and exceeds 1 otherwise"""
        return float(np.linalg.det(2.0 * self.V))


class TwoModeCovariance(BaseModel):
    """V = [[A1, C1], [C1^T, B1]] for an ordered pair of modes"""
    A1: np.ndarray
    B1: np.ndarray
    C1: np.ndarray

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("A1", "B1", "C1", mode="before")
    @classmethod
    def _coerce(cls, v, info):
        block = _real_matrix(v, info.field_name)
        if block.shape != (2, 2):
            raise InvalidParameter(f"{info.field_name} must be 2x2, got {block.shape}")
        if info.field_name != "C1" and not _is_symmetric(block):
            raise InvalidParameter(f"{info.field_name} must be symmetric")
        return block

    @property
    def matrix(self) -> np.ndarray:
        return np.block([[self.A1, self.C1], [self.C1.T, self.B1]])

    def swapped(self) -> "TwoModeCovariance":
        return TwoModeCovariance(A1=self.B1, B1=self.A1, C1=self.C1.T)

    def is_admissible(self) -> bool:
        return heisenberg_min_eigenvalue(self.matrix) >= -settings.admissibility_tol
