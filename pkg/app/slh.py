"""SLH network elements and their series product.

L is stored as one row per output port, each row a linear form over the
doubled ladder basis of the registry.
"""
import logging
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from app.exceptions import InvalidComposition, InvalidParameter
from app.models.network import (
    DissipatorSet,
    LiouvillianSpec,
    ModeRegistry,
    QuadraticHamiltonian,
    destroy,
)

logger = logging.getLogger(__name__)

UNITARY_TOL = 1e-12


class SLHTriple(BaseModel):
    registry: ModeRegistry
    S: np.ndarray
    L: np.ndarray
    H: QuadraticHamiltonian

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("S", "L", mode="before")
    @classmethod
    def _coerce(cls, v, info):
        arr = np.array(v, dtype=complex)
        if arr.ndim != 2:
            raise InvalidParameter(f"{info.field_name} must be a matrix, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvalidParameter(f"{info.field_name} has non-finite entries")
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def _check(self):
        m = self.S.shape[0]
        if self.S.shape != (m, m):
            raise InvalidParameter(f"Scattering matrix must be square, got {self.S.shape}")
        if np.max(np.abs(self.S.conj().T @ self.S - np.eye(m)), initial=0.0) > UNITARY_TOL:
            raise InvalidParameter("Scattering matrix must be unitary")
        if self.L.shape != (m, self.registry.dimension):
            raise InvalidParameter(f"Coupling vector must be ({m}, {self.registry.dimension}), got {self.L.shape}")
        if self.H.dimension != self.registry.dimension:
            raise InvalidParameter("Hamiltonian does not match the mode registry")
        return self

    @property
    def ports(self) -> int:
        return self.S.shape[0]

    @classmethod
    def identity(cls, registry: ModeRegistry, ports: int = 1) -> "SLHTriple":
        return cls(
            registry=registry,
            S=np.eye(ports),
            L=np.zeros((ports, registry.dimension)),
            H=QuadraticHamiltonian.zero(registry.dimension),
        )

    @classmethod
    def cavity(cls, registry: ModeRegistry, label: str, rate: float,
               hamiltonian: Optional[QuadraticHamiltonian] = None) -> "SLHTriple":
        """Single-port element leaking ``label`` at ``rate``: L = sqrt(rate) a"""
        if rate < 0:
            raise InvalidParameter(f"Rate must be non-negative, got {rate}")
        L = np.zeros((1, registry.dimension), dtype=complex)
        L[0, registry.ladder_index(destroy(label))] = np.sqrt(rate)
        return cls(
            registry=registry,
            S=np.eye(1),
            L=L,
            H=hamiltonian if hamiltonian is not None else QuadraticHamiltonian.zero(registry.dimension),
        )


def series_product(g2: SLHTriple, g1: SLHTriple) -> SLHTriple:
    """Feed the output of g1 into g2.

    Returns (S2 S1, L2 + S2 L1, H1 + H2 + (1/2i)(L2^dagger S2 L1 - L1^dagger S2^dagger L2)).
    """
    if g1.registry.labels != g2.registry.labels:
        raise InvalidComposition("Series product needs both elements over the same mode registry")
    if g1.ports != g2.ports:
        raise InvalidComposition(f"Port counts differ: {g2.ports} vs {g1.ports}")

    # L2^dagger S2 L1 as a bilinear form sum_kl M_kl v_k^dagger v_l
    M = g2.L.conj().T @ g2.S @ g1.L
    K = (M - M.conj().T) / 2j
    H = (g1.H + g2.H).with_bilinear(K)
    return SLHTriple(registry=g1.registry, S=g2.S @ g1.S, L=g2.L + g2.S @ g1.L, H=H)


def to_liouvillian(g: SLHTriple, extra_baths: Optional[DissipatorSet] = None) -> LiouvillianSpec:
    """Master equation -i[H, .] + sum_p D[L_p] plus any extra baths"""
    dissipators = DissipatorSet(C=g.L, rates=np.eye(g.ports), nbar=np.zeros(g.ports))
    if extra_baths is not None:
        dissipators = dissipators.concat(extra_baths)
    return LiouvillianSpec(registry=g.registry, hamiltonian=g.H, dissipators=dissipators)
