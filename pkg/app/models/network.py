from enum import Enum
from typing import Dict, NamedTuple, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.exceptions import InvalidParameter


HERMITIAN_TOL = 1e-12


class ModeKind(str, Enum):
    optical = "optical"
    mechanical = "mechanical"


class Ladder(NamedTuple):
    """A single ladder operator: the annihilator of ``label`` or its adjoint"""
    label: str
    dagger: bool = False


def destroy(label: str) -> Ladder:
    return Ladder(label, False)


def create(label: str) -> Ladder:
    return Ladder(label, True)


def partner_permutation(dimension: int) -> np.ndarray:
    """Permutation exchanging a_k and a_k^dagger in the doubled basis"""
    return np.kron(np.eye(dimension // 2), np.array([[0.0, 1.0], [1.0, 0.0]]))


def _frozen_array(value, dtype, name: str) -> np.ndarray:
    if callable(value):
        raise InvalidParameter(
            f"{name} must be a constant matrix; time-dependent generators are only representable in the rotating frame"
        )
    try:
        arr = np.array(value, dtype=dtype)
    except (TypeError, ValueError) as e:
        raise InvalidParameter(f"{name} must be numeric: {e}") from e
    if not np.all(np.isfinite(arr)):
        raise InvalidParameter(f"{name} has non-finite entries")
    arr.setflags(write=False)
    return arr


def _scale(a: np.ndarray) -> float:
    return 1.0 + (float(np.max(np.abs(a))) if a.size else 0.0)


class Mode(BaseModel):
    label: str = Field(..., min_length=1)
    kind: ModeKind

    model_config = ConfigDict(frozen=True)


class ModeRegistry(BaseModel):
    """Ordered mode list; position k owns quadratures (q_k, p_k) and ladder slots (a_k, a_k^dagger)"""
    modes: Tuple[Mode, ...]

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _unique_labels(self):
        labels = [m.label for m in self.modes]
        duplicates = sorted({label for label in labels if labels.count(label) > 1})
        if duplicates:
            raise InvalidParameter(f"Duplicate mode labels: {', '.join(duplicates)}")
        return self

    @classmethod
    def of(cls, *entries: Tuple[str, str]) -> "ModeRegistry":
        return cls(modes=tuple(Mode(label=label, kind=kind) for label, kind in entries))

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(m.label for m in self.modes)

    @property
    def size(self) -> int:
        return len(self.modes)

    @property
    def dimension(self) -> int:
        return 2 * len(self.modes)

    def index(self, label: str) -> int:
        for k, mode in enumerate(self.modes):
            if mode.label == label:
                return k
        raise InvalidParameter(f"Unknown mode '{label}' (registered: {', '.join(self.labels)})")

    def kind_of(self, label: str) -> ModeKind:
        return self.modes[self.index(label)].kind

    def ladder_index(self, op: Ladder) -> int:
        return 2 * self.index(op.label) + int(op.dagger)

    def quadrature_labels(self) -> Tuple[str, ...]:
        return tuple(f"{axis}_{label}" for label in self.labels for axis in ("q", "p"))

    def concat(self, other: "ModeRegistry") -> "ModeRegistry":
        return ModeRegistry(modes=self.modes + other.modes)


class QuadraticHamiltonian(BaseModel):
    """H = 1/2 v^dagger G v over the doubled basis v = (a_1, a_1^dagger, ...)"""
    G: np.ndarray

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("G", mode="before")
    @classmethod
    def _coerce(cls, v):
        G = _frozen_array(v, complex, "Hamiltonian matrix")
        if G.ndim != 2 or G.shape[0] != G.shape[1] or G.shape[0] % 2:
            raise InvalidParameter(f"Hamiltonian matrix must be square with even dimension, got {G.shape}")
        if np.max(np.abs(G - G.conj().T), initial=0.0) > HERMITIAN_TOL * _scale(G):
            raise InvalidParameter("Hamiltonian matrix must be Hermitian")
        return G

    @classmethod
    def zero(cls, dimension: int) -> "QuadraticHamiltonian":
        return cls(G=np.zeros((dimension, dimension), dtype=complex))

    @property
    def dimension(self) -> int:
        return self.G.shape[0]

    def with_bilinear(self, K) -> "QuadraticHamiltonian":
        """Add sum_kl K_kl v_k^dagger v_l for Hermitian K (constants dropped)"""
        K = np.asarray(K, dtype=complex)
        P = partner_permutation(self.dimension)
        return QuadraticHamiltonian(G=self.G + K + P @ K.T @ P)

    def with_product(self, i1: int, i2: int, coeff: complex) -> "QuadraticHamiltonian":
        """Add coeff * v_i1 v_i2 + h.c. given doubled-basis indices"""
        partner = i1 ^ 1
        K = np.zeros((self.dimension, self.dimension), dtype=complex)
        K[partner, i2] += coeff
        K[i2, partner] += np.conj(coeff)
        return self.with_bilinear(K)

    def __add__(self, other: "QuadraticHamiltonian") -> "QuadraticHamiltonian":
        if other.dimension != self.dimension:
            raise InvalidParameter(f"Cannot add Hamiltonians of dimension {self.dimension} and {other.dimension}")
        return QuadraticHamiltonian(G=self.G + other.G)


class DissipatorSet(BaseModel):
    """Jump operators A_k = C[k] . v with dissipation matrix Gamma and thermal occupations.

    A channel with n_k > 0 expands into rate Gamma_kk (n_k + 1) on A_k and
    Gamma_kk n_k on A_k^dagger.
    """
    C: np.ndarray
    rates: np.ndarray
    nbar: np.ndarray

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("C", mode="before")
    @classmethod
    def _coerce_forms(cls, v):
        C = _frozen_array(v, complex, "Jump coefficient matrix")
        if C.ndim != 2 or C.shape[1] % 2:
            raise InvalidParameter(f"Jump coefficient matrix must be (channels, even dimension), got {C.shape}")
        return C

    @field_validator("rates", mode="before")
    @classmethod
    def _coerce_rates(cls, v):
        rates = _frozen_array(v, complex, "Dissipation matrix")
        if rates.ndim != 2 or rates.shape[0] != rates.shape[1]:
            raise InvalidParameter(f"Dissipation matrix must be square, got {rates.shape}")
        if np.max(np.abs(rates - rates.conj().T), initial=0.0) > HERMITIAN_TOL * _scale(rates):
            raise InvalidParameter("Dissipation matrix must be Hermitian")
        return rates

    @field_validator("nbar", mode="before")
    @classmethod
    def _coerce_nbar(cls, v):
        nbar = _frozen_array(v, float, "Thermal occupations")
        if nbar.ndim != 1:
            raise InvalidParameter("Thermal occupations must be a vector")
        if np.any(nbar < 0):
            raise InvalidParameter("Thermal occupations must be non-negative")
        return nbar

    @model_validator(mode="after")
    def _check_channels(self):
        k = self.C.shape[0]
        if self.rates.shape != (k, k) or self.nbar.shape != (k,):
            raise InvalidParameter(
                f"Channel count mismatch: C {self.C.shape}, rates {self.rates.shape}, nbar {self.nbar.shape}"
            )
        for channel in np.flatnonzero(self.nbar > 0):
            support = {int(i) // 2 for i in np.flatnonzero(self.C[channel])}
            if len(support) > 1:
                raise InvalidParameter(f"Thermal channel {channel} must act on a single mode")
            off_diagonal = np.delete(self.rates[channel], channel)
            if np.any(off_diagonal != 0):
                raise InvalidParameter(f"Thermal channel {channel} cannot carry cross rates")
        return self

    @classmethod
    def empty(cls, dimension: int) -> "DissipatorSet":
        return cls(C=np.zeros((0, dimension), dtype=complex), rates=np.zeros((0, 0)), nbar=np.zeros(0))

    @property
    def dimension(self) -> int:
        return self.C.shape[1]

    @property
    def channel_count(self) -> int:
        return self.C.shape[0]

    def with_channel(self, form, rate: float, nbar: float = 0.0) -> "DissipatorSet":
        if rate < 0:
            raise InvalidParameter(f"Channel rate must be non-negative, got {rate}")
        form = np.asarray(form, dtype=complex).reshape(1, -1)
        k = self.channel_count
        rates = np.zeros((k + 1, k + 1), dtype=complex)
        rates[:k, :k] = self.rates
        rates[k, k] = rate
        return DissipatorSet(
            C=np.vstack([self.C, form]),
            rates=rates,
            nbar=np.append(self.nbar, nbar),
        )

    def with_cross_rate(self, i: int, j: int, value: complex) -> "DissipatorSet":
        rates = np.array(self.rates)
        rates[i, j] = value
        rates[j, i] = np.conj(value)
        return DissipatorSet(C=self.C, rates=rates, nbar=self.nbar)

    def find_decay(self, ladder_index: int) -> Optional[int]:
        """Index of the zero-temperature channel whose jump operator is exactly v_ladder_index"""
        target = np.zeros(self.dimension, dtype=complex)
        target[ladder_index] = 1.0
        for k in range(self.channel_count):
            if self.nbar[k] == 0 and np.array_equal(self.C[k], target):
                return k
        return None

    def concat(self, other: "DissipatorSet") -> "DissipatorSet":
        """Channels of both sets over the same modes, uncorrelated with each other"""
        if other.dimension != self.dimension:
            raise InvalidParameter(f"Cannot combine dissipators of dimension {self.dimension} and {other.dimension}")
        k, m = self.channel_count, other.channel_count
        rates = np.zeros((k + m, k + m), dtype=complex)
        rates[:k, :k] = self.rates
        rates[k:, k:] = other.rates
        return DissipatorSet(C=np.vstack([self.C, other.C]), rates=rates, nbar=np.concatenate([self.nbar, other.nbar]))


class LiouvillianSpec(BaseModel):
    """Quadratic Hamiltonian plus linear dissipators over a fixed mode registry"""
    registry: ModeRegistry
    hamiltonian: QuadraticHamiltonian
    dissipators: DissipatorSet

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @model_validator(mode="after")
    def _check_dimensions(self):
        dim = self.registry.dimension
        if self.hamiltonian.dimension != dim or self.dissipators.dimension != dim:
            raise InvalidParameter(
                f"Matrices must be sized {dim} for {self.registry.size} modes "
                f"(Hamiltonian {self.hamiltonian.dimension}, dissipators {self.dissipators.dimension})"
            )
        return self

    @classmethod
    def empty(cls, registry: ModeRegistry) -> "LiouvillianSpec":
        dim = registry.dimension
        return cls(registry=registry, hamiltonian=QuadraticHamiltonian.zero(dim), dissipators=DissipatorSet.empty(dim))

    def linear_form(self, terms: Dict[Ladder, complex]) -> np.ndarray:
        form = np.zeros(self.registry.dimension, dtype=complex)
        for op, coeff in terms.items():
            form[self.registry.ladder_index(op)] += coeff
        return form

    def with_hamiltonian(self, hamiltonian: QuadraticHamiltonian) -> "LiouvillianSpec":
        return LiouvillianSpec(registry=self.registry, hamiltonian=hamiltonian, dissipators=self.dissipators)

    def with_dissipators(self, dissipators: DissipatorSet) -> "LiouvillianSpec":
        return LiouvillianSpec(registry=self.registry, hamiltonian=self.hamiltonian, dissipators=dissipators)

    def with_product(self, o1: Ladder, o2: Ladder, coeff: complex) -> "LiouvillianSpec":
        """Add coeff * o1 o2 + h.c. to the Hamiltonian"""
        if coeff == 0:
            return self
        h = self.hamiltonian.with_product(self.registry.ladder_index(o1), self.registry.ladder_index(o2), coeff)
        return self.with_hamiltonian(h)

    def with_channel(self, terms: Dict[Ladder, complex], rate: float, nbar: float = 0.0) -> "LiouvillianSpec":
        return self.with_dissipators(self.dissipators.with_channel(self.linear_form(terms), rate, nbar))

    def with_decay(self, label: str, rate: float, nbar: float = 0.0) -> "LiouvillianSpec":
        """rate * (nbar + 1) D[a] + rate * nbar D[a^dagger] on a single mode"""
        return self.with_channel({destroy(label): 1.0}, rate, nbar)

    def __add__(self, other: "LiouvillianSpec") -> "LiouvillianSpec":
        if other.registry.labels != self.registry.labels:
            raise InvalidParameter("Specs can only be added over identical mode registries")
        return LiouvillianSpec(
            registry=self.registry,
            hamiltonian=self.hamiltonian + other.hamiltonian,
            dissipators=self.dissipators.concat(other.dissipators),
        )
