"""Compile Gaussian Liouvillians into moment equations and solve them.

Conventions: quadratures r = (q_1, p_1, ...) with q = (a + a^dagger)/sqrt2 and
p = -i(a - a^dagger)/sqrt2, so the vacuum covariance is I/2. The doubled
ladder basis v = (a_1, a_1^dagger, ...) is related by v = T r.
"""
import logging
from typing import Iterable, Optional, Sequence

import numpy as np
import scipy.linalg

from app.exceptions import InvalidParameter, NumericalFailure
from app.models.network import (
    DissipatorSet,
    LiouvillianSpec,
    ModeRegistry,
    QuadraticHamiltonian,
    create,
    destroy,
    partner_permutation,
)
from app.models.state import CovarianceState, DriftDiffusion
from app.numerics import expm, integrate_covariance_ode, solve_lyapunov, symplectic_form

logger = logging.getLogger(__name__)

_SQRT_HALF = 1.0 / np.sqrt(2.0)
_LADDER_FROM_QUADRATURE = _SQRT_HALF * np.array([[1.0, 1.0j], [1.0, -1.0j]])
_QUADRATURE_FROM_LADDER = _SQRT_HALF * np.array([[1.0, 1.0], [-1.0j, 1.0j]])

PSD_TOL = 1e-12


def quadrature_transform(n_modes: int) -> np.ndarray:
    """T with v = T r"""
    return np.kron(np.eye(n_modes), _LADDER_FROM_QUADRATURE)


def inverse_quadrature_transform(n_modes: int) -> np.ndarray:
    return np.kron(np.eye(n_modes), _QUADRATURE_FROM_LADDER)


def _expanded_channels(dissipators: DissipatorSet):
    """Split every thermal channel into its emission and absorption parts"""
    forms = [np.array(dissipators.C)]
    rates = np.array(dissipators.rates, dtype=complex)
    extra_rates = []
    P = partner_permutation(dissipators.dimension)
    for k in np.flatnonzero(dissipators.nbar > 0):
        n = dissipators.nbar[k]
        base = rates[k, k]
        rates[k, k] = base * (n + 1.0)
        forms.append((P @ dissipators.C[k].conj()).reshape(1, -1))
        extra_rates.append(base * n)
    if extra_rates:
        rates = scipy.linalg.block_diag(rates, np.diag(extra_rates))
    return np.vstack(forms), rates


def _check_psd(rates: np.ndarray) -> None:
    if rates.size == 0:
        return
    min_eig = float(np.min(np.linalg.eigvalsh(rates)))
    scale = 1.0 + float(np.max(np.abs(rates)))
    if min_eig < -PSD_TOL * scale:
        raise InvalidParameter(f"Dissipation matrix is not positive semidefinite (min eigenvalue {min_eig:.3e})")


def _decay_channel(dissipators: DissipatorSet, ladder_index: int, rate: float, label: str):
    k = dissipators.find_decay(ladder_index)
    if k is None:
        dissipators = dissipators.with_channel(np.eye(dissipators.dimension)[ladder_index], rate)
        return dissipators, dissipators.channel_count - 1
    existing = float(dissipators.rates[k, k].real)
    if existing < rate * (1.0 - 1e-12):
        raise InvalidParameter(f"Decay rate {existing} of '{label}' is below the cascade rate {rate}")
    return dissipators, k


def add_cascade(spec: LiouvillianSpec, source: str, target: str, rate1: float, rate2: float) -> LiouvillianSpec:
    """Feed the output of ``source`` unidirectionally into ``target``.

    Adds (sqrt(rate1 rate2)/2i)(a_t^dagger a_s - a_s^dagger a_t) to the
    Hamiltonian and correlates the two decay channels so they form the
    collective jump operator sqrt(rate1) a_s + sqrt(rate2) a_t. A zero rate
    leaves nothing to correlate, so ``spec`` comes back unchanged.
    """
    if source == target:
        raise InvalidParameter("Cascade source and target must differ")
    if rate1 < 0 or rate2 < 0:
        raise InvalidParameter(f"Cascade rates must be non-negative, got {rate1} and {rate2}")
    if rate1 == 0 or rate2 == 0:
        logger.debug(f"Cascade {source} -> {target} skipped: zero rate")
        return spec

    registry = spec.registry
    coupling = float(np.sqrt(rate1 * rate2))
    spec = spec.with_product(create(target), destroy(source), coupling / 2j)

    dissipators, k_source = _decay_channel(spec.dissipators, registry.ladder_index(destroy(source)), rate1, source)
    dissipators, k_target = _decay_channel(dissipators, registry.ladder_index(destroy(target)), rate2, target)
    dissipators = dissipators.with_cross_rate(k_source, k_target, coupling)
    logger.debug(f"Cascade {source} -> {target} with rates ({rate1}, {rate2})")
    return spec.with_dissipators(dissipators)


def build_drift_diffusion(spec: LiouvillianSpec) -> DriftDiffusion:
    """Moment equations of the master equation from its adjoint generator"""
    n = spec.registry.size
    T = quadrature_transform(n)
    omega = symplectic_form(n)

    h_quadrature = (T.conj().T @ spec.hamiltonian.G @ T).real

    forms, rates = _expanded_channels(spec.dissipators)
    _check_psd(rates)
    c_quadrature = forms @ T
    X = c_quadrature.T @ rates @ c_quadrature.conj()

    drift = omega @ (h_quadrature - X.imag)
    diffusion = omega @ X.real @ omega.T
    diffusion = 0.5 * (diffusion + diffusion.T)
    return DriftDiffusion(drift=drift, diffusion=diffusion, labels=spec.registry.quadrature_labels())


def complex_drift(dd: DriftDiffusion) -> np.ndarray:
    """Mean drift in the doubled ladder basis, T S T^-1"""
    n = dd.drift.shape[0] // 2
    return quadrature_transform(n) @ dd.drift @ inverse_quadrature_transform(n)


def steady_state(spec: LiouvillianSpec) -> CovarianceState:
    dd = build_drift_diffusion(spec)
    V = solve_lyapunov(dd.drift, dd.diffusion)
    try:
        return CovarianceState(registry=spec.registry, V=V, mean=np.zeros(spec.registry.dimension))
    except InvalidParameter as e:
        raise NumericalFailure(f"Steady state is not physical: {e.detail}") from e


def evolve(spec: LiouvillianSpec, initial: CovarianceState, t_end: float, dt: Optional[float] = None) -> CovarianceState:
    """Covariance and mean at time t_end starting from ``initial``"""
    if initial.registry.labels != spec.registry.labels:
        raise InvalidParameter("Initial state and spec use different mode registries")
    dd = build_drift_diffusion(spec)
    V = integrate_covariance_ode(dd.drift, dd.diffusion, initial.V, t_end, dt)
    mean = expm(dd.drift, t_end) @ initial.mean
    return CovarianceState(registry=spec.registry, V=V, mean=mean)


def complex_moments(state: CovarianceState, registry: Optional[ModeRegistry] = None) -> np.ndarray:
    """Second moments <v_i v_j> in the doubled ladder basis"""
    if registry is not None and registry.labels != state.registry.labels:
        raise InvalidParameter("Registry does not match the state's mode ordering")
    n = state.registry.size
    T = quadrature_transform(n)
    moments = state.V + 0.5j * symplectic_form(n) + np.outer(state.mean, state.mean)
    return T @ moments @ T.T


def mode_occupation(state: CovarianceState, label: str) -> float:
    """<a^dagger a> of a single mode"""
    k = state.registry.index(label)
    return float(complex_moments(state)[2 * k + 1, 2 * k].real)


def direct_sum(specs: Iterable[LiouvillianSpec]) -> LiouvillianSpec:
    """Disjoint union of networks; mode labels must not collide"""
    specs = list(specs)
    if not specs:
        raise InvalidParameter("direct_sum needs at least one spec")
    registry = specs[0].registry
    for s in specs[1:]:
        registry = registry.concat(s.registry)

    G = scipy.linalg.block_diag(*[s.hamiltonian.G for s in specs])
    C = scipy.linalg.block_diag(*[s.dissipators.C for s in specs])
    rates = scipy.linalg.block_diag(*[s.dissipators.rates for s in specs])
    nbar = np.concatenate([s.dissipators.nbar for s in specs])
    return LiouvillianSpec(
        registry=registry,
        hamiltonian=QuadraticHamiltonian(G=G),
        dissipators=DissipatorSet(C=C, rates=rates, nbar=nbar),
    )


def permute_modes(spec: LiouvillianSpec, order: Sequence[str]) -> LiouvillianSpec:
    """Same network with the registry reordered to ``order``"""
    if sorted(order) != sorted(spec.registry.labels) or len(set(order)) != len(order):
        raise InvalidParameter("Order must be a permutation of the registered mode labels")
    registry = spec.registry
    old = [registry.index(label) for label in order]
    idx = np.array([2 * k + s for k in old for s in (0, 1)])
    return LiouvillianSpec(
        registry=ModeRegistry(modes=tuple(registry.modes[k] for k in old)),
        hamiltonian=QuadraticHamiltonian(G=spec.hamiltonian.G[np.ix_(idx, idx)]),
        dissipators=DissipatorSet(C=spec.dissipators.C[:, idx], rates=spec.dissipators.rates, nbar=spec.dissipators.nbar),
    )
