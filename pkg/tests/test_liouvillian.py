import numpy as np
import pytest
from numpy.testing import assert_allclose

from app.builders import build_model1, build_model2
from app.entanglement import log_negativity_between, mode_correlator
from app.exceptions import InvalidParameter
from app.liouvillian import (
    add_cascade,
    build_drift_diffusion,
    complex_drift,
    complex_moments,
    direct_sum,
    evolve,
    mode_occupation,
    permute_modes,
    steady_state,
)
from app.models.network import (
    DissipatorSet,
    LiouvillianSpec,
    ModeKind,
    ModeRegistry,
    QuadraticHamiltonian,
    create,
    destroy,
)
from app.models.params import Model1Params, Model2Params
from app.models.state import CovarianceState
from app.numerics import integrate_covariance_ode, spectral_abscissa


def _single(label="a", kind=ModeKind.optical):
    return LiouvillianSpec.empty(ModeRegistry.of((label, kind)))


def _pair():
    return LiouvillianSpec.empty(ModeRegistry.of(("a1", ModeKind.optical), ("a2", ModeKind.optical)))


def test_damped_mode_drift_and_diffusion():
    """sqrt(G) a at G=1 gives S=-I/2 and D=I/2"""
    dd = build_drift_diffusion(_single().with_decay("a", 1.0))
    assert_allclose(dd.S, -0.5 * np.eye(2), atol=1e-15)
    assert_allclose(dd.D, 0.5 * np.eye(2), atol=1e-15)
    assert dd.labels == ("q_a", "p_a")


def test_damped_mode_relaxes_to_vacuum():
    """Zero-temperature decay leaves the vacuum"""
    state = steady_state(_single().with_decay("a", 1.0))
    assert_allclose(state.V, 0.5 * np.eye(2), atol=1e-14)


def test_thermal_mechanics_fixed_point():
    """gamma=0.3, nbar=2 settles at (nbar + 1/2) I"""
    state = steady_state(_single("b", ModeKind.mechanical).with_decay("b", 0.3, 2.0))
    assert_allclose(state.V, 2.5 * np.eye(2), atol=1e-12)
    assert mode_occupation(state, "b") == pytest.approx(2.0, abs=1e-12)


def test_cascade_dissipation_block():
    """Cascaded unit rates give the rank-one block [[1,1],[1,1]]"""
    spec = add_cascade(_pair(), "a1", "a2", 1.0, 1.0)
    rates = spec.dissipators.rates
    assert rates.shape == (2, 2)
    assert_allclose(rates, np.ones((2, 2)), atol=1e-15)
    assert_allclose(np.sort(np.linalg.eigvalsh(rates)), [0.0, 2.0], atol=1e-14)


def test_cascade_reuses_existing_decays():
    """Existing decay channels are correlated instead of duplicated"""
    spec = add_cascade(_pair().with_decay("a1", 1.0).with_decay("a2", 1.0), "a1", "a2", 1.0, 1.0)
    assert spec.dissipators.channel_count == 2


def test_cascade_is_unidirectional():
    """The target sees the source; the source never sees the target"""
    spec = add_cascade(_pair(), "a1", "a2", 1.0, 1.0)
    M = complex_drift(build_drift_diffusion(spec))
    assert M[2, 0] == pytest.approx(-1.0, abs=1e-14)
    assert abs(M[0, 2]) < 1e-14
    assert M[0, 0] == pytest.approx(-0.5, abs=1e-14)
    assert M[2, 2] == pytest.approx(-0.5, abs=1e-14)


@pytest.mark.parametrize("rate1,rate2", [(-1.0, 1.0), (1.0, -0.5)])
def test_cascade_rejects_negative_rates(rate1, rate2):
    with pytest.raises(InvalidParameter):
        add_cascade(_pair(), "a1", "a2", rate1, rate2)


@pytest.mark.parametrize("rate1,rate2", [(0.0, 1.0), (1.0, 0.0)])
def test_cascade_with_zero_rate_is_a_no_op(rate1, rate2):
    """A dark port has nothing to feed forward"""
    spec = _pair().with_decay("a1", rate1).with_decay("a2", rate2)
    assert add_cascade(spec, "a1", "a2", rate1, rate2) is spec


@pytest.mark.parametrize("field", ["Gamma1", "Gamma2"])
def test_zero_linewidth_feedback_matches_open_loop(field):
    """Model 1 with a dark cavity builds the same generator with or without feedback"""
    params = Model1Params(**{field: 0.0})
    on = build_drift_diffusion(build_model1(params))
    off = build_drift_diffusion(build_model1(params.model_copy(update={"feedback": False})))
    assert_allclose(on.S, off.S, atol=0)
    assert_allclose(on.D, off.D, atol=0)


def test_cascade_rejects_self_loop():
    """Source and target must differ"""
    with pytest.raises(InvalidParameter):
        add_cascade(_pair(), "a1", "a1", 1.0, 1.0)


def test_cascade_rejects_weaker_existing_decay():
    """A decay weaker than the cascade rate cannot host it"""
    with pytest.raises(InvalidParameter):
        add_cascade(_pair().with_decay("a1", 0.5), "a1", "a2", 1.0, 1.0)


def test_non_psd_dissipation_rejected():
    """Negative directions of the dissipation matrix are refused"""
    spec = LiouvillianSpec(
        registry=_pair().registry,
        hamiltonian=QuadraticHamiltonian.zero(4),
        dissipators=DissipatorSet(
            C=[[1, 0, 0, 0], [0, 0, 1, 0]],
            rates=[[1.0, 2.0], [2.0, 1.0]],
            nbar=[0.0, 0.0],
        ),
    )
    with pytest.raises(InvalidParameter):
        build_drift_diffusion(spec)


def test_thermal_channel_cannot_be_correlated():
    """Thermal channels stay single-mode and uncorrelated"""
    with pytest.raises(InvalidParameter):
        DissipatorSet(C=[[1, 0, 0, 0], [0, 0, 1, 0]], rates=[[1.0, 0.5], [0.5, 1.0]], nbar=[1.0, 0.0])
    with pytest.raises(InvalidParameter):
        DissipatorSet(C=[[1, 0, 1, 0]], rates=[[1.0]], nbar=[1.0])


def test_time_dependent_hamiltonian_rejected():
    """Only constant generators exist outside the rotating frame"""
    with pytest.raises(InvalidParameter, match="rotating frame"):
        QuadraticHamiltonian(G=lambda t: np.eye(2) * np.cos(t))


def test_non_hermitian_hamiltonian_rejected():
    with pytest.raises(InvalidParameter):
        QuadraticHamiltonian(G=[[0, 1], [0, 0]])


def test_duplicate_labels_rejected():
    with pytest.raises(InvalidParameter):
        ModeRegistry.of(("a", ModeKind.optical), ("a", ModeKind.mechanical))


def test_dimension_mismatch_rejected():
    """Matrices must match the registry"""
    with pytest.raises(InvalidParameter):
        LiouvillianSpec(
            registry=_pair().registry,
            hamiltonian=QuadraticHamiltonian.zero(2),
            dissipators=DissipatorSet.empty(4),
        )


def test_linearity_in_hamiltonian_and_dissipators():
    """(S, D) of H + dissipators equals the sum of the separate parts"""
    full = build_model1(Model1Params(nbar=0.3))
    hamiltonian_only = full.with_dissipators(DissipatorSet.empty(full.registry.dimension))
    dissipators_only = full.with_hamiltonian(QuadraticHamiltonian.zero(full.registry.dimension))

    whole = build_drift_diffusion(full)
    h = build_drift_diffusion(hamiltonian_only)
    d = build_drift_diffusion(dissipators_only)
    assert_allclose(whole.S, h.S + d.S, atol=1e-15)
    assert_allclose(whole.D, h.D + d.D, atol=1e-15)
    assert_allclose(h.D, 0.0, atol=1e-15)


def test_uncoupled_subsystems_give_block_diagonal_moments():
    """kappa=0 without feedback separates the two optomechanical pairs"""
    spec = build_model1(Model1Params(kappa=0.0, feedback=False, nbar=0.5))
    dd = build_drift_diffusion(spec)
    assert_allclose(dd.S[:4, 4:], 0.0, atol=1e-15)
    assert_allclose(dd.S[4:, :4], 0.0, atol=1e-15)
    assert_allclose(dd.D[:4, 4:], 0.0, atol=1e-15)
    state = steady_state(spec)
    assert np.max(np.abs(state.V[:4, 4:])) <= 1e-12


def test_model1_complex_drift():
    """Heisenberg-Langevin drift of Model 1 with feedback in the ladder basis"""
    g1, g2, k, y = 0.01, 0.05, 0.1, 0.01
    M = complex_drift(build_drift_diffusion(build_model1(Model1Params(g1=g1, g2=g2, kappa=k, gamma=y))))
    h = 0.5
    expected = np.array([
        [-h, 0, 0, -1j * g1, -1j * k, 0, 0, 0],
        [0, -h, 1j * g1, 0, 0, 1j * k, 0, 0],
        [0, -1j * g1, -y / 2, 0, 0, 0, 0, 0],
        [1j * g1, 0, 0, -y / 2, 0, 0, 0, 0],
        [-1j * k - 1.0, 0, 0, 0, -h, 0, -1j * g2, 0],
        [0, 1j * k - 1.0, 0, 0, 0, -h, 0, 1j * g2],
        [0, 0, 0, 0, -1j * g2, 0, -y / 2, 0],
        [0, 0, 0, 0, 0, 1j * g2, 0, -y / 2],
    ])
    assert_allclose(M, expected, atol=1e-14)


def test_model1_complex_drift_without_feedback():
    """Dropping the cascade removes the a1 -> a2 rate only"""
    M = complex_drift(build_drift_diffusion(build_model1(Model1Params(feedback=False))))
    assert M[4, 0] == pytest.approx(-0.1j, abs=1e-14)
    assert M[0, 4] == pytest.approx(-0.1j, abs=1e-14)


def test_model2_complex_drift():
    """Shared mechanics with feedback in the ladder basis"""
    g1, g2, y = 0.02, 0.05, 0.01
    M = complex_drift(build_drift_diffusion(build_model2(Model2Params(g1=g1, g2=g2, gamma1=y))))
    h = 0.5
    expected = np.array([
        [-h, 0, 0, -1j * g1, 0, 0],
        [0, -h, 1j * g1, 0, 0, 0],
        [0, -1j * g1, -y / 2, 0, -1j * g2, 0],
        [1j * g1, 0, 0, -y / 2, 0, 1j * g2],
        [-1.0, 0, -1j * g2, 0, -h, 0],
        [0, -1.0, 0, 1j * g2, 0, -h],
    ])
    assert_allclose(M, expected, atol=1e-14)


def test_model1_steady_state_is_physical():
    """Steady state satisfies the uncertainty principle and det(2V) >= 1"""
    state = steady_state(build_model1(Model1Params(nbar=0.2)))
    assert state.heisenberg_min_eigenvalue() >= -1e-8
    assert state.purity_determinant() >= 1.0 - 1e-8
    assert np.max(np.abs(state.V - state.V.T)) <= 1e-12


def test_all_couplings_off_gives_product_state():
    """g1=g2=kappa=0: optical vacuum and thermal mechanics"""
    spec = build_model1(Model1Params(g1=0.0, g2=0.0, kappa=0.0, feedback=False, nbar=1.0))
    state = steady_state(spec)
    expected = np.diag([0.5, 0.5, 1.5, 1.5, 0.5, 0.5, 1.5, 1.5])
    assert_allclose(state.V, expected, atol=1e-12)


def test_ode_reaches_lyapunov_solution():
    """Integrating Model 1 from vacuum to t=1e4 lands on the steady state"""
    spec = build_model1(Model1Params())
    dd = build_drift_diffusion(spec)
    assert spectral_abscissa(dd.S) < 0
    target = steady_state(spec).V
    V = integrate_covariance_ode(dd.S, dd.D, 0.5 * np.eye(8), 1e4, 0.1)
    assert np.max(np.abs(V - target)) < 1e-6


def test_evolve_thermalizes_mechanics():
    """V(t) = V_inf + (V0 - V_inf) exp(-gamma t)"""
    spec = _single("b", ModeKind.mechanical).with_decay("b", 1.0, 1.0)
    state = evolve(spec, CovarianceState.vacuum(spec.registry), 1.0)
    assert_allclose(state.V, (1.5 - np.exp(-1.0)) * np.eye(2), atol=1e-10)
    assert_allclose(state.mean, 0.0)


def test_evolve_decays_mean():
    """Coherent amplitude decays at half the linewidth"""
    spec = _single().with_decay("a", 1.0)
    initial = CovarianceState(registry=spec.registry, V=0.5 * np.eye(2), mean=[1.0, 0.0])
    state = evolve(spec, initial, 2.0)
    assert_allclose(state.mean, [np.exp(-1.0), 0.0], atol=1e-12)


def test_vacuum_moments():
    """<a a^dagger> = 1, <a^dagger a> = 0, <a a> = 0 in vacuum"""
    registry = ModeRegistry.of(("a", ModeKind.optical))
    M = complex_moments(CovarianceState.vacuum(registry))
    assert M[0, 1] == pytest.approx(1.0, abs=1e-15)
    assert M[1, 0] == pytest.approx(0.0, abs=1e-15)
    assert M[0, 0] == pytest.approx(0.0, abs=1e-15)


def test_inadmissible_covariance_rejected():
    """Covariances below the vacuum bound are not states"""
    registry = ModeRegistry.of(("a", ModeKind.optical))
    with pytest.raises(InvalidParameter):
        CovarianceState(registry=registry, V=0.1 * np.eye(2), mean=[0.0, 0.0])


@pytest.mark.parametrize("bad", [np.nan, np.inf, -np.inf])
def test_non_finite_mean_rejected(bad):
    registry = ModeRegistry.of(("a", ModeKind.optical))
    with pytest.raises(InvalidParameter, match="non-finite"):
        CovarianceState(registry=registry, V=0.5 * np.eye(2), mean=[bad, 0.0])


def test_permute_modes_reorders_steady_state():
    """Relabeling the registry permutes the covariance accordingly"""
    spec = build_model1(Model1Params(nbar=0.1))
    order = ["a2", "b2", "a1", "b1"]
    permuted = permute_modes(spec, order)
    assert permuted.registry.labels == tuple(order)

    V = steady_state(spec).V
    idx = [2 * spec.registry.index(label) + s for label in order for s in (0, 1)]
    assert_allclose(steady_state(permuted).V, V[np.ix_(idx, idx)], atol=1e-12)


def _mirrored_model1(p: Model1Params) -> LiouvillianSpec:
    """Model 1 with cavities 1 and 2 relabeled and the cascade running a2 -> a1"""
    gamma_1, gamma_2 = p.mechanical_damping
    nbar_1, nbar_2 = p.mechanical_occupation
    registry = ModeRegistry.of(
        ("a1", ModeKind.optical), ("b1", ModeKind.mechanical), ("a2", ModeKind.optical), ("b2", ModeKind.mechanical)
    )
    spec = (
        LiouvillianSpec.empty(registry)
        .with_product(destroy("a2"), destroy("b2"), p.g1)
        .with_product(create("a1"), destroy("b1"), p.g2)
        .with_product(create("a1"), destroy("a2"), p.kappa)
        .with_decay("a2", p.Gamma1)
        .with_decay("b2", gamma_1, nbar_1)
        .with_decay("a1", p.Gamma2)
        .with_decay("b1", gamma_2, nbar_2)
    )
    return add_cascade(spec, "a2", "a1", p.Gamma1, p.Gamma2)


def test_swapping_cavities_with_reversed_cascade_is_a_relabeling():
    """1 <-> 2 with the cascade reversed gives the same state up to the mode permutation"""
    p = Model1Params(g1=0.015, g2=0.04, kappa=0.2, Gamma1=1.0, Gamma2=0.8, gamma=0.01, gamma2=0.02, nbar=0.3)
    original = steady_state(build_model1(p))
    mirrored = steady_state(permute_modes(_mirrored_model1(p), ["a2", "b2", "a1", "b1"]))
    assert_allclose(mirrored.V, original.V, atol=1e-12)

    unpermuted = steady_state(_mirrored_model1(p))
    assert mode_correlator(unpermuted, "b2", "b1") == pytest.approx(mode_correlator(original, "b1", "b2"), abs=1e-12)
    assert mode_correlator(unpermuted, "a2", "b2") == pytest.approx(mode_correlator(original, "a1", "b1"), abs=1e-12)
    assert log_negativity_between(unpermuted, "b2", "b1") == pytest.approx(
        log_negativity_between(original, "b1", "b2"), abs=1e-10
    )


def test_permute_modes_requires_permutation():
    with pytest.raises(InvalidParameter):
        permute_modes(build_model1(Model1Params()), ["a1", "b1", "a2"])


def test_direct_sum_keeps_blocks_and_labels():
    """Disjoint union of two networks"""
    left = _single("x").with_decay("x", 1.0)
    right = _single("y", ModeKind.mechanical).with_decay("y", 0.2, 1.0)
    joint = direct_sum([left, right])
    assert joint.registry.labels == ("x", "y")
    state = steady_state(joint)
    assert_allclose(state.V, np.diag([0.5, 0.5, 1.5, 1.5]), atol=1e-12)


def test_direct_sum_rejects_label_collision():
    with pytest.raises(InvalidParameter):
        direct_sum([_single("x"), _single("x")])


def test_with_product_adds_hermitian_pair():
    """g (a b + a^dagger b^dagger) fills the anomalous entries of G"""
    spec = LiouvillianSpec.empty(ModeRegistry.of(("a", ModeKind.optical), ("b", ModeKind.mechanical)))
    G = spec.with_product(destroy("a"), destroy("b"), 0.3).hamiltonian.G
    assert G[1, 2] == pytest.approx(0.3)
    assert G[2, 1] == pytest.approx(0.3)
    assert G[0, 3] == pytest.approx(0.3)
    assert G[3, 0] == pytest.approx(0.3)
    assert_allclose(G, G.conj().T)
    assert spec.with_product(create("a"), destroy("b"), 0.0) is spec
