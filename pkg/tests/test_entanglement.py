import numpy as np
import pytest
from numpy.testing import assert_allclose

from app.builders import build_model1
from app.entanglement import (
    extract_two_mode,
    log_negativity,
    log_negativity_between,
    mode_correlator,
    symplectic_eigenvalues,
)
from app.exceptions import InvalidParameter, NumericalFailure
from app.liouvillian import steady_state
from app.models.network import ModeKind, ModeRegistry
from app.models.params import Model1Params
from app.models.state import CovarianceState, TwoModeCovariance

Z = np.diag([1.0, -1.0])


def _two_mode_squeezed(r):
    c, s = np.cosh(2 * r) / 2, np.sinh(2 * r) / 2
    return TwoModeCovariance(A1=c * np.eye(2), B1=c * np.eye(2), C1=s * Z)


def _local_symplectic(rng):
    def rotation(theta):
        return np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])

    s = rng.uniform(-0.5, 0.5)
    return rotation(rng.uniform(0, 2 * np.pi)) @ np.diag([np.exp(s), np.exp(-s)]) @ rotation(rng.uniform(0, 2 * np.pi))


def test_vacuum_is_separable():
    tm = TwoModeCovariance(A1=0.5 * np.eye(2), B1=0.5 * np.eye(2), C1=np.zeros((2, 2)))
    assert log_negativity(tm) == 0.0


def test_two_mode_squeezed_state():
    """Two-mode squeezing r=0.5 has negativity 2r = 1"""
    tm = _two_mode_squeezed(0.5)
    nu_minus, nu_plus = symplectic_eigenvalues(tm)
    assert nu_minus == pytest.approx(np.exp(-1.0) / 2, rel=1e-12)
    assert nu_plus == pytest.approx(np.exp(1.0) / 2, rel=1e-12)
    assert log_negativity(tm) == pytest.approx(1.0, abs=1e-9)


def test_local_symplectic_invariance():
    """Local symplectic maps leave the negativity unchanged"""
    rng = np.random.default_rng(42)
    tm = _two_mode_squeezed(0.5)
    for _ in range(50):
        S = np.kron(np.eye(2), np.eye(2))
        S[:2, :2] = _local_symplectic(rng)
        S[2:, 2:] = _local_symplectic(rng)
        V = S @ tm.matrix @ S.T
        V = 0.5 * (V + V.T)
        moved = TwoModeCovariance(A1=V[:2, :2], B1=V[2:, 2:], C1=V[:2, 2:])
        assert log_negativity(moved) == pytest.approx(1.0, abs=1e-9)


def test_uncorrelated_thermal_pair_is_separable():
    tm = TwoModeCovariance(A1=1.5 * np.eye(2), B1=0.7 * np.eye(2), C1=np.zeros((2, 2)))
    assert log_negativity(tm) == 0.0


def test_negativity_is_symmetric_under_swap():
    tm = _two_mode_squeezed(0.3)
    assert log_negativity(tm.swapped()) == pytest.approx(log_negativity(tm), abs=1e-12)


def test_inadmissible_pair_raises():
    """A matrix that is no state has no real symplectic spectrum"""
    tm = TwoModeCovariance(A1=np.eye(2), B1=0.5 * np.eye(2), C1=np.eye(2))
    with pytest.raises(NumericalFailure):
        symplectic_eigenvalues(tm)
    assert not tm.is_admissible()


def test_extract_two_mode_blocks():
    """Blocks come out in the requested order"""
    registry = ModeRegistry.of(("x", ModeKind.optical), ("y", ModeKind.optical), ("z", ModeKind.mechanical))
    V = np.diag([1.0, 1.0, 1.0, 1.0, 2.0, 2.0])
    V[0, 4] = V[4, 0] = 0.25
    state = CovarianceState(registry=registry, V=V, mean=np.zeros(6))
    tm = extract_two_mode(state, "z", "x")
    assert_allclose(tm.A1, 2.0 * np.eye(2))
    assert_allclose(tm.B1, np.eye(2))
    assert tm.C1[0, 0] == pytest.approx(0.25)
    assert_allclose(extract_two_mode(state, "x", "z").matrix, tm.swapped().matrix)


def test_extract_two_mode_errors():
    registry = ModeRegistry.of(("x", ModeKind.optical), ("y", ModeKind.optical))
    state = CovarianceState.vacuum(registry)
    with pytest.raises(InvalidParameter):
        extract_two_mode(state, "x", "x")
    with pytest.raises(InvalidParameter):
        extract_two_mode(state, "x", "w")


def test_model1_pair_order_does_not_matter():
    state = steady_state(build_model1(Model1Params()))
    assert log_negativity_between(state, "b1", "b2") == pytest.approx(
        log_negativity_between(state, "b2", "b1"), abs=1e-12
    )
    assert abs(mode_correlator(state, "b1", "b2")) == pytest.approx(abs(mode_correlator(state, "b2", "b1")), abs=1e-14)


def test_blue_sideband_entangles_first_pair():
    """The blue-detuned cavity is entangled with its mechanics"""
    state = steady_state(build_model1(Model1Params()))
    assert log_negativity_between(state, "a1", "b1") > 0


def test_temperature_destroys_entanglement_later_with_feedback():
    """Negativity falls with nbar; feedback keeps it alive to higher temperature"""
    grid = np.linspace(0.0, 2.0, 81)
    curves = {}
    for feedback in (True, False):
        curves[feedback] = np.array([
            log_negativity_between(steady_state(build_model1(Model1Params(nbar=n, feedback=feedback))), "b1", "b2")
            for n in grid
        ])
        assert np.all(np.diff(curves[feedback]) <= 1e-12)

    def first_zero(curve):
        zeros = np.flatnonzero(curve == 0.0)
        assert zeros.size, "entanglement never vanished on the grid"
        return zeros[0]

    assert first_zero(curves[True]) > first_zero(curves[False])
