"""Two-mode reductions, symplectic eigenvalues and logarithmic negativity.

Negativity uses the natural logarithm; with vacuum variance 1/2 a two-mode
state is separable iff the smallest partially transposed symplectic
eigenvalue is at least 1/2.
"""
import logging
from typing import Tuple

import numpy as np

from app.exceptions import InvalidParameter, NumericalFailure
from app.liouvillian import complex_moments
from app.models.state import CovarianceState, TwoModeCovariance

logger = logging.getLogger(__name__)

DISCRIMINANT_TOL = 1e-10


def extract_two_mode(state: CovarianceState, i: str, j: str) -> TwoModeCovariance:
    if i == j:
        raise InvalidParameter(f"Two distinct modes are required, got '{i}' twice")
    ki = state.registry.index(i)
    kj = state.registry.index(j)
    V = state.V
    si = slice(2 * ki, 2 * ki + 2)
    sj = slice(2 * kj, 2 * kj + 2)
    return TwoModeCovariance(A1=V[si, si], B1=V[sj, sj], C1=V[si, sj])


def symplectic_eigenvalues(tm: TwoModeCovariance) -> Tuple[float, float]:
    """(nu_minus, nu_plus) of the partially transposed state"""
    det_a = float(np.linalg.det(tm.A1))
    det_b = float(np.linalg.det(tm.B1))
    det_c = float(np.linalg.det(tm.C1))
    det_v = float(np.linalg.det(tm.matrix))

    sigma = det_a + det_b - 2.0 * det_c
    discriminant = sigma * sigma - 4.0 * det_v
    if discriminant < -DISCRIMINANT_TOL:
        raise NumericalFailure(f"Inadmissible two-mode covariance (discriminant {discriminant:.3e})")
    root = np.sqrt(max(discriminant, 0.0))

    nu_minus_sq = sigma / 2.0 - root / 2.0
    nu_plus_sq = sigma / 2.0 + root / 2.0
    if nu_minus_sq <= 0.0:
        raise NumericalFailure(f"Non-positive symplectic eigenvalue squared ({nu_minus_sq:.3e})")
    return float(np.sqrt(nu_minus_sq)), float(np.sqrt(nu_plus_sq))


def log_negativity(tm: TwoModeCovariance) -> float:
    nu_minus, _ = symplectic_eigenvalues(tm)
    if nu_minus >= 0.5:
        return 0.0
    return float(-np.log(2.0 * nu_minus))


def log_negativity_between(state: CovarianceState, i: str, j: str) -> float:
    return log_negativity(extract_two_mode(state, i, j))


def mode_correlator(state: CovarianceState, i: str, j: str) -> complex:
    """<a_i a_j> including the mean-field part"""
    ki = state.registry.index(i)
    kj = state.registry.index(j)
    return complex(complex_moments(state)[2 * ki, 2 * kj])
