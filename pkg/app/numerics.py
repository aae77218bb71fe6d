"""Dense matrix kernels: stability gate, matrix exponential, Lyapunov and
Sylvester solvers and a fixed-step covariance integrator.

All functions are pure; inputs are never modified in place.
"""
import logging
import math
from typing import Optional

import numpy as np
import scipy.linalg

from app.config import settings
from app.exceptions import InvalidParameter, NumericalFailure, UnstableDynamics

logger = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-10


def _as_matrix(a, name: str, square: bool = True) -> np.ndarray:
    m = np.asarray(a)
    if m.ndim != 2:
        raise InvalidParameter(f"{name} must be a 2-D matrix, got shape {m.shape}")
    if square and m.shape[0] != m.shape[1]:
        raise InvalidParameter(f"{name} must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NumericalFailure(f"{name} has non-finite entries")
    if not np.iscomplexobj(m):
        m = m.astype(float)
    return m


def _max_abs(a: np.ndarray) -> float:
    return float(np.max(np.abs(a))) if a.size else 0.0


def symplectic_form(n_modes: int) -> np.ndarray:
    """Block-diagonal symplectic form with blocks [[0, 1], [-1, 0]]"""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def heisenberg_min_eigenvalue(V) -> float:
    """Smallest eigenvalue of V + i*Omega/2; negative values violate the uncertainty principle"""
    V = _as_matrix(V, "V")
    if V.shape[0] % 2:
        raise InvalidParameter("Covariance dimension must be even")
    omega = symplectic_form(V.shape[0] // 2)
    return float(np.min(np.linalg.eigvalsh(V + 0.5j * omega)))


def spectral_abscissa(A) -> float:
    """Largest real part over the spectrum of A"""
    A = _as_matrix(A, "A")
    try:
        eigenvalues = scipy.linalg.eigvals(A)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise NumericalFailure(f"Eigenvalue solver failed: {e}") from e
    return float(np.max(eigenvalues.real))


def solve_lyapunov(S, Q) -> np.ndarray:
    """Solve S X + X S^T + Q = 0 for a strictly stable S.

    Systems up to ``settings.kronecker_max_dim`` go through the vectorized
    (Kronecker) linear system; larger ones use Bartels-Stewart.
    """
    S = _as_matrix(S, "S")
    Q = _as_matrix(Q, "Q")
    if S.shape != Q.shape:
        raise InvalidParameter(f"S {S.shape} and Q {Q.shape} must have the same shape")

    abscissa = spectral_abscissa(S)
    if abscissa >= 0:
        raise UnstableDynamics(abscissa)

    n = S.shape[0]
    if n <= settings.kronecker_max_dim:
        identity = np.eye(n)
        # column-stacking: vec(S X + X S^T) = (I kron S + S kron I) vec(X)
        system = np.kron(identity, S) + np.kron(S, identity)
        try:
            x = scipy.linalg.solve(system, -Q.reshape(-1, order="F"))
        except np.linalg.LinAlgError as e:
            raise NumericalFailure(f"Singular Kronecker system: {e}") from e
        X = x.reshape((n, n), order="F")
    else:
        try:
            X = scipy.linalg.solve_continuous_lyapunov(S, -Q)
        except (np.linalg.LinAlgError, ValueError) as e:
            raise NumericalFailure(f"Bartels-Stewart solve failed: {e}") from e

    if not np.iscomplexobj(S) and not np.iscomplexobj(Q) and np.allclose(Q, Q.T, rtol=0.0, atol=1e-14 * (1 + _max_abs(Q))):
        X = 0.5 * (X + X.T)

    residual = _max_abs(S @ X + X @ S.T + Q)
    if not np.isfinite(residual) or residual > RESIDUAL_TOL * (1.0 + _max_abs(Q)):
        raise NumericalFailure(f"Lyapunov residual {residual:.3e} exceeds tolerance")
    return X


def solve_sylvester(A, B, C) -> np.ndarray:
    """Solve A X + X B = C"""
    A = _as_matrix(A, "A")
    B = _as_matrix(B, "B")
    C = _as_matrix(C, "C", square=False)
    if C.shape != (A.shape[0], B.shape[0]):
        raise InvalidParameter(f"C must have shape {(A.shape[0], B.shape[0])}, got {C.shape}")

    # unique solvability needs spec(A) and spec(-B) disjoint
    try:
        eig_a = scipy.linalg.eigvals(A)
        eig_b = scipy.linalg.eigvals(B)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise NumericalFailure(f"Eigenvalue solver failed: {e}") from e
    scale = 1.0 + max(_max_abs(A), _max_abs(B))
    gap = float(np.min(np.abs(eig_a[:, None] + eig_b[None, :])))
    if gap <= 1e-12 * scale:
        raise NumericalFailure(f"Spectra of A and -B collide (gap {gap:.3e})")

    try:
        X = scipy.linalg.solve_sylvester(A, B, C)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise NumericalFailure(f"Sylvester solve failed: {e}") from e

    residual = _max_abs(A @ X + X @ B - C)
    if not np.isfinite(residual) or residual > RESIDUAL_TOL * (1.0 + _max_abs(C)):
        raise NumericalFailure(f"Sylvester residual {residual:.3e} exceeds tolerance")
    return X


def expm(A, t: float = 1.0) -> np.ndarray:
    """Matrix exponential of A*t; t == 0 returns the identity exactly"""
    A = _as_matrix(A, "A")
    if t == 0:
        return np.eye(A.shape[0], dtype=A.dtype)
    with np.errstate(over="ignore", invalid="ignore"):
        result = scipy.linalg.expm(A * t)
    if not np.all(np.isfinite(result)):
        raise NumericalFailure(f"Matrix exponential overflowed at t={t}")
    return result


def integrate_covariance_ode(S, D, V0, t_end: float, dt: Optional[float] = None) -> np.ndarray:
    """Fixed-step RK4 integration of dV/dt = S V + V S^T + D up to t_end.

    The step is the largest uniform step not exceeding ``dt`` that lands on
    t_end. V is symmetrized after every step.
    """
    dt = settings.ode_dt if dt is None else dt
    if dt <= 0:
        raise InvalidParameter(f"dt must be positive, got {dt}")
    if t_end < 0:
        raise InvalidParameter(f"t_end must be non-negative, got {t_end}")
    S = _as_matrix(S, "S")
    D = _as_matrix(D, "D")
    V = _as_matrix(V0, "V0").copy()
    if not (S.shape == D.shape == V.shape):
        raise InvalidParameter(f"Shape mismatch: S {S.shape}, D {D.shape}, V0 {V.shape}")
    if t_end == 0:
        return V

    n_steps = max(1, math.ceil(t_end / dt - 1e-9))
    h = t_end / n_steps
    St = S.T

    def rhs(X):
        return S @ X + X @ St + D

    logger.debug(f"Integrating covariance ODE: {n_steps} steps of {h:.3e}")
    for step in range(n_steps):
        k1 = rhs(V)
        k2 = rhs(V + 0.5 * h * k1)
        k3 = rhs(V + 0.5 * h * k2)
        k4 = rhs(V + h * k3)
        V = V + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        V = 0.5 * (V + V.T)
        norm = _max_abs(V)
        if not np.isfinite(norm) or norm > settings.ode_blowup_norm:
            raise NumericalFailure(f"Covariance blew up at step {step + 1} (|V| = {norm:.3e})")
    return V
