"""Closed-form and semi-analytic results obtained by adiabatically eliminating
cavity modes with linewidth Gamma much larger than every other rate.

All baths are at zero temperature and both cavities share the linewidth
Gamma. sqrt(Gamma^2) is always taken as +Gamma.
"""
import logging

import numpy as np
import scipy.integrate

from app.exceptions import SingularLimit, UnstableDynamics
from app.models.params import AdiabaticParams
from app.numerics import expm, solve_sylvester, spectral_abscissa

logger = logging.getLogger(__name__)

SINGULAR_TOL = 1e-14


def _warn_regime(p: AdiabaticParams) -> None:
    warning = p.regime_warning
    if warning:
        logger.warning(warning)


def _check_denominator(beta1: complex, beta2: complex) -> None:
    denominator = beta1 * beta1 - 4.0 * beta2 * beta2
    scale = max(abs(beta1) ** 2, 4.0 * abs(beta2) ** 2, np.finfo(float).tiny)
    if abs(beta1) <= SINGULAR_TOL * max(abs(beta2), 1.0) or abs(denominator) <= SINGULAR_TOL * scale:
        raise SingularLimit(f"Degenerate denominator: beta1={beta1:.6g}, beta2={beta2:.6g}")


def _alpha_squared(p: AdiabaticParams) -> float:
    G, k, g1, g2 = p.Gamma, p.kappa, p.g1, p.g2
    return G**2 * g1**4 + 2.0 * (G**2 + 8.0 * k**2) * g1**2 * g2**2 + G**2 * g2**4


def b1b2_no_feedback(p: AdiabaticParams) -> complex:
    """<b1 b2> of the reversibly coupled cavities without the cascade"""
    _warn_regime(p)
    if p.g1 == 0 or p.g2 == 0 or p.kappa == 0:
        return 0j
    G, k, g1, g2, y = p.Gamma, p.kappa, p.g1, p.g2, p.gamma

    alpha = np.sqrt(_alpha_squared(p))
    lorentzian = G**2 + 4.0 * k**2
    beta1 = y + 2.0 * G * (g2**2 - g1**2) / lorentzian
    beta2 = alpha / lorentzian
    _check_denominator(beta1, beta2)

    prefactor = 4j * k * g1 * g2 / alpha**2
    return complex(prefactor * y * (G * (g1**2 + g2**2) * 2.0 * beta2 / beta1 + alpha) * beta2 / (beta1**2 - 4.0 * beta2**2))


def b1b2_with_feedback(p: AdiabaticParams) -> complex:
    """<b1 b2> with the cascade a1 -> a2 on top of the reversible coupling"""
    _warn_regime(p)
    if p.g1 == 0 or p.g2 == 0:
        return 0j
    G, k, g1, g2, y = p.Gamma, p.kappa, p.g1, p.g2, p.gamma

    shifted = _alpha_squared(p) - 16j * k * G * g1**2 * g2**2
    root = np.sqrt(complex(shifted))
    lorentzian = G**2 + 4.0 * k**2 - 4j * k * G
    beta1 = y + 2.0 * G * (g2**2 - g1**2) / lorentzian
    beta2 = root / lorentzian
    _check_denominator(beta1, beta2)

    prefactor = 4.0 * (G + 1j * k) * g1 * g2 / shifted
    return complex(prefactor * y * (G * (g1**2 + g2**2) * 2.0 * beta2 / beta1 + root) * beta2 / (beta1**2 - 4.0 * beta2**2))


def _reduced_model2(p: AdiabaticParams):
    """Drift C and noise weights W for (a2, a2^dagger, b, b^dagger) after eliminating a1"""
    G, g1, g2, y = p.Gamma, p.g1, p.g2, p.gamma
    damping = y / 2.0 - 2.0 * g1**2 / G
    C = np.array([
        [-G / 2.0, 0.0, -1j * g2, 2j * g1],
        [0.0, -G / 2.0, -2j * g1, 1j * g2],
        [-1j * g2, 0.0, -damping, 0.0],
        [0.0, 1j * g2, 0.0, -damping],
    ], dtype=complex)
    W = np.zeros((4, 4), dtype=complex)
    W[0, 1] = G
    W[0, 2] = 2j * g1
    W[2, 3] = y
    W[3, 1] = -2j * g1
    W[3, 2] = 4.0 * g1**2 / G
    return C, W


def model2_a2b_with_feedback(p: AdiabaticParams) -> complex:
    """<a2 b> of the shared-mechanics model with feedback, a1 eliminated.

    Element (a2, b) of X = int_0^inf e^{Ct} W e^{C^T t} dt, obtained from
    C X + X C^T = -W. ``kappa`` is not used.
    """
    _warn_regime(p)
    C, W = _reduced_model2(p)
    abscissa = spectral_abscissa(C)
    if abscissa >= 0:
        raise UnstableDynamics(abscissa)
    X = solve_sylvester(C, C.T, -W)
    return complex(X[0, 2])


def model2_a2b_quadrature(p: AdiabaticParams, decay_lengths: float = 40.0) -> complex:
    """Same quantity as model2_a2b_with_feedback by adaptive quadrature of the integrand"""
    C, W = _reduced_model2(p)
    abscissa = spectral_abscissa(C)
    if abscissa >= 0:
        raise UnstableDynamics(abscissa)
    t_max = decay_lengths / abs(abscissa)

    def integrand(t: float) -> complex:
        Y = expm(C, t)
        return (Y @ W @ Y.T)[0, 2]

    # geometric breakpoints resolve the fast cavity transient and the slow mechanical tail
    edges = [0.0] + [t for t in np.geomspace(1.0, t_max, 12) if t < t_max] + [t_max]
    real = imag = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        real += scipy.integrate.quad(lambda t: integrand(t).real, lo, hi, epsabs=1e-13, epsrel=1e-11, limit=200)[0]
        imag += scipy.integrate.quad(lambda t: integrand(t).imag, lo, hi, epsabs=1e-13, epsrel=1e-11, limit=200)[0]
    return complex(real, imag)


def model2_a2b_no_feedback() -> complex:
    """Without feedback a2 and b stay uncorrelated"""
    return 0j
