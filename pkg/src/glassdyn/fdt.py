"""Time-translation-invariant relaxation: the scalar memory equation.

The correlation c(tau) of a stationary state obeys a causal convolution
equation driven by the kernel gamma + 2 beta^2 nu'(c).  The derivative is the
primary unknown (the equation is naturally first order in c'); c is
reconstructed by quadrature.  A stationary two-time solution is assembled
from c by diagonal transport.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .dynamics import TwoTimeSolution, VARIANT_SPHERICAL
from .errors import ConfigError, PlateauWarning
from .init_params import InitCondition, check_stationary
from .mixture import Mixture, phi_gamma
from .phase import c_inf as plateau_level

__all__ = ["FdtSolution", "solve_fdt", "stationary_two_time"]


@dataclass(frozen=True)
class FdtSolution:
    """Relaxation curve c on a uniform tau grid with its defining parameters.

    The response is r(tau) = -2 c'(tau); r(0+) = 1 since c'(0) = -1/2.
    """

    h_tau: float
    c: np.ndarray
    cprime: np.ndarray
    gamma: float
    c_inf: float
    beta: float
    mixture: Mixture
    plateaued: bool

    @property
    def tau(self) -> np.ndarray:
        return np.arange(len(self.c)) * self.h_tau

    @property
    def r(self) -> np.ndarray:
        return -2.0 * self.cprime


def solve_fdt(m: Mixture, beta: float, gamma: float, T_tau: float,
              h_tau: float) -> FdtSolution:
    """March c'(tau) = -int_0^tau phi_gamma(c(v)) c'(tau - v) dv - 1/2, c(0)=1.

    Trapezoidal quadrature with the new-point kernel value solved implicitly
    (it enters linearly), then one corrector pass refreshing the kernel at the
    freshly integrated c.  Raises if gamma admits no plateau; warns if the
    window ends more than 10 h away from the plateau level.
    """
    ci = plateau_level(m, beta, gamma)
    n = round(T_tau / h_tau)
    if abs(T_tau / h_tau - n) > 1e-9 or n < 1:
        raise ConfigError("T_tau must be a positive integer multiple of h_tau")
    h = h_tau
    c = np.empty(n + 1)
    d = np.empty(n + 1)
    kern = np.empty(n + 1)
    c[0] = 1.0
    d[0] = -0.5
    kern[0] = phi_gamma(m, beta, gamma, 1.0)
    denom = 1.0 + 0.5 * h * kern[0]
    for k in range(1, n + 1):
        inner = float(np.dot(kern[1:k], d[k - 1:0:-1])) if k > 1 else 0.0
        c[k] = c[k - 1]  # placeholder for the kernel guess below
        kern[k] = phi_gamma(m, beta, gamma, c[k])
        for _ in range(2):
            conv = h * inner + 0.5 * h * kern[k] * d[0]
            d[k] = -(conv + 0.5) / denom
            c[k] = c[k - 1] + 0.5 * h * (d[k - 1] + d[k])
            kern[k] = phi_gamma(m, beta, gamma, c[k])
    lag = max(1, round(1.0 / h))
    plateaued = n > lag and abs(c[-1] - c[-1 - lag]) < 1e-8
    if abs(c[-1] - ci) > 10.0 * h:
        warnings.warn(
            f"window ended at c = {c[-1]:.6f}, plateau {ci:.6f} not reached",
            PlateauWarning,
        )
    return FdtSolution(h, c, d, gamma, ci, beta, m, plateaued)


def stationary_two_time(fdt: FdtSolution, ic: InitCondition) -> TwoTimeSolution:
    """Lift a relaxation curve to the full two-time grid for stationary data.

    C(s, t) = c(s - t), R = -2 c'(s - t), q and H constant, unit diagonal,
    mu = gamma + 2 beta^2 nu'(1), and L(s) = -2 b_alpha (c(s) - 1).  Refuses
    data that fail the stationarity test.
    """
    m, beta = fdt.mixture, fdt.beta
    rep = check_stationary(ic, m, beta)
    if not rep.admissible:
        raise ConfigError(
            f"initial data are not stationary (residual {rep.residual:.3e})")
    n = len(fdt.c) - 1
    C = np.zeros((n + 1, n + 1))
    R = np.zeros((n + 1, n + 1))
    for i in range(n + 1):
        C[i, : i + 1] = fdt.c[i::-1]
        R[i, : i + 1] = -2.0 * fdt.cprime[i::-1]
        R[i, i] = 1.0
    mu_val = fdt.gamma + 2.0 * beta**2 * m.nu(1.0, 1)
    if ic.is_rs:
        L = np.zeros(n + 1)
    else:
        b_alpha = m.nu(ic.q_o, 1) / m.nu(ic.q_star**2, 1)
        L = -2.0 * b_alpha * (fdt.c - 1.0)
    return TwoTimeSolution(
        h=fdt.h_tau, n=n, C=C, R=R,
        q=np.full(n + 1, ic.q_o), K=np.ones(n + 1),
        mu=np.full(n + 1, mu_val), L=L,
        H=np.full(n + 1, ic.E), beta=beta,
        q_star=ic.q_star, q_o=ic.q_o, variant=VARIANT_SPHERICAL,
    )
