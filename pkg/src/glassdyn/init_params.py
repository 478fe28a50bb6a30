"""Initial-condition algebra: from (q_star, V) to the drift function v(x, y).

The conditioning data V = (E, E_star, G_star, q_o) fixes a linear system for
the weight vector w through the 4x4 covariance matrix of the conditioned
values; w in turn defines the scalar field v(x, y) entering the two-time
equations.  This module also carries the Gibbs-initialization map, the
stationarity test, the large-time consistency residual, and the localized
band solver for pure models.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError, NoRootError, SingularMatrixError
from .mixture import Mixture, g_beta

__all__ = [
    "InitCondition",
    "VFunction",
    "StationarityReport",
    "FdtRegimeReport",
    "LocalizedBand",
    "sigma_nu",
    "solve_w",
    "v_eval",
    "gibbs_init",
    "gamma_star",
    "check_stationary",
    "fdt_regime_residual",
    "pure_p_localized",
]

_DEGEN_TOL = 1e-12

BRANCH_RS = "rs"
BRANCH_GENERIC = "generic"
BRANCH_PURE_P = "pure_p"
BRANCH_DEGENERATE = "degenerate"
BRANCH_PURE_P_DEGENERATE = "pure_p_degenerate"


@dataclass(frozen=True)
class InitCondition:
    """Conditioning target (q_star, V) with V = (E, E_star, G_star, q_o)."""

    q_star: float
    E: float
    E_star: float = 0.0
    G_star: float = 0.0
    q_o: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.q_star <= 1.0:
            raise ConfigError("q_star must lie in [0, 1]")
        if self.is_rs:
            if self.E_star != 0.0 or self.G_star != 0.0 or self.q_o != 0.0:
                raise ConfigError("q_star = 0 forces E_star = G_star = q_o = 0")
        elif abs(self.q_o) > self.q_star + 1e-12:
            raise ConfigError("|q_o| must not exceed q_star")

    @property
    def is_rs(self) -> bool:
        return self.q_star < _DEGEN_TOL

    @property
    def alpha(self) -> float:
        return 0.0 if self.is_rs else self.q_o / self.q_star

    @property
    def V(self) -> np.ndarray:
        return np.array([self.E, self.E_star, self.G_star, self.q_o])

    def branch(self, m: Mixture) -> str:
        if self.is_rs:
            return BRANCH_RS
        degenerate = abs(self.q_star - abs(self.q_o)) < _DEGEN_TOL
        if m.is_pure():
            return BRANCH_PURE_P_DEGENERATE if degenerate else BRANCH_PURE_P
        return BRANCH_DEGENERATE if degenerate else BRANCH_GENERIC

    @classmethod
    def from_dict(cls, obj: dict, m: Mixture | None = None) -> "InitCondition":
        """Build from an init-spec dict: explicit V or a "gibbs" block."""
        if "gibbs" in obj:
            g = obj["gibbs"]
            if m is None:
                raise ConfigError("gibbs init spec needs the mixture")
            return gibbs_init(m, float(g["beta0"]), float(g.get("q_EA", 0.0)),
                              float(g.get("GS", 0.0)))
        try:
            v = obj["V"]
            return cls(float(obj["q_star"]), float(v["E"]),
                       float(v.get("E_star", 0.0)), float(v.get("G_star", 0.0)),
                       float(v.get("q_o", 0.0)))
        except KeyError as err:
            raise ConfigError(f"init spec missing key {err}") from err


def sigma_nu(m: Mixture, q_star: float, q_o: float) -> np.ndarray:
    """4x4 covariance of the conditioned values at (x_0, x_star).

    Symmetric and positive definite for |q_o| < 1 whenever the mixture is not
    pure; the fourth row/column degenerates gracefully at |q_o| = q_star.
    """
    if q_star <= 0.0:
        raise DomainError("sigma_nu requires q_star > 0")
    if abs(q_o) > q_star + 1e-12:
        raise DomainError("sigma_nu requires |q_o| <= q_star")
    qs2 = q_star**2
    root = math.sqrt(max(qs2 - q_o**2, 0.0))
    n_qo, d_qo = m.nu(q_o), m.nu(q_o, 1)
    return np.array([
        [m.nu(1.0), n_qo, q_o * d_qo / qs2, root * d_qo / qs2],
        [n_qo, m.nu(qs2), m.nu(qs2, 1), 0.0],
        [q_o * d_qo / qs2, m.nu(qs2, 1), m.psi(qs2) / qs2, 0.0],
        [root * d_qo / qs2, 0.0, 0.0, m.nu(qs2, 1) / qs2],
    ])


@dataclass(frozen=True)
class VFunction:
    """Drift source v(x, y) = <v_hat(x, y, z), w> with its partials.

    In the degenerate branches (including q_star = 0) the auxiliary
    coordinate z is identically zero and w4 = 0.
    """

    w: np.ndarray
    q_star: float
    q_o: float
    mixture: Mixture
    branch: str

    @property
    def use_z(self) -> bool:
        return self.branch in (BRANCH_GENERIC, BRANCH_PURE_P)

    def _z(self, x, y):
        root = math.sqrt(self.q_star**2 - self.q_o**2)
        return (y - self.q_o * x / self.q_star**2) / root

    def v(self, x, y):
        m, w = self.mixture, self.w
        out = w[0] * m.nu(y)
        if self.branch == BRANCH_RS:
            return out
        out = out + w[1] * m.nu(x) + w[2] * x * m.nu(x, 1) / self.q_star**2
        if self.use_z:
            out = out + w[3] * self._z(x, y) * m.nu(x, 1)
        return out

    def vx(self, x, y):
        if self.branch == BRANCH_RS:
            return np.zeros_like(np.asarray(x, dtype=float)) if np.ndim(x) else 0.0
        m, w = self.mixture, self.w
        out = w[1] * m.nu(x, 1) + w[2] * m.psi(x) / self.q_star**2
        if self.use_z:
            root = math.sqrt(self.q_star**2 - self.q_o**2)
            zx = -self.q_o / (self.q_star**2 * root)
            out = out + w[3] * (zx * m.nu(x, 1) + self._z(x, y) * m.nu(x, 2))
        return out

    def vy(self, x, y):
        m, w = self.mixture, self.w
        out = w[0] * m.nu(y, 1)
        if self.use_z:
            root = math.sqrt(self.q_star**2 - self.q_o**2)
            out = out + w[3] * m.nu(x, 1) / root
        return out


def v_eval(vf: VFunction, x, y, order: str = "v"):
    """Evaluate v (order "v"), or the partial "vx" / "vy", at (x, y)."""
    if order == "v":
        return vf.v(x, y)
    if order == "vx":
        return vf.vx(x, y)
    if order == "vy":
        return vf.vy(x, y)
    raise ConfigError(f"unknown order {order!r}")


def _check_residual(sigma, w, rhs):
    res = np.linalg.norm(sigma @ w - rhs)
    if res > 1e-8 * (1.0 + np.linalg.norm(rhs)):
        raise SingularMatrixError(
            f"conditioning data inconsistent with the covariance (residual {res:.3e}); "
            "on a degenerate band the on-ray values are constrained when the "
            "mixture has fewer than three active powers")


def solve_w(ic: InitCondition, m: Mixture) -> VFunction:
    """Solve the conditioning system for w and wrap it as a VFunction.

    Branches: q_star = 0 reduces to v(y) = E nu(y)/nu(1); pure models force
    w3 = 0 (their radial derivative is redundant) and solve the reduced
    system; |q_o| = q_star forces w4 = 0 and drops the z coordinate.
    """
    branch = ic.branch(m)
    if branch == BRANCH_RS:
        w = np.array([ic.E / m.nu(1.0), 0.0, 0.0, 0.0])
        return VFunction(w, 0.0, 0.0, m, branch)

    if abs(abs(ic.q_o) - 1.0) < _DEGEN_TOL:
        # the hard constraints at |q_o| = 1 are validated (start point
        # coincides with +-x_star), but the covariance is singular there
        target = None
        if ic.q_o > 0.0 or m.is_even():
            target = ic.E_star
        elif m.is_odd():
            target = -ic.E_star
        if target is not None and abs(ic.E - target) > 1e-8 * (1.0 + abs(ic.E)):
            raise ConfigError(
                "|q_o| = 1 requires E matching E_star (up to mixture parity)")
        raise SingularMatrixError("conditioning covariance singular at |q_o| = 1")

    qs2 = ic.q_star**2
    if branch == BRANCH_PURE_P_DEGENERATE:
        p = m.p_max
        _require_pure_consistency(ic, p)
        e_star_implied = ic.E * ic.q_o**p
        if abs(ic.E_star - e_star_implied) > 1e-8 * (1.0 + abs(ic.E)):
            raise ConfigError(
                f"pure degenerate branch requires E_star = E q_o^p = {e_star_implied}"
            )
        w = np.array([ic.E / m.coeffs[p], 0.0, 0.0, 0.0])
        return VFunction(w, ic.q_star, ic.q_o, m, branch)

    sigma = sigma_nu(m, ic.q_star, ic.q_o)
    rhs = np.array([ic.E, ic.E_star, ic.G_star, 0.0])

    if branch == BRANCH_PURE_P:
        _require_pure_consistency(ic, m.p_max)
        keep = [0, 1, 3]
        w = np.zeros(4)
        w[keep] = _pd_solve(sigma[np.ix_(keep, keep)], rhs[keep])
        _check_residual(sigma[np.ix_(keep, keep)], w[keep], rhs[keep])
        return VFunction(w, ic.q_star, ic.q_o, m, branch)

    if branch == BRANCH_DEGENERATE:
        keep = [0, 1, 2]
        w = np.zeros(4)
        w[keep] = _pd_solve(sigma[np.ix_(keep, keep)], rhs[keep])
        _check_residual(sigma[np.ix_(keep, keep)], w[keep], rhs[keep])
        return VFunction(w, ic.q_star, ic.q_o, m, branch)

    w = _pd_solve(sigma, rhs)
    _check_residual(sigma, w, rhs)
    return VFunction(w, ic.q_star, ic.q_o, m, branch)


def _require_pure_consistency(ic: InitCondition, p: int):
    g_implied = p * ic.E_star / ic.q_star**2
    if abs(ic.G_star - g_implied) > 1e-8 * (1.0 + abs(g_implied)):
        raise ConfigError(
            f"pure p-spin requires G_star = p E_star / q_star^2 = {g_implied}"
        )


def _pd_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cholesky solve with least-squares fallback for near-singular systems."""
    try:
        L = np.linalg.cholesky(a)
        w = np.linalg.solve(L.T, np.linalg.solve(L, b))
        if np.linalg.norm(a @ w - b) <= 1e-8 * (1.0 + np.linalg.norm(b)):
            return w
    except np.linalg.LinAlgError:
        pass
    w, _, rank, _ = np.linalg.lstsq(a, b, rcond=1e-12)
    if rank < a.shape[0]:
        warnings.warn("conditioning matrix rank-deficient; least-squares w")
    return w


def gibbs_init(m: Mixture, beta0: float, q_EA: float, GS_at_qstar: float = 0.0
               ) -> InitCondition:
    """Conditioning data matching an equilibrium start at inverse temperature beta0.

    q_EA = 0 selects the high-temperature branch with E = 2 beta0 nu(1).
    Otherwise q_star = sqrt(q_EA), q_o = q_EA, E_star = GS_at_qstar,
    G_star = 1/(2 beta0 (1-q_star^2)) + 2 beta0 (1-q_star^2) nu''(q_star^2)
    and E = E_star + 2 beta0 theta(q_star^2).  q_EA and the restricted
    ground-state energy are caller-supplied inputs.
    """
    if beta0 < 0.0:
        raise ConfigError("beta0 must be nonnegative")
    if q_EA == 0.0:
        return InitCondition(0.0, 2.0 * beta0 * m.nu(1.0))
    if not 0.0 < q_EA < 1.0:
        raise ConfigError("q_EA must lie in [0, 1)")
    q_star = math.sqrt(q_EA)
    qs2 = q_EA
    G = 0.5 / (beta0 * (1.0 - qs2)) + 2.0 * beta0 * (1.0 - qs2) * m.nu(qs2, 2)
    E = GS_at_qstar + 2.0 * beta0 * m.theta(qs2)
    return InitCondition(q_star, E, GS_at_qstar, G, q_EA)


def gamma_star(m: Mixture, beta: float, q_star: float, alpha: float) -> float:
    """Relaxation parameter selected by stationary data at band angle alpha."""
    if abs(alpha) >= 1.0:
        raise DomainError("gamma_star requires |alpha| < 1")
    qs2 = q_star**2
    return 0.5 / (1.0 - alpha**2) - 2.0 * beta**2 * m.nu(alpha * q_star, 1) ** 2 / m.nu(qs2, 1)


@dataclass(frozen=True)
class StationarityReport:
    admissible: bool
    residual: float


def check_stationary(ic: InitCondition, m: Mixture, beta: float,
                     tol: float = 1e-8) -> StationarityReport:
    """Is (q_star, V) stationary data for the dynamics at this beta?

    Builds the constraint vector and tests membership in the column space of
    the associated 4x2 matrix through a least-squares residual; q_star = 0
    instead checks E = 2 beta nu(1).
    """
    if ic.is_rs:
        res = abs(ic.E - 2.0 * beta * m.nu(1.0))
        return StationarityReport(res < tol * (1.0 + abs(ic.E)), res)
    alpha = ic.alpha
    if abs(alpha) >= 1.0:
        return StationarityReport(False, np.inf)
    qs, qo = ic.q_star, ic.q_o
    qs2 = qs**2
    b_alpha = m.nu(qo, 1) / m.nu(qs2, 1)
    lhs = np.array([
        ic.E - 2.0 * beta * (m.nu(1.0) - (1.0 - alpha**2) * m.nu(qo, 1) * b_alpha),
        ic.E_star - 2.0 * beta * m.nu(qo),
        qs * ic.G_star - 2.0 * beta * alpha * m.nu(qo, 1),
        alpha / (2.0 * beta * (1.0 - alpha**2))
        - 2.0 * beta * b_alpha * (alpha * m.psi(qo) - qs * m.nu(qo, 2)),
    ])
    cols = np.array([
        [m.nu(qo), alpha * qs * m.nu(qo, 1)],
        [m.nu(qs2), qs2 * m.nu(qs2, 1)],
        [qs * m.nu(qs2, 1), qs * m.psi(qs2)],
        [qs * m.nu(qo, 1), qs * m.psi(qo)],
    ])
    coef, _, _, _ = np.linalg.lstsq(cols, lhs, rcond=None)
    res = float(np.linalg.norm(lhs - cols @ coef))
    return StationarityReport(res < tol * (1.0 + np.linalg.norm(lhs)), res)


@dataclass(frozen=True)
class FdtRegimeReport:
    res_new24: float
    psd_ok: bool


def fdt_regime_residual(m: Mixture, beta: float, ic: InitCondition,
                        alpha: float, alpha_hat: float, c_inf_val: float
                        ) -> FdtRegimeReport:
    """Consistency of a candidate large-time limit (alpha, alpha_hat, c_inf).

    Residual of the algebraic identity fixing alpha_hat, plus the
    positive-semidefiniteness bound on (alpha_hat - alpha)^2.
    """
    if ic.is_rs:
        raise ConfigError("large-time consistency residual needs q_star > 0")
    vf = solve_w(ic, m)
    qs, qo = ic.q_star, ic.q_o
    alpha_o = qo / qs
    gamma = 0.5 - g_beta(m, beta, c_inf_val, 1)
    mu = gamma + 2.0 * beta**2 * m.nu(1.0, 1)
    kappa1 = 2.0 * (m.nu(1.0, 1) - m.nu(c_inf_val, 1))
    kappa2 = 2.0 * (1.0 - c_inf_val)
    x, y = alpha * qs, alpha_hat * alpha_o
    rhs = (beta * qo * vf.vx(x, y) + beta * vf.vy(x, y)
           - beta**2 * qo * (m.nu(x, 2) * m.nu(x, 1) / m.nu(qs**2, 1)) * kappa2
           + beta**2 * y * kappa1)
    res = abs(mu * y - rhs)
    psd = (alpha_hat - alpha) ** 2 * alpha_o**2 <= (c_inf_val - alpha**2) * (
        1.0 - alpha_o**2) + 1e-12
    return FdtRegimeReport(res, bool(psd))


@dataclass(frozen=True)
class LocalizedBand:
    q_minus: float
    q_beta: float
    H_inf: float


def pure_p_localized(m: Mixture, beta: float, q_c: float,
                     GS_at_sqrt_qbeta: float) -> LocalizedBand:
    """Band sizes of localized no-aging states for a pure model, p >= 3.

    Solves 2 beta sqrt(nu''(q)) (1-q) = sqrt((p-1)(1-q_c)) on the ascending
    branch [0, (p-2)/p] and the descending branch [(p-2)/p, 1]; the long-time
    energy is GS(sqrt(q_beta)) + 2 beta theta(q_beta).  q_c is an input.
    """
    if not m.is_pure():
        raise ConfigError("localized-band solver applies to pure models only")
    p = m.p_max
    if p < 3:
        raise ConfigError("two-branch root structure requires p >= 3")
    if not 0.0 < q_c < 1.0:
        raise ConfigError("q_c must lie in (0, 1)")
    rhs = math.sqrt((p - 1) * (1.0 - q_c))

    def y(q):
        return 2.0 * beta * math.sqrt(m.nu(q, 2)) * (1.0 - q)

    q_peak = (p - 2) / p
    if y(q_peak) < rhs:
        raise NoRootError("peak of the band equation below the target level; beta too small")

    def bisect(lo, hi, increasing):
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if (y(mid) < rhs) == increasing:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    q_minus = bisect(0.0, q_peak, increasing=True)
    q_beta = bisect(q_peak, 1.0, increasing=False)
    h_inf = GS_at_sqrt_qbeta + 2.0 * beta * m.theta(q_beta)
    return LocalizedBand(q_minus, q_beta, h_inf)
