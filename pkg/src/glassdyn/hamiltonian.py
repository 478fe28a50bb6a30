"""Finite-N mixed p-spin Gaussian field: sampling, evaluation, conditioning.

The random energy is a sum over dense coupling tensors, one per active power
p, with i.i.d. entries of variance N^(1-p), which gives the covariance
Cov(H(x), H(y)) = N nu(<x,y>/N) by construction.  Conditioning on the value
at the start point and on value/gradient at a critical point is exact for a
Gaussian field and is realized by a mean swap: subtract the conditional mean
at the observed data, add it back at the target data.  The orthogonal
complement of the two distinguished directions is never materialized; its
contribution enters through a single projected gradient vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError
from .init_params import InitCondition, sigma_nu
from .mixture import Mixture

__all__ = [
    "SpinSystem",
    "ConditioningSpec",
    "ConditionedField",
    "sample_system",
    "eval_field",
    "conditional_mean",
    "conditional_mean_hessian",
    "conditioned_field",
    "sample_band_point",
    "make_x_star",
]

_P_MAX = 4
_MAX_TENSOR_ENTRIES = 3e8
_R_GUARD = 4.0


@dataclass
class SpinSystem:
    """One realization of the coupling tensors at size N."""

    N: int
    mixture: Mixture
    tensors: dict[int, np.ndarray]
    seed: int

    def value(self, x: np.ndarray) -> float:
        return eval_field(self, x, "H")

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return eval_field(self, x, "gradH")

    def gradient_batch(self, X: np.ndarray) -> np.ndarray:
        """Gradients at the rows of X with one tensor pass per contraction.

        The dominant cost is streaming the p = 3 tensor through BLAS; doing
        it once for a whole ensemble of paths is what makes the Monte Carlo
        comparison affordable.
        """
        k, N = X.shape
        out = np.zeros((k, N))
        for p, b in self.mixture.coeffs.items():
            bp = math.sqrt(b)
            J = self.tensors[p]
            if p == 2:
                out += bp * X @ (J + J.T)
            elif p == 3:
                B_all = (J.reshape(N * N, N) @ X.T).T.reshape(k, N, N)
                O_all = np.einsum("ki,kj->kij", X, X).reshape(k, N * N)
                A2 = O_all @ J.reshape(N * N, N)
                for i in range(k):
                    out[i] += bp * (B_all[i] @ X[i] + B_all[i].T @ X[i] + A2[i])
            else:
                for i in range(k):
                    out[i] += bp * _grad_p(J, X[i], p)
        return out

    def value_batch(self, X: np.ndarray) -> np.ndarray:
        k, N = X.shape
        out = np.zeros(k)
        for p, b in self.mixture.coeffs.items():
            bp = math.sqrt(b)
            J = self.tensors[p]
            if p == 2:
                out += bp * np.einsum("ki,ij,kj->k", X, J, X)
            elif p == 3:
                O_all = np.einsum("ki,kj->kij", X, X).reshape(k, N * N)
                out += bp * ((O_all @ J.reshape(N * N, N)) * X).sum(axis=1)
            else:
                out += bp * np.array([_value_p(J, X[i], p) for i in range(k)])
        return out


def sample_system(m: Mixture, N: int, seed: int) -> SpinSystem:
    """Draw the dense coupling tensors; deterministic given the seed."""
    if m.p_max > _P_MAX:
        raise ConfigError(f"dense tensors limited to p <= {_P_MAX}")
    if N ** m.p_max > _MAX_TENSOR_ENTRIES:
        raise ConfigError(f"N^{m.p_max} tensor would exceed the memory guard")
    rng = np.random.default_rng(seed)
    tensors = {}
    for p in m.coeffs:
        scale = N ** (-(p - 1) / 2.0)
        tensors[p] = rng.standard_normal(size=(N,) * p) * scale
    return SpinSystem(N, m, tensors, seed)


def _value_p(J: np.ndarray, x: np.ndarray, p: int) -> float:
    out = J
    for _ in range(p):
        out = np.tensordot(out, x, axes=([out.ndim - 1], [0]))
    return float(out)


def _grad_p(J: np.ndarray, x: np.ndarray, p: int) -> np.ndarray:
    if p == 2:
        return J @ x + J.T @ x
    if p == 3:
        B = np.tensordot(J, x, axes=([2], [0]))   # B_ij = sum_k J_ijk x_k
        D = np.tensordot(J, x, axes=([0], [0]))   # D_jk = sum_i x_i J_ijk
        return B @ x + B.T @ x + D.T @ x
    # generic: keep one axis, contract the rest from the highest index down
    g = np.zeros_like(x)
    for keep in range(p):
        out = J
        for a in range(p - 1, -1, -1):
            if a == keep:
                continue
            out = np.tensordot(out, x, axes=([a], [0]))
        g += out
    return g


def eval_field(sys: SpinSystem, x: np.ndarray, what: str = "H"):
    """Energy or gradient of the raw field at x (radius-guarded)."""
    if np.linalg.norm(x) > _R_GUARD * math.sqrt(sys.N):
        raise DomainError("evaluation point outside the radius guard")
    if what == "H":
        return sum(math.sqrt(b) * _value_p(sys.tensors[p], x, p)
                   for p, b in sys.mixture.coeffs.items())
    if what == "gradH":
        g = np.zeros(sys.N)
        for p, b in sys.mixture.coeffs.items():
            g += math.sqrt(b) * _grad_p(sys.tensors[p], x, p)
        return g
    raise ConfigError(f"what must be 'H' or 'gradH', got {what!r}")


def make_x_star(q_star: float, N: int) -> np.ndarray:
    """Critical-point location pinned to the first coordinate axis."""
    x = np.zeros(N)
    x[0] = q_star * math.sqrt(N)
    return x


def sample_band_point(q_star: float, q_o: float, N: int, seed: int) -> np.ndarray:
    """Uniform start point on the sub-sphere of overlap q_o with the axis point.

    x0 = alpha sqrt(N) xhat + sqrt(1 - alpha^2) sqrt(N) ghat with ghat a
    uniform unit vector orthogonal to xhat; q_star = 0 means uniform on the
    whole sphere.
    """
    rng = np.random.default_rng(seed)
    g = rng.standard_normal(N)
    if q_star == 0.0:
        return math.sqrt(N) * g / np.linalg.norm(g)
    if abs(q_o) > q_star + 1e-12:
        raise ConfigError("|q_o| must not exceed q_star")
    alpha = q_o / q_star
    g[0] = 0.0
    g /= np.linalg.norm(g)
    x0 = math.sqrt(max(1.0 - alpha**2, 0.0)) * math.sqrt(N) * g
    x0[0] = alpha * math.sqrt(N)
    return x0


@dataclass
class ConditioningSpec:
    """Geometry and target data of the critical-point conditioning event.

    Holds the pinned point x_star, the start point x_0, the target values,
    the distinguished orthonormal pair (xhat_star, zhat), and, once attached,
    the observed values of one field realization.
    """

    x_star: np.ndarray
    x_0: np.ndarray
    target: InitCondition
    xhat_star: np.ndarray | None = None
    zhat: np.ndarray | None = None
    observed_Vhat: np.ndarray | None = field(default=None, repr=False)
    observed_uperp: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        N = len(self.x_0)
        if abs(self.x_0 @ self.x_0 - N) > 1e-8 * N:
            raise ConfigError("x_0 must lie on the sphere of radius sqrt(N)")
        ic = self.target
        if ic.q_star > 0.0:
            qo_obs = self.x_0 @ self.x_star / N
            if abs(qo_obs - ic.q_o) > 1e-10:
                raise ConfigError(
                    f"x_0 overlap {qo_obs:.3e} does not match target q_o {ic.q_o:.3e}")
            self.xhat_star = self.x_star / np.linalg.norm(self.x_star)
            alpha = ic.alpha
            if abs(alpha) < 1.0 - 1e-12:
                z = self.x_0 / math.sqrt(N) - alpha * self.xhat_star
                self.zhat = z / np.linalg.norm(z)
            else:
                # degenerate band: any unit vector orthogonal to xhat works
                z = np.zeros(N)
                z[1] = 1.0
                z -= (z @ self.xhat_star) * self.xhat_star
                self.zhat = z / np.linalg.norm(z)

    @property
    def N(self) -> int:
        return len(self.x_0)

    def coords(self, x: np.ndarray):
        """(x, y, z) projections of a point: overlaps with x_star, x_0, zhat."""
        N = self.N
        xs = x @ self.x_star / N
        y = x @ self.x_0 / N
        z = x @ self.zhat / np.linalg.norm(self.x_star)
        return xs, y, z

    def observe(self, sys: SpinSystem):
        """Record the realized conditioned values of one field sample."""
        N = self.N
        ic = self.target
        h0 = sys.value(self.x_0)
        if ic.q_star == 0.0:
            self.observed_Vhat = np.array([-h0 / N, 0.0, 0.0, 0.0])
            self.observed_uperp = np.zeros(N)
            return
        norm_star = np.linalg.norm(self.x_star)
        hs = sys.value(self.x_star)
        gs = sys.gradient(self.x_star)
        g1 = gs @ self.xhat_star
        g2 = gs @ self.zhat
        self.observed_Vhat = np.array([-h0 / N, -hs / N, -g1 / norm_star, -g2 / norm_star])
        self.observed_uperp = -(gs - g1 * self.xhat_star - g2 * self.zhat)


def _vhat(m: Mixture, q_star: float, xs, y, z) -> np.ndarray:
    return np.array([m.nu(y), m.nu(xs), xs * m.nu(xs, 1) / q_star**2,
                     z * m.nu(xs, 1)])


def conditioning_weights(m: Mixture, q_star: float, q_o: float,
                         Vhat: np.ndarray) -> np.ndarray:
    """Solve Sigma w = Vhat for the conditioning weights.

    Pure models make Sigma rank deficient (their radial derivative row is a
    multiple of the value row); any exact solution yields the same mean, so a
    least-squares solve with a consistency check covers every branch.
    """
    sigma = sigma_nu(m, q_star, q_o)
    w, _, rank, _ = np.linalg.lstsq(sigma, Vhat, rcond=1e-12)
    res = np.linalg.norm(sigma @ w - Vhat)
    if res > 1e-8 * (1.0 + np.linalg.norm(Vhat)):
        raise ConfigError(
            f"conditioning values inconsistent with the model (residual {res:.2e}); "
            "pure models require G entries matching p E / q_star^2")
    return w


def conditional_mean(spec: ConditioningSpec, m: Mixture, Vhat: np.ndarray,
                     u_perp: np.ndarray | None, x: np.ndarray,
                     what: str = "value"):
    """Mean of the field given the conditioned values, or its gradient.

    Vhat is the 4-vector of conditioned (sign-flipped, N-normalized) values;
    u_perp is the component of -grad H(x_star) orthogonal to the pair
    (xhat_star, zhat), kept as a plain N-vector.  The q_star = 0 branch
    conditions on the start value only.
    """
    ic = spec.target
    if ic.q_star == 0.0:
        w = np.array([Vhat[0] / m.nu(1.0), 0.0, 0.0, 0.0])
    else:
        if abs(ic.q_o) >= 1.0 - 1e-12:
            raise ConfigError("conditioning mean undefined at |q_o| = 1")
        w = conditioning_weights(m, ic.q_star, ic.q_o, Vhat)
    return _mean_eval(spec, m, w, u_perp, x, what)


def _mean_eval(spec: ConditioningSpec, m: Mixture, w: np.ndarray,
               u_perp: np.ndarray | None, x: np.ndarray, what: str):
    N = spec.N
    ic = spec.target
    if ic.q_star == 0.0:
        y = x @ spec.x_0 / N
        if what == "value":
            return float(-N * w[0] * m.nu(y))
        if what == "gradient":
            return -w[0] * m.nu(y, 1) * spec.x_0
        raise ConfigError(f"unknown what {what!r}")
    gam = m.nu(ic.q_star**2, 1)
    xs, y, z = spec.coords(x)
    uterm = 0.0 if u_perp is None else float(u_perp @ x)
    if what == "value":
        return float(-N * (w @ _vhat(m, ic.q_star, xs, y, z))
                     - m.nu(xs, 1) * uterm / gam)
    if what != "gradient":
        raise ConfigError(f"unknown what {what!r}")
    qs2 = ic.q_star**2
    a = spec.x_star / N                       # grad of xs
    b = spec.x_0 / N                          # grad of y
    c = spec.zhat / np.linalg.norm(spec.x_star)  # grad of z
    grad = -N * (w[0] * m.nu(y, 1) * b
                 + (w[1] * m.nu(xs, 1) + w[2] * m.psi(xs) / qs2
                    + w[3] * z * m.nu(xs, 2)) * a
                 + w[3] * m.nu(xs, 1) * c)
    if u_perp is not None:
        grad = grad - (m.nu(xs, 2) * uterm * a + m.nu(xs, 1) * u_perp) / gam
    return grad


def conditional_mean_hessian(spec: ConditioningSpec, m: Mixture,
                             Vhat: np.ndarray, u_perp: np.ndarray | None,
                             x: np.ndarray) -> np.ndarray:
    """Dense Hessian of the conditional mean at x (analytic, standard basis)."""
    N = spec.N
    ic = spec.target
    if ic.q_star == 0.0:
        b = spec.x_0 / N
        y = x @ spec.x_0 / N
        return -N * Vhat[0] * m.nu(y, 2) / m.nu(1.0) * np.outer(b, b)
    gam = m.nu(ic.q_star**2, 1)
    w = conditioning_weights(m, ic.q_star, ic.q_o, Vhat)
    xs, y, z = spec.coords(x)
    qs2 = ic.q_star**2
    a = spec.x_star / N
    b = spec.x_0 / N
    c = spec.zhat / np.linalg.norm(spec.x_star)
    psi_p = 2.0 * m.nu(xs, 2) + xs * m.nu(xs, 3)
    aa, bb = np.outer(a, a), np.outer(b, b)
    ac = np.outer(a, c)
    hess = -N * (w[0] * m.nu(y, 2) * bb
                 + (w[1] * m.nu(xs, 2) + w[2] * psi_p / qs2
                    + w[3] * z * m.nu(xs, 3)) * aa
                 + w[3] * m.nu(xs, 2) * (ac + ac.T))
    if u_perp is not None:
        au = np.outer(a, u_perp)
        hess = hess - (m.nu(xs, 3) * float(u_perp @ x) * aa
                       + m.nu(xs, 2) * (au + au.T)) / gam
    return hess


class ConditionedField:
    """Field realization conditioned on the critical-point event, by mean swap.

    value/gradient interpolate the target data exactly: the start-point energy
    is -N E, the critical-point energy -N E_star and its gradient
    -G_star x_star, up to round-off.
    """

    def __init__(self, sys: SpinSystem, spec: ConditioningSpec):
        if spec.observed_Vhat is None:
            spec.observe(sys)
        self.sys = sys
        self.spec = spec
        ic = spec.target
        m = sys.mixture
        self.target_Vhat = np.array([ic.E, ic.E_star, ic.G_star, 0.0])
        if ic.q_star == 0.0:
            self._w_obs = np.array([spec.observed_Vhat[0] / m.nu(1.0), 0, 0, 0])
            self._w_tgt = np.array([ic.E / m.nu(1.0), 0, 0, 0])
        else:
            self._w_obs = conditioning_weights(m, ic.q_star, ic.q_o,
                                               spec.observed_Vhat)
            self._w_tgt = conditioning_weights(m, ic.q_star, ic.q_o,
                                               self.target_Vhat)

    @property
    def N(self) -> int:
        return self.sys.N

    def value(self, x: np.ndarray) -> float:
        spec, sys = self.spec, self.sys
        raw = sys.value(x)
        obs = _mean_eval(spec, sys.mixture, self._w_obs,
                         spec.observed_uperp, x, "value")
        tgt = _mean_eval(spec, sys.mixture, self._w_tgt, None, x, "value")
        return raw - obs + tgt

    def gradient(self, x: np.ndarray) -> np.ndarray:
        spec, sys = self.spec, self.sys
        raw = sys.gradient(x)
        obs = _mean_eval(spec, sys.mixture, self._w_obs,
                         spec.observed_uperp, x, "gradient")
        tgt = _mean_eval(spec, sys.mixture, self._w_tgt, None, x, "gradient")
        return raw - obs + tgt

    def _mean_swap(self, x: np.ndarray, what: str):
        spec, m = self.spec, self.sys.mixture
        obs = _mean_eval(spec, m, self._w_obs, spec.observed_uperp, x, what)
        tgt = _mean_eval(spec, m, self._w_tgt, None, x, what)
        return tgt - obs

    def gradient_batch(self, X: np.ndarray) -> np.ndarray:
        out = self.sys.gradient_batch(X)
        for i in range(X.shape[0]):
            out[i] += self._mean_swap(X[i], "gradient")
        return out

    def value_batch(self, X: np.ndarray) -> np.ndarray:
        out = self.sys.value_batch(X)
        for i in range(X.shape[0]):
            out[i] += self._mean_swap(X[i], "value")
        return out


def conditioned_field(sys: SpinSystem, spec: ConditioningSpec) -> ConditionedField:
    return ConditionedField(sys, spec)
