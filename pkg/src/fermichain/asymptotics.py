"""Asymptotic entropy formulas for critical chains.

Collects the universal constant ``I_alpha``, the scaling dimension
``Delta_alpha = (1/alpha - alpha)/24``, the large-``|X|`` entropy of a chain
with pinchings ``u_k`` on the unit circle, closed forms for the XX, Ising
and XX+DM families, the multi-interval product formula, and the
transformation laws of the partition function.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.special import expit, loggamma

from .errors import AccuracyError, DomainError, ShapeError


def _df_dt(t, alpha):
    """Derivative of ``log F_alpha(tanh t) / (1 - alpha)`` with respect to ``t``."""
    p = expit(2 * t)
    q = expit(-2 * t)
    if alpha == 1:
        return -4.0 * p * q * t
    pa, qa = p**alpha, q**alpha
    return 2 * alpha * (pa * q - qa * p) / ((pa + qa) * (1 - alpha))


@functools.lru_cache(maxsize=256)
def _I_alpha_cached(alpha: float) -> float:
    def integrand(t):
        return _df_dt(t, alpha) * loggamma(0.5 - 1j * t / np.pi).imag

    val, err = quad(integrand, 0.0, np.inf, limit=500, epsabs=1e-13, epsrel=1e-12)
    if not np.isfinite(val) or err > 1e-10:
        raise AccuracyError(f"I_alpha quadrature did not converge (error {err:.1e})")
    # the integrand is even in t
    return float(-2.0 * val / np.pi)


def I_alpha(alpha: float) -> float:
    """Universal constant ``I_alpha`` of the critical entropy.

    Defined by the integral over ``-1 < lambda < 1`` of
    ``d log F_alpha / d lambda`` against ``log[Gamma(1/2 - i w)/Gamma(1/2 + i w)]``
    with ``w = log|(lambda - 1)/(lambda + 1)| / (2 pi)``.  The substitution
    ``lambda = tanh t`` turns ``w`` into ``-t/pi`` and removes the endpoint
    singularities; ``alpha = 1`` uses the analytic limit of the integrand.

    Examples
    --------
    >>> round(I_alpha(1), 6)
    0.247509
    """
    alpha = float(alpha)
    if not alpha > 0:
        raise DomainError(f"Renyi index must be positive, got {alpha}")
    return _I_alpha_cached(alpha)


def delta_alpha(alpha: float) -> float:
    """Scaling dimension ``(1/alpha - alpha) / 24``."""
    if not alpha > 0:
        raise DomainError(f"Renyi index must be positive, got {alpha}")
    return (1.0 / alpha - alpha) / 24.0


def _k(alpha):
    return (alpha + 1) / (12 * alpha)


def entropy_aef(u: Sequence[complex], X: float, alpha: float) -> float:
    """Large-``|X|`` entropy of a chain with pinchings ``u`` on the circle.

    ``S = k R log|X| - k sum_{a != b} (-1)^{a+b} log(u_a - u_b) + R I_alpha``
    with ``k = (alpha + 1)/(12 alpha)``.  Each unordered pair enters twice,
    so only ``log|u_a - u_b|`` survives in the real result.

    Raises
    ------
    DomainError
        If two points coincide or a point is off the unit circle.
    """
    u = np.asarray(u, dtype=complex)
    R = len(u)
    if np.any(np.abs(np.abs(u) - 1) > 1e-10):
        raise DomainError("pinchings must lie on the unit circle")
    total = 0.0
    for a in range(R):
        for b in range(a + 1, R):
            d = abs(u[a] - u[b])
            if d < 1e-14:
                raise DomainError("coincident pinchings")
            total += 2 * (-1) ** (a + b) * math.log(d)
    k = _k(alpha)
    return k * R * math.log(X) - k * total + R * I_alpha(alpha)


def closed_form(model: str, X: float, alpha: float, **params) -> float:
    """Closed-form asymptotic entropies of the XY family.

    Parameters
    ----------
    model : {"critXX", "ising_line", "xxdm"}
        ``critXX`` takes ``h`` (``|h| < 2``), ``ising_line`` takes ``gamma``
        (field ``h = 2``), ``xxdm`` takes ``s`` and ``h`` (``gamma = 0``).
    X : float
        Interval length.
    alpha : float
        Rényi index.

    Notes
    -----
    With ``k = (alpha + 1)/(12 alpha)``::

        critXX:     2k log|X| + 2k log|u1 - u2| + 2 I,   |u1 - u2| = 2 sqrt(1 - h^2/4)
        ising_line: k log(4 gamma |X|) + I
        xxdm:       2k log|X| + k log(4 (s^2 - h^2/4 + 1)/(s^2 + 1)) + 2 I

    The three are mutually consistent: ``xxdm`` at ``s = 0`` is ``critXX``,
    and ``ising_line`` at ``gamma = 1`` is half of ``critXX(0)`` at ``2|X|``.
    """
    k = _k(alpha)
    I = I_alpha(alpha)
    if model == "critXX":
        h = float(params.get("h", 0.0))
        if not abs(h) < 2:
            raise DomainError("critXX requires |h| < 2")
        d = 2 * math.sqrt(1 - (h / 2) ** 2)
        return 2 * k * math.log(X) + 2 * k * math.log(d) + 2 * I
    if model == "ising_line":
        g = float(params.get("gamma", 1.0))
        if g == 0:
            raise DomainError("ising_line requires gamma != 0")
        return k * math.log(4 * abs(g) * X) + I
    if model == "xxdm":
        s = float(params.get("s", 0.0))
        h = float(params.get("h", 0.0))
        r = s * s - (h / 2) ** 2 + 1
        if not r > 0:
            raise DomainError("xxdm requires s^2 - (h/2)^2 + 1 > 0")
        return 2 * k * math.log(X) + k * math.log(4 * r / (s * s + 1)) + 2 * I
    raise DomainError(f"unknown model {model!r}")


def xxdm_jacobian_product(zeta: float, s: float, h: float) -> float:
    """Product of ``dv'/dv`` over the four Fermi points of the XX+DM chain.

    Evaluated in closed form as
    ``[(s^2+1)/(s'^2+1) * (s'^2-(h'/2)^2+1)/(s^2-(h/2)^2+1)]^2`` with the
    boosted couplings ``(s', h')``.
    """
    from .mobius import transform_xydm

    _, sp, hp = transform_xydm(zeta, 0.0, s, h)
    r = (s * s + 1) / (sp * sp + 1) * (sp * sp - (hp / 2) ** 2 + 1) / (s * s - (h / 2) ** 2 + 1)
    return r * r


def pair_exponents(P: int) -> dict:
    """Exponents ``-sigma_t sigma_t'`` with ``sigma_t = (-1)^t`` for ``t < t'``.

    Keys are 1-based pairs ``(t, t')`` of the ``2P`` endpoints.
    """
    n = 2 * P
    sig = [(-1) ** t for t in range(1, n + 1)]
    out = {}
    for a in range(n):
        for b in range(a + 1, n):
            out[(a + 1, b + 1)] = -sig[a] * sig[b]
    s = sum(-e for e in out.values())
    if s != -P:
        raise AssertionError("sum of sigma products must equal -P")
    return out


def multiinterval_Z(single_Z: Callable[[float, float], float], x: Sequence[float]) -> float:
    """Partition function of ``P`` intervals from single-interval ones.

    ``Z(x) = prod_{t < t'} Z(x_t, x_t')^{-sigma_t sigma_t'}``, ``x`` being the
    ``2P`` ordered endpoints.  Computed in log space.

    Raises
    ------
    ShapeError
        If the endpoint count is odd or the endpoints are not increasing.
    """
    x = list(x)
    if len(x) % 2 or len(x) == 0:
        raise ShapeError("need an even, nonzero number of endpoints")
    if any(b <= a for a, b in zip(x, x[1:])):
        raise ShapeError("endpoints must be strictly increasing")
    P = len(x) // 2
    logZ = 0.0
    for (a, b), e in pair_exponents(P).items():
        logZ += e * math.log(single_Z(x[a - 1], x[b - 1]))
    return math.exp(logZ)


def multiinterval_entropy(single_S: Callable[[float, float], float], x: Sequence[float],
                          alpha: float) -> float:
    """Entropy counterpart of :func:`multiinterval_Z`.

    Since ``S = log Z / (1 - alpha)`` the product becomes a signed sum of
    single-interval entropies, which also covers ``alpha = 1``.
    """
    x = list(x)
    if len(x) % 2 or len(x) == 0:
        raise ShapeError("need an even, nonzero number of endpoints")
    P = len(x) // 2
    return float(sum(e * single_S(x[a - 1], x[b - 1]) for (a, b), e in pair_exponents(P).items()))


@dataclass(frozen=True, eq=False)
class InsertionData:
    """Insertion points of the covariance laws."""

    u: np.ndarray
    v: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        u = np.atleast_1d(np.asarray(self.u, dtype=complex))
        v = np.atleast_1d(np.asarray(self.v, dtype=complex))
        x = np.atleast_1d(np.asarray(self.x, dtype=float))
        for name, arr in (("u", u), ("v", v)):
            if np.any(np.abs(np.abs(arr) - 1) > 1e-10):
                raise DomainError(f"{name} points must lie on the unit circle")
        if np.any(np.diff(x) <= 0):
            raise DomainError("interval endpoints must increase")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "x", x)

    @property
    def R(self) -> int:
        return len(self.u)

    @property
    def Q(self) -> int:
        return len(self.v)

    @property
    def P(self) -> int:
        return len(self.x) // 2


@dataclass(frozen=True)
class AsymptoticEntropy:
    """Leading behaviour ``log_coefficient * log|X| + constant``.

    ``constant`` is ``None`` when no closed form is known.
    """

    log_coefficient: float
    constant: float | None
    formula: str
    note: str = ""


def log_coefficient(alpha: float, R: int, Q: int, P: int = 1) -> float:
    """``(alpha + 1)/(12 alpha) (R + Q/2) P``."""
    return _k(alpha) * (R + Q / 2) * P


def asymptotic_entropy(alpha: float, R: int, Q: int, P: int = 1) -> AsymptoticEntropy:
    """Leading log coefficient for a generic critical chain.

    The constant term depends on the couplings beyond the insertion points
    and is not known in general; it is reported as ``None``.
    """
    return AsymptoticEntropy(
        log_coefficient(alpha, R, Q, P), None, "generic",
        "constant term not available in closed form",
    )


def transform_prediction(kind: str, data: InsertionData, alpha: float, jac_u=None,
                         jac_v=None, jac_x=None) -> complex:
    """Partition-function factor of a transformation law.

    Parameters
    ----------
    kind : {"mobius", "conformal", "unified"}
        ``mobius``: ``prod (du')^{2 P D} prod (dv')^{P D}``;
        ``conformal``: ``prod_t (dx'_t)^{2 C D}`` with ``C = R/2 + Q/4``;
        ``unified``: ``prod J_{kt}^{D} prod K_{st}^{D/2}`` with
        ``J_{kt} = du'_k dx'_t`` and ``K_{st} = dv'_s dx'_t``.
    data : InsertionData
    alpha : float
    jac_u, jac_v, jac_x : array_like, optional
        Jacobians at the insertion points (default 1).

    Raises
    ------
    ShapeError
        If a Jacobian array does not match its insertion count.
    """
    D = delta_alpha(alpha)
    ju = np.ones(data.R, complex) if jac_u is None else np.asarray(jac_u, complex)
    jv = np.ones(data.Q, complex) if jac_v is None else np.asarray(jac_v, complex)
    jx = np.ones(len(data.x), complex) if jac_x is None else np.asarray(jac_x, complex)
    if ju.shape != (data.R,) or jv.shape != (data.Q,) or jx.shape != (len(data.x),):
        raise ShapeError("Jacobian counts do not match the insertion data")
    P = data.P
    lu, lv, lx = np.log(ju), np.log(jv), np.log(jx)
    if kind == "mobius":
        return complex(np.exp(2 * P * D * lu.sum() + P * D * lv.sum()))
    if kind == "conformal":
        C = data.R / 2 + data.Q / 4
        return complex(np.exp(2 * C * D * lx.sum()))
    if kind == "unified":
        logJ = (lu[:, None] + lx[None, :]).sum()
        logK = (lv[:, None] + lx[None, :]).sum()
        return complex(np.exp(D * logJ + 0.5 * D * logK))
    raise DomainError(f"unknown transformation kind {kind!r}")
