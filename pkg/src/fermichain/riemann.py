"""Hyperelliptic curve, period matrix and theta functions of a gapped chain.

For couplings with real ``A_l`` and ``B_l`` the symbol factorizes through
``g(z)^2 = (Theta + Xi)/(Theta - Xi)`` and the ``4L`` roots of
``z^{2L} P(z) = z^L (Theta + Xi) * z^L (Theta - Xi)`` are the branch points
of ``w^2 = P(z)``.  Each root carries an index ``eps = +1`` (zero of
``g^2``) or ``-1`` (pole of ``g^2``).

Geometry is handled in the Cayley plane ``zeta = T(z)``, where ``T`` is a
Möbius map sending the unit disk onto the upper half plane.  Inversion
``z -> 1/conj(z)`` becomes complex conjugation, so the outside roots are the
mirror images of the inside ones.  Inside roots are ordered by increasing
``Re zeta`` and outside roots by decreasing ``Re zeta``; cuts are the
straight segments between consecutive pairs.  They never cross the real
axis, which is the image of the unit circle.

The period matrix, the characteristics and ``e = (0, ..., 0, 1, ..., 1)``
feed the large-``|X|`` expansion

    log D_X(lambda) = |X| log(lambda^2 - 1)
                      + log theta^[mu; nu](beta e) + log theta^[mu; nu](-beta e),

with ``theta^`` the theta function normalized by its value at zero and
``beta = log((lambda + 1)/(lambda - 1)) / (2 pi i)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad, quad_vec

from .chain_model import CouplingSet
from .errors import (
    AccuracyError,
    ContourError,
    DegeneracyError,
    DomainError,
    FitError,
    IntegrationError,
    OrderingError,
    StructureError,
    ThetaNullError,
    UnsupportedCaseError,
)
from .mobius import MobiusMap

REAL_TOL = 1e-12
SIMPLE_ROOT_TOL = 1e-10
CIRCLE_TOL = 1e-9
SYMMETRY_TOL = 1e-8
THETA_TOL = 1e-12
FRAME_GRID = 90


# ---------------------------------------------------------------------------
# curve
# ---------------------------------------------------------------------------

def cayley_frame(phi0: float) -> MobiusMap:
    """Möbius map ``z -> i (u - z)/(u + z)``, ``u = exp(i phi0)``.

    It sends the unit disk onto the upper half plane, ``0`` to ``i`` and
    ``infinity`` to ``-i``.
    """
    u = np.exp(1j * phi0)
    return MobiusMap.normalized(-1j, 1j * u, 1.0, u)


def _apply(frame: MobiusMap, z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    inf = ~np.isfinite(z)
    out[inf] = frame.a / frame.c if frame.c != 0 else np.inf
    zz = z[~inf]
    den = frame.c * zz + frame.d
    with np.errstate(divide="ignore", invalid="ignore"):
        out[~inf] = np.where(den == 0, np.inf, (frame.a * zz + frame.b) / den)
    return out


def _branch_roots(c: CouplingSet):
    """Roots of ``z^L (Theta + Xi)`` and ``z^L (Theta - Xi)`` with their indices."""
    L = c.L
    zs, es = [], []
    for coeffs, e in ((c.A + c.B, 1.0), (c.A - c.B, -1.0)):
        coeffs = np.asarray(coeffs, dtype=complex)
        desc = np.trim_zeros(coeffs[::-1], "f")
        if len(desc) == 0:
            raise DegeneracyError("Theta +- Xi vanishes identically")
        r = np.roots(desc) if len(desc) > 1 else np.zeros(0, complex)
        zs += list(r) + [np.inf] * (2 * L - len(r))
        es += [e] * (2 * L)
    return np.array(zs, dtype=complex), np.array(es)


def _order(zeta: np.ndarray, L: int) -> np.ndarray:
    ins = np.where(zeta.imag > 0)[0]
    outs = np.where(zeta.imag < 0)[0]
    if len(ins) != 2 * L or len(outs) != 2 * L:
        raise StructureError(
            f"expected {2 * L} roots on each side of the unit circle, "
            f"found {len(ins)} inside and {len(outs)} outside"
        )
    ins = ins[np.lexsort((zeta[ins].imag, zeta[ins].real))]
    outs = outs[np.lexsort((zeta[outs].imag, -zeta[outs].real))]
    return np.concatenate([ins, outs])


def _frame_score(zeta: np.ndarray, L: int) -> float:
    if not np.all(np.isfinite(zeta)):
        return -np.inf
    ins = np.sort(zeta[zeta.imag > 0].real)
    if len(ins) != 2 * L:
        return -np.inf
    gap = np.min(np.diff(ins)) if len(ins) > 1 else 1.0
    return gap / max(1.0, np.max(np.abs(zeta)))


@dataclass(frozen=True, eq=False)
class ThetaCharacteristics:
    """Half-integer characteristics and the direction vector ``e``."""

    mu: np.ndarray
    nu: np.ndarray
    e: np.ndarray


@dataclass(frozen=True, eq=False)
class HyperellipticCurve:
    """Ordered branch points of ``w^2 = P(z)`` with their indices.

    Attributes
    ----------
    L : int
        Coupling range; the genus is ``2L - 1``.
    roots : ndarray
        The ``4L`` branch points in the z-plane (``inf`` allowed), first the
        ``2L`` inside the unit circle.
    eps : ndarray
        Index of each root, ``+1`` for zeros and ``-1`` for poles of ``g^2``.
    zeta : ndarray
        Images of ``roots`` in the Cayley plane.
    frame : MobiusMap
        The map ``z -> zeta``.
    """

    L: int
    roots: np.ndarray
    eps: np.ndarray
    zeta: np.ndarray
    frame: MobiusMap
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def g(self) -> int:
        return 2 * self.L - 1

    @property
    def cuts(self) -> list:
        """Pairs of z-plane endpoints of the cuts ``Sigma_0 .. Sigma_g``."""
        return [(self.roots[2 * r], self.roots[2 * r + 1]) for r in range(self.g + 1)]

    def cut_points(self, n: int = 128) -> np.ndarray:
        """Sample ``n`` points along every cut, in the z-plane."""
        inv = self.frame.inverse()
        t = np.linspace(0.0, 1.0, n)
        out = []
        for r in range(self.g + 1):
            a, b = self.zeta[2 * r], self.zeta[2 * r + 1]
            out.append(_apply(inv, a + (b - a) * t))
        return np.array(out)

    def characteristics(self) -> ThetaCharacteristics:
        """``mu_r = (eps_{2r+1} + eps_{2r+2})/4`` and ``nu_r = sum_{j=2}^{2r+1} eps_j / 4``."""
        e = self.eps
        g = self.g
        mu = np.array([(e[2 * r] + e[2 * r + 1]) / 4 for r in range(1, g + 1)])
        nu = np.array([e[1: 2 * r + 1].sum() / 4 for r in range(1, g + 1)])
        ev = np.array([0.0] * (self.L - 1) + [1.0] * self.L)
        return ThetaCharacteristics(mu, nu, ev)

    def permuted(self, perm) -> "HyperellipticCurve":
        """Same branch points with a different labelling (and hence cut system)."""
        perm = np.asarray(perm)
        if sorted(perm.tolist()) != list(range(len(self.roots))):
            raise OrderingError("not a permutation of the branch points")
        return HyperellipticCurve(self.L, self.roots[perm], self.eps[perm],
                                  self.zeta[perm], self.frame)

    def to_json(self) -> dict:
        ch = self.characteristics()
        pm = period_matrix(self).Pi
        enc = lambda arr: [[float(np.real(x)), float(np.imag(x))] if np.isfinite(x) else "inf"
                           for x in arr]
        return {
            "roots": enc(self.roots),
            "epsilons": [int(x) for x in self.eps],
            "Pi_re": pm.real.tolist(),
            "Pi_im": pm.imag.tolist(),
            "mu": ch.mu.tolist(),
            "nu": ch.nu.tolist(),
        }


def build_curve(c: CouplingSet, frame: MobiusMap | None = None) -> HyperellipticCurve:
    """Branch points, indices and cut system of a gapped real chain.

    Parameters
    ----------
    c : CouplingSet
        Couplings with real ``A_l`` and ``B_l``.
    frame : MobiusMap, optional
        Map from the z-plane to the Cayley plane; it must send the unit disk
        onto the upper half plane.  By default a rotated Cayley map is chosen
        that best separates the real parts of the inside roots.

    Raises
    ------
    UnsupportedCaseError
        If some coupling is not real.
    DegeneracyError
        If two branch points coincide or a root lies on the unit circle.
    """
    if np.abs(c.A.imag).max() > REAL_TOL or np.abs(c.B.imag).max() > REAL_TOL:
        raise UnsupportedCaseError("theta machinery needs real couplings A_l, B_l")
    L = c.L
    z, eps = _branch_roots(c)
    fin = np.isfinite(z)
    if np.sum(~fin) > 1:
        raise DegeneracyError("multiple branch points at infinity")
    zf = z[fin]
    scale = max(1.0, np.abs(zf).max()) if len(zf) else 1.0
    if np.any(np.abs(np.abs(zf) - 1) < CIRCLE_TOL):
        raise DegeneracyError("branch point on the unit circle (critical chain)")
    d = np.abs(zf[:, None] - zf[None, :])
    np.fill_diagonal(d, np.inf)
    if len(zf) > 1 and d.min() < SIMPLE_ROOT_TOL * scale:
        raise DegeneracyError("branch points are not simple")
    return arrange(L, z, eps, frame)


def _best_frame(z, L, accept=None):
    best, frame = -np.inf, None
    for phi in 2 * np.pi * (np.arange(FRAME_GRID) + 0.5) / FRAME_GRID - np.pi:
        f = cayley_frame(phi)
        zeta = _apply(f, z)
        if accept is not None and not accept(zeta):
            continue
        sc = _frame_score(zeta, L)
        if sc > best:
            best, frame = sc, f
    if frame is None:
        raise StructureError("could not place the branch points in a Cayley frame")
    return frame


def arrange(L: int, z, eps, frame: MobiusMap | None = None) -> HyperellipticCurve:
    """Order branch points ``z`` with indices ``eps`` in a Cayley frame."""
    z = np.asarray(z, dtype=complex)
    eps = np.asarray(eps, dtype=float)
    if frame is None:
        frame = _best_frame(z, L)
    zeta = _apply(frame, z)
    if not np.all(np.isfinite(zeta)):
        raise StructureError("frame sends a branch point to infinity")
    if np.any(np.abs(zeta.imag) < CIRCLE_TOL):
        raise StructureError("frame does not send the unit circle to the real axis")
    idx = _order(zeta, L)
    ins_re = np.sort(zeta[idx[: 2 * L]].real)
    if np.any(np.diff(ins_re) < 1e-9):
        raise StructureError("inside branch points are not separated in the frame")
    return HyperellipticCurve(L, z[idx], eps[idx], zeta[idx], frame)


# ---------------------------------------------------------------------------
# periods
# ---------------------------------------------------------------------------

def _w(x, pts, skip=None, diffs=None):
    """Product of ``(x - m) sqrt((x - a)(x - b)/(x - m)^2)`` over the cuts.

    ``diffs`` maps a branch-point index to a precomputed ``x - pts[index]``,
    used at the ends of a short gap where the subtraction would cancel.
    """
    diffs = diffs or {}
    out = 1.0 + 0j
    for r in range(len(pts) // 2):
        if r == skip:
            continue
        a, b = pts[2 * r], pts[2 * r + 1]
        xa = diffs.get(2 * r, x - a)
        xb = diffs.get(2 * r + 1, x - b)
        xm = x - (a + b) / 2
        out = out * xm * np.sqrt(xa * xb / xm**2)
    return out


@dataclass(frozen=True, eq=False)
class PeriodMatrix:
    """Normalized period matrix ``Pi`` of a curve.

    Attributes
    ----------
    Pi : ndarray
        Symmetric ``g x g`` matrix with positive definite imaginary part.
    flipped : ndarray
        Rows whose b-cycle orientation was reversed to reach ``Im Pi > 0``.
    """

    Pi: np.ndarray
    flipped: np.ndarray

    def __post_init__(self):
        Pi = self.Pi
        asym = np.abs(Pi - Pi.T).max() if Pi.size else 0.0
        if asym > SYMMETRY_TOL * max(1.0, np.abs(Pi).max()):
            raise IntegrationError(f"period matrix not symmetric (residual {asym:.1e})")
        if Pi.size and np.linalg.eigvalsh((Pi.imag + Pi.imag.T) / 2).min() <= 0:
            raise IntegrationError("imaginary part of the period matrix is not positive definite")


def _integrate(fun, tol):
    val, err = quad_vec(fun, 0.0, np.pi, epsabs=tol * 1e-2, epsrel=tol, norm="max", limit=4000)
    if not np.all(np.isfinite(val)):
        raise IntegrationError("non-finite period integral")
    scale = max(np.abs(val).max(), 1e-300)
    if err > 1e-8 * scale:
        raise IntegrationError(f"period integral did not converge (error {err:.1e})")
    return val


def period_matrix(curve: HyperellipticCurve, tol: float = 1e-11) -> PeriodMatrix:
    """Normalized period matrix of the holomorphic forms ``zeta^k dzeta / w``.

    a-periods are twice the integral along each cut ``Sigma_r`` (r = 1..g);
    the b-cycle ``b_r`` runs through the gaps between ``Sigma_0`` and
    ``Sigma_r``.  Both are computed with endpoint-regular substitutions
    ``zeta = m + rho cos(phi)`` and adaptive vector quadrature.  Rows with
    ``Im Pi_rr < 0`` have their b-cycle reversed.

    Raises
    ------
    IntegrationError
        If an integral does not converge or ``Pi`` fails the Riemann
        conditions.
    """
    key = ("Pi", tol)
    if key in curve._cache:
        return curve._cache[key]
    pts = curve.zeta
    g = curve.g
    k = np.arange(g)
    Amat = np.zeros((g, g), complex)
    for r in range(1, g + 1):
        a, b = pts[2 * r], pts[2 * r + 1]
        m, rr = (a + b) / 2, (b - a) / 2

        def fa(phi, m=m, rr=rr, r=r):
            x = m + rr * np.cos(phi)
            return x**k / _w(x, pts, skip=r)

        Amat[:, r - 1] = 2j * _integrate(fa, tol)
    gaps = []
    for r in range(1, g + 1):
        a, b = pts[2 * r - 1], pts[2 * r]
        m, rr = (a + b) / 2, (b - a) / 2

        def fb(phi, m=m, rr=rr, r=r):
            x = m + rr * np.cos(phi)
            c2, s2 = np.cos(phi / 2) ** 2, np.sin(phi / 2) ** 2
            w = _w(x, pts, diffs={2 * r - 1: 2 * rr * c2, 2 * r: -2 * rr * s2})
            if w == 0:
                # node rounded onto a branch point, where the integrand tends to 0
                return np.zeros(g, complex)
            return x**k * np.sin(phi) * rr / w

        gaps.append(_integrate(fb, tol))
    Bmat = 2 * np.cumsum(np.array(gaps), axis=0).T
    Pi = np.linalg.solve(Amat, Bmat).T
    sgn = np.where(np.diag(Pi).imag < 0, -1.0, 1.0)
    Pi = Pi * sgn[:, None]
    Pi = (Pi + Pi.T) / 2 if np.abs(Pi - Pi.T).max() < SYMMETRY_TOL * max(1.0, np.abs(Pi).max()) else Pi
    out = PeriodMatrix(Pi, np.where(sgn < 0)[0])
    curve._cache[key] = out
    return out


# ---------------------------------------------------------------------------
# theta functions
# ---------------------------------------------------------------------------

def _lattice(Pi, mu, s, tol):
    Y = Pi.imag
    g = len(mu)
    centre = -np.linalg.solve(Y, np.imag(s)) - mu
    rad2 = (np.log(1.0 / tol) + 5.0 + g) / np.pi
    half = np.sqrt(rad2 * np.diag(np.linalg.inv(Y)))
    rng = [np.arange(np.floor(centre[i] - half[i]), np.ceil(centre[i] + half[i]) + 1)
           for i in range(g)]
    n = np.array(list(itertools.product(*rng)), float).reshape(-1, g)
    d = n - centre
    keep = np.einsum("ni,ij,nj->n", d, Y, d) <= rad2 * 1.0000001
    return n[keep]


def _theta_terms(mu, nu, s, Pi, tol):
    mu = np.asarray(mu, float)
    nu = np.asarray(nu, float)
    s = np.asarray(s, complex)
    n = _lattice(Pi, mu, s, tol) + mu
    E = 1j * np.pi * np.einsum("ni,ij,nj->n", n, Pi, n) + 2j * np.pi * (n @ (s + nu))
    return n, E


def log_theta(ch: ThetaCharacteristics | tuple, s, Pi, tol: float = THETA_TOL,
              grad: bool = False):
    """Logarithm of the theta function with characteristics.

    ``theta[mu; nu](s | Pi) = sum_n exp(i pi (n + mu) Pi (n + mu) + 2 pi i (n + mu)(s + nu))``
    summed over the ellipsoid ``(n - c)^T Im(Pi) (n - c) <= R^2`` centred on
    the dominant term, with ``R`` set by the Gaussian tail bound for ``tol``.

    Parameters
    ----------
    ch : ThetaCharacteristics or (mu, nu)
    s : array_like
    Pi : ndarray
    tol : float
        Relative truncation tolerance.
    grad : bool
        Also return the gradient of the logarithm with respect to ``s``.

    Returns
    -------
    complex or (complex, ndarray)
        The imaginary part is defined modulo ``2 pi``.

    Raises
    ------
    ThetaNullError
        If cancellation leaves a value below ``1e-12`` of the term sum.
    """
    mu, nu = (ch.mu, ch.nu) if isinstance(ch, ThetaCharacteristics) else ch
    Pi = np.asarray(Pi, complex)
    if np.linalg.eigvalsh((Pi.imag + Pi.imag.T) / 2).min() <= 0:
        raise DomainError("Im Pi must be positive definite")
    n, E = _theta_terms(mu, nu, s, Pi, tol)
    M = E.real.max()
    w = np.exp(E - M)
    tot = w.sum()
    if abs(tot) < 1e-12 * np.abs(w).sum():
        raise ThetaNullError("theta function vanishes at this argument")
    val = M + np.log(tot)
    if grad:
        return val, 2j * np.pi * (w @ n) / tot
    return val


def theta(ch, s, Pi, tol: float = THETA_TOL) -> complex:
    """Theta function with characteristics (see :func:`log_theta`)."""
    mu, nu = (ch.mu, ch.nu) if isinstance(ch, ThetaCharacteristics) else ch
    n, E = _theta_terms(mu, nu, s, np.asarray(Pi, complex), tol)
    return complex(np.exp(E).sum())


def log_theta_normalized(ch, s, Pi, tol: float = THETA_TOL) -> complex:
    """``log theta(s) - log theta(0)``.

    Raises
    ------
    ThetaNullError
        If the normalization ``theta(0)`` vanishes.
    """
    g = len(ch.mu if isinstance(ch, ThetaCharacteristics) else ch[0])
    return log_theta(ch, s, Pi, tol) - log_theta(ch, np.zeros(g), Pi, tol)


# ---------------------------------------------------------------------------
# determinant and entropy
# ---------------------------------------------------------------------------

def beta(lam):
    """``beta(lambda) = log((lambda + 1)/(lambda - 1)) / (2 pi i)``."""
    lam = np.asarray(lam, dtype=complex)
    return np.log((lam + 1) / (lam - 1)) / (2j * np.pi)


def dx_lambda(curve: HyperellipticCurve, lam: complex, X: int, tol: float = THETA_TOL) -> complex:
    """Large-``|X|`` value of ``log det(lambda - V_X)``.

    Raises
    ------
    DomainError
        If ``lambda`` lies on ``[-1, 1]``.
    """
    lam = complex(lam)
    if abs(lam.imag) < 1e-14 and abs(lam.real) <= 1:
        raise DomainError("lambda must lie off [-1, 1]")
    Pi = period_matrix(curve).Pi
    ch = curve.characteristics()
    b = complex(beta(lam))
    val = X * np.log(lam * lam - 1)
    val += log_theta_normalized(ch, b * ch.e, Pi, tol)
    val += log_theta_normalized(ch, -b * ch.e, Pi, tol)
    return complex(val)


def _dF_dbeta(ch, Pi, b, tol):
    _, g1 = log_theta(ch, b * ch.e, Pi, tol, grad=True)
    _, g2 = log_theta(ch, -b * ch.e, Pi, tol, grad=True)
    return (g1 - g2) @ ch.e


def f_alpha(lam, alpha: float):
    """``f_alpha(lambda) = log[((1+lambda)/2)^alpha + ((1-lambda)/2)^alpha] / (1 - alpha)``.

    ``alpha = 1`` gives the binary entropy function.
    """
    lam = np.asarray(lam, dtype=complex)
    p, q = (1 + lam) / 2, (1 - lam) / 2
    if alpha == 1:
        return -(p * np.log(p) + q * np.log(q))
    return np.log(p**alpha + q**alpha) / (1 - alpha)


def _F(ch, Pi, b, tol=THETA_TOL):
    """``log theta^(b e) + log theta^(-b e)``, the non-extensive part of ``log D_X``."""
    return (log_theta_normalized(ch, b * ch.e, Pi, tol)
            + log_theta_normalized(ch, -b * ch.e, Pi, tol))


def _cut_weight(u, alpha):
    """``Im f'_alpha(coth u + i0) / sinh(u)^2`` evaluated without overflow."""
    if alpha == 1:
        e = np.exp(-2 * u)
        return -0.5 * np.pi * 4 * e / (-np.expm1(-2 * u)) ** 2
    em = -np.expm1(-2 * u)
    K = 2 * np.exp(-2 * u) / em                      # e^{-u}/sinh u
    Kr = 2 * np.exp(-2 * u * alpha) / em             # K * r^(alpha-1), r = e^{-2u}
    ra = np.exp(-2 * u * alpha)
    h = (K - Kr * np.exp(-1j * np.pi * (alpha - 1))) / (1 + ra * np.exp(-1j * np.pi * alpha))
    return (alpha / (1 - alpha)) * h.imag


@dataclass(frozen=True)
class ContourSpec:
    """Integration path for the entropy.

    ``kind`` is ``"rectangle"`` (integer ``alpha >= 2`` only) or
    ``"cuts"`` (any ``alpha > 0``); ``"auto"`` selects ``"cuts"``.
    """

    kind: str = "auto"
    half_width: float = 1.5
    half_height: float = 0.5


def entropy_contour(curve: HyperellipticCurve, alpha: float, X: int = 1,
                    contour: ContourSpec | None = None, tol: float = 1e-10) -> float:
    """Rényi entropy from the asymptotic determinant.

    The entropy is ``(1/4 pi i) oint f_alpha(lambda) d log D_X`` around
    ``[-1, 1]``.  Two evaluations are offered.

    ``"rectangle"`` integrates directly over a rectangle of half-width
    ``1.5`` whose height stays below the singularity of ``f_alpha`` at
    ``i tan(pi/(2 alpha))``; it requires integer ``alpha >= 2``.

    ``"cuts"`` integrates by parts against
    ``G = log D_X - 2|X| log lambda`` and opens the contour to infinity.
    What remains are the poles of ``f'_alpha`` at
    ``+- i tan(pi (2k+1)/(2 alpha))``, ``2k + 1 < alpha``, each with residue
    ``1/(1 - alpha)``, and the jump of ``f'_alpha`` across ``|x| > 1``::

        S = (1/(1-alpha)) sum_k Re F(i y_k)
            - (1/pi) int_0^inf Im f'_alpha(coth u + i0) F(-i u/pi) du / sinh(u)^2,

    with ``F = log theta^(beta e) + log theta^(-beta e)``.  The extensive
    part ``|X| log(1 - lambda^-2)`` contributes exactly zero, so the result
    does not depend on ``|X|``.  ``alpha = 1`` needs no limit: the jump is
    the constant ``-i pi``.

    Raises
    ------
    ContourError
        If the rectangle is requested for a non-integer index or would reach
        a singularity of ``f_alpha``.
    """
    if not alpha > 0:
        raise DomainError("Renyi index must be positive")
    spec = contour or ContourSpec()
    kind = "cuts" if spec.kind == "auto" else spec.kind
    Pi = period_matrix(curve).Pi
    ch = curve.characteristics()

    if kind == "cuts":
        S = 0.0
        k = 0
        while 2 * k + 1 < alpha:
            y = np.tan(np.pi * (2 * k + 1) / (2 * alpha))
            S += _F(ch, Pi, complex(beta(1j * y))).real / (1 - alpha)
            k += 1

        def integrand(u):
            return _cut_weight(u, alpha) * _F(ch, Pi, -1j * u / np.pi).real

        tail = 0.0
        for a, b in ((0.0, 1.0), (1.0, 8.0), (8.0, np.inf)):
            val, err = quad(integrand, a, b, epsabs=tol, epsrel=tol, limit=400)
            if not np.isfinite(val) or err > 1e3 * tol * max(1.0, abs(val)):
                raise AccuracyError(f"cut integral did not converge (error {err:.1e})")
            tail += val
        return float(S - tail / np.pi)

    if kind == "rectangle":
        if not (float(alpha).is_integer() and alpha >= 2):
            raise ContourError("rectangle contour needs an integer index alpha >= 2")
        h, W = spec.half_height, spec.half_width
        if h >= np.tan(np.pi / (2 * alpha)) or W <= 1:
            raise ContourError("rectangle reaches a singularity of f_alpha or cuts [-1, 1]")
        corners = [W - 1j * h, W + 1j * h, -W + 1j * h, -W - 1j * h, W - 1j * h]

        def dlogD(lam):
            b = complex(beta(lam))
            db = (1 / (lam + 1) - 1 / (lam - 1)) / (2j * np.pi)
            return X * 2 * lam / (lam * lam - 1) + _dF_dbeta(ch, Pi, b, THETA_TOL) * db

        total = 0.0
        for a, b in zip(corners[:-1], corners[1:]):
            def side(s, a=a, b=b):
                lam = a + (b - a) * s
                return np.array([f_alpha(lam, alpha) * dlogD(lam) * (b - a)])

            val, err = quad_vec(side, 0.0, 1.0, epsabs=tol, epsrel=tol, limit=2000)
            total += val[0]
        S = total / (4j * np.pi)
        if abs(S.imag) > 1e-6 * max(1.0, abs(S.real)):
            raise AccuracyError(f"contour entropy has imaginary part {S.imag:.1e}")
        return float(S.real)
    raise ContourError(f"unknown contour kind {kind!r}")


# ---------------------------------------------------------------------------
# modular change of basis and pinching
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ModularSwap:
    """Period data in the basis whose ``a'_L`` cycle encloses ``z_{2L}, z_{2L+2}``.

    Attributes
    ----------
    curve : HyperellipticCurve
        The curve in the labelling with ``z_{2L+2}`` mirroring ``z_{2L}``.
    swapped : HyperellipticCurve
        The same curve with ``z_{2L}`` and ``z_{2L+1}`` exchanged.
    Pi, Pi_new : ndarray
        Period matrices in the old and new bases.
    chars : ThetaCharacteristics
        Old characteristics and ``e``.
    mu_new, e_new : ndarray
        New characteristic ``mu'`` and direction ``e'``.
    """

    curve: HyperellipticCurve
    swapped: HyperellipticCurve
    Pi: np.ndarray
    Pi_new: np.ndarray
    chars: ThetaCharacteristics
    mu_new: np.ndarray
    e_new: np.ndarray
    v: np.ndarray
    orientation: int = 1

    @property
    def prefactor_coefficient(self) -> complex:
        """``Pi'_{L-1,L-1} + Pi'_{LL} - 2 Pi'_{L,L-1} - s`` (1-based indices)."""
        return complex(self.v @ self.Pi_new @ self.v - self.orientation)

    def lhs(self, b: complex, tol: float = THETA_TOL) -> complex:
        """``log theta^[mu; nu](b e | Pi)``."""
        return log_theta_normalized(self.chars, b * self.chars.e, self.Pi, tol)

    def rhs(self, b: complex, tol: float = THETA_TOL) -> complex:
        """Logarithm of the right side of the change-of-basis identity."""
        ch = (self.mu_new, self.chars.nu)
        return (np.pi * 1j * b * b * self.prefactor_coefficient
                + log_theta_normalized(ch, b * self.e_new, self.Pi_new, tol))

    def geometric_sign(self, tol: float = 1e-6) -> int | None:
        """Compare with the periods of the relabelled cut system.

        Integrating directly on the swapped labelling gives
        ``Pi (1 + s v v^T Pi)^{-1}`` with ``s = +1`` or ``-1`` depending on
        the orientation the geometry induces on ``a'``; returns ``s``, or
        ``None`` if neither matches.
        """
        return _geometric_sign(self.Pi, self.swapped, self.v, tol)


def _geometric_sign(Pi, swapped, v, tol=1e-6):
    try:
        geo = period_matrix(swapped).Pi
    except IntegrationError:
        return None
    g = len(v)
    for s in (1, -1):
        cand = Pi @ np.linalg.inv(np.eye(g) + s * np.outer(v, v) @ Pi)
        if np.abs(cand - geo).max() < tol * max(1.0, np.abs(geo).max()):
            return s
    return None


def _segments_cross(p1, p2, q1, q2) -> bool:
    def orient(a, b, c):
        return np.sign(((b - a).conjugate() * (c - a)).imag)
    return (orient(p1, p2, q1) * orient(p1, p2, q2) < 0
            and orient(q1, q2, p1) * orient(q1, q2, p2) < 0)


def polyline_is_simple(pts) -> bool:
    """True if the open polyline through ``pts`` has no self-crossings.

    Cuts and gaps of a labelling are the consecutive segments; a canonical
    homology basis requires that they only meet at shared endpoints.
    """
    segs = list(zip(pts[:-1], pts[1:]))
    for i in range(len(segs)):
        for j in range(i + 2, len(segs)):
            if _segments_cross(*segs[i], *segs[j]):
                return False
    return True


def mirror_ordering(curve: HyperellipticCurve, pinch: int | None = None) -> HyperellipticCurve:
    """Relabel so that ``z_{2L}`` is a chosen root and ``z_{2L+2}`` its mirror image.

    A Cayley frame is selected in which the chosen inside root has the
    largest real part, so it sits at position ``2L``; the first two outside
    roots are then exchanged, which puts ``z_{2L+1}, z_{2L+2}`` at the
    mirror images of ``z_{2L-1}, z_{2L}``.  Among such frames one is taken
    whose cuts and gaps do not cross.  ``pinch`` indexes the inside roots of
    ``curve`` (default: the one closest to the unit circle).

    Raises
    ------
    OrderingError
        If no frame gives a non-crossing cut system.
    """
    L = curve.L
    if pinch is None:
        pinch = int(np.argmin(np.abs(np.abs(curve.roots[:2 * L]) - 1)))
    target = curve.roots[pinch]
    k_target = int(np.argmin(np.abs(curve.roots - target)))
    perm = list(range(4 * L))
    perm[2 * L], perm[2 * L + 1] = perm[2 * L + 1], perm[2 * L]

    candidates = []
    for phi in 2 * np.pi * (np.arange(4 * FRAME_GRID) + 0.5) / (4 * FRAME_GRID) - np.pi:
        f = cayley_frame(phi)
        zeta = _apply(f, curve.roots)
        ins = np.where(zeta.imag > 0)[0]
        if len(ins) != 2 * L or k_target not in ins:
            continue
        if zeta[k_target].real < zeta[ins].real.max():
            continue
        candidates.append((_frame_score(zeta, L), phi))
    for score, phi in sorted(candidates, reverse=True):
        if not np.isfinite(score) or score <= 0:
            break
        try:
            std = arrange(L, curve.roots, curve.eps, cayley_frame(phi))
        except StructureError:
            continue
        out = std.permuted(perm)
        if polyline_is_simple(out.zeta):
            return out
    raise OrderingError("no Cayley frame gives a non-crossing labelling for the swap")


def modular_swap(curve: HyperellipticCurve, reorder: bool = True,
                 orientation: int | None = None) -> ModularSwap:
    """Change to the homology basis obtained by swapping ``z_{2L}`` and ``z_{2L+1}``.

    The relabelling keeps every b-cycle and adds ``s (b_L - b_{L-1})`` to
    both ``a_{L-1}`` and ``a_L``, an integer symplectic change with lower
    block ``s N``, ``N = v v^T``, ``v = e_L - e_{L-1}`` (unit vectors,
    1-based; ``e_0 = 0``).  Hence::

        Pi'  = Pi (1 + s N Pi)^{-1}
        e'   = e - s Pi' v             (e'_r = e_r - s (Pi'_{L,r} - Pi'_{L-1,r}))
        mu'  = mu - s N nu + diag(N)/2 (entries L-1 and L shift by +-(nu_L - nu_{L-1}) + 1/2)
        nu'  = nu

    and ``theta^[mu; nu](b e | Pi) = exp(pi i b^2 (v^T Pi' v - s)) theta^[mu'; nu](b e' | Pi')``.

    Parameters
    ----------
    curve : HyperellipticCurve
    reorder : bool
        Relabel with :func:`mirror_ordering` first.
    orientation : {1, -1}, optional
        The sign ``s``.  By default it is read off by integrating directly on
        the relabelled cut system, which makes ``a'_L`` the cycle around
        ``z_{2L}, z_{2L+2}``; ``+1`` is used if that comparison fails.

    Raises
    ------
    OrderingError
        If ``z_{2L+2}`` is not the mirror image of ``z_{2L}``.
    """
    L = curve.L
    g = curve.g
    base = mirror_ordering(curve) if reorder else curve
    z = base.zeta
    if abs(z[2 * L + 1] - np.conj(z[2 * L - 1])) > 1e-8 * max(1.0, abs(z[2 * L - 1])):
        raise OrderingError("z_{2L+2} must be the mirror image of z_{2L}")
    perm = list(range(4 * L))
    perm[2 * L - 1], perm[2 * L] = perm[2 * L], perm[2 * L - 1]
    sw = base.permuted(perm)
    Pi = period_matrix(base).Pi
    v = np.zeros(g)
    v[L - 1] = 1.0
    if L >= 2:
        v[L - 2] = -1.0
    if orientation is None:
        orientation = _geometric_sign(Pi, sw, v) or 1
    if orientation not in (1, -1):
        raise DomainError("orientation must be +1 or -1")
    N = np.outer(v, v)
    Pn = Pi @ np.linalg.inv(np.eye(g) + orientation * N @ Pi)
    Pn = (Pn + Pn.T) / 2
    ch = base.characteristics()
    mu_new = ch.mu - orientation * N @ ch.nu + np.diag(N) / 2
    e_new = ch.e - orientation * Pn @ v
    return ModularSwap(base, sw, Pi, Pn, ch, mu_new, e_new, v, orientation)


@dataclass(frozen=True)
class DivergenceReport:
    """Fit of ``S = slope * log|z_{2L} - z_{2L+2}| + const`` along a family."""

    slope: float
    intercept: float
    coefficient_c: float
    distances: np.ndarray
    entropies: np.ndarray
    residual: float


def pinch_limits(family, alpha: float, X: int = 1) -> DivergenceReport:
    """Logarithmic divergence of the theta entropy along a pinching family.

    Parameters
    ----------
    family : sequence of CouplingSet
        Gapped chains approaching a unit-circle pinching.
    alpha : float
    X : int
        Interval length; it only shifts the entropy by a family-independent
        amount in the asymptotic formula.

    Returns
    -------
    DivergenceReport
        ``coefficient_c = -slope / ((alpha + 1)/(6 alpha))``; ``1/2`` for a
        real pinching and ``1`` for a complex one.

    Raises
    ------
    FitError
        With fewer than three members.
    """
    family = list(family)
    if len(family) < 3:
        raise FitError("need at least three members to fit a divergence")
    dist, S = [], []
    for c in family:
        cv = build_curve(c)
        L = cv.L
        r = cv.roots[:2 * L]
        i = int(np.argmin(np.abs(np.abs(r) - 1)))
        zi = r[i]
        dist.append(abs(zi - 1 / np.conj(zi)))
        S.append(entropy_contour(cv, alpha, X))
    x = np.log(np.array(dist))
    y = np.array(S)
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, icpt), res, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(res[0] / len(x))) if len(res) else 0.0
    c = -slope / ((alpha + 1) / (6 * alpha))
    return DivergenceReport(float(slope), float(icpt), float(c), np.array(dist), y, resid)


def reduced_theta_limit(ch: ThetaCharacteristics, s, Pi, r_hat: int, tol: float = THETA_TOL):
    """Two-term limit of ``theta`` when the cycle ``a_{r_hat}`` pinches.

    Returns the logarithm of
    ``e^{2 pi i (s_r + nu_r) mu_r} theta_o(s_o + mu_r Delta_o)
      + e^{-2 pi i (s_r + nu_r) mu_r} theta_o(s_o - mu_r Delta_o)``,
    which approximates ``theta(s) exp(-pi i Pi_rr / 4)`` for a same-character
    pair (``mu_r = +-1/2``), and ``log theta_o(s_o)`` for ``mu_r = 0``.
    ``r_hat`` is 0-based.
    """
    s = np.asarray(s, complex)
    keep = [i for i in range(len(ch.mu)) if i != r_hat]
    Po = Pi[np.ix_(keep, keep)]
    Do = Pi[keep, r_hat]
    mo, no, so = ch.mu[keep], ch.nu[keep], s[keep]
    m = ch.mu[r_hat]
    if m == 0:
        return log_theta((mo, no), so, Po, tol)
    ph = 2j * np.pi * (s[r_hat] + ch.nu[r_hat]) * m
    a = ph + log_theta((mo, no), so + m * Do, Po, tol)
    b = -ph + log_theta((mo, no), so - m * Do, Po, tol)
    return np.logaddexp(a, b) if np.isrealobj(a) else a + np.log1p(np.exp(b - a))


def direct_log_det(V: np.ndarray, lam: complex) -> complex:
    """``log det(lambda - V)`` of a Hermitian matrix through its eigenvalues."""
    ev = np.linalg.eigvalsh(V)
    return complex(np.sum(np.log(lam - ev)))
