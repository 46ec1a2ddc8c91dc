"""Möbius maps, the SO(1,1) boosts and their action on chains.

A Möbius map ``z -> (a z + b) / (c z + d)`` with ``ad - bc = 1`` acts on
the couplings of a range-``L`` chain through the spin-``L`` representation:
the degree-``2L`` polynomials ``z^L Theta(z)`` and ``z^L Xi(z)`` are
transported as

    p'(w) = (a - c w)^{2L} p((d w - b) / (a - c w)),

so that the spectral polynomial obeys ``P'(z') = (c z + d)^{-4L} P(z)``.
The boosts

    [[cosh z, sinh z], [sinh z, cosh z]]

preserve the unit circle, commute with conjugation and inversion, and
therefore map chains to chains.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain_model import (
    TOL_CIRCLE,
    CouplingSet,
    CriticalityReport,
    SpectralCurve,
    spectral_curve,
)
from .errors import (
    AdmissibilityError,
    ConstraintViolation,
    FlowSingularityError,
    NumericalConsistencyError,
    PoleError,
)

DET_TOL = 1e-12


@dataclass(frozen=True)
class MobiusMap:
    """An element of SL(2, C) acting by fractional linear transformations."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        for name in "abcd":
            object.__setattr__(self, name, complex(getattr(self, name)))
        det = self.a * self.d - self.b * self.c
        if abs(det - 1) > DET_TOL * max(1.0, abs(self.a * self.d), abs(self.b * self.c)):
            raise ConstraintViolation(f"determinant ad - bc = {det} differs from 1")

    @classmethod
    def normalized(cls, a, b, c, d) -> "MobiusMap":
        """Scale an invertible matrix to unit determinant."""
        det = complex(a) * complex(d) - complex(b) * complex(c)
        if det == 0:
            raise ConstraintViolation("singular matrix")
        k = np.sqrt(det)
        return cls(a / k, b / k, c / k, d / k)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def __matmul__(self, other: "MobiusMap") -> "MobiusMap":
        m = self.matrix @ other.matrix
        return MobiusMap(*m.ravel())

    def inverse(self) -> "MobiusMap":
        return MobiusMap(self.d, -self.b, -self.c, self.a)

    def is_so11(self, tol: float = 1e-12) -> bool:
        """True for real maps of the form [[cosh z, sinh z], [sinh z, cosh z]]."""
        m = self.matrix
        if np.abs(m.imag).max() > tol:
            return False
        a, b, c, d = m.real.ravel()
        return abs(a - d) < tol and abs(b - c) < tol and a > 0

    def preserves_circle(self, tol: float = 1e-12) -> bool:
        """True for maps of the form [[a, b], [conj b, conj a]] up to sign."""
        a, b, c, d = self.a, self.b, self.c, self.d
        return abs(d - np.conj(a)) < tol and abs(c - np.conj(b)) < tol

    @property
    def zeta(self) -> float:
        """Rapidity of an SO(1,1) map."""
        if not self.is_so11(1e-9):
            raise ConstraintViolation("map is not an SO(1,1) boost")
        return float(np.arctanh(self.b.real / self.a.real))


def boost(zeta: float) -> MobiusMap:
    """The SO(1,1) element with rapidity ``zeta``.

    Examples
    --------
    >>> boost(0.3) @ boost(0.2) == boost(0.5)
    False
    >>> abs((boost(0.3) @ boost(0.2)).a - boost(0.5).a) < 1e-12
    True
    """
    zeta = float(zeta)
    return MobiusMap(np.cosh(zeta), np.sinh(zeta), np.sinh(zeta), np.cosh(zeta))


def map_point(m: MobiusMap, z):
    """Image of ``z`` and the Jacobian ``dz'/dz = (c z + d)^{-2}``.

    Parameters
    ----------
    m : MobiusMap
    z : complex or array_like

    Returns
    -------
    z_new, jac : complex or ndarray

    Raises
    ------
    PoleError
        If ``c z + d`` vanishes.
    """
    z = np.asarray(z, dtype=complex)
    den = m.c * z + m.d
    if np.any(den == 0):
        bad = z[den == 0] if z.ndim else z
        raise PoleError("point sits on the pole of the map", z=complex(np.ravel(bad)[0]))
    zn = (m.a * z + m.b) / den
    jac = den**-2
    if zn.ndim == 0:
        return complex(zn), complex(jac)
    return zn, jac


def transform_polynomial(m: MobiusMap, coeffs, degree: int) -> np.ndarray:
    """Transport a polynomial of formal degree ``degree`` under ``m``.

    ``coeffs`` are ascending.  Returns the ascending coefficients of
    ``(a - c w)^n p((d w - b)/(a - c w))`` with ``n = degree``.
    """
    P = np.polynomial.polynomial
    num = np.array([-m.b, m.d])      # d w - b
    den = np.array([m.a, -m.c])      # a - c w
    out = np.zeros(degree + 1, dtype=complex)
    coeffs = np.asarray(coeffs, dtype=complex)
    for j, pj in enumerate(coeffs):
        if pj == 0:
            continue
        term = P.polymul(P.polypow(num, j), P.polypow(den, degree - j))
        out[: len(term)] += pj * term
    return out


@dataclass(frozen=True, eq=False)
class AdmissibilityReport:
    """Verdict on whether a map acts admissibly on a chain."""

    admissible: bool
    moved_roots: np.ndarray
    side_preserved: bool
    quartet_preserved: bool
    indeterminate: bool = False
    offending_root: complex | None = None


def is_admissible(m: MobiusMap, curve: SpectralCurve, tol: float = 1e-6) -> AdmissibilityReport:
    """Check that ``m`` keeps every root on its side of the unit circle.

    The image multiset must also stay closed under conjugation and
    inversion.  Roots on (or within ``TOL_CIRCLE`` of) the circle are
    accepted only when ``m`` preserves the circle; otherwise the verdict is
    indeterminate and reported as not admissible.
    """
    roots = curve.all_roots()
    circle_map = m.preserves_circle(1e-10)
    moved = []
    side_ok = True
    indeterminate = False
    offending = None
    for z in roots:
        if z == 0:
            zn = m.b / m.d if m.d != 0 else np.inf
        else:
            zn = map_point(m, z)[0] if (m.c * z + m.d) != 0 else np.inf
        moved.append(zn)
        r0 = abs(z)
        r1 = abs(zn)
        if abs(r0 - 1) < TOL_CIRCLE:
            if not circle_map:
                indeterminate = True
                offending = offending if offending is not None else complex(z)
            elif abs(r1 - 1) > 1e-6:
                side_ok = False
                offending = offending if offending is not None else complex(z)
            continue
        if (r0 < 1) != (r1 < 1) or abs(r1 - 1) < TOL_CIRCLE:
            side_ok = False
            offending = offending if offending is not None else complex(z)
    # images of the points at infinity
    for _ in range(curve.n_infinite):
        zn = m.a / m.c if m.c != 0 else np.inf
        moved.append(zn)
        if np.isfinite(zn) and abs(zn) <= 1:
            side_ok = False
    moved = np.array(moved, dtype=complex)

    quartet_ok = True
    # tiny roots and their huge inverses are matched by the zero/infinity count below
    fin = moved[np.isfinite(moved) & (np.abs(moved) > tol) & (np.abs(moved) < 1 / tol)]
    for z in fin:
        for w in (np.conj(z), 1 / z):
            if np.min(np.abs(fin - w)) > tol * max(1.0, abs(w)) * 10:
                quartet_ok = False
                offending = offending if offending is not None else complex(z)
                break
        if not quartet_ok:
            break
    n_zero = int(np.sum(np.abs(moved) <= tol))
    n_inf = int(np.sum(~np.isfinite(moved) | (np.abs(moved) > 1 / tol)))
    if n_zero != n_inf:
        quartet_ok = False
    admissible = side_ok and quartet_ok and not indeterminate
    return AdmissibilityReport(
        admissible=admissible,
        moved_roots=moved,
        side_preserved=side_ok,
        quartet_preserved=quartet_ok,
        indeterminate=indeterminate,
        offending_root=offending,
    )


def transform_couplings(m: MobiusMap, c: CouplingSet, check: bool = True) -> CouplingSet:
    """Spin-``L`` action of ``m`` on a coupling set.

    The coefficient vectors of ``z^L Theta`` and ``z^L Xi`` (equivalently of
    ``Theta +- Xi``) are transported as degree-``2L`` polynomials; the result
    is multiplied by the unit phase that restores hermiticity, which is the
    identity for boosts.

    Raises
    ------
    AdmissibilityError
        If ``m`` is not admissible for the chain, or the image violates the
        coupling symmetries.
    """
    if check:
        rep = is_admissible(m, spectral_curve(c))
        if not rep.admissible:
            raise AdmissibilityError(
                "map is not admissible for these couplings", root=rep.offending_root
            )
    n = 2 * c.L
    A = transform_polynomial(m, c.A, n)
    B = transform_polynomial(m, c.B, n)
    # the unit phase restoring A'_{-l} = conj(A'_l) is read off the largest
    # pair (A'_l, A'_{-l}); taking it modulo pi keeps the sign of real images
    pair = np.abs(A[c.L:]) + np.abs(A[c.L::-1])
    l = int(np.argmax(pair))
    if pair[l] > 0:
        ang = 0.5 * np.angle(np.conj(A[c.L + l]) / A[c.L - l]) if l else -np.angle(A[c.L])
        ang = (ang + np.pi / 2) % np.pi - np.pi / 2
        A, B = A * np.exp(1j * ang), B * np.exp(1j * ang)
    A[c.L] = A[c.L].real
    B[c.L] = 0.0
    try:
        return CouplingSet(c.L, A, B)
    except ConstraintViolation as exc:
        raise AdmissibilityError(f"image couplings break the symmetries: {exc}") from None


def transform_xydm(zeta: float, gamma: float, s: float, h: float):
    """Boost flow of the XY chain with a DM term.

    With ``D = (h/2) sinh 2z + cosh 2z``::

        gamma' = gamma / D,   s' = s / D,
        h'/2   = ((h/2) cosh 2z + sinh 2z) / D.

    Raises
    ------
    FlowSingularityError
        If ``D`` vanishes.
    """
    ch, sh = np.cosh(2 * zeta), np.sinh(2 * zeta)
    D = (h / 2) * sh + ch
    if abs(D) < 1e-14:
        raise FlowSingularityError(f"flow denominator vanishes at zeta={zeta}")
    return gamma / D, s / D, 2 * ((h / 2) * ch + sh) / D


def log_jacobians(m: MobiusMap, points) -> np.ndarray:
    """Principal logarithms of ``dz'/dz`` at the given points."""
    pts = np.atleast_1d(np.asarray(points, dtype=complex))
    if len(pts) == 0:
        return np.zeros(0, dtype=complex)
    return np.log(map_point(m, pts)[1])


def predicted_shift(alpha: float, m: MobiusMap, report: CriticalityReport, P: int = 1):
    """Predicted change of the Rényi entropy under ``m``.

    The partition function picks up

        prod_k (du'_k/du_k)^{2 P D} prod_s (dv'_s/dv_s)^{P D},
        D = (1/alpha - alpha) / 24,

    and ``Delta S = log(factor) / (1 - alpha)``.  The division is carried out
    analytically so ``alpha = 1`` is regular.

    Returns
    -------
    dS : float
    factor : complex
        The partition-function factor (real and positive for boosts acting
        on conjugation-closed insertion sets).

    Raises
    ------
    NumericalConsistencyError
        For a boost whose factor is not real positive.
    """
    lu = log_jacobians(m, report.u).sum()
    lv = log_jacobians(m, report.v).sum()
    ku = P * (alpha + 1) / (12 * alpha)
    kv = P * (alpha + 1) / (24 * alpha)
    dS_c = ku * lu + kv * lv
    delta = (1 / alpha - alpha) / 24
    log_factor = 2 * P * delta * lu + P * delta * lv
    factor = np.exp(log_factor)
    if m.is_so11():
        if abs(dS_c.imag) > 1e-10 * max(1.0, abs(dS_c.real)):
            raise NumericalConsistencyError("boost Jacobian factor is not real")
    return float(dS_c.real), complex(factor)
