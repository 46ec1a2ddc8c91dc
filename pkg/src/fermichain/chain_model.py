"""Coupling data, dispersion relation and spectral polynomial of a chain.

A translation invariant quadratic chain of range ``L`` is described by two
coupling sequences ``A_l`` (hopping) and ``B_l`` (pairing), ``l = -L..L``,
with ``A_{-l} = conj(A_l)`` and ``B_{-l} = -B_l``.  They define the Laurent
polynomials

    Theta(z) = sum_l A_l z^l,     Xi(z) = sum_l B_l z^l,
    Theta^{+-}(z) = (Theta(z) +- Theta(1/z)) / 2,

from which the dispersion relation, the ground-state symbol and the spectral
polynomial

    P(z) = z^{2L} (Theta^+(z)^2 - Xi(z) Xi^*(z)),   Xi^*(z) = sum_l conj(B_l) z^l

are built.  On the unit circle ``P(e^{i t}) = e^{2iLt} (Theta^+^2 + |Xi|^2)``.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import (
    ConstraintViolation,
    DomainError,
    NumericalConsistencyError,
    StructureError,
)

#: relative tolerance used to validate coupling symmetries
COUPLING_TOL = 1e-12
#: tolerance on the imaginary part of boundary values that must be real
REALNESS_TOL = 1e-10
#: distance from the unit circle below which a root counts as on it
TOL_CIRCLE = 1e-8
#: roots closer than this are merged into one multiple root
TOL_CLUSTER = 1e-6
TOL_CLUSTER_LOOSE = 1e-3
#: relative size below which extreme coefficients of P are trimmed
TRIM_TOL = 1e-13
#: number of sign-scan intervals used to locate Fermi points
FERMI_GRID = 4096
#: |Lambda| below which the dispersion is treated as vanishing
TOL_ZERO = 1e-9


def _readonly(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class CouplingSet:
    """Hamiltonian couplings of a chain of range ``L``.

    Parameters
    ----------
    L : int
        Coupling range, ``L >= 1``.
    A, B : array_like of complex, shape (2L+1,)
        Coefficients ``A_l`` and ``B_l`` stored at position ``l + L``.

    Raises
    ------
    ConstraintViolation
        If ``A_{-l} != conj(A_l)`` or ``B_{-l} != -B_l`` for some ``l``.
    """

    L: int
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        L = int(self.L)
        if L < 1:
            raise ConstraintViolation(f"range L must be >= 1, got {self.L}")
        A = _readonly(self.A)
        B = _readonly(self.B)
        if A.shape != (2 * L + 1,) or B.shape != (2 * L + 1,):
            raise ConstraintViolation(
                f"A and B must have length 2L+1 = {2 * L + 1}, "
                f"got {A.shape} and {B.shape}"
            )
        scale = 1.0 + max(np.abs(A).max(), np.abs(B).max())
        for l in range(0, L + 1):
            if abs(A[L - l] - np.conj(A[L + l])) > COUPLING_TOL * scale:
                raise ConstraintViolation(
                    f"hermiticity A_{{-l}} = conj(A_l) fails at l={l}", index=l
                )
            if abs(B[L - l] + B[L + l]) > COUPLING_TOL * scale:
                raise ConstraintViolation(
                    f"antisymmetry B_{{-l}} = -B_l fails at l={l}", index=l
                )
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @classmethod
    def from_nonnegative(cls, A_pos: Sequence[complex], B_pos: Sequence[complex]):
        """Build couplings from ``A_l, B_l`` with ``l = 0..L``.

        Negative indices follow from the symmetry relations.  ``A_0`` must be
        real and ``B_0`` must vanish.

        Examples
        --------
        >>> c = CouplingSet.from_nonnegative([-4, 1], [0, 1])
        >>> c.A_at(-1), c.B_at(-1)
        ((1+0j), (-1+0j))
        """
        A_pos = np.asarray(A_pos, dtype=complex)
        B_pos = np.asarray(B_pos, dtype=complex)
        if A_pos.shape != B_pos.shape or A_pos.ndim != 1 or len(A_pos) < 2:
            raise ConstraintViolation("A and B need the same length L+1 >= 2")
        L = len(A_pos) - 1
        scale = 1.0 + np.abs(A_pos).max() + np.abs(B_pos).max()
        if abs(A_pos[0].imag) > COUPLING_TOL * scale:
            raise ConstraintViolation("A_0 must be real", index=0)
        if abs(B_pos[0]) > COUPLING_TOL * scale:
            raise ConstraintViolation("B_0 must vanish", index=0)
        A = np.concatenate([np.conj(A_pos[:0:-1]), [A_pos[0].real], A_pos[1:]])
        B = np.concatenate([-B_pos[:0:-1], [0.0], B_pos[1:]])
        return cls(L, A, B)

    def A_at(self, l: int) -> complex:
        """Return ``A_l`` (zero outside ``-L..L``)."""
        return complex(self.A[l + self.L]) if abs(l) <= self.L else 0j

    def B_at(self, l: int) -> complex:
        """Return ``B_l`` (zero outside ``-L..L``)."""
        return complex(self.B[l + self.L]) if abs(l) <= self.L else 0j

    @property
    def is_parity(self) -> bool:
        """All ``A_l`` real."""
        return bool(np.all(np.abs(self.A.imag) <= COUPLING_TOL * (1 + np.abs(self.A).max())))

    @property
    def is_pc(self) -> bool:
        """All ``B_l`` real."""
        return bool(np.all(np.abs(self.B.imag) <= COUPLING_TOL * (1 + np.abs(self.B).max())))

    def to_json(self) -> dict:
        """Serialise as the chain-file dictionary (indices ``0..L``)."""
        L = self.L
        return {
            "L": L,
            "A_re": [float(x) for x in self.A[L:].real],
            "A_im": [float(x) for x in self.A[L:].imag],
            "B_re": [float(x) for x in self.B[L:].real],
            "B_im": [float(x) for x in self.B[L:].imag],
        }

    def __repr__(self):
        return f"CouplingSet(L={self.L}, A={self.A[self.L:]!r}, B={self.B[self.L:]!r})"


def laurent_eval(coeffs: np.ndarray, z) -> np.ndarray:
    """Evaluate ``sum_l coeffs[l+L] z^l`` for Laurent coefficients of length 2L+1."""
    coeffs = np.asarray(coeffs)
    L = (len(coeffs) - 1) // 2
    z = np.asarray(z, dtype=complex)
    # Horner in z on z^L * poly, then divide by z^L
    acc = np.zeros_like(z)
    for a in coeffs[::-1]:
        acc = acc * z + a
    return acc / z**L


@dataclass(frozen=True, eq=False)
class LaurentData:
    """Coefficient data of ``Theta``, ``Xi`` and ``Theta^{+-}``.

    All arrays have length ``2L+1`` and store the coefficient of ``z^l`` at
    position ``l + L``.
    """

    L: int
    theta: np.ndarray
    xi: np.ndarray
    theta_plus: np.ndarray
    theta_minus: np.ndarray
    xi_star: np.ndarray

    def Theta(self, z):
        return laurent_eval(self.theta, z)

    def Xi(self, z):
        return laurent_eval(self.xi, z)

    def Xi_star(self, z):
        return laurent_eval(self.xi_star, z)

    def Theta_plus(self, z):
        return laurent_eval(self.theta_plus, z)

    def Theta_minus(self, z):
        return laurent_eval(self.theta_minus, z)


def build_laurent(c: CouplingSet) -> LaurentData:
    """Return the Laurent polynomial data of a coupling set.

    ``Theta^+`` has the real coefficients ``Re A_l`` and ``Theta^-`` the purely
    imaginary coefficients ``i Im A_l``.

    Examples
    --------
    >>> d = build_laurent(xydm_couplings(1.0, 0.0, 4.0))
    >>> d.theta.real.tolist(), d.xi.real.tolist()
    ([1.0, -4.0, 1.0], [-1.0, 0.0, 1.0])
    """
    if not isinstance(c, CouplingSet):
        raise ConstraintViolation("expected a CouplingSet")
    A, B = c.A, c.B
    rev = A[::-1]
    tp = _readonly((A + rev) / 2)
    tm = _readonly((A - rev) / 2)
    return LaurentData(
        L=c.L,
        theta=_readonly(A),
        xi=_readonly(B),
        theta_plus=tp,
        theta_minus=tm,
        xi_star=_readonly(np.conj(B)),
    )


def _boundary_parts(c: CouplingSet, theta):
    """Real boundary values ``Theta^+``, ``Theta^-`` and ``|Xi|^2`` at e^{i theta}."""
    d = build_laurent(c)
    z = np.exp(1j * np.asarray(theta, dtype=float))
    tp = d.Theta_plus(z)
    tm = d.Theta_minus(z)
    xi = d.Xi(z)
    scale = 1.0 + np.abs(c.A).sum()
    if np.any(np.abs(tp.imag) > REALNESS_TOL * scale) or np.any(
        np.abs(tm.imag) > REALNESS_TOL * scale
    ):
        raise NumericalConsistencyError("Theta^+- boundary values are not real")
    return tp.real, tm.real, xi


def dispersion(c: CouplingSet, theta) -> np.ndarray:
    """Dispersion relation ``Lambda(theta)``.

    ``Lambda(theta) = sqrt(Theta^+(e^{it})^2 + |Xi(e^{it})|^2) - Theta^-(e^{it})``.
    The sign of the odd part is fixed so that the excitation energy of the
    Bogoliubov mode with momentum ``theta`` is returned; with
    ``A_1 = 1 + i s`` the odd part contributes ``+2 s sin(theta)``.

    Parameters
    ----------
    c : CouplingSet
    theta : float or array_like
        Angles in radians.

    Returns
    -------
    ndarray of float
    """
    tp, tm, xi = _boundary_parts(c, theta)
    rad = tp**2 + np.abs(xi) ** 2
    if np.any(rad < -REALNESS_TOL):
        raise NumericalConsistencyError("negative radicand in the dispersion")
    out = np.sqrt(np.maximum(rad, 0.0)) - tm
    return out if out.ndim else float(out)


@dataclass(frozen=True, eq=False)
class GroundStateSpec:
    """Mode data of the ground state of a periodic chain of ``N`` sites."""

    N: int
    theta: np.ndarray
    lam: np.ndarray
    dirac_sea: np.ndarray
    energy_shift: float
    ground_energy: float


def diagonalize(c: CouplingSet, N: int) -> GroundStateSpec:
    """Sample the dispersion on the momentum grid of a periodic chain.

    Parameters
    ----------
    c : CouplingSet
    N : int
        Number of sites, ``N > 2L``.

    Returns
    -------
    GroundStateSpec
        Momenta ``2 pi k / N``, energies, the filled negative-energy modes,
        the constant ``E0 = (1/2) sum_k Theta(e^{i theta_k})`` and the ground
        state energy ``E0 - (1/2) sum_k |Lambda_k|``.
    """
    N = int(N)
    if N <= 2 * c.L:
        raise DomainError(f"chain length N={N} must exceed 2L={2 * c.L}")
    theta = 2 * np.pi * np.arange(N) / N
    lam = dispersion(c, theta)
    d = build_laurent(c)
    th = d.Theta(np.exp(1j * theta))
    shift = 0.5 * th.sum()
    if abs(shift.imag) > REALNESS_TOL * (1 + np.abs(th).sum()):
        raise NumericalConsistencyError("energy shift is not real")
    shift = float(shift.real)
    sea = np.flatnonzero(lam < 0)
    e_gs = shift - 0.5 * float(np.abs(lam).sum())
    for arr in (theta, lam, sea):
        arr.setflags(write=False)
    return GroundStateSpec(N, theta, lam, sea, shift, e_gs)


def spectral_coefficients(c: CouplingSet) -> np.ndarray:
    """Coefficients of ``P(z)`` in ascending powers ``z^0 .. z^{4L}`` (real)."""
    d = build_laurent(c)
    p = np.convolve(d.theta_plus, d.theta_plus) - np.convolve(d.xi, d.xi_star)
    scale = 1.0 + np.abs(p).max()
    if np.abs(p.imag).max() > 1e-12 * scale:
        raise NumericalConsistencyError("spectral polynomial has complex coefficients")
    return p.real.copy()


@dataclass(frozen=True, eq=False)
class SpectralCurve:
    """Roots of the spectral polynomial and their symmetry structure.

    Attributes
    ----------
    p_coeffs : ndarray
        Ascending real coefficients of ``P`` (length ``4L+1``).
    roots : list of (complex, int)
        Distinct finite roots with multiplicities.
    n_infinite : int
        Number of roots at infinity (degree deficit of ``P``).
    quartets : list of tuple of complex
        Orbits of the distinct roots under conjugation and inversion.
    inside, outside, on_circle : ndarray
        Finite roots, repeated by multiplicity, split by the unit circle.
    effective_degree : int
        Degree after trimming negligible extreme coefficients.
    """

    L: int
    p_coeffs: np.ndarray
    roots: list
    n_infinite: int
    quartets: list
    inside: np.ndarray
    outside: np.ndarray
    on_circle: np.ndarray
    effective_degree: int

    def all_roots(self) -> np.ndarray:
        """Finite roots repeated by multiplicity."""
        return np.array([z for z, m in self.roots for _ in range(m)], dtype=complex)

    def evaluate(self, z):
        """Evaluate ``P`` at ``z``."""
        return np.polynomial.polynomial.polyval(z, self.p_coeffs)


def _polish(coeffs_desc, z, steps=3):
    p = np.poly1d(coeffs_desc)
    dp = p.deriv()
    for _ in range(steps):
        f, df = p(z), dp(z)
        if df == 0:
            break
        znew = z - f / df
        if abs(p(znew)) < abs(f):
            z = znew
        else:
            break
    return z


def _cluster(points, tol):
    """Group points closer than ``tol`` (single linkage); return index lists."""
    n = len(points)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(points[i] - points[j]) < tol * max(1.0, abs(points[i])):
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def find_roots(coeffs: np.ndarray, trim_tol: float = TRIM_TOL):
    """Roots of a palindromic polynomial given ascending coefficients.

    Returns the finite roots (companion-matrix eigenvalues polished by Newton
    steps) and the number of roots at infinity.  Negligible leading and
    trailing coefficients are trimmed in pairs so that ``k`` roots at infinity
    are matched by ``k`` exact zeros.
    """
    p = np.asarray(coeffs, dtype=float)
    norm = np.abs(p).max()
    if norm == 0:
        raise StructureError("spectral polynomial vanishes identically")
    k = 0
    while k < len(p) // 2 and abs(p[-1 - k]) < trim_tol * norm and abs(p[k]) < trim_tol * norm:
        k += 1
    core = p[k : len(p) - k]
    desc = core[::-1]
    r = np.roots(desc)
    r = np.array([_polish(desc, z) for z in r], dtype=complex)
    r = np.concatenate([r, np.zeros(k, dtype=complex)])
    return r, k


def spectral_curve(c: CouplingSet, tol: float = TOL_CLUSTER) -> SpectralCurve:
    """Roots of ``P`` grouped by multiplicity and by symmetry orbits.

    Parameters
    ----------
    c : CouplingSet
    tol : float
        Pairing tolerance used both to merge numerically split multiple roots
        and to match each root with its conjugate and inverse.  A root of
        multiplicity ``m`` is split by about ``eps**(1/m)``; when grouping at
        ``tol`` fails, one retry at ``TOL_CLUSTER_LOOSE`` covers fourfold roots.

    Raises
    ------
    StructureError
        If the root multiset is not closed under conjugation and inversion.
    """
    try:
        return _spectral_curve(c, tol)
    except StructureError:
        if tol >= TOL_CLUSTER_LOOSE:
            raise
        first = sys.exc_info()[1]
    try:
        return _spectral_curve(c, TOL_CLUSTER_LOOSE)
    except StructureError:
        raise first from None


def _spectral_curve(c: CouplingSet, tol: float) -> SpectralCurve:
    p = spectral_coefficients(c)
    raw, n_inf = find_roots(p)
    # the exact zeros paired with roots at infinity are kept out of the
    # clustering so that a genuinely small root is not absorbed by them
    finite = raw[: len(raw) - n_inf]
    groups = _cluster(finite, tol)
    roots = [(0j, n_inf)] if n_inf else []
    desc = np.asarray(p, dtype=float)[::-1]
    for g in groups:
        zs = finite[g]
        m = len(g)
        z = complex(zs.mean())
        if m > 1 and np.isfinite(z) and z != 0:
            # a root of multiplicity m is a simple root of the (m-1)-th derivative
            z = complex(_polish(np.polyder(desc, m - 1), z))
        roots.append((z, m))
    roots.sort(key=lambda t: (abs(t[0]), np.angle(t[0])))
    reps = np.array([z for z, _ in roots], dtype=complex)

    # orbits under z -> conj(z), z -> 1/z; zero is matched with infinity
    used = np.zeros(len(reps), bool)
    quartets = []
    n_zero = sum(m for z, m in roots if z == 0)
    if n_zero != n_inf:
        raise StructureError(
            f"{n_zero} roots at zero but {n_inf} at infinity; inversion symmetry broken"
        )
    for i, z in enumerate(reps):
        if used[i]:
            continue
        if z == 0:
            used[i] = True
            quartets.append((0j, complex(np.inf)))
            continue
        orbit = [z, np.conj(z), 1 / z, 1 / np.conj(z)]
        members = []
        for w in orbit:
            d = np.abs(reps - w)
            j = int(np.argmin(d))
            if d[j] > tol * max(1.0, abs(w)) * 10:
                raise StructureError(
                    f"root {z:.6g} has no partner {w:.6g} within tolerance {tol:g}"
                )
            if j not in members:
                members.append(j)
        for j in members:
            used[j] = True
        quartets.append(tuple(complex(reps[j]) for j in members))

    flat = np.array([z for z, m in roots for _ in range(m)], dtype=complex)
    mod = np.abs(flat)
    circ = np.abs(mod - 1) < TOL_CIRCLE
    inside = flat[(mod < 1) & ~circ]
    outside = flat[(mod > 1) & ~circ]
    on = flat[circ]
    if len(on) == 0 and len(inside) != 2 * c.L:
        raise StructureError(
            f"expected {2 * c.L} roots inside the unit circle, found {len(inside)}"
        )
    for arr in (inside, outside, on, p):
        arr.setflags(write=False)
    return SpectralCurve(
        L=c.L,
        p_coeffs=p,
        roots=roots,
        n_infinite=n_inf,
        quartets=quartets,
        inside=inside,
        outside=outside,
        on_circle=on,
        effective_degree=4 * c.L - 2 * n_inf,
    )


class Criticality(str, Enum):
    """The three ground-state classes of a chain."""

    GAPPED = "Gapped"
    PARITY_PRESERVING = "CriticalParityPreservingVacuum"
    DIRAC_SEA = "CriticalDiracSea"


@dataclass(frozen=True, eq=False)
class CriticalityReport:
    """Outcome of :func:`classify`.

    Attributes
    ----------
    kind : Criticality
    u : ndarray of complex
        Pinchings, unit-circle double roots of ``P`` where the symbol is
        the analytic matrix, ordered anticlockwise by angle in (-pi, pi].
    v : ndarray of complex
        Symbol jump points ``e^{+-i theta_F}`` at Fermi points.
    fermi_angles : ndarray
        Sign-change angles of ``Lambda``.
    dirac_intervals : list of (float, float)
        Angular intervals where ``Lambda < 0``.
    """

    kind: Criticality
    u: np.ndarray
    v: np.ndarray
    fermi_angles: np.ndarray
    dirac_intervals: list
    min_lambda: float

    @property
    def R(self) -> int:
        return len(self.u)

    @property
    def Q(self) -> int:
        return len(self.v)

    @property
    def breakpoints(self) -> np.ndarray:
        """Angles in (-pi, pi] at which the symbol may be discontinuous."""
        ang = np.concatenate([np.angle(self.u), np.angle(self.v)])
        return np.unique(np.round(ang, 15))


def _wrap(t):
    """Map angles to (-pi, pi]."""
    t = np.mod(np.asarray(t, float) + np.pi, 2 * np.pi) - np.pi
    return np.where(t <= -np.pi, t + 2 * np.pi, t)


def fermi_angles(c: CouplingSet, grid: int = FERMI_GRID, tol_zero: float = TOL_ZERO):
    """Sign-change angles of ``Lambda`` on (-pi, pi].

    A sign grid of ``grid`` intervals brackets each crossing, which is then
    refined with Brent's method.
    """
    t = np.linspace(-np.pi, np.pi, grid + 1)
    lam = dispersion(c, t)
    sgn = np.where(lam > tol_zero, 1, np.where(lam < -tol_zero, -1, 0))
    # carry signs across exact zeros so that touching zeros do not count
    roots = []
    last_i, last_s = None, 0
    for i, s in enumerate(sgn):
        if s == 0:
            continue
        if last_s != 0 and s != last_s:
            a, b = t[last_i], t[i]
            f = lambda x: float(dispersion(c, x))
            roots.append(brentq(f, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps))
        last_i, last_s = i, s
    return _wrap(np.array(roots, dtype=float)), t, lam


def classify(c: CouplingSet, tol: float = TOL_CIRCLE) -> CriticalityReport:
    """Classify the ground state of a chain.

    Gapped when ``min Lambda > 0``; a Dirac sea when ``Lambda`` changes sign
    (Fermi points ``theta_F`` give insertions ``e^{+-i theta_F}``); parity
    preserving critical when ``P`` has double roots on the unit circle at
    angles where the symbol is the analytic matrix.

    Parameters
    ----------
    c : CouplingSet
    tol : float
        Distance from the unit circle below which a (clustered) root of ``P``
        is considered to lie on it.

    Raises
    ------
    StructureError
        If a root on the unit circle has odd multiplicity.
    """
    fa, tgrid, lam = fermi_angles(c)
    v_ang = np.unique(np.round(np.concatenate([fa, -fa]), 14))
    v_ang = _wrap(v_ang)
    v_ang = np.unique(v_ang)

    intervals = []
    if len(fa):
        fs = np.sort(fa)
        for a, b in zip(fs, np.roll(fs, -1)):
            bb = b if b > a else b + 2 * np.pi
            mid = 0.5 * (a + bb)
            if dispersion(c, mid) < 0:
                intervals.append((float(a), float(bb)))

    curve = spectral_curve(c)
    u_ang = []
    for z, m in curve.roots:
        if abs(abs(z) - 1) < tol:
            if m % 2:
                raise StructureError(
                    f"root {z:.6g} on the unit circle has odd multiplicity {m}"
                )
            th = float(np.angle(z))
            l1, l2 = dispersion(c, th), dispersion(c, -th)
            scale = 1.0 + np.abs(c.A).sum() + np.abs(c.B).sum()
            if min(l1, l2) > -1e-6 * scale:
                u_ang.append(th)
    u_ang = np.sort(np.array(u_ang, dtype=float))

    if len(v_ang):
        kind = Criticality.DIRAC_SEA
    elif len(u_ang):
        kind = Criticality.PARITY_PRESERVING
    else:
        kind = Criticality.GAPPED
    u = np.exp(1j * u_ang)
    v = np.exp(1j * v_ang)
    for arr in (u, v, fa):
        arr.setflags(write=False)
    return CriticalityReport(
        kind=kind,
        u=u,
        v=v,
        fermi_angles=np.sort(fa),
        dirac_intervals=intervals,
        min_lambda=float(lam.min()),
    )


def xydm_couplings(gamma: float, s: float, h: float) -> CouplingSet:
    """Couplings of the XY chain with a DM term.

    ``A_1 = conj(A_{-1}) = 1 + i s``, ``A_0 = -h``, ``B_1 = -B_{-1} = gamma``.
    The dispersion is ``sqrt((h - 2cos t)^2 + 4 gamma^2 sin^2 t) + 2 s sin t``.
    """
    return CouplingSet.from_nonnegative([-h, 1 + 1j * s], [0.0, gamma])


def fermi_points_xydm(gamma: float, s: float, h: float):
    """Closed-form Fermi points of the XY chain with a DM term.

    Valid in the gapless region with a Dirac sea, ``s^2 > gamma^2`` and
    ``(h/2)^2 - s^2 + gamma^2 < 1``.  Returns ``(theta_1, theta_2)`` with

        cos(theta_j) = (h/2 +- sqrt(k (k + 1 - (h/2)^2))) / (k + 1),  k = s^2 - gamma^2,

    lying in (-pi, 0] for ``s > 0`` (mirrored for ``s < 0``).  The sign in
    front of ``h/2`` matches the dispersion for ``A_0 = -h``.

    Raises
    ------
    DomainError
        Outside the region, naming the violated inequality.
    """
    k = s * s - gamma * gamma
    if not k > 0:
        raise DomainError("requires s^2 - gamma^2 > 0")
    if not (h / 2) ** 2 - k < 1:
        raise DomainError("requires (h/2)^2 - s^2 + gamma^2 < 1")
    root = np.sqrt(k * (k + 1 - (h / 2) ** 2))
    cos = (np.array([h / 2 + root, h / 2 - root])) / (k + 1)
    th = np.arccos(np.clip(cos, -1.0, 1.0))
    sign = -1.0 if s > 0 else 1.0
    return float(sign * th[0]), float(sign * th[1])


def coupling_from_json(obj: dict) -> CouplingSet:
    """Build couplings from the chain-file dictionary.

    Accepted forms are ``{"L", "A_re", "A_im", "B_re", "B_im"}`` listing
    indices ``0..L`` (missing imaginary parts default to zero), or
    ``{"xydm": {"gamma", "s", "h"}}``.
    """
    if not isinstance(obj, dict):
        raise ConstraintViolation("chain specification must be a JSON object")
    if "xydm" in obj:
        p = obj["xydm"]
        try:
            return xydm_couplings(float(p["gamma"]), float(p.get("s", 0.0)), float(p["h"]))
        except KeyError as exc:
            raise ConstraintViolation(f"xydm entry lacks {exc}") from None
    try:
        L = int(obj["L"])
        a_re = np.asarray(obj["A_re"], float)
        b_re = np.asarray(obj["B_re"], float)
    except KeyError as exc:
        raise ConstraintViolation(f"chain specification lacks {exc}") from None
    a_im = np.asarray(obj.get("A_im", np.zeros(L + 1)), float)
    b_im = np.asarray(obj.get("B_im", np.zeros(L + 1)), float)
    for name, arr in (("A_re", a_re), ("A_im", a_im), ("B_re", b_re), ("B_im", b_im)):
        if arr.shape != (L + 1,):
            raise ConstraintViolation(f"{name} must list L+1 = {L + 1} values")
    return CouplingSet.from_nonnegative(a_re + 1j * a_im, b_re + 1j * b_im)


def load_chain(path) -> CouplingSet:
    """Read a chain specification file (UTF-8 JSON)."""
    text = Path(path).read_text(encoding="utf-8")
    return coupling_from_json(json.loads(text))
