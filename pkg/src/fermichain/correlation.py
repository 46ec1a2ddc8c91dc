"""Ground-state symbol, correlation matrices and Rényi entropies.

The ground-state two-point function of a subsystem ``X`` is the Hermitian
matrix ``V_X`` with 2x2 blocks

    V_nm = (1/2pi) int G(t) e^{i t (n - m)} dt          (infinite chain)
    V_nm = (1/N) sum_k G(t_k) e^{i t_k (n - m)}          (periodic chain)

where the symbol ``G(t)`` equals ``I`` inside the Dirac sea
(``Lambda(t) < 0 < Lambda(-t)``), ``-I`` on the mirrored arc and otherwise

    M(t) = [[Theta^+, Xi], [conj(Xi), -Theta^+]] / sqrt(Theta^+^2 + |Xi|^2).

Its eigenvalues come in pairs ``+-nu_l`` and the Rényi entropy is
``S = (1 - alpha)^{-1} sum_l log F(nu_l)`` with
``F(nu) = ((1 + nu)/2)^alpha + ((1 - nu)/2)^alpha``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import xlogy

from .chain_model import (
    TOL_ZERO,
    CouplingSet,
    CriticalityReport,
    _boundary_parts,
    classify,
    dispersion,
)
from .errors import AccuracyError, DiscontinuityError, DomainError, NumericalConsistencyError

#: Gauss-Legendre order of a quadrature panel
PANEL_ORDER = 24
_GL_X, _GL_W = np.polynomial.legendre.leggauss(PANEL_ORDER)
# matrix mapping node values to Legendre coefficients on one panel
_LEG_V = np.polynomial.legendre.legvander(_GL_X, PANEL_ORDER - 1)
_TO_LEG = (_LEG_V * _GL_W[:, None]).T * ((2 * np.arange(PANEL_ORDER) + 1) / 2)[:, None]

EIG_CLAMP = 1e-8
PAIR_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class SymbolSample:
    """The symbol at one angle."""

    theta: float
    G: np.ndarray


def symbol_values(c: CouplingSet, theta) -> np.ndarray:
    """Vectorised symbol, shape ``(n, 2, 2)``.

    No check is made for points on a discontinuity; see :func:`symbol`.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    tp, tm, xi = _boundary_parts(c, theta)
    r = np.sqrt(tp**2 + np.abs(xi) ** 2)
    lam_p = r - tm
    lam_m = r + tm
    G = np.empty((len(theta), 2, 2), dtype=complex)
    with np.errstate(invalid="ignore", divide="ignore"):
        G[:, 0, 0] = tp / r
        G[:, 0, 1] = xi / r
        G[:, 1, 0] = np.conj(xi) / r
        G[:, 1, 1] = -tp / r
    eye = np.eye(2)
    up = (lam_p < 0) & (lam_m > 0)
    dn = (lam_p > 0) & (lam_m < 0)
    G[up] = eye
    G[dn] = -eye
    return G


def symbol(c: CouplingSet, theta: float, tol_zero: float = TOL_ZERO) -> SymbolSample:
    """Ground-state symbol at a single angle.

    Raises
    ------
    DiscontinuityError
        When ``|Lambda(theta)|`` or ``|Lambda(-theta)|`` is below ``tol_zero``,
        where the symbol jumps.
    """
    l1 = dispersion(c, theta)
    l2 = dispersion(c, -theta)
    if abs(l1) < tol_zero or abs(l2) < tol_zero:
        raise DiscontinuityError(f"symbol is discontinuous at theta={theta}")
    G = symbol_values(c, theta)[0]
    G.setflags(write=False)
    return SymbolSample(float(theta), G)


@dataclass(frozen=True, eq=False)
class SubsystemSpec:
    """A union of disjoint integer intervals ``[a, b]`` (inclusive)."""

    intervals: tuple

    def __post_init__(self):
        iv = tuple((int(a), int(b)) for a, b in self.intervals)
        if not iv:
            raise DomainError("subsystem needs at least one interval")
        for a, b in iv:
            if b < a:
                raise DomainError(f"empty interval {a}:{b}")
        for (a0, b0), (a1, b1) in zip(iv, iv[1:]):
            if a1 <= b0:
                raise DomainError("intervals must be disjoint and ascending")
        object.__setattr__(self, "intervals", iv)

    @classmethod
    def single(cls, size: int, start: int = 1) -> "SubsystemSpec":
        return cls(((start, start + size - 1),))

    @classmethod
    def parse(cls, text: str) -> "SubsystemSpec":
        """Parse ``"a:b,c:d"``."""
        out = []
        for part in text.split(","):
            try:
                a, b = part.split(":")
                out.append((int(a), int(b)))
            except ValueError:
                raise DomainError(f"malformed interval {part!r}") from None
        return cls(tuple(out))

    @property
    def sites(self) -> np.ndarray:
        return np.concatenate([np.arange(a, b + 1) for a, b in self.intervals])

    @property
    def size(self) -> int:
        return int(sum(b - a + 1 for a, b in self.intervals))

    @property
    def endpoints(self) -> np.ndarray:
        """Interval endpoints ``x_1 < x_2 < ...`` with ``[a, b] -> (a, b + 1)``."""
        return np.array([x for a, b in self.intervals for x in (a, b + 1)], dtype=float)


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    """Correlation matrix of a subsystem with 2x2 blocks per site."""

    matrix: np.ndarray
    sites: np.ndarray
    mode: str

    @property
    def size(self) -> int:
        return len(self.sites)


@dataclass(frozen=True, eq=False)
class EntropyResult:
    """Rényi entropy and partition function of a spectrum."""

    alpha: float
    size: int
    spectrum: np.ndarray
    Z: float
    S: float


def _panel_nodes(a, b):
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return mid + half * _GL_X, half * _GL_W


def symbol_quadrature(c: CouplingSet, dmax: int, breakpoints=(), tol: float = 1e-12,
                      max_panels: int = 200000):
    """Gauss-Legendre nodes and weights for Fourier integrals of the symbol.

    The circle is split at ``breakpoints`` (jumps of the symbol) and into
    panels no wider than ``8 / (dmax + 1)`` so that ``e^{i d t}`` is resolved
    for ``|d| <= dmax``.  Panels on which the Legendre tail of the symbol
    exceeds ``tol`` are bisected.

    Returns
    -------
    theta, weights : ndarray
    values : ndarray, shape (n, 2, 2)
        Symbol at the nodes.
    """
    bps = np.sort(np.unique(np.concatenate([[-np.pi, np.pi], np.asarray(breakpoints, float)])))
    bps = bps[(bps >= -np.pi) & (bps <= np.pi)]
    wmax = min(0.5, 8.0 / (dmax + 1))
    stack = []
    for a, b in zip(bps[:-1], bps[1:]):
        if b - a <= 1e-14:
            continue
        n = int(np.ceil((b - a) / wmax))
        edges = np.linspace(a, b, n + 1)
        stack.extend(zip(edges[:-1], edges[1:]))
    coupling_scale = 2 * (np.abs(c.A).sum() + np.abs(c.B).sum())
    done_t, done_w, done_g = [], [], []
    count = 0
    while stack:
        a, b = stack.pop()
        count += 1
        if count > max_panels:
            raise AccuracyError("symbol quadrature did not converge (too many panels)")
        t, w = _panel_nodes(a, b)
        G = symbol_values(c, t)
        coef = np.tensordot(_TO_LEG, G.reshape(PANEL_ORDER, 4), axes=1)
        tail = np.abs(coef[-4:]).max()
        scale = max(1.0, np.abs(coef).max())
        # next to a Fermi point the entries are ratios of two small numbers and
        # carry rounding noise of order eps * |couplings| / r; refining below
        # that floor cannot succeed
        tp, _, xi = _boundary_parts(c, t)
        r_min = np.sqrt(tp**2 + np.abs(xi) ** 2).min()
        floor = 64 * np.finfo(float).eps * coupling_scale / max(r_min, 1e-300)
        if tail > max(tol * scale, floor) and (b - a) > 1e-13:
            m = 0.5 * (a + b)
            stack.append((a, m))
            stack.append((m, b))
            continue
        done_t.append(t)
        done_w.append(w)
        done_g.append(G)
    return np.concatenate(done_t), np.concatenate(done_w), np.concatenate(done_g)


def fourier_blocks_thermo(c: CouplingSet, dmax: int, report: CriticalityReport | None = None,
                          tol: float = 1e-12) -> np.ndarray:
    """Blocks ``g_d = (1/2pi) int G(t) e^{i t d} dt`` for ``|d| <= dmax``.

    Returns an array of shape ``(2 dmax + 1, 2, 2)`` indexed by ``d + dmax``.
    """
    if report is None:
        report = classify(c)
    t, w, G = symbol_quadrature(c, dmax, report.breakpoints, tol=tol)
    d = np.arange(-dmax, dmax + 1)
    WG = (w[:, None] * G.reshape(len(t), 4)) / (2 * np.pi)
    out = np.zeros((len(d), 4), dtype=complex)
    chunk = max(1, 4_000_000 // len(d))
    for s in range(0, len(t), chunk):
        E = np.exp(1j * np.outer(d, t[s : s + chunk]))
        out += E @ WG[s : s + chunk]
    return out.reshape(len(d), 2, 2)


def fourier_blocks_finite(c: CouplingSet, N: int, tol_zero: float = TOL_ZERO) -> np.ndarray:
    """Blocks ``g_d = (1/N) sum_k G(t_k) e^{i t_k d}`` for ``d = 0..N-1``.

    At grid momenta where the symbol jumps (``|Lambda| < tol_zero`` at ``t_k``
    or ``-t_k``) the average of the two lateral limits is used.
    """
    t = 2 * np.pi * np.arange(N) / N
    G = symbol_values(c, t)
    l1 = dispersion(c, t)
    l2 = dispersion(c, -t)
    bad = np.flatnonzero((np.abs(l1) < tol_zero) | (np.abs(l2) < tol_zero) | ~np.isfinite(G).all(axis=(1, 2)))
    if len(bad):
        eta = 1e-7
        G[bad] = 0.5 * (symbol_values(c, t[bad] - eta) + symbol_values(c, t[bad] + eta))
    return np.fft.ifft(G, axis=0)


def build_VX(c: CouplingSet, sub: SubsystemSpec, mode="thermo",
             report: CriticalityReport | None = None, tol: float = 1e-12) -> CorrelationMatrix:
    """Correlation matrix of a subsystem.

    Parameters
    ----------
    c : CouplingSet
    sub : SubsystemSpec
    mode : ``"thermo"`` or ``("finite", N)`` or ``"finite:N"``
        Infinite chain (panel quadrature) or periodic chain of ``N`` sites.
    report : CriticalityReport, optional
        Reused to place quadrature breakpoints.

    Raises
    ------
    DomainError
        For a periodic chain too short for the subsystem.
    """
    sites = sub.sites
    diff = sites[:, None] - sites[None, :]
    mode_name, N = _parse_mode(mode)
    if mode_name == "finite":
        if N <= 2 * int(np.abs(sites).max()):
            raise DomainError(f"periodic chain N={N} must exceed twice the largest site index")
        g = fourier_blocks_finite(c, N)
        blocks = g[np.mod(diff, N)]
        tag = f"finite:{N}"
    else:
        dmax = int(np.abs(diff).max())
        g = fourier_blocks_thermo(c, dmax, report=report, tol=tol)
        blocks = g[diff + dmax]
        tag = "thermo"
    n = len(sites)
    V = blocks.transpose(0, 2, 1, 3).reshape(2 * n, 2 * n)
    V = 0.5 * (V + V.conj().T)
    V.setflags(write=False)
    return CorrelationMatrix(V, sites, tag)


def _parse_mode(mode):
    if isinstance(mode, tuple):
        name, N = mode
        return str(name), int(N)
    if isinstance(mode, str):
        if mode == "thermo":
            return "thermo", None
        if mode.startswith("finite:"):
            try:
                return "finite", int(mode.split(":", 1)[1])
            except ValueError:
                pass
    raise DomainError(f"unknown mode {mode!r}; use 'thermo' or 'finite:<N>'")


def entanglement_spectrum(V: CorrelationMatrix | np.ndarray) -> np.ndarray:
    """Half-spectrum ``nu_1 >= nu_2 >= ... >= 0`` of a correlation matrix.

    Eigenvalues ``e`` are paired as ``(e_k, e_{2n-1-k})``; the pair residual
    must stay below ``1e-8`` and ``|e| <= 1 + 1e-8`` (values slightly above one
    are clamped).

    Raises
    ------
    NumericalConsistencyError
        On a pairing failure or an eigenvalue beyond the clamp window.
    """
    M = V.matrix if isinstance(V, CorrelationMatrix) else np.asarray(V)
    e = np.linalg.eigvalsh(M)
    n2 = len(e)
    if n2 % 2:
        raise NumericalConsistencyError("correlation matrix has odd dimension")
    n = n2 // 2
    lo, hi = e[:n], e[::-1][:n]
    resid = np.abs(lo + hi).max() if n else 0.0
    if resid > PAIR_TOL:
        raise NumericalConsistencyError(f"eigenvalues are not +- paired (residual {resid:.2e})")
    if np.abs(e).max() > 1 + EIG_CLAMP:
        raise NumericalConsistencyError(f"eigenvalue {np.abs(e).max():.12g} exceeds 1")
    nu = np.clip(0.5 * (hi - lo), 0.0, 1.0)
    return np.sort(nu)[::-1]


def log_F(nu, alpha: float) -> np.ndarray:
    """``log F_alpha(nu)`` evaluated in log space."""
    nu = np.asarray(nu, dtype=float)
    with np.errstate(divide="ignore"):
        return np.logaddexp(alpha * np.log(0.5 * (1 + nu)), alpha * np.log(0.5 * (1 - nu)))


def renyi(spectrum: Sequence[float], alpha: float) -> EntropyResult:
    """Rényi entropy of a half-spectrum.

    ``S = (1 - alpha)^{-1} sum_l log F(nu_l)``; at ``alpha = 1`` the von Neumann
    entropy ``sum_l H((1 + nu_l) / 2)`` with the binary entropy ``H``.
    ``Z = exp((1 - alpha) S)``.

    Examples
    --------
    >>> round(renyi([0.5], 2).S, 12) == round(-np.log(0.625), 12)
    True
    """
    if not alpha > 0:
        raise DomainError(f"Renyi index must be positive, got {alpha}")
    nu = np.clip(np.asarray(spectrum, dtype=float), 0.0, 1.0)
    if alpha == 1:
        p = 0.5 * (1 + nu)
        q = 0.5 * (1 - nu)
        S = float(-(xlogy(p, p) + xlogy(q, q)).sum())
        Z = 1.0
    else:
        lf = log_F(nu, alpha).sum()
        S = float(lf / (1 - alpha))
        Z = float(np.exp(lf))
    S = max(S, 0.0)
    return EntropyResult(float(alpha), len(nu), nu, Z, S)


def entropy(c: CouplingSet, sub: SubsystemSpec | int, alpha: float, mode="thermo",
            report: CriticalityReport | None = None) -> EntropyResult:
    """Rényi entropy of a subsystem (an int means a single block of that size)."""
    if isinstance(sub, (int, np.integer)):
        sub = SubsystemSpec.single(int(sub))
    V = build_VX(c, sub, mode, report=report)
    return renyi(entanglement_spectrum(V), alpha)


@dataclass(frozen=True, eq=False)
class FlowRow:
    """One point of an entropy flow scan."""

    zeta: float
    couplings: CouplingSet
    angles: np.ndarray
    S: float
    S_predicted: float


def entropy_flow_scan(c: CouplingSet, zetas: Sequence[float], alpha: float,
                      sub: SubsystemSpec | int, mode="thermo") -> list[FlowRow]:
    """Entropy along a boost flow together with the covariance prediction.

    For every rapidity the couplings are transported by the boost, the
    entropy is recomputed, and ``S(0) + Delta S`` from
    :func:`fermichain.mobius.predicted_shift` is attached.  ``angles`` holds
    the transported pinching and Fermi angles.
    """
    from .mobius import boost, map_point, predicted_shift, transform_couplings

    report = classify(c)
    base = None
    rows = []
    for z in zetas:
        m = boost(z)
        cz = transform_couplings(m, c) if z != 0 else c
        rep_z = classify(cz)
        S = entropy(cz, sub, alpha, mode, report=rep_z).S
        if base is None:
            base = S if z == 0 else entropy(c, sub, alpha, mode, report=report).S
        dS, _ = predicted_shift(alpha, m, report, P=len(sub.intervals) if isinstance(sub, SubsystemSpec) else 1)
        pts = np.concatenate([report.u, report.v])
        ang = np.angle(map_point(m, pts)[0]) if len(pts) else np.zeros(0)
        rows.append(FlowRow(float(z), cz, np.atleast_1d(ang), S, base + dS))
    return rows
