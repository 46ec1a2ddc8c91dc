import numpy as np
import pytest

from fermichain.chain_model import CouplingSet, xydm_couplings
from fermichain.correlation import SubsystemSpec, build_VX, entropy
from fermichain.errors import (
    ContourError,
    DegeneracyError,
    DomainError,
    FitError,
    ThetaNullError,
    UnsupportedCaseError,
)
from fermichain.mobius import boost, transform_couplings
from fermichain.riemann import (
    ContourSpec,
    ThetaCharacteristics,
    beta,
    build_curve,
    direct_log_det,
    dx_lambda,
    entropy_contour,
    f_alpha,
    log_theta,
    mirror_ordering,
    modular_swap,
    period_matrix,
    pinch_limits,
    polyline_is_simple,
    reduced_theta_limit,
    theta,
)

from chains import L2_GAPPED, lift, pinch_family
from oracles import genus1_period, theta_direct

GENUS_ONE = [xydm_couplings(1, 0, 4), xydm_couplings(0.5, 0, 3), xydm_couplings(0.5, 0, 1.5),
             xydm_couplings(2, 0, 1)]


def wrap(d):
    """Fold the imaginary part of a log difference into (-pi, pi]."""
    return d.real + 1j * ((d.imag + np.pi) % (2 * np.pi) - np.pi)


def test_theta_example_value():
    assert theta(([0.0], [0.0]), [0.0], np.array([[1j]])) == pytest.approx(1.086434811213308, abs=1e-12)


@pytest.mark.parametrize("mu,nu", [(0, 0), (0.5, 0), (0, 0.5), (0.5, 0.5)])
def test_theta_genus_one_against_direct_sum(mu, nu):
    tau = 0.3 + 1.1j
    for s in (0.2 + 0.1j, -0.4 + 0.3j):
        ref = theta_direct(s, tau, mu, nu)
        assert theta(([mu], [nu]), [s], np.array([[tau]])) == pytest.approx(ref, rel=1e-12, abs=1e-13)


def test_theta_diagonal_factorises():
    Pi = np.diag([1.2j, 0.3 + 0.8j])
    s = np.array([0.1 + 0.05j, -0.2])
    got = theta(([0.5, 0.0], [0.0, 0.5]), s, Pi)
    ref = theta_direct(s[0], Pi[0, 0], 0.5, 0) * theta_direct(s[1], Pi[1, 1], 0, 0.5)
    assert got == pytest.approx(ref, rel=1e-12)


def test_log_theta_gradient():
    Pi = np.array([[1.1j, 0.2 + 0.1j], [0.2 + 0.1j, 0.9j]])
    ch = ([0.5, 0.0], [0.0, 0.5])
    s = np.array([0.1 + 0.2j, -0.3j])
    _, g = log_theta(ch, s, Pi, grad=True)
    h = 1e-6
    for i in range(2):
        e = np.zeros(2)
        e[i] = h
        fd = (log_theta(ch, s + e, Pi) - log_theta(ch, s - e, Pi)) / (2 * h)
        assert g[i] == pytest.approx(fd, abs=1e-7)


def test_theta_null_and_domain():
    with pytest.raises(ThetaNullError):
        log_theta(([0.5], [0.5]), [0.0], np.array([[1j]]))
    with pytest.raises(DomainError):
        log_theta(([0.0], [0.0]), [0.0], np.array([[-1j]]))


@pytest.mark.parametrize("c", GENUS_ONE)
def test_genus_one_period_against_agm(c):
    cv = build_curve(c)
    assert period_matrix(cv).Pi[0, 0] == pytest.approx(genus1_period(cv.zeta), abs=1e-10)


def test_period_matrix_genus_three():
    Pi = period_matrix(build_curve(L2_GAPPED)).Pi
    assert Pi.shape == (3, 3)
    np.testing.assert_allclose(Pi, Pi.T, atol=1e-10)
    assert np.linalg.eigvalsh(Pi.imag).min() > 0


@pytest.mark.parametrize("c", [GENUS_ONE[0], L2_GAPPED])
def test_period_matrix_boost_invariant(c):
    cv = build_curve(c)
    m = boost(0.3)
    cv2 = build_curve(transform_couplings(m, c), frame=cv.frame @ m.inverse())
    np.testing.assert_array_equal(cv2.eps, cv.eps)
    np.testing.assert_allclose(period_matrix(cv2).Pi, period_matrix(cv).Pi, atol=1e-10)


def test_cut_choice_independence():
    # a different Cayley frame can change Pi by a modular transformation; the entropy stays put
    c = transform_couplings(boost(0.3), L2_GAPPED)
    a = entropy_contour(build_curve(c), 2.0)
    b = entropy_contour(build_curve(L2_GAPPED), 2.0)
    assert a == pytest.approx(b, abs=1e-10)


def test_characteristics_half_integers():
    for c in GENUS_ONE + [L2_GAPPED]:
        ch = build_curve(c).characteristics()
        assert isinstance(ch, ThetaCharacteristics)
        for v in (ch.mu, ch.nu):
            np.testing.assert_array_equal(2 * v, np.round(2 * v))


def test_build_curve_errors():
    with pytest.raises(DegeneracyError):
        build_curve(xydm_couplings(1, 0, 2))
    with pytest.raises(DegeneracyError):
        build_curve(xydm_couplings(1, 0, 0))
    with pytest.raises(UnsupportedCaseError):
        build_curve(xydm_couplings(1, 0.2, 4))
    with pytest.raises(UnsupportedCaseError):
        build_curve(CouplingSet.from_nonnegative([-4, 1], [0, 1j]))


def test_curve_json():
    d = build_curve(GENUS_ONE[0]).to_json()
    assert set(d) == {"roots", "epsilons", "Pi_re", "Pi_im", "mu", "nu"}
    assert len(d["roots"]) == 4 and np.array(d["Pi_im"]).shape == (1, 1)


def test_beta_and_f_alpha():
    assert beta(2j) == pytest.approx(np.log((2j + 1) / (2j - 1)) / (2j * np.pi))
    assert abs(beta(1e8)) < 1e-8
    x = np.array([0.3, -0.6])
    ent = -((1 + x) / 2 * np.log((1 + x) / 2) + (1 - x) / 2 * np.log((1 - x) / 2))
    np.testing.assert_allclose(f_alpha(x, 1).real, ent)
    np.testing.assert_allclose(f_alpha(x, 2).real, -np.log(((1 + x) / 2) ** 2 + ((1 - x) / 2) ** 2))


@pytest.mark.parametrize("c", [GENUS_ONE[1], L2_GAPPED])
@pytest.mark.parametrize("lam", [2j, 1.5 + 0.5j])
def test_dx_lambda_against_direct_determinant(c, lam):
    cv = build_curve(c)
    errs = []
    for X in (10, 20, 40):
        V = build_VX(c, SubsystemSpec.single(X)).matrix
        d = direct_log_det(V, lam)
        errs.append(abs(wrap(dx_lambda(cv, lam, X) - d)) / abs(d))
    assert errs[2] < 1e-10
    assert errs[0] >= errs[1] >= errs[2] or errs[0] < 1e-12


def test_dx_lambda_symmetries():
    cv = build_curve(L2_GAPPED)
    lam = 1.5 + 0.5j
    a = dx_lambda(cv, lam, 20)
    b = dx_lambda(cv, np.conj(lam), 20)
    assert abs(wrap(np.conj(a) - b)) < 1e-10
    big = 1e6j
    assert abs(wrap(dx_lambda(cv, big, 20) - 20 * np.log(big * big - 1))) < 1e-5
    with pytest.raises(DomainError):
        dx_lambda(cv, 0.5, 20)


@pytest.mark.parametrize("c", [GENUS_ONE[0], GENUS_ONE[3], L2_GAPPED])
@pytest.mark.parametrize("alpha", [1.0, 2.0, 3.0, 1.5])
def test_entropy_contour_against_spectrum(c, alpha):
    S = entropy_contour(build_curve(c), alpha)
    assert S == pytest.approx(entropy(c, 40, alpha).S, abs=1e-9)


def test_entropy_contour_small_alpha():
    c = GENUS_ONE[0]
    assert entropy_contour(build_curve(c), 0.5) == pytest.approx(entropy(c, 40, 0.5).S, abs=5e-6)


def test_entropy_contour_rectangle():
    cv = build_curve(GENUS_ONE[1])
    rect = entropy_contour(cv, 2.0, 40, ContourSpec("rectangle"))
    assert rect == pytest.approx(entropy_contour(cv, 2.0), abs=1e-8)
    with pytest.raises(ContourError):
        entropy_contour(cv, 2.5, 40, ContourSpec("rectangle"))
    with pytest.raises(ContourError):
        entropy_contour(cv, 2.0, 40, ContourSpec("rectangle", half_height=1.5))
    with pytest.raises(DomainError):
        entropy_contour(cv, -1.0)


@pytest.mark.parametrize("c", [GENUS_ONE[0], GENUS_ONE[2], L2_GAPPED])
def test_modular_swap_identity(c):
    ms = modular_swap(build_curve(c))
    assert polyline_is_simple(ms.curve.zeta)
    assert ms.orientation in (1, -1)
    assert ms.geometric_sign() == ms.orientation
    for lam in (2j, 1.5 + 0.5j, 3.0):
        b = complex(beta(lam))
        assert abs(wrap(ms.lhs(b) - ms.rhs(b))) < 1e-8
    # the new characteristic on the pinching cycle is an integer
    L = ms.curve.L
    assert ms.mu_new[L - 1] % 1 == pytest.approx(0)


def test_mirror_ordering_places_mirror_pair():
    cv = mirror_ordering(build_curve(L2_GAPPED))
    L = cv.L
    z = cv.zeta
    assert abs(z[2 * L + 1] - np.conj(z[2 * L - 1])) < 1e-10


def test_pinch_limits():
    rep = pinch_limits(pinch_family("real", 10.0 ** -np.arange(5, 9)), 1.0)
    assert rep.coefficient_c == pytest.approx(0.5, rel=1e-3)
    assert len(rep.distances) == 4 and np.all(np.diff(rep.distances) < 0)
    with pytest.raises(FitError):
        pinch_limits(pinch_family("real", [1e-3, 1e-4]), 1.0)


def test_outside_degeneration():
    base = GENUS_ONE[1]
    S1 = entropy_contour(build_curve(base), 2.0)
    diffs = [abs(entropy_contour(build_curve(lift(base, d)), 2.0) - S1) for d in (1e-3, 1e-4)]
    assert diffs[1] < diffs[0] < 1e-4


def test_reduced_theta_limit():
    T = 4.0
    Pi = np.array([[0.9j, 0.2 + 0.1j], [0.2 + 0.1j, T * 1j]])
    s = np.array([0.1 + 0.05j, 0.02])
    same = ThetaCharacteristics(np.array([0.0, 0.5]), np.array([0.5, 0.0]), np.ones(2))
    full = log_theta(same, s, Pi) - 1j * np.pi * Pi[1, 1] / 4
    assert abs(wrap(reduced_theta_limit(same, s, Pi, 1) - full)) < 1e-6
    zero = ThetaCharacteristics(np.array([0.0, 0.0]), np.array([0.5, 0.0]), np.ones(2))
    lim = reduced_theta_limit(zero, s, Pi, 1)
    assert abs(wrap(lim - log_theta(zero, s, Pi))) < 1e-4
    assert abs(wrap(lim - log_theta(([0.0], [0.5]), s[:1], Pi[:1, :1]))) < 1e-15
