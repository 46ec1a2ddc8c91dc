import math

import numpy as np
import pytest

from fermichain.asymptotics import (
    I_alpha,
    InsertionData,
    asymptotic_entropy,
    closed_form,
    delta_alpha,
    entropy_aef,
    log_coefficient,
    multiinterval_entropy,
    multiinterval_Z,
    pair_exponents,
    transform_prediction,
    xxdm_jacobian_product,
)
from fermichain.chain_model import classify, xydm_couplings
from fermichain.correlation import entropy
from fermichain.errors import DomainError, ShapeError
from fermichain.mobius import boost, log_jacobians, map_point, predicted_shift, transform_xydm

from oracles import I_alpha_lambda

# frozen values of the universal constant from the independent lambda-path oracle
I_FROZEN = {0.5: 0.299666816932, 2.0: 0.202024360019, 3.0: 0.183182584589}
# constant of the critical XX chain at alpha = 1 known from the literature (2 I_1)
XX_CONSTANT = 0.4950179


@pytest.mark.parametrize("alpha", [0.5, 2.0, 3.0, 4.5])
def test_I_alpha_against_lambda_path(alpha):
    assert I_alpha(alpha) == pytest.approx(I_alpha_lambda(alpha), abs=1e-12)


@pytest.mark.parametrize("alpha,value", sorted(I_FROZEN.items()))
def test_I_alpha_frozen(alpha, value):
    assert I_alpha(alpha) == pytest.approx(value, abs=1e-12)


def test_I_alpha_one_dual_path():
    limit = I_alpha(1.0)
    ext = 0.5 * (I_alpha_lambda(1 - 1e-4) + I_alpha_lambda(1 + 1e-4))
    assert abs(limit - ext) < 1e-6
    assert 2 * limit == pytest.approx(XX_CONSTANT, abs=1e-7)


def test_I_alpha_large_alpha_finite():
    for a in (20.0, 200.0):
        assert math.isfinite(I_alpha(a))
    with pytest.raises(DomainError):
        I_alpha(0.0)


def test_I_alpha_two_from_xx_numerics():
    # invert the critXX formula at two sizes and compare the constants
    k = 3 / 24
    consts = []
    for X in (500, 1000):
        S = entropy(xydm_couplings(0, 0, 0), X, 2.0).S
        consts.append(0.5 * (S - 2 * k * math.log(X) - 2 * k * math.log(2)))
    assert abs(consts[1] - I_alpha(2.0)) < 1e-3
    assert abs(consts[1] - I_alpha(2.0)) < abs(consts[0] - I_alpha(2.0))


def test_delta_alpha():
    assert delta_alpha(1) == 0
    assert delta_alpha(2) == pytest.approx(-1 / 16)
    assert delta_alpha(0.5) == pytest.approx(1 / 16)
    with pytest.raises(DomainError):
        delta_alpha(-1)


def test_entropy_aef_matches_critxx():
    for a in (1.0, 2.0, 3.0):
        assert entropy_aef([1j, -1j], 300, a) == pytest.approx(closed_form("critXX", 300, a, h=0.0), abs=1e-12)


def test_entropy_aef_angle_dependence():
    a, X = 2.0, 100
    k = (a + 1) / (12 * a)
    for phi in (0.3, 1.0, 2.2):
        S = entropy_aef([np.exp(1j * phi), np.exp(-1j * phi)], X, a)
        rest = S - 2 * k * math.log(X) - 2 * I_alpha(a)
        assert rest == pytest.approx(2 * k * math.log(2 * math.sin(phi)), abs=1e-12)


def test_entropy_aef_doubling_and_errors():
    u = np.exp(1j * np.array([-2.0, -0.5, 0.5, 2.0]))
    a = 2.0
    k = (a + 1) / (12 * a)
    assert entropy_aef(u, 200, a) - entropy_aef(u, 100, a) == pytest.approx(k * 4 * math.log(2), abs=1e-12)
    with pytest.raises(DomainError):
        entropy_aef([1j, 1j], 100, a)
    with pytest.raises(DomainError):
        entropy_aef([1.1j, -1j], 100, a)


def test_entropy_aef_cyclic_shift_and_boost():
    u = np.exp(1j * np.array([-2.5, -0.9, 0.9, 2.5]))
    a = 2.0
    assert entropy_aef(np.roll(u, 2), 100, a) == pytest.approx(entropy_aef(u, 100, a), abs=1e-12)
    m = boost(0.3)
    up, jac = map_point(m, u)
    shift = (a + 1) / (12 * a) * np.log(jac).sum().real
    assert entropy_aef(up, 100, a) - entropy_aef(u, 100, a) == pytest.approx(shift, abs=1e-10)


def test_closed_form_examples():
    a, X = 2.0, 250
    k = (a + 1) / (12 * a)
    assert closed_form("critXX", X, a, h=0.0) == pytest.approx(
        2 * k * math.log(X) + 2 * k * math.log(2) + 2 * I_alpha(a))
    assert closed_form("ising_line", X, a, gamma=1.0) == pytest.approx(k * math.log(4 * X) + I_alpha(a))
    assert closed_form("xxdm", X, a, s=0.0, h=0.0) == pytest.approx(closed_form("critXX", X, a, h=0.0))
    for g in (0.3, 0.5, 2.0):
        diff = closed_form("ising_line", X, a, gamma=g) - closed_form("ising_line", X, a, gamma=1.0)
        assert diff == pytest.approx(k * math.log(g), abs=1e-14)
    # the Ising chain is half of the XX chain at twice the length
    assert closed_form("ising_line", X, a, gamma=1.0) == pytest.approx(
        0.5 * closed_form("critXX", 2 * X, a, h=0.0), abs=1e-14)
    with pytest.raises(DomainError):
        closed_form("critXX", X, a, h=2.5)
    with pytest.raises(DomainError):
        closed_form("nope", X, a)


def test_xxdm_covariance_identity():
    s, h, a, X = 1.0, 0.3, 2.0, 400
    rep = classify(xydm_couplings(0, s, h))
    for zeta in (0.1, 0.25, -0.15):
        _, sp, hp = transform_xydm(zeta, 0.0, s, h)
        lhs = closed_form("xxdm", X, a, s=sp, h=hp) - closed_form("xxdm", X, a, s=s, h=h)
        dS, _ = predicted_shift(a, boost(zeta), rep)
        assert lhs == pytest.approx(dS, abs=1e-10)
        lv = log_jacobians(boost(zeta), rep.v).sum().real
        assert math.exp(lv) == pytest.approx(xxdm_jacobian_product(zeta, s, h), rel=1e-10)


def test_pair_exponents():
    assert pair_exponents(1) == {(1, 2): 1}
    e = pair_exponents(2)
    assert [e[k] for k in sorted(e)] == [1, -1, 1, 1, -1, 1]
    for P in (1, 2, 3, 5):
        assert sum(-v for v in pair_exponents(P).values()) == -P


def test_multiinterval_formulas():
    Zs = lambda a, b: (b - a) ** -0.3
    assert multiinterval_Z(Zs, [0, 7]) == pytest.approx(Zs(0, 7))
    x = [0, 10, 30, 45]
    ref = Zs(0, 10) * Zs(0, 30) ** -1 * Zs(0, 45) * Zs(10, 30) * Zs(10, 45) ** -1 * Zs(30, 45)
    assert multiinterval_Z(Zs, x) == pytest.approx(ref)
    Ss = lambda a, b: math.log(b - a)
    assert multiinterval_entropy(Ss, x, 2.0) == pytest.approx(
        Ss(0, 10) - Ss(0, 30) + Ss(0, 45) + Ss(10, 30) - Ss(10, 45) + Ss(30, 45))
    with pytest.raises(ShapeError):
        multiinterval_Z(Zs, [0, 1, 2])
    with pytest.raises(ShapeError):
        multiinterval_Z(Zs, [0, 3, 2, 5])


def test_log_coefficient_and_unknown_constant():
    assert log_coefficient(2.0, 2, 0) == pytest.approx(0.25)
    assert log_coefficient(2.0, 0, 4, P=2) == pytest.approx(0.5)
    r = asymptotic_entropy(2.0, 2, 4)
    assert r.constant is None and r.log_coefficient == pytest.approx(0.5)


def test_insertion_data_validation():
    with pytest.raises(DomainError):
        InsertionData([1.2], [], [0, 1])
    with pytest.raises(DomainError):
        InsertionData([1], [], [3, 1])


def test_transform_prediction_kinds():
    d = InsertionData(np.exp(1j * np.array([-1.0, 1.0])), np.exp(1j * np.array([2.0, -2.0])), [0.0, 50.0])
    a = 2.0
    assert transform_prediction("mobius", d, a) == pytest.approx(1.0)
    ju = np.array([1.3, 0.8])
    jv = np.array([0.9, 1.1])
    jx = np.array([1.2, 0.7])
    mob = transform_prediction("mobius", d, a, jac_u=ju, jac_v=jv)
    uni = transform_prediction("unified", d, a, jac_u=ju, jac_v=jv)
    # one interval: the conformal part is trivial and unified reduces to mobius
    assert uni == pytest.approx(mob)
    conf = transform_prediction("conformal", d, a, jac_x=jx)
    uni = transform_prediction("unified", d, a, jac_x=jx)
    assert uni == pytest.approx(conf)
    with pytest.raises(ShapeError):
        transform_prediction("mobius", d, a, jac_u=[1.0])


def test_transform_prediction_matches_entropy_shift():
    rep = classify(xydm_couplings(0, 0, 0.5))
    m = boost(0.4)
    a = 2.0
    d = InsertionData(rep.u, [], [0.0, 100.0])
    factor = transform_prediction("mobius", d, a, jac_u=map_point(m, rep.u)[1])
    dS = np.log(factor).real / (1 - a)
    assert dS == pytest.approx((a + 1) / (12 * a) * np.log(map_point(m, rep.u)[1]).sum().real, abs=1e-12)


@pytest.mark.parametrize("alpha", [0.5, 1 - 1e-3, 1 + 1e-3, 2.0, 3.0, 10.0])
def test_exponent_consistency(alpha):
    assert 2 * delta_alpha(alpha) / (1 - alpha) == pytest.approx((alpha + 1) / (12 * alpha), rel=1e-12)
