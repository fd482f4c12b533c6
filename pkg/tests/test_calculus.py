import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hypogeo.calculus import (
    JetSample, curvature_numerators, exact_jet, geometric_report, hessian_tau_eta,
    identity_lhs, monge_ampere_check, with_bracket_data,
)
from hypogeo.fields import euclidean2d, get_frame, grushin2d
from hypogeo.polynomial import Polynomial


def test_grushin_y_example():
    jet = JetSample(point=(1, 0), u=0, Xu=0, Yu=1, Zu=1, XXu=0, XYu=1, YXu=0, YYu=0)
    rep = geometric_report(jet)
    assert rep.A == 0 and rep.B == 0 and rep.identity_gap == 0
    # the Hessian term cancels Zu exactly
    assert hessian_tau_eta(jet) == pytest.approx(1.0)


def test_euclidean_circle_example():
    jet = JetSample(point=(1, 0), Xu=2, Yu=0, XXu=2, YYu=2)
    rep = geometric_report(jet)
    assert rep.A == pytest.approx(1.0)
    assert rep.B == pytest.approx(0.0)
    assert rep.identity_gap == pytest.approx(0.0)


def test_degenerate_gradient_is_masked():
    rep = geometric_report(JetSample(XXu=3, YYu=-1))
    assert rep.masked and math.isnan(rep.A) and math.isnan(rep.B)
    assert rep.identity_gap == 0
    with pytest.raises(ValueError):
        geometric_report(JetSample(Xu=1), grad_floor=0)


def test_monge_ampere_examples():
    assert monge_ampere_check(JetSample(Xu=0.7, XXu=-0.3)) == (0.0, 0.0)
    x, y = Polynomial.variables(2)
    det, bal = monge_ampere_check(exact_jet(x ** 2 + y ** 2, euclidean2d(), (1, 1)))
    assert det == 4 and bal == 0
    assert monge_ampere_check(JetSample()) == (0.0, 0.0)


@pytest.mark.parametrize("frame", ["euclidean2d", "grushin2d", "heisenberg3d", "martinet3d"])
def test_identity_gap_vanishes_on_exact_jets(frame):
    F = get_frame(frame)
    rng = np.random.default_rng(4)
    w = Polynomial.random(F.dim, 4, rng, 3)
    pts = rng.uniform(-1.5, 1.5, (F.dim, 400))
    rep = geometric_report(exact_jet(w, F, list(pts)))
    ok = rep.grad_norm > 0.1
    assert ok.sum() > 100
    scale = np.maximum(1.0, np.abs(rep.C[ok]))
    assert np.max(np.abs(rep.identity_gap[ok]) / scale) <= 1e-9


def test_frame_directions_orthonormal():
    F = grushin2d()
    rng = np.random.default_rng(5)
    w = Polynomial.random(2, 3, rng, 3)
    rep = geometric_report(exact_jet(w, F, list(rng.uniform(-1, 1, (2, 200)))))
    ok = ~rep.masked
    e1, e2 = rep.eta[0][ok], rep.eta[1][ok]
    t1, t2 = rep.tau[0][ok], rep.tau[1][ok]
    np.testing.assert_allclose(e1 ** 2 + e2 ** 2, 1, atol=1e-12)
    np.testing.assert_allclose(t1 ** 2 + t2 ** 2, 1, atol=1e-12)
    np.testing.assert_allclose(e1 * t1 + e2 * t2, 0, atol=1e-12)


def test_euclidean_radial_curvature():
    # level sets of a radial function are circles: curvature 1/r
    x, y = Polynomial.variables(2)
    w = (x ** 2 + y ** 2) ** 2
    for r, th in [(0.5, 0.3), (2.0, 1.1), (1.3, -2.0)]:
        p = (r * math.cos(th), r * math.sin(th))
        rep = geometric_report(exact_jet(w, euclidean2d(), p))
        assert rep.A == pytest.approx(1 / r, rel=1e-12)
        assert rep.B == pytest.approx(0.0, abs=1e-12)


def test_euclidean_curvature_matches_classical_formula():
    rng = np.random.default_rng(6)
    w = Polynomial.random(2, 3, rng, 3)
    for _ in range(20):
        p = rng.uniform(-1, 1, 2)
        j = exact_jet(w, euclidean2d(), p)
        g = math.hypot(j.Xu, j.Yu)
        if g < 0.1:
            continue
        # kappa = (u_xx u_y^2 - 2 u_xy u_x u_y + u_yy u_x^2) / |grad u|^3
        kappa = (j.XXu * j.Yu ** 2 - 2 * j.XYu * j.Xu * j.Yu + j.YYu * j.Xu ** 2) / g ** 3
        assert geometric_report(j).A == pytest.approx(kappa, rel=1e-12, abs=1e-12)


def test_bracket_quantity():
    x, y = Polynomial.variables(2)
    rep = geometric_report(exact_jet(y - x ** 2, grushin2d(), (0.5, 0.2)))
    assert rep.bracket_quantity == 0
    jet = with_bracket_data(JetSample(Xu=1.0, Yu=2.0), ZXu=3.0, ZYu=5.0)
    assert geometric_report(jet).bracket_quantity == pytest.approx(5 - 6)
    assert math.isnan(geometric_report(JetSample(Xu=1.0)).bracket_quantity)


def test_b_uses_jet_zu():
    base = dict(Xu=0.6, Yu=0.8, XXu=1.0, XYu=0.5, YXu=-0.2, YYu=0.3)
    exact = JetSample(Zu=0.7, **base)
    off = JetSample(Zu=0.6, **base)
    assert exact.compatibility() == pytest.approx(0.0)
    assert off.compatibility() == pytest.approx(0.1)
    # B_num moves by -(delta Zu) |grad u|^2 with |grad u| = 1
    diff = curvature_numerators(off)[1] - curvature_numerators(exact)[1]
    assert diff == pytest.approx(0.1)
    # on exact jets the reduced form holds
    Xu, Yu = 0.6, 0.8
    reduced = (1.0 - 0.3) * Xu * Yu - 0.5 * Xu ** 2 + (-0.2) * Yu ** 2
    assert curvature_numerators(exact)[1] == pytest.approx(reduced)


fin = st.floats(-10, 10, allow_nan=False)


@given(fin, fin, fin, fin, fin, fin)
def test_identity_gap_algebraic(Xu, Yu, XX, XY, YX, YY):
    jet = JetSample(Xu=Xu, Yu=Yu, XXu=XX, XYu=XY, YXu=YX, YYu=YY, Zu=XY - YX)
    rep = geometric_report(jet, grad_floor=1e-3)
    C, masked = identity_lhs(jet, grad_floor=1e-3)
    assert bool(masked) == bool(rep.masked)
    scale = 1 + XX ** 2 + XY ** 2 + YX ** 2 + YY ** 2
    assert abs(rep.identity_gap) <= 1e-9 * scale
    assert rep.C >= -1e-9 * scale


def test_jet_at_picks_entry():
    jet = JetSample(point=(np.array([0.0, 1.0]),), u=np.array([2.0, 3.0]),
                    Xu=np.array([1.0, 4.0]))
    one = jet.at(1)
    assert one.point == (1.0,) and one.u == 3.0 and one.Xu == 4.0 and one.ZXu is None
