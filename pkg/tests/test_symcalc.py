from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hypogeo.calculus import exact_jet, geometric_report
from hypogeo.fields import apply_field, get_frame, grushin2d, heisenberg3d, martinet3d
from hypogeo.polynomial import Polynomial
from hypogeo.symcalc import (
    algebraic_lemma_residual, algebraic_lemma_sides, cleared_identity_residual,
    commutation_defect, commutation_residual, identity_parts, spot_check_lemma,
    sublaplacian, verify_suite,
)

FRAMES = ["euclidean2d", "grushin2d", "heisenberg3d", "martinet3d"]


def test_apply_field_examples():
    G, H = grushin2d(), heisenberg3d()
    x, y = Polynomial.variables(2)
    assert apply_field(G.Y, y) == x
    assert apply_field(G.X, x ** 2) == 2 * x
    z = Polynomial.variable(3, 2)
    assert apply_field(H.X, z) == Fraction(-1, 2) * Polynomial.variable(3, 1)


def test_cleared_identity_examples():
    G = grushin2d()
    x, y = Polynomial.variables(2)
    assert cleared_identity_residual(x, G).is_zero()
    assert cleared_identity_residual(y, G).is_zero()


def test_heisenberg_cubic_against_numeric_oracle():
    rng = np.random.default_rng(3)
    H = heisenberg3d()
    w = Polynomial.random(3, 3, rng, 3)
    assert cleared_identity_residual(w, H).is_zero()
    # independent check on the uncleared identity C = |grad|^2 (A^2 + B^2)
    used = 0
    while used < 20:
        p = rng.uniform(-2, 2, 3)
        rep = geometric_report(exact_jet(w, H, p))
        if rep.grad_norm <= 0.1:
            continue
        rhs = rep.grad_norm ** 2 * (rep.A ** 2 + rep.B ** 2)
        assert rep.C == pytest.approx(rhs, rel=1e-9, abs=1e-9)
        used += 1


def test_identity_parts_relations():
    G = grushin2d()
    w = Polynomial.random(2, 3, np.random.default_rng(1), 3)
    parts = identity_parts(w, G)
    assert parts["G"] * parts["P"] == parts["A_num"] ** 2 + parts["B_num"] ** 2


def test_commutation_examples():
    x, y = Polynomial.variables(2)
    G = grushin2d()
    assert all(r.is_zero() for r in commutation_residual(x ** 2, G))
    assert all(r.is_zero() for r in commutation_residual(x * y, G))
    X3, _, Z3 = Polynomial.variables(3)
    assert all(r.is_zero() for r in commutation_residual(X3 * Z3, heisenberg3d()))


def test_martinet_commutation_equals_bracket_defect():
    M = martinet3d()
    rng = np.random.default_rng(2)
    for _ in range(5):
        u = Polynomial.random(3, 3, rng, 3)
        assert commutation_residual(u, M) == commutation_defect(u, M)
    # z is a witness: [X, Z] = d/dz, so the second residual is 1
    z = Polynomial.variable(3, 2)
    assert commutation_residual(z, M)[1] == Polynomial.constant(3, 1)


def test_algebraic_lemma():
    assert algebraic_lemma_residual().is_zero()
    lhs, rhs = spot_check_lemma((1, 2, 3, 4, 5, 6))
    assert lhs == rhs == 7930
    a = Fraction(7, 3)
    lhs, rhs = spot_check_lemma((a, 0, 0, a, 1, 1))
    # diagonal case: each left bracket contributes 2 a^2
    assert lhs == rhs == 4 * a * a
    assert spot_check_lemma((1.5, -2.0, 0.25, 3.0, 0.7, -1.1))[0] == pytest.approx(
        spot_check_lemma((1.5, -2.0, 0.25, 3.0, 0.7, -1.1))[1], rel=1e-14)


def test_lemma_sides_shape():
    lhs, rhs = algebraic_lemma_sides()
    assert lhs.dim == 6 and lhs.degree == 6 and lhs == rhs


@pytest.mark.parametrize("frame", FRAMES)
def test_random_degree5_identity(frame):
    F = get_frame(frame)
    rng = np.random.default_rng(11)
    for _ in range(3):
        w = Polynomial.random(F.dim, 5, rng, 3)
        assert cleared_identity_residual(w, F).is_zero()


coefs = st.lists(st.integers(-3, 3), min_size=10, max_size=10)


@given(coefs)
def test_identity_property_grushin_cubics(cs):
    from hypogeo.polynomial import monomials_up_to
    w = Polynomial(2, dict(zip(monomials_up_to(2, 3), cs)))
    assert cleared_identity_residual(w, grushin2d()).is_zero()


@given(coefs, coefs)
def test_leibniz_for_frames(c1, c2):
    from hypogeo.polynomial import monomials_up_to
    mons = monomials_up_to(2, 3)
    p, q = Polynomial(2, dict(zip(mons, c1))), Polynomial(2, dict(zip(mons, c2)))
    for V in (grushin2d().X, grushin2d().Y):
        assert apply_field(V, p * q) == apply_field(V, p) * q + p * apply_field(V, q)
        assert apply_field(V, p + q) == apply_field(V, p) + apply_field(V, q)


def test_sublaplacian_grushin():
    x, y = Polynomial.variables(2)
    assert sublaplacian(y ** 2, grushin2d()) == 2 * x ** 2


def test_verify_suite_report():
    rep = verify_suite(["grushin2d", "martinet3d"], degree=3, samples=4, seed=7)
    assert rep["frames"]["grushin2d"]["summary"] == {"identity_passed": 4, "commutation_passed": 4}
    assert rep["frames"]["martinet3d"]["summary"]["identity_passed"] == 4
    assert rep["algebraic_lemma"]["pass"] is True
    assert rep["pass"] is False  # Martinet commutation fails
    again = verify_suite(["grushin2d", "martinet3d"], degree=3, samples=4, seed=7)
    rep.pop("elapsed_s"), again.pop("elapsed_s")
    assert rep == again
    only_id = verify_suite(["martinet3d"], degree=3, samples=3, seed=1, include_commutation=False)
    assert only_id["pass"] is True
