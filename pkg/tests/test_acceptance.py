"""Acceptance criteria 1-10 at their stated tolerances.

Each criterion records one PASS/FAIL line (printed in the terminal summary)
and asserts exactly what it measures.
"""

import json
import time

import numpy as np
import pytest

from hypogeo.calculus import geometric_report
from hypogeo.cli import main
from hypogeo.diagnostics import (
    energy_profile, growth_integral, hamiltonian_slices, level_set_flatness,
)
from hypogeo.fields import euclidean1d, euclidean2d, grushin2d
from hypogeo.grid import (
    Grid, GridFunction, assemble_sublaplacian, cutoff_chi, grid_jets, partial_derivative,
)
from hypogeo.polynomial import Polynomial
from hypogeo.solver import (
    allen_cahn, discrete_profile, extend_profile, solve_semilinear, zero_system,
)
from hypogeo.stability import (
    assemble_linearized, poincare_gap, pointwise_certificate, smallest_eigenvalue,
)
from hypogeo.symcalc import algebraic_lemma_residual, cleared_identity_residual, commutation_residual

SQ2 = np.sqrt(2.0)
FRAMES = ["euclidean2d", "grushin2d", "heisenberg3d", "martinet3d"]


# -- shared solutions -------------------------------------------------------

@pytest.fixture(scope="module")
def grushin_xonly():
    """Allen-Cahn on the Grushin plane with x-only data, solved in 2D."""
    g = Grid((-8, -8), (8, 8), (128, 128))
    bc = extend_profile(discrete_profile(-8, 8, 128), g)
    res = solve_semilinear(g, grushin2d(), allen_cahn(), [bc],
                           init=[lambda x, y: np.tanh(x / SQ2) + 0.1 * np.cos(y)])
    return g, res


# -- criterion 1 ------------------------------------------------------------

@pytest.fixture(scope="module")
def identity_suite():
    from hypogeo.fields import get_frame
    rng = np.random.default_rng(0)
    t0 = time.perf_counter()
    out = {}
    for name in FRAMES:
        F = get_frame(name)
        ident = comm = 0
        for _ in range(200):
            w = Polynomial.random(F.dim, 4, rng, 3)
            ident += cleared_identity_residual(w, F).is_zero()
            comm += all(r.is_zero() for r in commutation_residual(w, F))
        out[name] = (ident, comm)
    lemma = algebraic_lemma_residual().is_zero()
    return out, lemma, time.perf_counter() - t0


def test_c1_identities_and_lemma(identity_suite, record):
    out, lemma, elapsed = identity_suite
    ok = all(v[0] == 200 for v in out.values()) and lemma and elapsed <= 60
    record(1, ok, "identity " + ", ".join(f"{k} {v[0]}/200" for k, v in out.items())
           + f"; lemma {'zero' if lemma else 'nonzero'}; {elapsed:.1f}s")
    assert ok


@pytest.mark.parametrize("frame", ["euclidean2d", "grushin2d", "heisenberg3d"])
def test_c1_commutation(identity_suite, record, frame):
    comm = identity_suite[0][frame][1]
    record(1, comm == 200, f"commutation {frame} {comm}/200")
    assert comm == 200


@pytest.mark.xfail(strict=True, reason="[X, Z] = d/dz on the Martinet frame; the commutation "
                                        "lemma needs Z central, so the residual is nonzero")
def test_c1_commutation_martinet(identity_suite, record):
    comm = identity_suite[0]["martinet3d"][1]
    record(1, comm == 200, f"commutation martinet3d {comm}/200")
    assert comm == 200


# -- criterion 2 ------------------------------------------------------------

def _family(k):
    rng = np.random.default_rng(0)
    params = [(rng.uniform(-1, 1, 3), rng.uniform(-0.5, 0.5, 2)) for _ in range(20)]
    (a, b, e), (c, d) = params[k]
    return lambda x, y: np.sin(a * x + b * y + e) * np.exp(c * x + d * y)


def _max_gap(fn, n):
    g = Grid((-1, -1), (1, 1), (n, n))
    jet, valid = grid_jets(g.sample(fn), grushin2d(), with_bracket=False)
    rep = geometric_report(jet)
    live = valid & ~np.asarray(rep.masked)
    return float(np.max(np.abs(rep.identity_gap[live])))


def test_c2_numeric_identity_shadow(record):
    coarse = [_max_gap(_family(k), 128) for k in range(20)]
    fine = [_max_gap(_family(k), 256) for k in range(20)]
    ratios = [a / b for a, b in zip(coarse, fine)]
    ok = max(coarse) <= 1e-3 and min(ratios) >= 3.5
    record(2, ok, f"max |gap| {max(coarse):.2e} on 129^2, min shrink {min(ratios):.2f}x")
    assert ok


# -- criterion 3 ------------------------------------------------------------

def test_c3_operator_consistency(record):
    G = grushin2d()
    g = Grid((-1.3, -0.7), (2.1, 1.9), (34, 26))
    op = assemble_sublaplacian(g, G)
    X = g.mesh()[0].ravel()[op.interior]
    e_x2 = np.max(np.abs(op.apply(g.sample(lambda x, y: x ** 2)) - 2))
    e_y2 = np.max(np.abs(op.apply(g.sample(lambda x, y: y ** 2)) - 2 * X ** 2))
    errs = []
    for n in (32, 64, 128):
        gg = Grid((-1, -1), (1.5, 1), (n, n))
        o = assemble_sublaplacian(gg, G)
        ex = gg.sample(lambda x, y: -np.sin(x) * np.cos(y) * (1 + x ** 2)).values[o.interior]
        errs.append(np.max(np.abs(o.apply(gg.sample(lambda x, y: np.sin(x) * np.cos(y))) - ex)))
    orders = [np.log2(a / b) for a, b in zip(errs, errs[1:])]
    ok = e_x2 <= 1e-11 and e_y2 <= 1e-11 and min(orders) >= 1.9
    record(3, ok, f"x^2 err {e_x2:.1e}, y^2 err {e_y2:.1e}, orders "
           + ", ".join(f"{o:.2f}" for o in orders))
    assert ok


# -- criterion 4 ------------------------------------------------------------

def test_c4_solver_reproduction(grushin_xonly, record):
    n = 128
    prof = discrete_profile(-8, 8, n)
    h = 16 / n
    err = float(np.max(np.abs(prof.values - np.tanh(prof.grid.axes()[0] / SQ2))))
    g, res = grushin_xonly
    U = res.u[0].array()
    yvar = float(np.max(U.max(axis=1) - U.min(axis=1)))
    ok = err <= 5 * h ** 2 and res.converged and yvar <= 1e-6
    record(4, ok, f"1D err {err:.2e} = {err / h ** 2:.3f} h^2; 2D y-variation {yvar:.1e}")
    assert ok


# -- criterion 5 ------------------------------------------------------------

def test_c5_stability_certificates(grushin_xonly, record):
    g1 = Grid((0.0,), (np.pi,), (256,))
    lin = assemble_linearized(g1, euclidean1d(), zero_system(), GridFunction(g1, np.zeros(g1.size)))
    lam_lap = smallest_eigenvalue(lin).value
    g, res = grushin_xonly
    u = res.u[0]
    lam = smallest_eigenvalue(assemble_linearized(g, grushin2d(), allen_cahn(), u)).value
    cert = pointwise_certificate(u, allen_cahn(), partial_derivative(u, 0), grushin2d())
    ok = (abs(lam_lap - 1) <= 0.02 and lam >= -1e-6 and cert["sign_constancy"] == [1.0]
          and cert["pass"])
    record(5, ok, f"lambda(-d2/dx2) {lam_lap:.6f}; Grushin lambda_min {lam:.4f}; "
           f"phi = u_x sign-constancy {cert['sign_constancy'][0]:.0%}, "
           f"rel residual {cert['relative_residual']:.1e}")
    assert ok


# -- criterion 6 ------------------------------------------------------------

def test_c6_poincare_grushin(record):
    g = Grid((-18, -270), (18, 270), (288, 270))
    u = extend_profile(discrete_profile(-18, 18, 288), g)
    worst_term, min_gap = 0.0, np.inf
    for R in (4, 8, 16):
        rep = poincare_gap(u, allen_cahn(), grushin2d(), cutoff_chi(g, R, "grushin"))
        worst_term = max(worst_term, max(rep.lhs_terms.values()))
        min_gap = min(min_gap, rep.gap)
    ok = worst_term <= 1e-8 and min_gap >= 0
    record(6, ok, f"Grushin chi_R: max lhs term {worst_term:.1e}, min gap {min_gap:.3f}")
    assert ok


def test_c6_poincare_euclidean(record):
    g = Grid((-8, -8), (8, 8), (128, 128))
    u = extend_profile(discrete_profile(-8, 8, 128), g)
    x, y = g.mesh()
    r2 = (x ** 2 + y ** 2) / 36.0
    zeta = np.where(r2 < 1, np.exp(-1 / np.maximum(1 - r2, 1e-300)), 0.0)
    rep = poincare_gap(u, allen_cahn(), euclidean2d(), GridFunction(g, zeta.ravel()))
    ok = rep.gap >= -1e-5 * rep.rhs
    record(6, ok, f"Euclidean: gap/rhs {rep.gap / rep.rhs:.4f}, "
           f"curvature term {rep.lhs_terms['curvature']:.1e}")
    assert ok


# -- criterion 7 ------------------------------------------------------------

def _bump_drift(L, h=1 / 16):
    g = Grid((-L, -2 * L), (L, 2 * L), (int(round(2 * L / h)), int(round(4 * L / h))))
    data = [lambda x, y: np.tanh((x - 1 / np.cosh(y)) / SQ2)]
    res = solve_semilinear(g, grushin2d(), allen_cahn(), data, init=data)
    assert res.converged
    return hamiltonian_slices(res.u[0], allen_cahn(), grushin2d(),
                              slices=np.linspace(-1.5, 1.5, 13))["drift"]


def test_c7_hamiltonian(grushin_xonly, record):
    g = Grid((-8, -8), (8, 8), (128, 128))
    xonly = extend_profile(discrete_profile(-8, 8, 128), g)
    d0 = hamiltonian_slices(xonly, allen_cahn(), grushin2d())["drift"]
    d1, d2 = _bump_drift(1.5), _bump_drift(3.0)
    ok = d0 <= 1e-10 and d1 >= 2 * d2
    record(7, ok, f"x-only drift {d0:.1e}; 2D drift {d1:.2e} -> {d2:.2e} "
           f"({d1 / d2:.1f}x) under box doubling")
    assert ok


# -- criterion 8 ------------------------------------------------------------

def test_c8_scaling(record):
    g = Grid((-12, -150), (12, 150), (192, 300))
    u = extend_profile(discrete_profile(-12, 12, 192), g)
    radii = [2, 3, 4, 6, 8, 10]
    gr = growth_integral(u, grushin2d(), radii)
    en = energy_profile(u, allen_cahn(), grushin2d(), radii, shift=[1.0])
    gy = growth_integral(g.sample(lambda x, y: y), grushin2d(), radii)
    ok = (gr.passed and gr.slope <= 2.2 and en.slope <= 2.2
          and (not gy.passed) and gy.slope >= 6.5 and not gr.truncated)
    record(8, ok, f"growth slope {gr.slope:.2f}, energy slope {en.slope:.2f}, "
           f"u=y slope {gy.slope:.2f} ({'FAIL' if not gy.passed else 'PASS'} as flagged)")
    assert ok


# -- criterion 9 ------------------------------------------------------------

def test_c9_flatness(grushin_xonly, record):
    g, res = grushin_xonly
    fits = level_set_flatness(res.u[0], [-0.5, 0.0, 0.5])
    comps = [c for f in fits for c in f.components]
    h = max(g.h)
    flat = bool(comps) and all(c.model == "x=const" and c.verticality <= 2 * h for c in comps)
    gp = Grid((-4, -4), (4, 4), (128, 128))
    hp = max(gp.h)
    par = [c for f in level_set_flatness(gp.sample(lambda x, y: y - x ** 2), [-2.0, 0.0, 1.0])
           for c in f.components]
    para_ok = bool(par) and all(c.model == "parabola" and abs(c.a - 1) <= 5 * hp for c in par)
    ok = flat and para_ok
    record(9, ok, f"x-only: {len(comps)} components x=const, max verticality "
           f"{max(c.verticality for c in comps):.1e}; y-x^2: a in "
           f"[{min(c.a for c in par):.4f}, {max(c.a for c in par):.4f}]")
    assert ok


# -- criterion 10 -----------------------------------------------------------

def test_c10_determinism(tmp_path, record):
    cfg = {"frame": "grushin2d", "system": "allen-cahn", "grid": "129,129",
           "box": [-8, 8, -8, 8], "seed": 11}
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg))
    blobs, codes = [], []
    for name in ("first", "second"):
        codes.append(main(["run", "--config", str(p), "--out", str(tmp_path / name)]))
        blobs.append((tmp_path / name / "report.json").read_bytes())
    ok = blobs[0] == blobs[1] and codes[0] == codes[1]
    record(10, ok, f"two full runs byte-identical: {blobs[0] == blobs[1]} "
           f"({len(blobs[0])} bytes, exit {codes[0]})")
    assert ok
