"""Exact verification of the sub-Riemannian identities on polynomial input.

Every check returns a polynomial (or pair of polynomials) that must be the
zero polynomial. No floating point is involved anywhere in this module.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from hypogeo.fields import Frame, apply_field, get_frame
from hypogeo.polynomial import Polynomial

__all__ = [
    "apply_field",
    "HorizontalJet",
    "horizontal_jet",
    "cleared_identity_residual",
    "identity_parts",
    "commutation_residual",
    "commutation_defect",
    "algebraic_lemma_residual",
    "algebraic_lemma_sides",
    "sublaplacian",
    "verify_suite",
]


@dataclass(frozen=True)
class HorizontalJet:
    """Exact horizontal derivatives of one polynomial; ``XY`` means ``X(Y w)``."""

    w: Polynomial
    X: Polynomial
    Y: Polynomial
    Z: Polynomial
    XX: Polynomial
    XY: Polynomial
    YX: Polynomial
    YY: Polynomial
    ZX: Polynomial
    ZY: Polynomial


def horizontal_jet(w: Polynomial, frame: Frame) -> HorizontalJet:
    X, Y, Z = frame.X, frame.Y, frame.Z
    Xw, Yw = apply_field(X, w), apply_field(Y, w)
    return HorizontalJet(
        w=w, X=Xw, Y=Yw, Z=apply_field(Z, w),
        XX=apply_field(X, Xw), XY=apply_field(X, Yw),
        YX=apply_field(Y, Xw), YY=apply_field(Y, Yw),
        ZX=apply_field(Z, Xw), ZY=apply_field(Z, Yw),
    )


def sublaplacian(u: Polynomial, frame: Frame) -> Polynomial:
    """``X(X u) + Y(Y u)``."""
    return apply_field(frame.X, apply_field(frame.X, u)) + \
        apply_field(frame.Y, apply_field(frame.Y, u))


def identity_parts(w: Polynomial, frame: Frame) -> dict[str, Polynomial]:
    """Polynomial pieces of the cleared curvature identity.

    ``G = |grad w|^2``; ``P = G * C`` where ``C`` is the left side of the
    identity; ``A_num = |grad w|^3 A`` and ``B_num = |grad w|^3 B``.
    """
    j = horizontal_jet(w, frame)
    G = j.X * j.X + j.Y * j.Y
    S = j.XX * j.XX + j.YX * j.YX + j.XY * j.XY + j.YY * j.YY
    tx = j.X * j.XX + j.Y * j.XY  # |grad w| * X|grad w|
    ty = j.X * j.YX + j.Y * j.YY  # |grad w| * Y|grad w|
    P = G * S - tx * tx - ty * ty
    XY_ = j.X * j.Y
    X2, Y2 = j.X * j.X, j.Y * j.Y
    A_num = j.XX * Y2 - (j.XY + j.YX) * XY_ + j.YY * X2
    B_num = (j.XX - j.YY) * XY_ - j.XY * X2 + j.YX * Y2
    return {"G": G, "P": P, "A_num": A_num, "B_num": B_num}


def cleared_identity_residual(w: Polynomial, frame: Frame) -> Polynomial:
    """``G*P - A_num^2 - B_num^2``; zero iff ``C = |grad w|^2 (A^2 + B^2)``.

    Clearing the ``|grad w|`` denominators: ``G^2 C = A_num^2 + B_num^2``
    and ``P = G C``, so one factor of ``G`` multiplies ``P``.
    """
    parts = identity_parts(w, frame)
    A, B = parts["A_num"], parts["B_num"]
    return parts["G"] * parts["P"] - A * A - B * B


def commutation_residual(u: Polynomial, frame: Frame) -> tuple[Polynomial, Polynomial]:
    """``(L Xu + 2 Z Yu - X L u, L Yu - 2 Z Xu - Y L u)`` with ``L`` the sub-Laplacian.

    Both vanish when ``Z`` commutes with ``X`` and ``Y``; in general they equal
    :func:`commutation_defect`.
    """
    X, Y, Z = frame.X, frame.Y, frame.Z
    Xu, Yu = apply_field(X, u), apply_field(Y, u)
    Lu = sublaplacian(u, frame)
    first = sublaplacian(Xu, frame) + 2 * apply_field(Z, Yu) - apply_field(X, Lu)
    second = sublaplacian(Yu, frame) - 2 * apply_field(Z, Xu) - apply_field(Y, Lu)
    return first, second


def commutation_defect(u: Polynomial, frame: Frame) -> tuple[Polynomial, Polynomial]:
    """``(-[Y, Z] u, [X, Z] u)``: what :func:`commutation_residual` equals for any frame."""
    from hypogeo.fields import lie_bracket

    YZ = lie_bracket(frame.Y, frame.Z)
    XZ = lie_bracket(frame.X, frame.Z)
    return -apply_field(YZ, u), apply_field(XZ, u)


def algebraic_lemma_sides(dim_vars: tuple | None = None):
    """Both sides of the six-variable sum-of-squares lemma as polynomials
    in ``(a, b, c, d, eps, delta)``."""
    a, b, c, d, e, g = dim_vars or Polynomial.variables(6)
    s = e * e + g * g
    lhs = (a * e - b * g) ** 2 * s + (c * e - d * g) ** 2 * s
    rhs = (a * e * e - (b + c) * e * g + d * g * g) ** 2 + \
        (c * e * e + (a - d) * e * g - b * g * g) ** 2
    return lhs, rhs


def algebraic_lemma_residual() -> Polynomial:
    lhs, rhs = algebraic_lemma_sides()
    return lhs - rhs


def _frame_name(frame: Frame) -> str:
    return frame.name


def verify_suite(frames, degree: int = 4, samples: int = 200, seed: int = 0,
                 coef_range: int = 3, include_commutation: bool = True) -> dict:
    """Run the exact identity suite and return a JSON-ready report.

    One random polynomial per sample and frame (a single seeded generator
    drives all of them); per-sample entries carry the residual term counts.
    """
    rng = np.random.default_rng(seed)
    frames = [get_frame(f) for f in frames]
    report = {"degree": degree, "samples": samples, "seed": seed,
              "coef_range": coef_range, "frames": {}}
    t0 = time.perf_counter()
    for frame in frames:
        entries = []
        n_id = n_comm = 0
        for k in range(samples):
            w = Polynomial.random(frame.dim, degree, rng, coef_range)
            res = cleared_identity_residual(w, frame)
            entry = {"sample": k, "terms_w": len(w),
                     "identity_residual_terms": len(res),
                     "identity_pass": res.is_zero()}
            n_id += res.is_zero()
            if include_commutation:
                r1, r2 = commutation_residual(w, frame)
                ok = r1.is_zero() and r2.is_zero()
                entry["commutation_residual_terms"] = [len(r1), len(r2)]
                entry["commutation_pass"] = ok
                n_comm += ok
            entries.append(entry)
        summary = {"identity_passed": n_id}
        if include_commutation:
            summary["commutation_passed"] = n_comm
        report["frames"][_frame_name(frame)] = {"summary": summary, "samples": entries}
    lemma = algebraic_lemma_residual()
    report["algebraic_lemma"] = {"residual_terms": len(lemma), "pass": lemma.is_zero()}
    report["elapsed_s"] = time.perf_counter() - t0
    all_id = all(v["summary"]["identity_passed"] == samples for v in report["frames"].values())
    all_comm = (not include_commutation) or all(
        v["summary"]["commutation_passed"] == samples for v in report["frames"].values())
    report["pass"] = bool(all_id and all_comm and lemma.is_zero())
    return report


def spot_check_lemma(values) -> tuple[Fraction, Fraction]:
    """Evaluate both lemma sides at a numeric 6-tuple (exact for rationals)."""
    lhs, rhs = algebraic_lemma_sides()
    return lhs.evaluate(values), rhs.evaluate(values)
