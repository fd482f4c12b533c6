"""Pointwise intrinsic calculus from second-order horizontal jets.

All functions accept scalars or numpy arrays in the jet fields and
broadcast, so a whole grid of jets is handled in one call.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from hypogeo.fields import Frame
from hypogeo.polynomial import Polynomial

DEFAULT_GRAD_FLOOR = 1e-8


@dataclass(frozen=True)
class JetSample:
    """Horizontal jet of a scalar ``u`` at one point (or an array of points).

    ``XYu`` is ``X(Y u)``. ``ZXu`` and ``ZYu`` are optional third-order data
    needed only for the bracket quantity.
    """

    point: Sequence = ()
    u: float = 0.0
    Xu: float = 0.0
    Yu: float = 0.0
    Zu: float = 0.0
    XXu: float = 0.0
    XYu: float = 0.0
    YXu: float = 0.0
    YYu: float = 0.0
    ZXu: float | None = None
    ZYu: float | None = None

    def compatibility(self):
        """``XYu - YXu - Zu``; zero for exact jets."""
        return np.asarray(self.XYu) - np.asarray(self.YXu) - np.asarray(self.Zu)

    def at(self, idx) -> "JetSample":
        """Pick one entry out of an array-valued jet."""
        def pick(v):
            if v is None:
                return None
            v = np.asarray(v)
            return v.item() if v.ndim == 0 else v[idx].item()
        pt = tuple(np.asarray(p)[idx].item() for p in self.point) if len(self.point) else ()
        return JetSample(point=pt, u=pick(self.u), Xu=pick(self.Xu), Yu=pick(self.Yu),
                         Zu=pick(self.Zu), XXu=pick(self.XXu), XYu=pick(self.XYu),
                         YXu=pick(self.YXu), YYu=pick(self.YYu), ZXu=pick(self.ZXu),
                         ZYu=pick(self.ZYu))


@dataclass(frozen=True)
class GeometricReport:
    grad_norm: np.ndarray | float
    eta: tuple
    tau: tuple
    A: np.ndarray | float
    B: np.ndarray | float
    identity_gap: np.ndarray | float
    det_hess: np.ndarray | float
    ma_residual: np.ndarray | float
    bracket_quantity: np.ndarray | float
    masked: np.ndarray | bool = field(default=False)
    C: np.ndarray | float = 0.0


def exact_jet(w: Polynomial, frame: Frame, point: Sequence) -> JetSample:
    """Jet of a polynomial from exact symbolic derivatives (oracle path)."""
    from hypogeo.symcalc import horizontal_jet

    j = horizontal_jet(w, frame)

    def ev(p):
        v = p.evaluate(point)
        return float(v) if not isinstance(v, np.ndarray) else v

    return JetSample(point=tuple(point), u=ev(j.w), Xu=ev(j.X), Yu=ev(j.Y), Zu=ev(j.Z),
                     XXu=ev(j.XX), XYu=ev(j.XY), YXu=ev(j.YX), YYu=ev(j.YY),
                     ZXu=ev(j.ZX), ZYu=ev(j.ZY))


def curvature_numerators(jet: JetSample):
    """``(A_num, B_num) = |grad u|^3 (A, B)`` as polynomials in the jet.

    ``B_num`` is built from its definition ``|grad u|^2 (-Zu + <H tau, eta>)``
    using the jet's own ``Zu``. For exact jets (``Zu = XYu - YXu``) it reduces
    to ``(XX - YY) Xu Yu - XY Xu^2 + YX Yu^2``; for FD jets the difference
    carries the compatibility error, which the identity gap then exposes.
    """
    Xu, Yu = np.asarray(jet.Xu, float), np.asarray(jet.Yu, float)
    XX, XY = np.asarray(jet.XXu, float), np.asarray(jet.XYu, float)
    YX, YY = np.asarray(jet.YXu, float), np.asarray(jet.YYu, float)
    Zu = np.asarray(jet.Zu, float)
    A_num = XX * Yu ** 2 - (XY + YX) * Xu * Yu + YY * Xu ** 2
    B_num = (-Zu * (Xu ** 2 + Yu ** 2) + (XX - YY) * Xu * Yu
             - YX * Xu ** 2 + XY * Yu ** 2)
    return A_num, B_num


def identity_lhs(jet: JetSample, grad_floor: float = DEFAULT_GRAD_FLOOR):
    """``|grad Xu|^2 + |grad Yu|^2 - |X|grad u||^2 - |Y|grad u||^2``.

    Zero where ``|grad u| <= grad_floor`` (the a.e. branch).
    """
    Xu, Yu = np.asarray(jet.Xu, float), np.asarray(jet.Yu, float)
    XX, XY = np.asarray(jet.XXu, float), np.asarray(jet.XYu, float)
    YX, YY = np.asarray(jet.YXu, float), np.asarray(jet.YYu, float)
    G = Xu ** 2 + Yu ** 2
    masked = np.sqrt(G) <= grad_floor
    Gs = np.where(masked, 1.0, G)
    tx = Xu * XX + Yu * XY
    ty = Xu * YX + Yu * YY
    C = XX ** 2 + YX ** 2 + XY ** 2 + YY ** 2 - (tx ** 2 + ty ** 2) / Gs
    return np.where(masked, 0.0, C), masked


def geometric_report(jet: JetSample, grad_floor: float = DEFAULT_GRAD_FLOOR) -> GeometricReport:
    """Curvature ``A``, bracket-coupled ``B``, the identity gap and friends.

    Points with ``|grad u| <= grad_floor`` are masked: ``A``, ``B`` and the
    frame directions are NaN there and the identity gap is reported as 0.
    """
    if not grad_floor > 0:
        raise ValueError("grad_floor must be positive")
    Xu, Yu = np.asarray(jet.Xu, float), np.asarray(jet.Yu, float)
    g = np.sqrt(Xu ** 2 + Yu ** 2)
    masked = g <= grad_floor
    gs = np.where(masked, 1.0, g)
    nan = np.full(np.shape(g), np.nan)

    eta = (np.where(masked, nan, Xu / gs), np.where(masked, nan, Yu / gs))
    tau = (np.where(masked, nan, Yu / gs), np.where(masked, nan, -Xu / gs))
    A_num, B_num = curvature_numerators(jet)
    A = np.where(masked, nan, A_num / gs ** 3)
    B = np.where(masked, nan, B_num / gs ** 3)
    C, _ = identity_lhs(jet, grad_floor)
    gap = np.where(masked, 0.0, C - np.where(masked, 0.0, g ** 2 * (A ** 2 + B ** 2)))
    det, bal = monge_ampere_check(jet)
    if jet.ZXu is None or jet.ZYu is None:
        bq = nan if np.shape(g) else float("nan")
    else:
        bq = np.asarray(jet.ZYu, float) * Xu - np.asarray(jet.ZXu, float) * Yu

    def out(v):
        v = np.asarray(v)
        return v.item() if v.ndim == 0 else v

    return GeometricReport(
        grad_norm=out(g), eta=tuple(out(e) for e in eta), tau=tuple(out(t) for t in tau),
        A=out(A), B=out(B), identity_gap=out(gap), det_hess=out(det),
        ma_residual=out(bal), bracket_quantity=out(bq), masked=out(masked), C=out(C))


def monge_ampere_check(jet: JetSample):
    """``(det H_ess u, |Xu||grad Yu| - |Yu||grad Xu|)``; both vanish when A = B = 0."""
    Xu, Yu = np.asarray(jet.Xu, float), np.asarray(jet.Yu, float)
    XX, XY = np.asarray(jet.XXu, float), np.asarray(jet.XYu, float)
    YX, YY = np.asarray(jet.YXu, float), np.asarray(jet.YYu, float)
    det = XX * YY - XY * YX
    bal = np.abs(Xu) * np.hypot(XY, YY) - np.abs(Yu) * np.hypot(XX, YX)
    if det.ndim == 0:
        return float(det), float(bal)
    return det, bal


def hessian_tau_eta(jet: JetSample, grad_floor: float = DEFAULT_GRAD_FLOOR):
    """``<H_ess u tau, eta>`` with ``H_ess = [[XX, YX], [XY, YY]]``."""
    rep = geometric_report(jet, grad_floor)
    H = ((np.asarray(jet.XXu), np.asarray(jet.YXu)),
         (np.asarray(jet.XYu), np.asarray(jet.YYu)))
    t1, t2 = rep.tau
    e1, e2 = rep.eta
    Ht1 = H[0][0] * t1 + H[0][1] * t2
    Ht2 = H[1][0] * t1 + H[1][1] * t2
    return Ht1 * e1 + Ht2 * e2


def with_bracket_data(jet: JetSample, ZXu, ZYu) -> JetSample:
    return replace(jet, ZXu=ZXu, ZYu=ZYu)
