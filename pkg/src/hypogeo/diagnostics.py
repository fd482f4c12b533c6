"""Quantitative diagnostics for computed solutions: Hamiltonian slices,
energy and growth scaling, level-set flatness, monotonicity and the slope
condition.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import ndimage

from hypogeo import _kernels
from hypogeo.calculus import DEFAULT_GRAD_FLOOR, geometric_report
from hypogeo.fields import Frame, FrameKind
from hypogeo.grid import Grid, GridFunction, NormKind, grid_jets, homogeneous_norm
from hypogeo.solver import NonlinearSystem

GROWTH_BOUND = 4.0
SLOPE_SLACK = 0.2
MIN_COMPONENT_POINTS = 5
HYSTERESIS = 0.10


def _components(u) -> list[GridFunction]:
    return [u] if isinstance(u, GridFunction) else list(u)


def _stack(u) -> tuple[Grid, np.ndarray]:
    comps = _components(u)
    return comps[0].grid, np.stack([c.values for c in comps])


def _norm_kind(frame: Frame) -> NormKind:
    return {FrameKind.GRUSHIN2D: NormKind.GRUSHIN,
            FrameKind.HEISENBERG3D: NormKind.HEISENBERG}.get(frame.kind, NormKind.EUCLIDEAN)


# --------------------------------------------------------------------------
# Hamiltonian identity


def _split_profile(frame: Frame):
    """``f`` with ``X = d/dx`` and ``Y = f(x) d/dy``, or raise."""
    if frame.dim != 2:
        raise ValueError(f"frame {frame.name!r} is not of split form (needs 2D)")
    X, Y = frame.X, frame.Y
    one = X.coeffs[0]
    if not (one.is_constant() and one.constant_value() == 1 and X.coeffs[1].is_zero()):
        raise ValueError(f"frame {frame.name!r}: X must be d/dx for the split form")
    f = Y.coeffs[1]
    if not Y.coeffs[0].is_zero() or f.depends_on(1):
        raise ValueError(f"frame {frame.name!r}: Y must be f(x) d/dy for the split form")
    return f


def hamiltonian_slices(u, system: NonlinearSystem, frame: Frame,
                       slices: Sequence[float] | None = None) -> dict:
    """Discrete Hamiltonian ``int sum_i 1/2 (|u_x|^2 - f^2 |u_y|^2) + H~(u) dx`` across ``y``.

    Each slice sits on a half-row ``y_{j+1/2}`` between node rows ``j`` and
    ``j+1``: ``u_y`` is the one-sided difference across the half-row, the
    ``u_x`` energy is the average of the two rows' edge energies and ``H~``
    is row-averaged. With this placement the slice value is conserved by the
    discrete equation up to an O(k^2) time-stepping error, plus the boundary
    flux ``[u_x u_y]`` at the x-walls.

    ``slices`` are y-values; each maps to the half-row containing it. All
    half-rows are used when omitted. Returns slice positions, values and
    ``drift = max - min``.
    """
    if system.potential is None:
        raise ValueError(f"system {system.label!r} has no potential")
    f = _split_profile(frame)
    grid, U = _stack(u)
    if grid.dim != 2:
        raise ValueError("Hamiltonian slices need a 2D grid")
    hx, ky = grid.h
    nx, ny = grid.shape
    x = grid.axes()[0]
    y = grid.axes()[1]
    f2 = np.asarray(f.evaluate([x, np.zeros_like(x)]), float) ** 2 * np.ones_like(x)
    w = np.full(nx, hx)
    w[0] = w[-1] = hx / 2
    A = U.reshape((U.shape[0],) + grid.shape)
    Ex = 0.5 * np.sum(np.diff(A, axis=1) ** 2, axis=(0, 1)) / hx  # per row, sum over comps
    Ht = system.potential(A)  # (nx, ny)
    Hrow = (w[:, None] * Ht).sum(axis=0)
    uy = np.diff(A, axis=2) / ky  # (m, nx, ny-1)
    Ey = 0.5 * np.sum(w[None, :, None] * f2[None, :, None] * uy ** 2, axis=(0, 1))
    values_all = 0.5 * (Ex[:-1] + Ex[1:]) - Ey + 0.5 * (Hrow[:-1] + Hrow[1:])
    ymid = 0.5 * (y[:-1] + y[1:])
    if slices is None:
        idx = np.arange(ny - 1)
    else:
        idx = np.clip(np.floor((np.asarray(slices, float) - y[0]) / ky).astype(int), 0, ny - 2)
    vals = values_all[idx]
    return {"slices": ymid[idx].tolist(), "values": vals.tolist(),
            "drift": float(vals.max() - vals.min()) if vals.size else 0.0}


# --------------------------------------------------------------------------
# scaling reports


@dataclass
class ScalingReport:
    radii: list
    values: list
    slope: float
    fit_residual: float
    truncated: list = field(default_factory=list)
    passed: bool | None = None
    bound: float | None = None

    def to_json(self) -> dict:
        out = {"radii": self.radii, "values": self.values, "slope": self.slope,
               "fit_residual": self.fit_residual, "truncated": self.truncated}
        if self.passed is not None:
            out.update({"pass": self.passed, "bound": self.bound})
        return out

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("R,value\n")
            for r, v in zip(self.radii, self.values):
                fh.write(f"{r!r},{v!r}\n")


def fit_slope(radii, values) -> tuple[float, float]:
    """Least-squares log-log slope over the upper half of the radii."""
    r = np.asarray(radii, float)
    v = np.asarray(values, float)
    k = len(r) // 2
    r, v = r[k:], v[k:]
    ok = v > 0
    if ok.sum() < 2:
        return float("nan"), float("nan")
    X = np.vstack([np.log(r[ok]), np.ones(ok.sum())]).T
    coef, res, *_ = np.linalg.lstsq(X, np.log(v[ok]), rcond=None)
    return float(coef[0]), float(res[0]) if res.size else 0.0


def _usable_radii(grid: Grid, radii, kind: NormKind):
    radii = sorted(float(r) for r in radii)
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be strictly increasing")
    nrm = homogeneous_norm(grid, kind)
    edge_min = float(nrm[~grid.interior_mask(2)].min())
    keep = [r for r in radii if r <= edge_min]
    dropped = [r for r in radii if r > edge_min]
    return keep, dropped, nrm.ravel()


def _horizontal_gradients(grid: Grid, U: np.ndarray, frame: Frame):
    out = []
    for i in range(U.shape[0]):
        jet, _ = grid_jets(GridFunction(grid, U[i]), frame, with_bracket=False)
        out.append((np.asarray(jet.Xu).ravel(), np.asarray(jet.Yu).ravel()))
    return out


def energy_profile(u, system: NonlinearSystem, frame: Frame, radii: Sequence[float],
                   shift: Sequence[float] | None = None,
                   kind: NormKind | str | None = None) -> ScalingReport:
    """``I_R = int_{B_R} sum_i 1/2 |grad u_i|^2 + H~(u) - H~(a)`` over anisotropic balls.

    Radii whose ball reaches within two nodes of the wall are dropped and
    listed under ``truncated``.
    """
    if system.potential is None:
        raise ValueError(f"system {system.label!r} has no potential")
    grid, U = _stack(u)
    kind = NormKind(kind) if kind else _norm_kind(frame)
    a = np.asarray(shift if shift is not None else np.ones(system.m), float).reshape(-1, 1)
    if a.shape[0] != system.m or not np.all(np.isfinite(a)):
        raise ValueError("shift must be a finite m-vector")
    keep, dropped, nrm = _usable_radii(grid, radii, kind)
    grads = _horizontal_gradients(grid, U, frame)
    dens = sum(0.5 * (gx ** 2 + gy ** 2) for gx, gy in grads)
    dens = dens + system.potential(U) - float(system.potential(a)[0])
    vals = [float(np.sum(dens[nrm < R]) * grid.cell_volume) for R in keep]
    slope, res = fit_slope(keep, vals)
    return ScalingReport(keep, vals, slope, res, dropped)


def _growth_weight(frame: Frame, grid: Grid) -> np.ndarray:
    m = grid.mesh()
    if frame.kind is FrameKind.GRUSHIN2D:
        return (m[0] ** 2).ravel()
    if frame.kind is FrameKind.HEISENBERG3D:
        return (m[0] ** 2 + m[1] ** 2).ravel()
    return np.ones(grid.size)


def growth_integral(u, frame: Frame, radii: Sequence[float],
                    kind: NormKind | str | None = None) -> ScalingReport:
    """``int_{B_R} w |grad u_i|^2`` with ``w = x^2`` (Grushin) or ``x^2 + y^2``
    (Heisenberg); PASS iff the fitted slope is at most ``4 + 0.2``."""
    grid, U = _stack(u)
    kind = NormKind(kind) if kind else _norm_kind(frame)
    keep, dropped, nrm = _usable_radii(grid, radii, kind)
    w = _growth_weight(frame, grid)
    dens = sum(w * (gx ** 2 + gy ** 2) for gx, gy in _horizontal_gradients(grid, U, frame))
    vals = [float(np.sum(dens[nrm < R]) * grid.cell_volume) for R in keep]
    slope, res = fit_slope(keep, vals)
    bound = GROWTH_BOUND + SLOPE_SLACK
    ok = bool(np.isfinite(slope) and slope <= bound)
    return ScalingReport(keep, vals, slope, res, dropped, ok, bound)


# --------------------------------------------------------------------------
# level sets


@dataclass
class ComponentFit:
    points: int
    a: float
    b: float
    rms_parabola: float
    x_mean: float
    verticality: float
    model: str
    straddles_axis: bool

    def to_json(self) -> dict:
        return dict(self.__dict__)


@dataclass
class LevelSetFit:
    level: float
    components: list

    def to_json(self) -> dict:
        return {"level": self.level, "components": [c.to_json() for c in self.components]}


def _fit_component(pts: np.ndarray) -> ComponentFit:
    x, y = pts[:, 0], pts[:, 1]
    x_mean = float(x.mean())
    vert = float(np.sqrt(np.mean((x - x_mean) ** 2)))
    M = np.vstack([x ** 2, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(M, y, rcond=None)
    rms_p = float(np.sqrt(np.mean((M @ coef - y) ** 2)))
    # ties favour the simpler vertical-line model
    model = "x=const" if vert <= (1 + HYSTERESIS) * rms_p else "parabola"
    return ComponentFit(int(len(x)), float(coef[0]), float(coef[1]), rms_p, x_mean, vert,
                        model, bool(x.min() < 0 < x.max()))


def level_set_flatness(u: GridFunction, levels: Sequence[float]) -> list[LevelSetFit]:
    """Extract level curves, split them into 8-connected components and fit
    ``y = a x^2 + b`` against ``x = const`` on each."""
    grid = u.grid
    if grid.dim != 2:
        raise ValueError("level sets are extracted on 2D grids")
    F = np.ascontiguousarray(u.array(), dtype=float)
    x0, y0 = grid.axes()[0][0], grid.axes()[1][0]
    hx, hy = grid.h
    out = []
    for level in levels:
        segs, cells = _kernels.marching_squares(F, float(level))
        segs, cells = np.asarray(segs), np.asarray(cells)
        if len(segs) == 0:
            out.append(LevelSetFit(float(level), []))
            continue
        occ = np.zeros((F.shape[0] - 1, F.shape[1] - 1), bool)
        occ[cells[:, 0], cells[:, 1]] = True
        lab, _ = ndimage.label(occ, structure=np.ones((3, 3), bool))
        seg_lab = lab[cells[:, 0], cells[:, 1]]
        comps = []
        for c in np.unique(seg_lab):
            s = segs[seg_lab == c]
            pts = np.vstack([s[:, :2], s[:, 2:]])
            pts = np.unique(np.round(pts, 12), axis=0)
            if len(pts) < MIN_COMPONENT_POINTS:
                continue
            phys = np.column_stack([x0 + pts[:, 0] * hx, y0 + pts[:, 1] * hy])
            comps.append(_fit_component(phys))
        out.append(LevelSetFit(float(level), comps))
    return out


# --------------------------------------------------------------------------
# monotonicity and slope condition


def monotonicity_profile(u, system: NonlinearSystem, frame: Frame, tol: float = 1e-10) -> dict:
    """Sign structure of ``Z u_i`` and the H-monotone / orientability products."""
    grid, U = _stack(u)
    inner = grid.interior_mask(1).ravel()
    Zs = []
    report = {"components": []}
    for i in range(U.shape[0]):
        jet, _ = grid_jets(GridFunction(grid, U[i]), frame, with_bracket=False)
        Z = np.asarray(jet.Zu).ravel()[inner]
        Zs.append(Z)
        s = np.where(np.abs(Z) > tol, np.sign(Z), 0.0)
        pos, neg = float(np.mean(s > 0)), float(np.mean(s < 0))
        degenerate = pos == 0 and neg == 0
        report["components"].append({
            "sign_constancy": max(pos, neg), "majority_sign": 0 if degenerate else (1 if pos >= neg else -1),
            "degenerate": degenerate})
    m = U.shape[0]
    if m >= 2:
        J = system.jac(U[:, inner])
        good = np.ones(inner.sum(), bool)
        theta = [c["majority_sign"] for c in report["components"]]
        orient = np.ones(inner.sum(), bool)
        for i in range(m):
            for j in range(m):
                if i != j:
                    good &= J[i, j] * Zs[i] * Zs[j] < 0
                    orient &= J[i, j] * theta[i] * theta[j] < 0
        report["h_monotone_fraction"] = float(np.mean(good))
        report["orientable_fraction"] = float(np.mean(orient))
    return report


def slope_condition(u: GridFunction, frame: Frame, grad_floor: float = DEFAULT_GRAD_FLOOR,
                    tol: float = 1e-8) -> dict:
    """Bracket quantity ``2 (ZYu Xu - ZXu Yu)`` and the slope derivative
    ``d/dy(-x u_x / u_y)`` on the Grushin plane.

    Returns node fields (NaN where masked) and the fraction of unmasked nodes
    where the quantity is ``<= tol``.
    """
    if frame.kind is not FrameKind.GRUSHIN2D:
        raise ValueError("slope condition is stated for the Grushin frame")
    grid = u.grid
    jet, valid = grid_jets(u, frame)
    rep = geometric_report(jet, grad_floor)
    live = valid & ~np.asarray(rep.masked, bool)
    q = np.where(live, 2.0 * np.asarray(rep.bracket_quantity), np.nan)
    U = u.array()
    x = grid.mesh()[0]
    ux = np.gradient(U, grid.h[0], axis=0)
    uy = np.gradient(U, grid.h[1], axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(np.abs(uy) > grad_floor, -x * ux / uy, np.nan)
    slope = np.gradient(ratio, grid.h[1], axis=1)
    n_live = int(live.sum())
    frac = float(np.mean(q[live] <= tol)) if n_live else 1.0
    return {"bracket_quantity": q, "slope_derivative": slope,
            "summary": {"unmasked": n_live, "fraction_nonpositive": frac,
                        "max": float(np.nanmax(q)) if n_live else 0.0}}


# --------------------------------------------------------------------------
# energy


def energy(u, system: NonlinearSystem, frame: Frame, mask=None) -> float:
    """``E(u) = int sum_i 1/2 |grad u_i|^2 + H~(u)`` over nodes two away from the walls."""
    if system.potential is None:
        raise ValueError(f"system {system.label!r} has no potential")
    grid, U = _stack(u)
    sel = grid.interior_mask(2).ravel()
    if mask is not None:
        sel &= np.asarray(mask, bool).ravel()
    dens = sum(0.5 * (gx ** 2 + gy ** 2) for gx, gy in _horizontal_gradients(grid, U, frame))
    dens = dens + system.potential(U)
    return float(np.sum(dens[sel]) * grid.cell_volume)


def energy_compare(u, psi, system: NonlinearSystem, frame: Frame, mask=None) -> dict:
    """Energies of ``u`` and of the spliced competitor ``min(psi, u)``."""
    grid, U = _stack(u)
    _, P = _stack(psi)
    comp = [GridFunction(grid, np.minimum(P[i], U[i])) for i in range(U.shape[0])]
    e_u = energy(u, system, frame, mask)
    e_c = energy(comp, system, frame, mask)
    return {"energy_u": e_u, "energy_competitor": e_c, "difference": e_c - e_u}
