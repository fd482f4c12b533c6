"""Semilinear Dirichlet problems ``Delta_XY u_i = H_i(u)`` on a grid.

Damped Newton with Armijo backtracking, and a semi-implicit gradient flow
that takes over when Newton stalls.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spl

from hypogeo.fields import Frame, euclidean1d
from hypogeo.grid import Grid, GridFunction, SparseOperator, assemble_sublaplacian
from hypogeo.polynomial import Polynomial

log = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-10


class SolverError(RuntimeError):
    """Linear-solve breakdown or divergence; ``history`` holds the residuals."""

    def __init__(self, msg: str, history: Sequence[float] = ()):
        super().__init__(msg)
        self.history = list(history)


@dataclass
class NonlinearSystem:
    """Vectorized nonlinearity on ``m`` components.

    ``H(U)`` maps an ``(m, N)`` array to ``(m, N)``; ``jac(U)`` returns
    ``(m, m, N)`` with ``jac[i, j] = dH_i / du_j``; ``potential(U)`` returns
    ``N`` values of ``H~`` with ``grad H~ = H`` when present.
    """

    m: int
    H: Callable
    jac: Callable
    potential: Callable | None = None
    symmetric: bool = False
    names: tuple = ()
    label: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.names:
            self.names = tuple(f"u{i + 1}" for i in range(self.m))

    def check_potential(self, samples, step: float = 1e-5, tol: float = 1e-6) -> float:
        """Max deviation between ``H`` and the central-difference gradient of ``H~``."""
        if self.potential is None:
            raise ValueError(f"system {self.label!r} has no potential")
        U = np.atleast_2d(np.asarray(samples, float)).T  # (m, S)
        Hv = self.H(U)
        worst = 0.0
        for i in range(self.m):
            e = np.zeros((self.m, 1))
            e[i] = step
            g = (self.potential(U + e) - self.potential(U - e)) / (2 * step)
            worst = max(worst, float(np.max(np.abs(g - Hv[i]))))
        if worst > tol:
            raise ValueError(f"potential gradient mismatch {worst:.3e} > {tol}")
        return worst

    def to_json(self) -> dict:
        return {"label": self.label, "m": self.m, "symmetric": self.symmetric,
                "params": dict(self.params)}


def allen_cahn() -> NonlinearSystem:
    """``H(u) = u^3 - u``, ``H~ = (u^2 - 1)^2 / 4``."""
    return NonlinearSystem(
        m=1,
        H=lambda U: U ** 3 - U,
        jac=lambda U: (3 * U ** 2 - 1)[None, :, :].reshape(1, 1, -1),
        potential=lambda U: 0.25 * (U[0] ** 2 - 1) ** 2,
        symmetric=True, names=("u",), label="allen-cahn")


def gradient_coupled(beta: float = 1.0) -> NonlinearSystem:
    """``H~ = (u^2-1)^2/4 + (v^2-1)^2/4 + beta/2 u^2 v^2``."""
    b = float(beta)

    def H(U):
        u, v = U
        return np.stack([u ** 3 - u + b * u * v ** 2, v ** 3 - v + b * u ** 2 * v])

    def jac(U):
        u, v = U
        off = 2 * b * u * v
        return np.stack([np.stack([3 * u ** 2 - 1 + b * v ** 2, off]),
                         np.stack([off, 3 * v ** 2 - 1 + b * u ** 2])])

    def pot(U):
        u, v = U
        return 0.25 * (u ** 2 - 1) ** 2 + 0.25 * (v ** 2 - 1) ** 2 + 0.5 * b * u ** 2 * v ** 2

    return NonlinearSystem(2, H, jac, pot, symmetric=True, names=("u", "v"),
                           label="gradient-coupled", params={"beta": b})


def zero_system(m: int = 1) -> NonlinearSystem:
    return NonlinearSystem(m, H=lambda U: np.zeros_like(U),
                           jac=lambda U: np.zeros((m, m) + U.shape[1:]),
                           potential=lambda U: np.zeros(U.shape[1:]),
                           symmetric=True, label="harmonic")


def polynomial_system(H: Sequence[Polynomial] | None = None,
                      potential: Polynomial | None = None, label: str = "polynomial",
                      symmetric: bool | None = None, names: Sequence[str] = ()) -> NonlinearSystem:
    """System from polynomial components, or from a potential whose gradient is ``H``."""
    if potential is not None:
        m = potential.dim
        H = [potential.diff(i) for i in range(m)]
        symmetric = True if symmetric is None else symmetric
    if not H:
        raise ValueError("need H components or a potential")
    m = len(H)
    for p in H:
        if p.dim != m:
            raise ValueError("each H_i must be a polynomial in the m components")
    J = [[H[i].diff(j) for j in range(m)] for i in range(m)]
    if symmetric is None:
        symmetric = all(J[i][j] == J[j][i] for i in range(m) for j in range(i))

    def ev(p, U):
        return np.broadcast_to(np.asarray(p.evaluate(list(U)), float), U.shape[1:])

    return NonlinearSystem(
        m,
        H=lambda U: np.stack([ev(p, U) for p in H]),
        jac=lambda U: np.stack([np.stack([ev(q, U) for q in row]) for row in J]),
        potential=(lambda U: ev(potential, U)) if potential is not None else None,
        symmetric=bool(symmetric), names=tuple(names), label=label)


PRESETS = {
    "allen-cahn": allen_cahn,
    "gradient-coupled": gradient_coupled,
    "harmonic": zero_system,
}


def system_from_json(data: dict) -> NonlinearSystem:
    """``{"name", "m", "potential": {...}}`` or ``{"name", "m", "H": [{...}, ...]}``.

    Polynomials use the sparse ``{"e1,e2": "coef"}`` encoding.
    """
    try:
        m = int(data["m"])
        name = str(data.get("name", "custom"))
        if "potential" in data:
            return polynomial_system(potential=Polynomial.from_json(m, data["potential"]),
                                     label=name)
        H = [Polynomial.from_json(m, h) for h in data["H"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed system description: {exc}") from exc
    return polynomial_system(H=H, label=name)


def get_system(spec, **params) -> NonlinearSystem:
    """Preset name (with params such as ``beta``), JSON path or inline dict."""
    if isinstance(spec, NonlinearSystem):
        return spec
    if isinstance(spec, dict):
        return system_from_json(spec)
    if spec in PRESETS:
        fn = PRESETS[spec]
        if spec == "gradient-coupled":
            return fn(params.get("beta", 1.0))
        return fn()
    path = Path(spec)
    if not path.exists():
        raise FileNotFoundError(f"system file not found: {spec}")
    return system_from_json(json.loads(path.read_text()))


def check_symmetry(system: NonlinearSystem, samples) -> dict:
    """Largest ``|dH_i/du_j - dH_j/du_i|`` over the samples; pass iff ``<= 1e-10``."""
    S = np.atleast_2d(np.asarray(samples, float))
    if S.size == 0:
        raise ValueError("need at least one sample")
    if S.shape[1] != system.m:
        S = S.T
    J = system.jac(S.T)  # (m, m, S)
    worst = 0.0
    for i in range(system.m):
        for j in range(i + 1, system.m):
            worst = max(worst, float(np.max(np.abs(J[i, j] - J[j, i]))))
    return {"max_discrepancy": worst, "pass": worst <= SYMMETRY_TOL,
            "samples": int(S.shape[0])}


# --------------------------------------------------------------------------
# solver


@dataclass
class SolveOptions:
    tol: float = 1e-8
    max_iter: int = 50
    armijo_c: float = 1e-4
    min_step: float = 2.0 ** -12
    stall_window: int = 5
    stall_reduction: float = 1e-3
    flow_tau: float = 0.5
    flow_steps: int = 25
    max_flow_rounds: int = 20
    divergence_factor: float = 10.0

    @classmethod
    def from_dict(cls, d: dict | None) -> "SolveOptions":
        d = dict(d or {})
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown solver options: {sorted(unknown)}")
        return cls(**d)


@dataclass
class SolveResult:
    u: list
    residual_norm: float
    iterations: int
    converged: bool
    history: list
    newton_steps: int = 0
    flow_steps: int = 0

    def to_json(self) -> dict:
        return {"residual_norm": self.residual_norm, "iterations": self.iterations,
                "converged": self.converged, "newton_steps": self.newton_steps,
                "flow_steps": self.flow_steps, "history": list(self.history)}


def _boundary_values(grid: Grid, data, m: int) -> np.ndarray:
    """``(m, N)`` node values from callables, GridFunctions or arrays."""
    if callable(data) or isinstance(data, (GridFunction, np.ndarray)) and m == 1:
        data = [data]
    if len(data) != m:
        raise ValueError(f"boundary data for {len(data)} components, system has {m}")
    out = np.empty((m, grid.size))
    for i, d in enumerate(data):
        if callable(d):
            out[i] = grid.sample(d).values
        elif isinstance(d, GridFunction):
            if d.grid != grid:
                raise ValueError("boundary GridFunction lives on another grid")
            out[i] = d.values
        else:
            out[i] = np.broadcast_to(np.asarray(d, float).ravel(), (grid.size,))
    return out


def harmonic_extension(grid: Grid, values: np.ndarray) -> np.ndarray:
    """Fill interior nodes with the discrete Euclidean-harmonic extension of the
    wall values; on a line this is linear interpolation."""
    from hypogeo.fields import euclidean2d, _frame, FrameKind
    if grid.dim == 1:
        frame = euclidean1d()
    elif grid.dim == 2:
        frame = euclidean2d()
    else:
        frame = _frame(FrameKind.CUSTOM, [1, 0, 0], [0, 1, 0])
    op = assemble_sublaplacian(grid, frame)
    if grid.dim == 3:
        # add the z direction, which a two-field frame cannot carry
        op_z = assemble_sublaplacian(grid, _frame(FrameKind.CUSTOM, [0, 0, 1], [0, 0, 0]))
        A_II, A_IB = op.A_II + op_z.A_II, op.A_IB + op_z.A_IB
    else:
        A_II, A_IB = op.A_II, op.A_IB
    out = np.array(values, float, copy=True)
    out[op.interior] = spl.spsolve(A_II.tocsc(), -(A_IB @ out[op.boundary]))
    return out


class _Problem:
    def __init__(self, op: SparseOperator, system: NonlinearSystem, G: np.ndarray):
        self.op, self.system, self.m = op, system, system.m
        self.nI = op.interior.size
        self.bterm = np.stack([op.A_IB @ G[i, op.boundary] for i in range(self.m)])
        self.L = sp.block_diag([op.A_II] * self.m, format="csr")

    def residual(self, UI: np.ndarray) -> np.ndarray:
        LU = np.stack([self.op.A_II @ UI[i] for i in range(self.m)])
        return LU + self.bterm - self.system.H(UI)

    def jacobian(self, UI: np.ndarray) -> sp.csc_matrix:
        J = self.system.jac(UI)
        blocks = [[sp.diags(J[i, j]) for j in range(self.m)] for i in range(self.m)]
        return (self.L - sp.bmat(blocks, format="csr")).tocsc()


def _norm(F: np.ndarray) -> float:
    return float(np.max(np.abs(F))) if F.size else 0.0


def solve_semilinear(grid: Grid, frame: Frame, system: NonlinearSystem, boundary,
                     init=None, opts: SolveOptions | dict | None = None,
                     op: SparseOperator | None = None) -> SolveResult:
    """Solve ``Delta_XY u_i = H_i(u)`` with Dirichlet data.

    Parameters
    ----------
    boundary
        Per-component wall data: callables of the coordinates, GridFunctions or
        full-node arrays. Only wall nodes are read.
    init
        Optional initial guesses (same forms). Their wall values are replaced by
        the boundary data. Default: harmonic extension of the boundary data.
    opts
        :class:`SolveOptions` or a dict of its fields.

    Raises
    ------
    SolverError
        If the linear solve breaks down or the residual grows ``10x`` over the
        best one seen.
    """
    opts = opts if isinstance(opts, SolveOptions) else SolveOptions.from_dict(opts)
    if not opts.tol > 0:
        raise ValueError("tol must be positive")
    op = op or assemble_sublaplacian(grid, frame)
    m = system.m
    G = _boundary_values(grid, boundary, m)
    if init is None:
        U = np.stack([harmonic_extension(grid, G[i]) for i in range(m)])
    else:
        U = _boundary_values(grid, init, m)
    U[:, op.boundary] = G[:, op.boundary]
    prob = _Problem(op, system, G)
    UI = U[:, op.interior].copy()

    F = prob.residual(UI)
    r = _norm(F)
    history = [r]
    best = r
    newton = flow = it = flow_rounds = 0
    window_start = 0  # stall detection restarts after every flow round
    ident = sp.identity(m * prob.nI, format="csc")
    while r > opts.tol and it < opts.max_iter:
        it += 1
        recent = history[window_start:]
        stalled = (len(recent) > opts.stall_window and
                   recent[-1] > (1 - opts.stall_reduction) * recent[-1 - opts.stall_window])
        step_ok = False
        if not stalled:
            try:
                d = spl.spsolve(prob.jacobian(UI), -F.ravel()).reshape(m, -1)
            except RuntimeError as exc:
                raise SolverError(f"linear solve failed: {exc}", history) from exc
            if not np.all(np.isfinite(d)):
                raise SolverError("linear solve produced non-finite values", history)
            f0 = float(np.linalg.norm(F))
            alpha = 1.0
            while alpha >= opts.min_step:
                trial = UI + alpha * d
                Ft = prob.residual(trial)
                if np.linalg.norm(Ft) <= (1 - opts.armijo_c * alpha) * f0:
                    UI, F, step_ok = trial, Ft, True
                    newton += 1
                    break
                alpha /= 2
        if not step_ok:
            if flow_rounds >= opts.max_flow_rounds:
                break
            flow_rounds += 1
            lu = spl.splu((ident - opts.flow_tau * prob.L).tocsc())
            for _ in range(opts.flow_steps):
                rhs = UI + opts.flow_tau * (prob.bterm - system.H(UI))
                UI = lu.solve(rhs.ravel()).reshape(m, -1)
                flow += 1
            F = prob.residual(UI)
            window_start = len(history)
        r = _norm(F)
        history.append(r)
        best = min(best, r)
        if r > opts.divergence_factor * best:
            raise SolverError(f"residual diverged ({r:.3e} > 10x best {best:.3e})", history)
        log.debug("iter %d residual %.3e", it, r)

    U[:, op.interior] = UI
    u = [GridFunction(grid, U[i].copy()) for i in range(m)]
    return SolveResult(u=u, residual_norm=r, iterations=it, converged=r <= opts.tol,
                       history=history, newton_steps=newton, flow_steps=flow)


def discrete_profile(lo: float, hi: float, n: int, system: NonlinearSystem | None = None,
                     exact: Callable | None = None, opts=None) -> GridFunction:
    """1D discrete solution of ``u'' = H(u)`` on ``[lo, hi]`` with ``n`` cells.

    Wall values come from ``exact`` (default ``tanh(x / sqrt 2)``, the
    Allen-Cahn heteroclinic); the same function seeds Newton. Its values are
    the trace that makes x-only data an exact discrete solution on split-form
    frames like Grushin.
    """
    system = system or allen_cahn()
    exact = exact or (lambda x: np.tanh(x / np.sqrt(2.0)))
    grid = Grid((lo,), (hi,), (n,))
    res = solve_semilinear(grid, euclidean1d(), system, [exact], init=[exact], opts=opts)
    if not res.converged:
        raise SolverError("1D profile solve did not converge", res.history)
    return res.u[0]


def extend_profile(profile: GridFunction, grid: Grid) -> GridFunction:
    """Constant extension of a 1D profile along the remaining axes of ``grid``."""
    if grid.shape[0] != profile.grid.shape[0] or grid.lo[0] != profile.grid.lo[0] \
            or grid.hi[0] != profile.grid.hi[0]:
        raise ValueError("profile x-axis does not match the grid's x-axis")
    shape = (-1,) + (1,) * (grid.dim - 1)
    vals = np.broadcast_to(profile.values.reshape(shape), grid.shape)
    return GridFunction(grid, vals.ravel().copy())
