"""Linearized operators, spectral stability certificates and the two
integral inequalities satisfied by stable solutions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spl

from hypogeo.calculus import DEFAULT_GRAD_FLOOR, geometric_report
from hypogeo.fields import Frame
from hypogeo.grid import Grid, GridFunction, SparseOperator, assemble_sublaplacian, grid_jets, integrate
from hypogeo.solver import NonlinearSystem

DEFAULT_MARGIN = 1e-6
EIG_RTOL = 1e-8
COMPACT_DEPTH = 2


class StabilityError(RuntimeError):
    pass


def _stack(u, m: int | None = None) -> tuple[Grid, np.ndarray]:
    if isinstance(u, GridFunction):
        u = [u]
    u = list(u)
    if m is not None and len(u) != m:
        raise ValueError(f"{len(u)} component(s) given, system has {m}")
    grid = u[0].grid
    for c in u[1:]:
        if c.grid != grid:
            raise ValueError("components live on different grids")
    return grid, np.stack([c.values for c in u])


@dataclass
class LinearizedOperator:
    """``phi -> Delta_XY phi_i - sum_j dH_i/du_j(u) phi_j`` on interior nodes,
    with ``phi = 0`` on the walls. Unknowns are stacked component-major."""

    grid: Grid
    frame: Frame
    system: NonlinearSystem
    u: np.ndarray
    op: SparseOperator
    matrix: sp.csr_matrix

    @property
    def m(self) -> int:
        return self.system.m

    @property
    def n_interior(self) -> int:
        return self.op.interior.size

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        d = self.matrix - self.matrix.T
        return d.nnz == 0 or float(np.max(np.abs(d.data))) <= tol

    def to_grid_functions(self, vec: np.ndarray) -> list[GridFunction]:
        out = []
        for i in range(self.m):
            v = np.zeros(self.grid.size)
            v[self.op.interior] = vec[i * self.n_interior:(i + 1) * self.n_interior]
            out.append(GridFunction(self.grid, v))
        return out


def assemble_linearized(grid: Grid, frame: Frame, system: NonlinearSystem, u,
                        op: SparseOperator | None = None) -> LinearizedOperator:
    g2, U = _stack(u, system.m)
    if g2 != grid:
        raise ValueError("u does not live on the given grid")
    op = op or assemble_sublaplacian(grid, frame)
    J = system.jac(U[:, op.interior])
    m = system.m
    blocks = [[(op.A_II if i == j else None) for j in range(m)] for i in range(m)]
    L = sp.bmat(blocks, format="csr") if m > 1 else op.A_II.tocsr()
    coupling = sp.bmat([[sp.diags(J[i, j]) for j in range(m)] for i in range(m)], format="csr")
    return LinearizedOperator(grid, frame, system, U, op, (L - coupling).tocsr())


def gershgorin_lower(A: sp.spmatrix) -> float:
    A = sp.csr_matrix(A)
    d = A.diagonal()
    off = np.asarray(abs(A).sum(axis=1)).ravel() - np.abs(d)
    return float(np.min(d - off))


def smallest_eigenvalue_matrix(A, rtol: float = EIG_RTOL, max_iter: int = 2000):
    """Smallest eigenpair of a symmetric matrix by shift-invert Lanczos.

    The shift sits strictly below a Gershgorin lower bound, so the shifted
    matrix is positive definite and the wanted eigenvalue is the one of
    largest magnitude after inversion. The start vector is fixed, which
    makes the result reproducible.
    """
    A = sp.csr_matrix(A, dtype=float)
    n = A.shape[0]
    if n == 0:
        raise ValueError("empty operator")
    if n <= 3:
        w, v = np.linalg.eigh(A.toarray())
        return float(w[0]), v[:, 0]
    lo = gershgorin_lower(A)
    sigma = lo - max(1.0, abs(lo)) * 1e-3
    v0 = np.ones(n) + np.linspace(0, 1e-3, n)
    try:
        w, v = spl.eigsh(A, k=1, sigma=sigma, which="LM", v0=v0, tol=rtol * 1e-2,
                         maxiter=max_iter)
    except spl.ArpackNoConvergence as exc:
        raise StabilityError(f"eigen-iteration did not converge in {max_iter} steps") from exc
    lam, vec = float(w[0]), v[:, 0]
    res = np.linalg.norm(A @ vec - lam * vec)
    if res > max(rtol, 1e-12) * max(abs(lam), 1.0) * 1e2:
        raise StabilityError(f"eigenpair residual {res:.3e} above tolerance")
    return lam, vec


@dataclass
class EigenResult:
    value: float
    phi: list
    stable: bool
    margin: float

    def to_json(self) -> dict:
        return {"lambda_min": self.value, "stable": self.stable, "margin": self.margin}


def smallest_eigenvalue(lin: LinearizedOperator, margin: float = DEFAULT_MARGIN,
                        rtol: float = EIG_RTOL, max_iter: int = 2000) -> EigenResult:
    """Smallest eigenvalue of ``-(linearized operator)``; stable iff ``>= -margin``.

    The eigenvector is returned as grid functions with a positive sum.
    """
    if not lin.system.symmetric:
        raise StabilityError("spectral certificate needs a symmetric system")
    lam, vec = smallest_eigenvalue_matrix(-lin.matrix, rtol, max_iter)
    if vec.sum() < 0:
        vec = -vec
    return EigenResult(lam, lin.to_grid_functions(vec), bool(lam >= -margin), margin)


def _check_compact(grid: Grid, Z: np.ndarray, depth: int = COMPACT_DEPTH):
    outer = ~grid.interior_mask(depth).ravel()
    if np.any(Z[:, outer] != 0):
        raise ValueError(f"zeta must vanish within {depth} nodes of the boundary")


def stability_inequality_gap(u, system: NonlinearSystem, zeta, frame: Frame,
                             op: SparseOperator | None = None) -> dict:
    """``RHS - LHS`` of the stability inequality for compactly supported ``zeta``.

    ``RHS = sum_i int |grad zeta_i|^2`` uses the discrete Dirichlet form of the
    assembled operator, ``-zeta^T L zeta * prod(h)``, so a nonnegative
    spectral certificate implies a nonnegative gap exactly.
    """
    grid, U = _stack(u, system.m)
    g2, Z = _stack(zeta, system.m)
    if g2 != grid:
        raise ValueError("zeta lives on another grid")
    _check_compact(grid, Z)
    op = op or assemble_sublaplacian(grid, frame)
    J = system.jac(U)
    lhs = -sum(np.sum(J[i, j] * Z[i] * Z[j]) for i in range(system.m)
               for j in range(system.m)) * grid.cell_volume
    rhs = -sum(float(Z[i] @ (op.full @ Z[i])) for i in range(system.m)) * grid.cell_volume
    return {"lhs": float(lhs), "rhs": float(rhs), "gap": float(rhs - lhs)}


@dataclass
class InequalityReport:
    lhs_terms: dict
    rhs: float
    gap: float
    masked_fraction: float
    residual: float = 0.0
    extras: dict = field(default_factory=dict)

    @property
    def lhs_total(self) -> float:
        return float(sum(self.lhs_terms.values()))

    def passes(self, rel_tol: float = 1e-5) -> bool:
        return self.gap >= -rel_tol * max(abs(self.rhs), 1e-300)

    def to_json(self) -> dict:
        return {"lhs_terms": dict(self.lhs_terms), "rhs": self.rhs, "gap": self.gap,
                "masked_fraction": self.masked_fraction, "residual": self.residual,
                **self.extras}


def solution_residual(u, system: NonlinearSystem, frame: Frame,
                      op: SparseOperator | None = None) -> float:
    """Max-node ``|Delta_XY u_i - H_i(u)|`` over interior nodes."""
    grid, U = _stack(u, system.m)
    op = op or assemble_sublaplacian(grid, frame)
    H = system.H(U[:, op.interior])
    return float(max(np.max(np.abs(op.apply(U[i]) - H[i])) for i in range(system.m)))


def poincare_gap(u, system: NonlinearSystem, frame: Frame, zeta,
                 grad_floor: float = DEFAULT_GRAD_FLOOR, residual_tol: float = 1e-6,
                 op: SparseOperator | None = None) -> InequalityReport:
    """Evaluate the geometric Poincare inequality for a computed solution.

    Terms (each integrated by midpoint quadrature):

    - ``curvature``: ``sum_i int |grad u_i|^2 (A_i^2 + B_i^2) zeta_i^2`` over
      unmasked nodes;
    - ``bracket``: ``-sum_i int 2 (ZYu_i Xu_i - ZXu_i Yu_i) zeta_i^2``;
    - ``coupling``: ``sum_{i != j} int dH_i/du_j (<grad u_i, grad u_j> zeta_i^2
      - |grad u_i||grad u_j| zeta_i zeta_j)``;
    - ``rhs``: ``sum_i int |grad u_i|^2 |grad zeta_i|^2``.

    Raises
    ------
    ValueError
        If ``u`` is not a solution to ``residual_tol`` or ``zeta`` is not
        compactly supported.
    """
    grid, U = _stack(u, system.m)
    g2, Z = _stack(zeta, system.m)
    if g2 != grid:
        raise ValueError("zeta lives on another grid")
    _check_compact(grid, Z)
    op = op or assemble_sublaplacian(grid, frame)
    res = solution_residual(u, system, frame, op)
    if res > residual_tol:
        raise ValueError(f"u is not a solution: residual {res:.3e} > {residual_tol:.1e}")
    m = system.m
    support = grid.interior_mask(COMPACT_DEPTH).ravel()
    dv = grid.cell_volume
    curv = brk = rhs = 0.0
    grads, norms = [], []
    masked_count = 0
    for i in range(m):
        ui = GridFunction(grid, U[i])
        jet, _ = grid_jets(ui, frame)
        rep = geometric_report(jet, grad_floor)
        z2 = Z[i] ** 2
        mask = np.asarray(rep.masked).ravel()
        g = np.asarray(rep.grad_norm).ravel()
        live = support & ~mask
        A, B = np.asarray(rep.A).ravel(), np.asarray(rep.B).ravel()
        curv += float(np.sum((g ** 2 * (A ** 2 + B ** 2) * z2)[live])) * dv
        bq = np.asarray(rep.bracket_quantity).ravel()
        brk += -2.0 * float(np.sum((bq * z2)[support])) * dv
        zj, _ = grid_jets(GridFunction(grid, Z[i]), frame, with_bracket=False)
        gz2 = (np.asarray(zj.Xu) ** 2 + np.asarray(zj.Yu) ** 2).ravel()
        rhs += float(np.sum((g ** 2 * gz2)[support])) * dv
        grads.append((np.asarray(jet.Xu).ravel(), np.asarray(jet.Yu).ravel()))
        norms.append(g)
        masked_count += int(np.sum(mask & support & (Z[i] != 0)))
    coup = 0.0
    if m > 1:
        J = system.jac(U)
        for i in range(m):
            for j in range(m):
                if i == j:
                    continue
                inner = grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]
                t = J[i, j] * (inner * Z[i] ** 2 - norms[i] * norms[j] * Z[i] * Z[j])
                coup += float(np.sum(t[support])) * dv
    nz = int(sum(np.sum((Z[i] != 0) & support) for i in range(m)))
    terms = {"curvature": curv, "bracket": brk, "coupling": coup}
    gap = rhs - sum(terms.values())
    return InequalityReport(terms, rhs, gap, masked_count / nz if nz else 0.0, res)


def pointwise_certificate(u, system: NonlinearSystem, phi, frame: Frame,
                          op: SparseOperator | None = None, residual_tol: float = 1e-2) -> dict:
    """Check a candidate ``phi`` against the pointwise stability definition.

    Reports the max interior residual of ``Delta_XY phi_i = sum_j dH_i/du_j phi_j``
    (absolute and relative to ``max |phi|``), the per-component fraction of
    interior nodes carrying the majority sign, and for ``m >= 2`` the fraction
    of nodes where ``dH_i/du_j phi_i phi_j < 0`` for every ``i != j``.
    """
    grid, U = _stack(u, system.m)
    g2, P = _stack(phi, system.m)
    if g2 != grid:
        raise ValueError("phi lives on another grid")
    if not np.any(P):
        raise ValueError("phi must be nonzero")
    op = op or assemble_sublaplacian(grid, frame)
    I = op.interior
    J = system.jac(U[:, I])
    m = system.m
    resid = 0.0
    sign_frac = []
    for i in range(m):
        r = op.apply(P[i]) - sum(J[i, j] * P[j, I] for j in range(m))
        resid = max(resid, float(np.max(np.abs(r))))
        s = np.sign(P[i, I])
        major = 1.0 if np.sum(s > 0) >= np.sum(s < 0) else -1.0
        sign_frac.append(float(np.mean(s == major)))
    scale = float(np.max(np.abs(P[:, I])))
    rel = resid / scale if scale else float("inf")
    out = {"residual": resid, "relative_residual": rel, "sign_constancy": sign_frac}
    ok = all(f == 1.0 for f in sign_frac) and rel <= residual_tol
    if m > 1:
        good = np.ones(I.size, bool)
        for i in range(m):
            for j in range(m):
                if i != j:
                    good &= J[i, j] * P[i, I] * P[j, I] < 0
        out["coupling_fraction"] = float(np.mean(good))
        ok = ok and out["coupling_fraction"] == 1.0
    out["pass"] = bool(ok)
    return out
