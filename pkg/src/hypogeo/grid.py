"""Rectangular grids: FD jets, sparse sub-Laplacian, anisotropic balls, quadrature.

Node values are stored in C order over ``grid.shape`` (axis 0 is ``x``).
"""

from __future__ import annotations

import csv
import enum
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from hypogeo.calculus import JetSample
from hypogeo.fields import Frame, VectorField

RAW_FORMAT = "float64-le"


class Centering(str, enum.Enum):
    NODE = "node"
    CELL = "cell"


class NormKind(str, enum.Enum):
    GRUSHIN = "grushin"
    HEISENBERG = "heisenberg"
    EUCLIDEAN = "euclidean"


@dataclass(frozen=True)
class Grid:
    """Tensor grid on the box ``prod [lo_k, hi_k]`` with ``n_k`` cells per axis.

    Node-centred grids carry ``n_k + 1`` nodes per axis including both walls;
    cell-centred grids carry ``n_k`` nodes at the cell midpoints. The outer
    layer of nodes is the Dirichlet boundary in either case.
    """

    lo: tuple
    hi: tuple
    n: tuple
    centering: Centering = Centering.NODE

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        n = tuple(int(v) for v in self.n)
        if not (len(lo) == len(hi) == len(n)) or not 1 <= len(n) <= 3:
            raise ValueError("lo, hi and n must share a length of 1, 2 or 3")
        for a, b, k in zip(lo, hi, n):
            if not b > a:
                raise ValueError(f"empty axis [{a}, {b}]")
            if k < 1:
                raise ValueError("cell counts must be positive")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "centering", Centering(self.centering))

    @classmethod
    def uniform(cls, lo, hi, n, centering=Centering.NODE) -> "Grid":
        return cls(tuple(lo), tuple(hi), tuple(n), centering)

    @property
    def dim(self) -> int:
        return len(self.n)

    @property
    def h(self) -> tuple:
        return tuple((b - a) / k for a, b, k in zip(self.lo, self.hi, self.n))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.h))

    @property
    def shape(self) -> tuple:
        extra = 1 if self.centering is Centering.NODE else 0
        return tuple(k + extra for k in self.n)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def axes(self) -> list[np.ndarray]:
        out = []
        for a, hk, m in zip(self.lo, self.h, self.shape):
            off = 0.0 if self.centering is Centering.NODE else 0.5
            out.append(a + (np.arange(m) + off) * hk)
        return out

    def mesh(self) -> list[np.ndarray]:
        return np.meshgrid(*self.axes(), indexing="ij")

    def interior_mask(self, depth: int = 1) -> np.ndarray:
        """Nodes at index distance ``>= depth`` from every wall."""
        mask = np.ones(self.shape, dtype=bool)
        for ax, m in enumerate(self.shape):
            idx = np.arange(m)
            ok = (idx >= depth) & (idx <= m - 1 - depth)
            shape = [1] * self.dim
            shape[ax] = m
            mask &= ok.reshape(shape)
        return mask

    def boundary_mask(self) -> np.ndarray:
        return ~self.interior_mask(1)

    def flat_index(self, node: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(node), self.shape))

    def sample(self, fn) -> "GridFunction":
        """``GridFunction`` of ``fn(*mesh)``."""
        vals = np.broadcast_to(np.asarray(fn(*self.mesh()), float), self.shape)
        return GridFunction(self, vals.ravel().copy())

    def to_json(self) -> dict:
        return {"lo": list(self.lo), "hi": list(self.hi), "n": list(self.n),
                "centering": self.centering.value}

    @classmethod
    def from_json(cls, data: dict) -> "Grid":
        return cls(tuple(data["lo"]), tuple(data["hi"]), tuple(data["n"]),
                   Centering(data.get("centering", "node")))

    def refined(self, factor: int = 2) -> "Grid":
        return Grid(self.lo, self.hi, tuple(k * factor for k in self.n), self.centering)

    def scaled_box(self, factor: float) -> "Grid":
        """Same spacing, box scaled about its centre (cell counts scale too)."""
        lo, hi, n = [], [], []
        for a, b, k in zip(self.lo, self.hi, self.n):
            c, half = (a + b) / 2, (b - a) / 2 * factor
            lo.append(c - half)
            hi.append(c + half)
            n.append(int(round(k * factor)))
        return Grid(tuple(lo), tuple(hi), tuple(n), self.centering)


def parse_grid(grid: str, box: str, centering: str = "node") -> Grid:
    """Grid from CLI strings ``"nx,ny[,nz]"`` and ``"xlo,xhi,ylo,yhi[,zlo,zhi]"``."""
    try:
        n = [int(v) for v in grid.split(",")]
        b = [float(v) for v in box.split(",")]
    except ValueError as exc:
        raise ValueError(f"cannot parse grid/box: {exc}") from exc
    if len(b) != 2 * len(n):
        raise ValueError(f"--box needs {2 * len(n)} numbers for a {len(n)}-axis grid")
    return Grid(tuple(b[0::2]), tuple(b[1::2]), tuple(n), Centering(centering))


@dataclass
class GridFunction:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if v.size != self.grid.size:
            raise ValueError(f"{v.size} values for a grid of {self.grid.size} nodes")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid function values must be finite")
        self.values = v

    def array(self) -> np.ndarray:
        """Values reshaped to ``grid.shape`` (a view)."""
        return self.values.reshape(self.grid.shape)

    def copy(self) -> "GridFunction":
        return GridFunction(self.grid, self.values.copy())

    def to_csv(self, path) -> None:
        mesh = [m.ravel() for m in self.grid.mesh()]
        names = ["x", "y", "z"][: self.grid.dim]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(names + ["value"])
            for row in zip(*mesh, self.values):
                w.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path, grid: Grid) -> "GridFunction":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))[1:]
        return cls(grid, np.array([float(r[-1]) for r in rows]))

    def to_raw(self, path, **meta) -> Path:
        """Little-endian float64 block plus a ``.json`` sidecar with grid metadata."""
        path = Path(path)
        path.write_bytes(self.values.astype("<f8").tobytes())
        side = {"format": RAW_FORMAT, "grid": self.grid.to_json(), "count": int(self.values.size)}
        side.update(meta)
        sidecar = path.with_suffix(path.suffix + ".json")
        sidecar.write_text(json.dumps(side, indent=2, sort_keys=True))
        return sidecar

    @classmethod
    def from_raw(cls, path) -> "GridFunction":
        path = Path(path)
        side = json.loads(path.with_suffix(path.suffix + ".json").read_text())
        if side.get("format") != RAW_FORMAT:
            raise ValueError(f"unsupported raw format {side.get('format')!r}")
        vals = np.frombuffer(path.read_bytes(), dtype="<f8").astype(float)
        return cls(Grid.from_json(side["grid"]), vals)


def _values(f) -> np.ndarray:
    return f.values if isinstance(f, GridFunction) else np.asarray(f, float).ravel()


def integrate(f, grid: Grid | None = None, mask=None) -> float:
    """Midpoint sum ``sum f * prod(h)`` over the nodes selected by ``mask``."""
    if isinstance(f, GridFunction):
        grid = f.grid
    if grid is None:
        raise ValueError("grid required for a bare array")
    v = _values(f)
    if mask is not None:
        v = v[np.asarray(mask, bool).ravel()]
    return float(np.sum(v) * grid.cell_volume)


# --------------------------------------------------------------------------
# sub-Laplacian assembly


@dataclass
class SparseOperator:
    """Discrete ``Delta_XY`` on all nodes plus its Dirichlet blocks.

    ``full`` is symmetric negative semidefinite on the whole node set;
    ``A_II`` and ``A_IB`` are its interior rows split by column type.
    """

    grid: Grid
    full: sp.csr_matrix
    interior: np.ndarray
    boundary: np.ndarray
    A_II: sp.csr_matrix
    A_IB: sp.csr_matrix
    symmetric: bool = True

    def apply(self, u) -> np.ndarray:
        """``Delta_XY u`` at interior nodes for a full-node vector ``u``."""
        v = _values(u)
        return self.A_II @ v[self.interior] + self.A_IB @ v[self.boundary]

    def apply_full(self, u) -> np.ndarray:
        """``Delta_XY u`` on every node; rows touching the wall are truncated."""
        return self.full @ _values(u)


def _coef(p, pts) -> np.ndarray:
    v = p.evaluate(pts)
    return np.broadcast_to(np.asarray(v, float), pts[0].shape)


def _one_sided_gradient(grid: Grid, V: VectorField, sign: int) -> sp.csr_matrix:
    """Rows ``sum_k a_k(x + s h_k e_k / 2) D_k^s u`` at every base node whose
    stencil fits inside the grid."""
    support = [k for k, c in enumerate(V.coeffs) if not c.is_zero()]
    shape = grid.shape
    idx = np.arange(grid.size).reshape(shape)
    ok = np.ones(shape, bool)
    for k in support:
        sl = [slice(None)] * grid.dim
        sl[k] = slice(shape[k] - 1, None) if sign > 0 else slice(0, 1)
        ok[tuple(sl)] = False
    base = idx[ok]
    mesh = [m[ok] for m in grid.mesh()]
    rows, cols, vals = [], [], []
    r = np.arange(base.size)
    for k in support:
        hk = grid.h[k]
        pts = [m.copy() for m in mesh]
        pts[k] = pts[k] + sign * hk / 2
        c = _coef(V.coeffs[k], pts) / hk
        stride = int(np.prod(shape[k + 1:]))
        nb = base + sign * stride
        if sign > 0:
            rows += [r, r]; cols += [nb, base]; vals += [c, -c]
        else:
            rows += [r, r]; cols += [base, nb]; vals += [c, -c]
    if not rows:
        return sp.csr_matrix((0, grid.size))
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                         shape=(base.size, grid.size))


def _centered_derivative_matrix(grid: Grid, V: VectorField) -> sp.csr_matrix:
    """Centered ``V u`` at every node (wall rows left empty)."""
    inner = grid.interior_mask(1).ravel()
    mesh = [m.ravel() for m in grid.mesh()]
    nodes = np.flatnonzero(inner)
    rows, cols, vals = [], [], []
    for k, p in enumerate(V.coeffs):
        if p.is_zero():
            continue
        c = _coef(p, [m[nodes] for m in mesh]) / (2 * grid.h[k])
        stride = int(np.prod(grid.shape[k + 1:]))
        rows += [nodes, nodes]; cols += [nodes + stride, nodes - stride]; vals += [c, -c]
    if not rows:
        return sp.csr_matrix((grid.size, grid.size))
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                         shape=(grid.size, grid.size))


def assemble_sublaplacian(grid: Grid, frame: Frame, bc: str = "dirichlet") -> SparseOperator:
    """Symmetric negative semidefinite discretization of ``X(X.) + Y(Y.)``.

    The operator is ``L = -1/2 sum_V sum_{s=+-} G_V^s.T G_V^s``, the Hessian of
    the discrete Dirichlet energy built from one-sided field derivatives with
    face-sampled coefficients. For single-axis fields this is the classical
    flux stencil; mixed fields get the standard 7-point cross stencil.
    Non-solenoidal custom fields add the centered ``-(div V)(V u)`` term.
    """
    if bc.lower() != "dirichlet":
        raise ValueError(f"unsupported boundary condition {bc!r}; only dirichlet")
    if frame.dim != grid.dim:
        raise ValueError(f"frame {frame.name!r} has dim {frame.dim}, grid has dim {grid.dim}")
    if min(grid.shape) < 3:
        raise ValueError("grid too small: need at least 3 nodes per axis")
    L = sp.csr_matrix((grid.size, grid.size))
    symmetric = True
    for V in frame.horizontal():
        if V.is_zero():
            continue
        for s in (1, -1):
            G = _one_sided_gradient(grid, V, s)
            L = L - 0.5 * (G.T @ G)
        div = V.divergence()
        if not div.is_zero():
            symmetric = False
            dv = _coef(div, [m.ravel() for m in grid.mesh()])
            L = L - sp.diags(dv) @ _centered_derivative_matrix(grid, V)
    L = L.tocsr()
    L.sum_duplicates()
    L.eliminate_zeros()
    inner = grid.interior_mask(1).ravel()
    interior, boundary = np.flatnonzero(inner), np.flatnonzero(~inner)
    Li = L[interior]
    return SparseOperator(grid, L, interior, boundary, Li[:, interior].tocsr(),
                          Li[:, boundary].tocsr(), symmetric)


# --------------------------------------------------------------------------
# finite-difference jets


def _centered(U: np.ndarray, axis: int, h: float) -> np.ndarray:
    out = np.full(U.shape, np.nan)
    sl_c = [slice(None)] * U.ndim
    sl_p = [slice(None)] * U.ndim
    sl_m = [slice(None)] * U.ndim
    sl_c[axis], sl_p[axis], sl_m[axis] = slice(1, -1), slice(2, None), slice(None, -2)
    out[tuple(sl_c)] = (U[tuple(sl_p)] - U[tuple(sl_m)]) / (2 * h)
    return out


def apply_field_fd(grid: Grid, V: VectorField, U: np.ndarray, mesh=None) -> np.ndarray:
    """Centered ``V U`` on the node array; NaN on the outer layer."""
    mesh = grid.mesh() if mesh is None else mesh
    out = np.zeros(grid.shape)
    for k, p in enumerate(V.coeffs):
        if p.is_zero():
            continue
        out = out + _coef(p, mesh) * _centered(U, k, grid.h[k])
    out[~grid.interior_mask(1)] = np.nan
    return out


def grid_jets(u: GridFunction, frame: Frame, with_bracket: bool = True) -> tuple[JetSample, np.ndarray]:
    """Jets at every node by nested centered field stencils.

    Returns ``(jet, valid)`` where ``valid`` marks nodes at distance >= 2 from
    the walls; entries elsewhere are NaN.
    """
    grid = u.grid
    if frame.dim != grid.dim:
        raise ValueError(f"frame {frame.name!r} has dim {frame.dim}, grid has dim {grid.dim}")
    U = u.array()
    mesh = grid.mesh()
    X, Y, Z = frame.X, frame.Y, frame.Z
    Xu = apply_field_fd(grid, X, U, mesh)
    Yu = apply_field_fd(grid, Y, U, mesh)
    Zu = apply_field_fd(grid, Z, U, mesh)
    jet = JetSample(
        point=tuple(mesh), u=U, Xu=Xu, Yu=Yu, Zu=Zu,
        XXu=apply_field_fd(grid, X, Xu, mesh), XYu=apply_field_fd(grid, X, Yu, mesh),
        YXu=apply_field_fd(grid, Y, Xu, mesh), YYu=apply_field_fd(grid, Y, Yu, mesh),
        ZXu=apply_field_fd(grid, Z, Xu, mesh) if with_bracket else None,
        ZYu=apply_field_fd(grid, Z, Yu, mesh) if with_bracket else None,
    )
    return jet, grid.interior_mask(2)


def jet_from_grid(u: GridFunction, node: Sequence[int], frame: Frame) -> JetSample:
    """Jet at one node; the node must sit at least 2 nodes from every wall."""
    node = tuple(int(i) for i in node)
    grid = u.grid
    if len(node) != grid.dim:
        raise ValueError(f"node index has {len(node)} entries, grid has dim {grid.dim}")
    for i, m in zip(node, grid.shape):
        if i < 2 or i > m - 3:
            raise ValueError(f"node {node} is closer than 2 nodes to the boundary")
    # Work on the 5^d patch around the node only.
    sl = tuple(slice(i - 2, i + 3) for i in node)
    lo = tuple(a + (i - 2) * hk + (0.5 * hk if grid.centering is Centering.CELL else 0.0)
               for a, i, hk in zip(grid.lo, node, grid.h))
    patch = Grid(lo, tuple(a + 4 * hk for a, hk in zip(lo, grid.h)), (4,) * grid.dim)
    sub = GridFunction(patch, u.array()[sl])
    jet, _ = grid_jets(sub, frame)
    return jet.at((2,) * grid.dim)


# --------------------------------------------------------------------------
# anisotropic balls and cutoffs


def homogeneous_norm(grid: Grid, kind: NormKind | str) -> np.ndarray:
    """Node values of the homogeneous norm, shaped like ``grid.shape``."""
    kind = NormKind(kind)
    m = grid.mesh()
    if kind is NormKind.EUCLIDEAN:
        return np.sqrt(sum(c ** 2 for c in m))
    if kind is NormKind.GRUSHIN:
        if grid.dim != 2:
            raise ValueError("Grushin norm needs a 2D grid")
        return (m[0] ** 4 + m[1] ** 2) ** 0.25
    if grid.dim != 3:
        raise ValueError("Heisenberg norm needs a 3D grid")
    return ((m[0] ** 2 + m[1] ** 2) ** 2 + m[2] ** 2) ** 0.25


def anisotropic_ball_mask(grid: Grid, R: float, kind: NormKind | str) -> np.ndarray:
    """Flat boolean mask of nodes with ``||.|| < R``."""
    if not R > 0:
        raise ValueError("R must be positive")
    return (homogeneous_norm(grid, kind) < R).ravel()


def chi_profile(r, R: float) -> np.ndarray:
    """Logarithmic cutoff: 1/2 on ``r <= sqrt R``, ``(ln R - ln r)/ln R`` up to ``R``, then 0."""
    r = np.asarray(r, float)
    lnR = np.log(R)
    out = np.zeros_like(r)
    inner = r <= np.sqrt(R)
    mid = ~inner & (r < R)
    out[inner] = 0.5
    out[mid] = (lnR - np.log(r[mid])) / lnR
    return out


def cutoff_chi(grid: Grid, R: float, kind: NormKind | str) -> GridFunction:
    if not R > 1:
        raise ValueError("cutoff needs R > 1")
    return GridFunction(grid, chi_profile(homogeneous_norm(grid, kind), R).ravel())


def partial_derivative(u: GridFunction, axis: int) -> GridFunction:
    """Coordinate derivative with second-order differences everywhere (one-sided at walls)."""
    d = np.gradient(u.array(), u.grid.h[axis], axis=axis, edge_order=2)
    return GridFunction(u.grid, d.ravel())
