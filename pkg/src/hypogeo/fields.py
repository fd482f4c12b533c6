"""Coordinate vector fields with polynomial coefficients.

A :class:`VectorField` is ``sum_k a_k(x) d/dx_k`` with each ``a_k`` an exact
:class:`~hypogeo.polynomial.Polynomial`. A :class:`Frame` bundles the two
horizontal fields ``X``, ``Y`` with their bracket ``Z = [X, Y]``.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from hypogeo.polynomial import Polynomial


class FrameKind(str, enum.Enum):
    EUCLIDEAN1D = "euclidean1d"
    EUCLIDEAN2D = "euclidean2d"
    GRUSHIN2D = "grushin2d"
    HEISENBERG3D = "heisenberg3d"
    MARTINET3D = "martinet3d"
    CUSTOM = "custom"


COORD_NAMES = {1: ("x",), 2: ("x", "y"), 3: ("x", "y", "z")}


@dataclass(frozen=True)
class VectorField:
    name: str
    dim: int
    coeffs: tuple[Polynomial, ...]

    def __post_init__(self):
        coeffs = tuple(self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        if len(coeffs) != self.dim:
            raise ValueError(f"field {self.name!r} has {len(coeffs)} coefficients, dim {self.dim}")
        for c in coeffs:
            if c.dim != self.dim:
                raise ValueError(f"coefficient of {self.name!r} lives in dim {c.dim}, expected {self.dim}")

    @classmethod
    def from_coeffs(cls, name: str, coeffs: Sequence) -> "VectorField":
        """Build from polynomials or constants; constants are promoted."""
        dim = len(coeffs)
        polys = tuple(c if isinstance(c, Polynomial) else Polynomial.constant(dim, c)
                      for c in coeffs)
        return cls(name, dim, polys)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def __call__(self, p: Polynomial) -> Polynomial:
        return apply_field(self, p)

    def __neg__(self) -> "VectorField":
        return VectorField(f"-{self.name}", self.dim, tuple(-c for c in self.coeffs))

    def __add__(self, other: "VectorField") -> "VectorField":
        _check_dims(self, other)
        return VectorField(f"({self.name}+{other.name})", self.dim,
                           tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "VectorField") -> "VectorField":
        return self + (-other)

    def divergence(self) -> Polynomial:
        """Euclidean divergence ``sum_k d a_k / dx_k``."""
        total = Polynomial.zero(self.dim)
        for k, c in enumerate(self.coeffs):
            total = total + c.diff(k)
        return total

    def to_json(self) -> list[dict[str, str]]:
        return [c.to_json() for c in self.coeffs]


def _check_dims(a: VectorField, b: VectorField):
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.name} has dim {a.dim}, {b.name} has dim {b.dim}")


def apply_field(field: VectorField, p: Polynomial) -> Polynomial:
    """``sum_k a_k * dp/dx_k``, exact."""
    if field.dim != p.dim:
        raise ValueError(f"field {field.name!r} has dim {field.dim}, polynomial has dim {p.dim}")
    out = Polynomial.zero(p.dim)
    for k, a in enumerate(field.coeffs):
        if a:
            dp = p.diff(k)
            if dp:
                out = out + a * dp
    return out


def evaluate_field(field: VectorField, point: Sequence) -> list:
    """Coefficient values at ``point``; exact for rational input."""
    if len(point) != field.dim:
        raise ValueError(f"point has {len(point)} coordinates, field {field.name!r} has dim {field.dim}")
    return [c.evaluate(point) for c in field.coeffs]


def lie_bracket(a: VectorField, b: VectorField, name: str | None = None) -> VectorField:
    """``[a, b]`` with coefficient ``k`` equal to ``a(b_k) - b(a_k)``."""
    _check_dims(a, b)
    coeffs = tuple(apply_field(a, bk) - apply_field(b, ak)
                   for ak, bk in zip(a.coeffs, b.coeffs))
    return VectorField(name or f"[{a.name},{b.name}]", a.dim, coeffs)


@dataclass(frozen=True)
class Frame:
    X: VectorField
    Y: VectorField
    kind: FrameKind = FrameKind.CUSTOM
    name: str = "custom"
    Z: VectorField = field(default=None)

    def __post_init__(self):
        _check_dims(self.X, self.Y)
        bracket = lie_bracket(self.X, self.Y, name="Z")
        if self.Z is None:
            object.__setattr__(self, "Z", bracket)
        elif self.Z.coeffs != bracket.coeffs:
            raise ValueError("Z must equal the Lie bracket [X, Y]")

    @property
    def dim(self) -> int:
        return self.X.dim

    @property
    def coord_names(self) -> tuple[str, ...]:
        return COORD_NAMES.get(self.dim, tuple(f"x{k}" for k in range(self.dim)))

    def horizontal(self) -> tuple[VectorField, VectorField]:
        return self.X, self.Y

    def to_json(self) -> dict:
        return {"name": self.name, "dim": self.dim,
                "X": self.X.to_json(), "Y": self.Y.to_json()}


def _frame(kind: FrameKind, X, Y) -> Frame:
    return Frame(VectorField.from_coeffs("X", X), VectorField.from_coeffs("Y", Y),
                 kind=kind, name=kind.value)


def euclidean1d() -> Frame:
    """``X = d/dx`` and ``Y = 0`` on the line; the scalar ODE reduction."""
    return _frame(FrameKind.EUCLIDEAN1D, [1], [0])


def euclidean2d() -> Frame:
    return _frame(FrameKind.EUCLIDEAN2D, [1, 0], [0, 1])


def grushin2d() -> Frame:
    x, _ = Polynomial.variables(2)
    return _frame(FrameKind.GRUSHIN2D, [1, 0], [0, x])


def heisenberg3d() -> Frame:
    x, y, _ = Polynomial.variables(3)
    half = Fraction(1, 2)
    return _frame(FrameKind.HEISENBERG3D, [1, 0, -half * y], [0, 1, half * x])


def martinet3d() -> Frame:
    x, _, _ = Polynomial.variables(3)
    return _frame(FrameKind.MARTINET3D, [1, 0, 0], [0, 1, Fraction(1, 2) * x ** 2])


BUILTIN_FRAMES = {
    "euclidean1d": euclidean1d,
    "euclidean2d": euclidean2d,
    "grushin2d": grushin2d,
    "heisenberg3d": heisenberg3d,
    "martinet3d": martinet3d,
}


def frame_from_json(data: dict) -> Frame:
    """Custom frame from ``{"name", "dim", "X": [...], "Y": [...]}``.

    Each of ``X`` and ``Y`` lists ``dim`` coefficient polynomials as sparse
    monomial maps, e.g. ``{"1,0": "1"}`` for ``x``.
    """
    try:
        dim = int(data["dim"])
        X = [Polynomial.from_json(dim, c) for c in data["X"]]
        Y = [Polynomial.from_json(dim, c) for c in data["Y"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed frame description: {exc}") from exc
    return Frame(VectorField("X", dim, tuple(X)), VectorField("Y", dim, tuple(Y)),
                 kind=FrameKind.CUSTOM, name=str(data.get("name", "custom")))


def get_frame(spec: str | dict | Frame) -> Frame:
    """Resolve a built-in name, a JSON path, or an inline JSON description."""
    if isinstance(spec, Frame):
        return spec
    if isinstance(spec, dict):
        return frame_from_json(spec)
    key = spec.lower()
    if key in BUILTIN_FRAMES:
        return BUILTIN_FRAMES[key]()
    path = Path(spec)
    if path.suffix == ".json" or path.exists():
        if not path.exists():
            raise FileNotFoundError(f"frame file not found: {spec}")
        return frame_from_json(json.loads(path.read_text()))
    raise ValueError(f"unknown frame {spec!r}; built-ins: {sorted(BUILTIN_FRAMES)}")


def bracket_generated(frame: Frame, max_depth: int) -> list[list[VectorField]]:
    """Fields grouped by bracket depth: depth 1 is ``[X, Y]``, depth ``d``
    adds ``[X, V]`` and ``[Y, V]`` for every ``V`` new at depth ``d - 1``."""
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    levels = [[frame.X, frame.Y]]
    if max_depth >= 2:
        levels.append([frame.Z])
    for _ in range(3, max_depth + 1):
        new = []
        for V in levels[-1]:
            for G in (frame.X, frame.Y):
                B = lie_bracket(G, V)
                if not B.is_zero():
                    new.append(B)
        levels.append(new)
    return levels


def hormander_rank(frame: Frame, point: Sequence, max_depth: int) -> tuple[int, int]:
    """Rank of the span of ``X``, ``Y`` and iterated brackets at ``point``.

    Returns ``(rank, depth)`` where ``depth`` is the smallest bracket depth
    at which that rank is first reached. Rational points (ints/Fractions)
    use exact elimination; anything else uses an SVD with tolerance 1e-10.
    """
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    exact = all(isinstance(p, (int, Fraction, np.integer)) for p in point)
    rows: list = []
    best_rank, best_depth = 0, 1
    for depth, level in enumerate(bracket_generated(frame, max_depth), start=1):
        for V in level:
            rows.append(evaluate_field(V, point))
        r = _exact_rank(rows) if exact else _float_rank(rows)
        if r > best_rank:
            best_rank, best_depth = r, depth
    return best_rank, best_depth


def _exact_rank(rows) -> int:
    m = [[Fraction(v) for v in r] for r in rows]
    if not m:
        return 0
    ncols = len(m[0])
    rank = 0
    for col in range(ncols):
        piv = next((i for i in range(rank, len(m)) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for i in range(len(m)):
            if i != rank and m[i][col] != 0:
                f = m[i][col] / m[rank][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[rank])]
        rank += 1
    return rank


def _float_rank(rows, tol: float = 1e-10) -> int:
    a = np.array([[float(v) for v in r] for r in rows], dtype=float)
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    return int((s > tol).sum())
