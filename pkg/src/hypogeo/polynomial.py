"""Multivariate polynomials with exact rational coefficients.

A polynomial is stored as integer numerators keyed by exponent tuples over a
single positive common denominator, reduced so that the gcd of all
numerators and the denominator is one. That form is canonical: two
polynomials are equal iff their dimension, numerator maps and denominators
agree. Products go through the packed-key kernels in ``hypogeo._kernels``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

from hypogeo import _kernels

Exponent = tuple[int, ...]

_VARNAMES = ("x", "y", "z", "w", "v", "s")


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, np.integer)):
        return Fraction(int(c))
    if isinstance(c, str):
        return Fraction(c)
    if isinstance(c, float):
        return Fraction(c)
    raise TypeError(f"unsupported coefficient type {type(c).__name__}")


class Polynomial:
    """Immutable polynomial in ``dim`` variables over the rationals."""

    __slots__ = ("dim", "_num", "_den", "_hash")

    def __init__(self, dim: int, terms: Mapping[Exponent, object] | None = None):
        if dim < 0:
            raise ValueError("dim must be non-negative")
        fr: dict[Exponent, Fraction] = {}
        for exp, c in (terms or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != dim or any(e < 0 for e in exp):
                raise ValueError(f"bad exponent {exp} for dim {dim}")
            c = _as_fraction(c)
            if c:
                fr[exp] = fr.get(exp, Fraction(0)) + c
        den = 1
        for c in fr.values():
            den = den * c.denominator // math.gcd(den, c.denominator)
        num = {e: int(c * den) for e, c in fr.items() if c}
        self._set(dim, num, den)

    def _set(self, dim, num, den):
        self.dim = dim
        if not num:
            self._num, self._den = {}, 1
        else:
            g = math.gcd(den, *num.values())
            if g != 1:
                num = {e: c // g for e, c in num.items()}
                den //= g
            self._num, self._den = num, den
        self._hash = None

    @classmethod
    def _raw(cls, dim: int, num: dict, den: int = 1) -> "Polynomial":
        p = cls.__new__(cls)
        p._set(dim, {e: c for e, c in num.items() if c}, den)
        return p

    # constructors -------------------------------------------------------

    @classmethod
    def zero(cls, dim: int) -> "Polynomial":
        return cls._raw(dim, {})

    @classmethod
    def constant(cls, dim: int, c) -> "Polynomial":
        return cls(dim, {(0,) * dim: c})

    @classmethod
    def variable(cls, dim: int, k: int) -> "Polynomial":
        if not 0 <= k < dim:
            raise ValueError(f"variable index {k} out of range for dim {dim}")
        exp = tuple(1 if i == k else 0 for i in range(dim))
        return cls._raw(dim, {exp: 1})

    @classmethod
    def variables(cls, dim: int) -> tuple["Polynomial", ...]:
        return tuple(cls.variable(dim, k) for k in range(dim))

    @classmethod
    def random(cls, dim: int, degree: int, rng: np.random.Generator,
               coef_range: int = 3) -> "Polynomial":
        """Each monomial of total degree <= ``degree`` gets a uniform integer
        coefficient in ``[-coef_range, coef_range]`` (zero allowed)."""
        exps = monomials_up_to(dim, degree)
        coefs = rng.integers(-coef_range, coef_range + 1, size=len(exps))
        return cls._raw(dim, {e: int(c) for e, c in zip(exps, coefs)})

    # inspection ---------------------------------------------------------

    @property
    def terms(self) -> dict[Exponent, Fraction]:
        """Coefficients in graded-lex order (highest degree first)."""
        return {e: Fraction(self._num[e], self._den) for e in self.sorted_exponents()}

    def sorted_exponents(self) -> list[Exponent]:
        return sorted(self._num, key=lambda e: (sum(e), e), reverse=True)

    def coefficient(self, exp: Iterable[int]) -> Fraction:
        return Fraction(self._num.get(tuple(exp), 0), self._den)

    def is_zero(self) -> bool:
        return not self._num

    def __bool__(self) -> bool:
        return bool(self._num)

    def __len__(self) -> int:
        return len(self._num)

    @property
    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self._num), default=-1)

    def degree_in(self, k: int) -> int:
        return max((e[k] for e in self._num), default=-1)

    def depends_on(self, k: int) -> bool:
        return any(e[k] for e in self._num)

    def is_constant(self) -> bool:
        return all(not any(e) for e in self._num)

    def constant_value(self) -> Fraction:
        return self.coefficient((0,) * self.dim)

    # arithmetic ---------------------------------------------------------

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.dim != self.dim:
                raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")
            return other
        return Polynomial.constant(self.dim, other)

    def __add__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        if not other._num:
            return self
        if not self._num:
            return other
        d1, d2 = self._den, other._den
        L = d1 * d2 // math.gcd(d1, d2)
        m1, m2 = L // d1, L // d2
        num = {e: c * m1 for e, c in self._num.items()}
        for e, c in other._num.items():
            num[e] = num.get(e, 0) + c * m2
        return Polynomial._raw(self.dim, num, L)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw(self.dim, {e: -c for e, c in self._num.items()}, self._den)

    def __sub__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            try:
                c = _as_fraction(other)
            except TypeError:
                return NotImplemented
            return self.scale(c)
        other = self._coerce(other)
        if not self._num or not other._num:
            return Polynomial.zero(self.dim)
        if len(self._num) == 1 or len(other._num) == 1:
            return self._mul_monomial(other)
        return self._mul_packed(other)

    __rmul__ = __mul__

    def scale(self, c) -> "Polynomial":
        c = _as_fraction(c)
        if not c:
            return Polynomial.zero(self.dim)
        return Polynomial._raw(self.dim,
                               {e: v * c.numerator for e, v in self._num.items()},
                               self._den * c.denominator)

    def _mul_monomial(self, other):
        a, b = (self, other) if len(other._num) == 1 else (other, self)
        (me, mc), = b._num.items()
        num = {tuple(x + y for x, y in zip(e, me)): c * mc for e, c in a._num.items()}
        return Polynomial._raw(self.dim, num, a._den * b._den)

    def _mul_packed(self, other):
        dim = self.dim
        ea = np.array(list(self._num), dtype=np.int64).reshape(-1, dim)
        eb = np.array(list(other._num), dtype=np.int64).reshape(-1, dim)
        radix = (ea.max(axis=0) + eb.max(axis=0) + 1) if dim else np.zeros(0, np.int64)
        strides = np.ones(dim, dtype=np.int64)
        for k in range(1, dim):
            strides[k] = strides[k - 1] * radix[k - 1]
        keys, coefs = _kernels.poly_mul(ea @ strides, list(self._num.values()),
                                        eb @ strides, list(other._num.values()))
        keys = np.asarray(keys, dtype=np.int64)
        exps = (keys[:, None] // strides[None, :]) % radix[None, :]
        num = dict(zip(map(tuple, exps.tolist()), coefs))
        return Polynomial._raw(dim, num, self._den * other._den)

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a non-negative integer")
        result = Polynomial.constant(self.dim, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # calculus -----------------------------------------------------------

    def diff(self, k: int) -> "Polynomial":
        """Exact partial derivative with respect to variable ``k``."""
        if not 0 <= k < self.dim:
            raise ValueError(f"variable index {k} out of range for dim {self.dim}")
        num = {}
        for e, c in self._num.items():
            if e[k]:
                ne = e[:k] + (e[k] - 1,) + e[k + 1:]
                num[ne] = c * e[k]
        return Polynomial._raw(self.dim, num, self._den)

    def evaluate(self, point):
        """Evaluate at a point.

        Exact (``Fraction``) when every coordinate is an int or Fraction;
        otherwise float, and coordinates may be numpy arrays of a common shape.
        """
        point = list(point)
        if len(point) != self.dim:
            raise ValueError(f"point has {len(point)} coordinates, polynomial dim {self.dim}")
        if all(isinstance(p, (int, Fraction, np.integer)) for p in point):
            point = [Fraction(int(p)) if isinstance(p, np.integer) else Fraction(p)
                     for p in point]
            total = Fraction(0)
            for e, c in self._num.items():
                term = Fraction(c)
                for p, k in zip(point, e):
                    if k:
                        term *= p ** k
                total += term
            return total / self._den
        arrs = [np.asarray(p, dtype=np.float64) for p in point]
        shape = np.broadcast_shapes(*(a.shape for a in arrs)) if arrs else ()
        out = np.zeros(shape)
        powers = [{} for _ in arrs]
        for e, c in self._num.items():
            term = np.full(shape, float(Fraction(c, self._den)))
            for k, ek in enumerate(e):
                if ek:
                    pk = powers[k].get(ek)
                    if pk is None:
                        pk = powers[k][ek] = arrs[k] ** ek
                    term = term * pk
            out = out + term
        return out if shape else float(out)

    __call__ = evaluate

    # comparison / display ----------------------------------------------

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return (self.dim == other.dim and self._den == other._den
                    and self._num == other._num)
        try:
            return self == Polynomial.constant(self.dim, _as_fraction(other))
        except TypeError:
            return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.dim, self._den, frozenset(self._num.items())))
        return self._hash

    def __repr__(self):
        return f"Polynomial({self.dim}, {self})"

    def __str__(self):
        if not self._num:
            return "0"
        names = _VARNAMES if self.dim <= len(_VARNAMES) else \
            tuple(f"x{k}" for k in range(self.dim))
        parts = []
        for e in self.sorted_exponents():
            c = Fraction(self._num[e], self._den)
            mono = "*".join(names[k] if p == 1 else f"{names[k]}^{p}"
                            for k, p in enumerate(e) if p)
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            if mono:
                body = mono if mag == 1 else f"{mag}*{mono}"
            else:
                body = str(mag)
            parts.append((sign, body))
        s = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            s += f" {sign} {body}"
        return s

    # serialization ------------------------------------------------------

    def to_json(self) -> dict[str, str]:
        """Sparse monomial map ``{"e1,e2,...": "p/q"}``."""
        return {",".join(map(str, e)): str(Fraction(self._num[e], self._den))
                for e in self.sorted_exponents()}

    @classmethod
    def from_json(cls, dim: int, data: Mapping[str, object]) -> "Polynomial":
        terms = {}
        for key, c in data.items():
            exp = tuple(int(t) for t in str(key).split(",")) if str(key) else ()
            terms[exp] = c
        return cls(dim, terms)


def monomials_up_to(dim: int, degree: int) -> list[Exponent]:
    """All exponent tuples of total degree <= ``degree``, graded order."""
    out: list[Exponent] = []

    def rec(prefix, left, k):
        if k == dim:
            out.append(tuple(prefix))
            return
        for e in range(left + 1):
            prefix.append(e)
            rec(prefix, left - e, k + 1)
            prefix.pop()

    rec([], degree, 0)
    return sorted(out, key=lambda e: (sum(e), e))
