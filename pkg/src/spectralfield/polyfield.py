"""Exact multivariate polynomials and symmetric matrix fields built from them.

A :class:`PolyMatrixField` is a symmetric ``m x m`` grid of polynomials in
``n`` variables.  All derivatives of the field are taken symbolically, entry by
entry, and only then evaluated, so the derivative tensors carry no
discretisation error.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from ._validation import check_vector
from .exceptions import DimensionError, NotSymmetricError

COEF_FLOOR = 1e-300


class Monomial(NamedTuple):
    coefficient: float
    exponents: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class Polynomial:
    """Polynomial in ``dimension`` real variables with float coefficients.

    Terms are kept normalized: exponent vectors are unique, sorted, and terms
    with ``|c| < 1e-300`` are dropped.  Equality compares the normalized term
    lists exactly.

    >>> x, y = Polynomial.variables(2)
    >>> p = x**2 * y
    >>> p.partial(0)
    Polynomial(2, {(1, 1): 2.0})
    """

    dimension: int
    terms: tuple[Monomial, ...] = ()

    def __post_init__(self):
        if int(self.dimension) != self.dimension or self.dimension < 1:
            raise DimensionError("polynomial dimension must be a positive integer")
        merged: dict[tuple[int, ...], float] = {}
        for coef, exps in self.terms:
            exps = tuple(int(e) for e in exps)
            if len(exps) != self.dimension:
                raise DimensionError(
                    f"exponent vector {exps} does not match dimension {self.dimension}"
                )
            if any(e < 0 for e in exps):
                raise ValueError(f"negative exponent in {exps}")
            coef = float(coef)
            if not np.isfinite(coef):
                raise ValueError("non-finite coefficient")
            merged[exps] = merged.get(exps, 0.0) + coef
        terms = tuple(
            Monomial(c, e) for e, c in sorted(merged.items()) if abs(c) >= COEF_FLOOR
        )
        object.__setattr__(self, "terms", terms)

    # construction

    @classmethod
    def from_dict(cls, dimension: int, coeffs: Mapping[Sequence[int], float]) -> Polynomial:
        return cls(dimension, tuple(Monomial(c, tuple(e)) for e, c in coeffs.items()))

    @classmethod
    def constant(cls, value: float, dimension: int) -> Polynomial:
        return cls(dimension, (Monomial(value, (0,) * dimension),))

    @classmethod
    def variable(cls, axis: int, dimension: int) -> Polynomial:
        if not 0 <= axis < dimension:
            raise IndexError(f"axis {axis} out of range for dimension {dimension}")
        exps = tuple(1 if i == axis else 0 for i in range(dimension))
        return cls(dimension, (Monomial(1.0, exps),))

    @classmethod
    def variables(cls, dimension: int) -> tuple[Polynomial, ...]:
        return tuple(cls.variable(i, dimension) for i in range(dimension))

    # inspection

    def as_dict(self) -> dict[tuple[int, ...], float]:
        return {t.exponents: t.coefficient for t in self.terms}

    @property
    def degree(self) -> int:
        """Total degree; ``-1`` for the zero polynomial."""
        return max((sum(t.exponents) for t in self.terms), default=-1)

    def is_zero(self) -> bool:
        return not self.terms

    @cached_property
    def _arrays(self):
        if not self.terms:
            return np.zeros(0), np.zeros((0, self.dimension), dtype=int)
        coefs = np.array([t.coefficient for t in self.terms])
        exps = np.array([t.exponents for t in self.terms], dtype=int)
        return coefs, exps

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.dimension == other.dimension and self.terms == other.terms

    def __hash__(self):
        return hash((self.dimension, self.terms))

    def __repr__(self):
        return f"Polynomial({self.dimension}, {self.as_dict()})"

    # arithmetic

    def _coerce(self, other) -> Polynomial:
        if isinstance(other, Polynomial):
            if other.dimension != self.dimension:
                raise DimensionError("polynomials of different dimension")
            return other
        if np.isscalar(other):
            return Polynomial.constant(float(other), self.dimension)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Polynomial(self.dimension, self.terms + other.terms)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.dimension, tuple(Monomial(-c, e) for c, e in self.terms))

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = tuple(
            Monomial(c1 * c2, tuple(a + b for a, b in zip(e1, e2)))
            for c1, e1 in self.terms
            for c2, e2 in other.terms
        )
        return Polynomial(self.dimension, terms)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not np.isscalar(other):
            return NotImplemented
        return self * (1.0 / float(other))

    def __pow__(self, k: int):
        if int(k) != k or k < 0:
            raise ValueError("only non-negative integer powers are supported")
        out = Polynomial.constant(1.0, self.dimension)
        for _ in range(int(k)):
            out = out * self
        return out

    # calculus

    def __call__(self, x) -> float:
        return poly_eval(self, x)

    def partial(self, axis: int) -> Polynomial:
        return poly_partial(self, axis)

    def compose(self, polys: Sequence[Polynomial]) -> Polynomial:
        """Substitute ``x_i -> polys[i]``; the result lives in the inner dimension."""
        if len(polys) != self.dimension:
            raise DimensionError("need one substitute polynomial per variable")
        inner = polys[0].dimension
        out = Polynomial(inner)
        for coef, exps in self.terms:
            term = Polynomial.constant(coef, inner)
            for p, e in zip(polys, exps):
                if e:
                    term = term * p**e
            out = out + term
        return out


def poly_eval(p: Polynomial, x) -> float:
    """Evaluate ``p`` at the point ``x``."""
    x = check_vector(x, p.dimension, "point")
    coefs, exps = p._arrays
    if coefs.size == 0:
        return 0.0
    return float(coefs @ np.prod(x**exps, axis=1))


def poly_partial(p: Polynomial, axis: int) -> Polynomial:
    """Exact partial derivative with respect to variable ``axis`` (0-based)."""
    if not 0 <= axis < p.dimension:
        raise IndexError(f"axis {axis} out of range for dimension {p.dimension}")
    terms = []
    for coef, exps in p.terms:
        k = exps[axis]
        if k == 0:
            continue
        lowered = exps[:axis] + (k - 1,) + exps[axis + 1 :]
        terms.append(Monomial(coef * k, lowered))
    return Polynomial(p.dimension, tuple(terms))


@dataclass(frozen=True, eq=False)
class PolyMatrixField:
    """Symmetric matrix of polynomials, ``x -> H(x)`` in ``S(m)``.

    Build one with :meth:`from_entries` (checks symmetry) or
    :func:`field_from_potential`.
    """

    entries: tuple[tuple[Polynomial, ...], ...]
    name: str | None = None

    def __post_init__(self):
        rows = tuple(tuple(row) for row in self.entries)
        m = len(rows)
        if m == 0 or any(len(r) != m for r in rows):
            raise DimensionError("entries must form a non-empty square grid")
        n = rows[0][0].dimension
        for i in range(m):
            for k in range(m):
                if rows[i][k].dimension != n:
                    raise DimensionError("all entries must share one dimension")
                if k > i and rows[i][k] != rows[k][i]:
                    raise NotSymmetricError(f"entries ({i},{k}) and ({k},{i}) differ")
        object.__setattr__(self, "entries", rows)

    @classmethod
    def from_entries(cls, entries: Iterable[Iterable[Polynomial]], name=None):
        return cls(tuple(tuple(r) for r in entries), name)

    @classmethod
    def constant(cls, matrix, n: int, name=None):
        matrix = np.asarray(matrix, dtype=float)
        return cls.from_entries(
            [[Polynomial.constant(v, n) for v in row] for row in matrix], name
        )

    @property
    def m(self) -> int:
        return len(self.entries)

    @property
    def n(self) -> int:
        return self.entries[0][0].dimension

    def __eq__(self, other):
        if not isinstance(other, PolyMatrixField):
            return NotImplemented
        return self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def __call__(self, x) -> np.ndarray:
        return field_eval(self, x)

    def map(self, fn) -> PolyMatrixField:
        """Apply ``fn`` to every entry (upper triangle, mirrored)."""
        m = self.m
        upper = {(i, k): fn(self.entries[i][k]) for i in range(m) for k in range(i, m)}
        return PolyMatrixField.from_entries(
            [[upper[min(i, k), max(i, k)] for k in range(m)] for i in range(m)], self.name
        )

    def partial(self, axis: int) -> PolyMatrixField:
        return self.map(lambda p: poly_partial(p, axis))

    @cached_property
    def first_partials(self) -> tuple[PolyMatrixField, ...]:
        return tuple(self.partial(i) for i in range(self.n))

    @cached_property
    def second_partials(self) -> tuple[tuple[PolyMatrixField, ...], ...]:
        n = self.n
        cache = {}
        for i in range(n):
            for k in range(i, n):
                cache[i, k] = self.first_partials[i].partial(k)
        return tuple(tuple(cache[min(i, k), max(i, k)] for k in range(n)) for i in range(n))

    @cached_property
    def _compiled(self):
        # Flatten the upper triangle into one coefficient/exponent table.
        m, n = self.m, self.n
        coefs, exps, slots = [], [], []
        for i in range(m):
            for k in range(i, m):
                for c, e in self.entries[i][k].terms:
                    coefs.append(c)
                    exps.append(e)
                    slots.append(i * m + k)
        return (
            np.array(coefs, dtype=float),
            np.array(exps, dtype=int).reshape(-1, n),
            np.array(slots, dtype=int),
        )

    def _eval_unchecked(self, x: np.ndarray) -> np.ndarray:
        m = self.m
        coefs, exps, slots = self._compiled
        vals = coefs * np.prod(x**exps, axis=1) if coefs.size else coefs
        upper = np.bincount(slots, weights=vals, minlength=m * m).reshape(m, m)
        return upper + np.triu(upper, 1).T

    def derivative_tensor(self, x) -> np.ndarray:
        """Array ``T`` of shape ``(n, m, m)`` with ``T[i] = dH/dx_i (x)``."""
        x = check_vector(x, self.n, "point")
        return np.stack([d._eval_unchecked(x) for d in self.first_partials])

    def second_derivative_tensor(self, x) -> np.ndarray:
        """Array of shape ``(n, n, m, m)`` holding all second partials at ``x``."""
        x = check_vector(x, self.n, "point")
        n, m = self.n, self.m
        out = np.empty((n, n, m, m))
        for i in range(n):
            for k in range(i, n):
                out[i, k] = self.second_partials[i][k]._eval_unchecked(x)
                out[k, i] = out[i, k]
        return out


def field_eval(F: PolyMatrixField, x) -> np.ndarray:
    """``H(x)`` as a symmetric float array."""
    x = check_vector(x, F.n, "point")
    return F._eval_unchecked(x)


def field_dir_deriv(F: PolyMatrixField, e, x) -> np.ndarray:
    """Directional derivative ``D_e H(x) = sum_i e_i dH/dx_i(x)``."""
    e = check_vector(e, F.n, "direction")
    return np.tensordot(e, F.derivative_tensor(x), axes=1)


def field_jac_deriv(F: PolyMatrixField, q, x) -> np.ndarray:
    """Jacobian of ``x -> H(x) q``, an ``m x n`` matrix."""
    q = check_vector(q, F.m, "q")
    return jac_from_tensor(F.derivative_tensor(x), q)


def field_second_dir(F: PolyMatrixField, a, b, x) -> np.ndarray:
    """``D_b D_a H(x) = sum_{i,k} a_i b_k d^2 H / dx_i dx_k (x)``."""
    a = check_vector(a, F.n, "a")
    b = check_vector(b, F.n, "b")
    return np.einsum("i,k,ikab->ab", a, b, F.second_derivative_tensor(x))


def field_hess_quadform(F: PolyMatrixField, xi, x) -> np.ndarray:
    """Hessian (``n x n``) of the scalar map ``x -> xi^T H(x) xi``."""
    xi = check_vector(xi, F.m, "xi")
    return hess_quadform_from_tensor(F.second_derivative_tensor(x), xi)


def jac_from_tensor(dH: np.ndarray, q: np.ndarray) -> np.ndarray:
    # column k is (dH/dx_k) q
    return (dH @ q).T


def hess_quadform_from_tensor(d2H: np.ndarray, xi: np.ndarray) -> np.ndarray:
    out = np.einsum("a,ikab,b->ik", xi, d2H, xi)
    return 0.5 * (out + out.T)


def field_from_potential(u: Polynomial, name=None) -> PolyMatrixField:
    """Hessian field ``H = D^2 u`` of a scalar polynomial potential."""
    n = u.dimension
    grads = [poly_partial(u, i) for i in range(n)]
    return PolyMatrixField.from_entries(
        [[poly_partial(grads[i], k) for k in range(n)] for i in range(n)], name
    )


def field_compose(F: PolyMatrixField, curve: Sequence[Polynomial]) -> PolyMatrixField:
    """Restrict the field to a polynomial curve, ``t -> H(curve(t))``."""
    return F.map(lambda p: p.compose(curve))


def cubic_potential() -> Polynomial:
    x, y = Polynomial.variables(2)
    return (x**3 - 3 * x * y**2) / 6


def quartic_potential() -> Polynomial:
    x, y = Polynomial.variables(2)
    return (x**4 - 6 * x**2 * y**2 + y**4) / 12


BUILTINS = {
    "cubic": lambda: field_from_potential(cubic_potential(), "cubic"),
    "quartic": lambda: field_from_potential(quartic_potential(), "quartic"),
}


def builtin_field(name: str) -> PolyMatrixField:
    """The two Hessian fields of harmonic potentials shipped with the package.

    ``cubic`` is the Hessian of ``(x^3 - 3xy^2)/6`` whose eigenvalues
    ``+-sqrt(x^2 + y^2)`` cross non-smoothly at the origin; ``quartic`` is the
    Hessian of ``(x^4 - 6x^2y^2 + y^4)/12`` whose eigenvalues ``+-(x^2 + y^2)``
    meet at the origin but stay differentiable.
    """
    try:
        return BUILTINS[name]()
    except KeyError:
        raise KeyError(f"unknown builtin field {name!r}; choose from {sorted(BUILTINS)}") from None
