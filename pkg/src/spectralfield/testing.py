"""Random and constructed fields for property tests and benchmarks."""
from __future__ import annotations

import itertools

import numpy as np

from .polyfield import Monomial, PolyMatrixField, Polynomial


def random_polynomial(rng, n: int, degree: int, scale: float = 1.0, density: float = 0.7) -> Polynomial:
    """Random polynomial of total degree at most ``degree``.

    Each monomial is kept with probability ``density`` and gets a standard
    normal coefficient times ``scale``.
    """
    terms = []
    for exps in itertools.product(range(degree + 1), repeat=n):
        if sum(exps) <= degree and rng.random() < density:
            terms.append(Monomial(scale * rng.standard_normal(), exps))
    return Polynomial(n, tuple(terms))


def random_poly_field(rng, m: int, n: int, degree: int = 3, scale: float = 1.0) -> PolyMatrixField:
    upper = {(i, k): random_polynomial(rng, n, degree, scale) for i in range(m) for k in range(i, m)}
    return PolyMatrixField.from_entries(
        [[upper[min(i, k), max(i, k)] for k in range(m)] for i in range(m)], name="random"
    )


def quaternion_frame(w: Polynomial, x: Polynomial, y: Polynomial, z: Polynomial):
    """``|q|^2 R(q)`` for the rotation ``R`` of quaternion ``q = (w, x, y, z)``.

    The entries are quadratic in ``q``, so polynomial entries give a
    polynomial matrix whose columns stay mutually orthogonal with common
    length ``|q|^2``.
    """
    return [
        [w * w + x * x - y * y - z * z, 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), w * w - x * x + y * y - z * z, 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), w * w - x * x - y * y + z * z],
    ]


def block_field(a: Polynomial, b: Polynomial, quaternion) -> PolyMatrixField:
    """``M diag(a, a, b) M^T`` with ``M`` from :func:`quaternion_frame`.

    The eigenvalue ``|q|^4 a`` has multiplicity two wherever it differs from
    ``|q|^4 b``, and its eigenspace turns with ``x``.
    """
    M = quaternion_frame(*quaternion)
    diag = (a, a, b)
    entries = [
        [sum((M[i][l] * diag[l] * M[k][l] for l in range(3)), Polynomial(a.dimension)) for k in range(3)]
        for i in range(3)
    ]
    # the upper and lower triangles agree up to float summation order
    sym = [[entries[min(i, k)][max(i, k)] for k in range(3)] for i in range(3)]
    return PolyMatrixField.from_entries(sym, name="block")


def random_block_field(rng, n: int) -> PolyMatrixField:
    """Block field with linear quaternion entries and well separated ``a``, ``b``."""
    one = Polynomial.constant(1.0, n)
    quat = [one] + [random_polynomial(rng, n, 1, 0.4) for _ in range(3)]
    a = 1.0 + random_polynomial(rng, n, 1, 0.2)
    b = 3.0 + random_polynomial(rng, n, 1, 0.2)
    return block_field(a, b, quat)


def random_orthogonal(rng, m: int) -> np.ndarray:
    Q, R = np.linalg.qr(rng.standard_normal((m, m)))
    return Q * np.sign(np.diag(R))


def random_symmetric(rng, m: int, scale: float = 1.0) -> np.ndarray:
    X = rng.standard_normal((m, m)) * scale
    return 0.5 * (X + X.T)
