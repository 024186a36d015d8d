"""Spectral machinery for a single symmetric matrix.

The eigensolver is a cyclic Jacobi iteration.  Eigenvalues that agree up to a
clustering tolerance are merged into groups, and each group is represented
by its eigenprojection, which unlike the eigenvectors is basis-independent.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_index, check_symmetric
from .exceptions import DegenerateGapError

DEFAULT_RELATIVE_GAP = 1e-8


@dataclass(frozen=True)
class ClusterConfig:
    """Eigenvalues closer than ``relative_gap * max(1, ||X||)`` are treated as equal."""

    relative_gap: float = DEFAULT_RELATIVE_GAP

    def __post_init__(self):
        if not self.relative_gap > 0:
            raise ValueError("relative_gap must be positive")


@dataclass(frozen=True)
class Spectrum:
    values: np.ndarray
    vectors: np.ndarray
    sweeps: int = 0


@dataclass(frozen=True)
class EigenGroup:
    """One distinct eigenvalue with its multiplicity and eigenprojection.

    ``index_range`` is the 1-based inclusive range ``(j_lo, j_hi)`` of the
    group inside the repeated, sorted eigenvalue list.  ``basis`` holds an
    orthonormal basis of the eigenspace as columns.
    """

    value: float
    multiplicity: int
    projection: np.ndarray
    index_range: tuple[int, int]
    basis: np.ndarray = field(repr=False)

    def __contains__(self, j):
        return self.index_range[0] <= j <= self.index_range[1]


@dataclass(frozen=True)
class SpectralDecomposition:
    groups: tuple[EigenGroup, ...]
    spectrum: Spectrum
    cluster_gap_used: float
    norm: float

    @property
    def s(self) -> int:
        return len(self.groups)

    @property
    def m(self) -> int:
        return self.spectrum.values.shape[0]

    @property
    def values(self) -> np.ndarray:
        """Repeated eigenvalues, ascending."""
        return self.spectrum.values

    def group_index(self, j: int) -> int:
        j = check_index(j, self.m)
        for idx, g in enumerate(self.groups):
            if j in g:
                return idx
        raise AssertionError("groups do not cover the index range")

    def group_of(self, j: int) -> EigenGroup:
        return self.groups[self.group_index(j)]

    def group_gap(self, j: int) -> float:
        """Distance from the group of ``j`` to its nearest neighbouring group."""
        idx = self.group_index(j)
        vals = [g.value for g in self.groups]
        gaps = [abs(vals[idx] - vals[k]) for k in (idx - 1, idx + 1) if 0 <= k < len(vals)]
        return min(gaps, default=math.inf)

    @property
    def min_gap(self) -> float:
        """Smallest distance between consecutive groups (inf when ``s == 1``)."""
        vals = np.array([g.value for g in self.groups])
        return float(np.min(np.diff(vals))) if vals.size > 1 else math.inf

    @property
    def gap_margin(self) -> float:
        """Distance of the nearest consecutive eigenvalue gap to the clustering threshold.

        Small margins mean the grouping would change under a slightly
        different tolerance.
        """
        diffs = np.diff(self.values)
        if diffs.size == 0:
            return math.inf
        return float(np.min(np.abs(diffs - self.cluster_gap_used)))

    def reconstruct(self) -> np.ndarray:
        return sum(g.value * g.projection for g in self.groups)


def _frobenius(X):
    return float(np.linalg.norm(X))


def eig_sym(X, tol: float = 1e-14, max_sweeps: int = 64) -> Spectrum:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps continue until the off-diagonal Frobenius norm is at most
    ``tol * ||X||``.  Eigenvalues come back ascending with matching
    orthonormal eigenvector columns.
    """
    A = check_symmetric(X).copy()
    m = A.shape[0]
    V = np.eye(m)
    target = tol * _frobenius(A)
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        off = float(np.linalg.norm(A - np.diag(np.diag(A))))
        if off <= target:
            sweeps -= 1
            break
        for p in range(m - 1):
            for q in range(p + 1, m):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                app, aqq = A[p, p], A[q, q]
                # after a few sweeps, entries below the diagonal's resolution are just noise
                if sweeps > 4 and abs(apq) * 1e2 + abs(app) == abs(app) and abs(apq) * 1e2 + abs(aqq) == abs(aqq):
                    A[p, q] = A[q, p] = 0.0
                    continue
                theta = (aqq - app) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p, col_q = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                row_p, row_q = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                A[p, q] = A[q, p] = 0.0
                v_p, v_q = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * v_p - s * v_q
                V[:, q] = s * v_p + c * v_q
    values = np.diag(A).copy()
    order = np.argsort(values, kind="stable")
    return Spectrum(values[order], V[:, order], sweeps)


def decompose(X, cfg: ClusterConfig | None = None, spectrum: Spectrum | None = None) -> SpectralDecomposition:
    """Group the eigenvalues of ``X`` and build one eigenprojection per group.

    Consecutive sorted eigenvalues are merged (single linkage) when their gap
    is at most ``cfg.relative_gap * max(1, ||X||)``.
    """
    cfg = cfg or ClusterConfig()
    X = check_symmetric(X)
    spec = spectrum if spectrum is not None else eig_sym(X)
    norm = _frobenius(X)
    thresh = cfg.relative_gap * max(1.0, norm)
    vals, vecs = spec.values, spec.vectors
    m = vals.shape[0]

    bounds = [0]
    for i in range(1, m):
        if vals[i] - vals[i - 1] > thresh:
            bounds.append(i)
    bounds.append(m)

    groups = []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        Q = vecs[:, lo:hi]
        P = Q @ Q.T
        groups.append(
            EigenGroup(
                value=float(np.mean(vals[lo:hi])),
                multiplicity=hi - lo,
                projection=0.5 * (P + P.T),
                index_range=(lo + 1, hi),
                basis=Q.copy(),
            )
        )
    return SpectralDecomposition(tuple(groups), spec, thresh, norm)


def frobenius_covariants(X, decomp: SpectralDecomposition) -> list[np.ndarray]:
    """Group projections from the product formula ``prod (X - l_l I)/(l_k - l_l)``."""
    X = check_symmetric(X)
    m = X.shape[0]
    vals = [g.value for g in decomp.groups]
    floor = 1e-14 * _frobenius(X)
    out = []
    eye = np.eye(m)
    for k, lk in enumerate(vals):
        P = eye.copy()
        for l, ll in enumerate(vals):
            if l == k:
                continue
            denom = lk - ll
            if abs(denom) <= floor:
                raise DegenerateGapError(
                    f"eigenvalue groups {k} and {l} are {abs(denom):.3g} apart"
                )
            P = P @ (X - ll * eye) / denom
        out.append(0.5 * (P + P.T))
    return out


def pseudoinverse_Aj(decomp: SpectralDecomposition, j: int) -> np.ndarray:
    """Spectral pseudoinverse of ``lambda_j I - X``.

    ``A_j = sum over the other groups of P_l / (lambda_j - lambda_l)``; the sum
    is empty, and ``A_j`` zero, when there is a single group.
    """
    idx = decomp.group_index(j)
    lam = decomp.groups[idx].value
    A = np.zeros((decomp.m, decomp.m))
    for l, g in enumerate(decomp.groups):
        if l != idx:
            A += g.projection / (lam - g.value)
    return 0.5 * (A + A.T)


def kyfan_sum(X, k: int, decomp: SpectralDecomposition | None = None):
    """Sum of the ``k`` smallest eigenvalues and, when unique, the minimizing projection.

    The minimum of ``tr(R X)`` over rank-``k`` projections ``R`` is attained
    at a single ``R`` exactly when ``k`` ends an eigenvalue group (or is 0);
    that ``R`` is the sum of the group projections up to ``k``.  Otherwise the
    minimizer is ``None``.
    """
    decomp = decomp if decomp is not None else decompose(X)
    m = decomp.m
    k = check_index(k, m, "k", low=0)
    value = float(np.sum(decomp.values[:k]))
    if k == 0:
        return value, np.zeros((m, m))
    boundaries = {g.index_range[1] for g in decomp.groups}
    if k not in boundaries:
        return value, None
    R = sum(g.projection for g in decomp.groups if g.index_range[1] <= k)
    return value, R
