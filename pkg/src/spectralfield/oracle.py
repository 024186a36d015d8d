"""Finite-difference and brute-force references for the closed-form derivatives.

These routines only ever evaluate ``H`` itself and diagonalize it with
LAPACK (``numpy.linalg.eigh``), so they share nothing with the Jacobi solver
or the symbolic derivative tensors they are used to check.  Eigenvalues are
followed across ``x +- h e`` by their sorted index, which is only sound when
the group stays well separated from its neighbours; that is checked up front.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._validation import check_index, check_symmetric, check_vector
from .calculus import EigenDerivativeContext, taylor2_lambda
from .exceptions import UnstableTrackingError
from .polyfield import PolyMatrixField
from .spectral import ClusterConfig, decompose


@dataclass(frozen=True)
class FDConfig:
    """Step sizes for the difference stencils.

    ``h`` is used for first derivatives and ``h_hess`` for second
    derivatives, where a larger step keeps rounding error down.  With
    ``richardson`` each stencil is evaluated at ``h`` and ``h/2`` and
    combined to cancel the leading error term.
    """

    h: float = 1e-5
    richardson: bool = True
    h_hess: float = 1e-4

    def __post_init__(self):
        if not (self.h > 0 and self.h_hess > 0):
            raise ValueError("finite-difference steps must be positive")


def _eigh(F, x):
    return np.linalg.eigh(F(x))


def _lipschitz_estimate(F, x, h):
    # ||D H|| from differences of H itself
    n = F.n
    eye = np.eye(n)
    slopes = [np.linalg.norm(F(x + h * eye[i]) - F(x - h * eye[i])) / (2 * h) for i in range(n)]
    return math.sqrt(sum(s * s for s in slopes))


def _tracked_range(F, x, j, cfg):
    """Index range of ``j``'s group at ``x`` and its gap to the neighbours."""
    decomp = decompose(F(x), cfg)
    g = decomp.group_of(j)
    return g.index_range, decomp.group_gap(j)


def _require_gap(F, x, j, step, cfg):
    (lo, hi), gap = _tracked_range(F, x, j, cfg)
    L = _lipschitz_estimate(F, x, step)
    if not gap > 10.0 * step * L:
        raise UnstableTrackingError(
            f"group gap {gap:.3g} at x does not exceed 10*h*||DH|| = {10 * step * L:.3g}"
        )
    return lo, hi


def _lambda(F, x, lo, hi):
    # mean over the group keeps multiplicity > 1 well defined
    return float(np.mean(np.linalg.eigvalsh(F(x))[lo - 1 : hi]))


def _richardson(stencil, h, enabled, order=2):
    coarse = stencil(h)
    if not enabled:
        return coarse
    fine = stencil(h / 2)
    w = 2**order
    return (w * fine - coarse) / (w - 1)


def fd_grad_lambda(F: PolyMatrixField, x, j: int, cfg: FDConfig | None = None, cluster: ClusterConfig | None = None) -> np.ndarray:
    """Central-difference gradient of ``lambda_j`` at ``x``."""
    cfg = cfg or FDConfig()
    x = check_vector(x, F.n, "point")
    j = check_index(j, F.m)
    lo, hi = _require_gap(F, x, j, cfg.h, cluster)
    eye = np.eye(F.n)

    def stencil(h):
        return np.array(
            [(_lambda(F, x + h * eye[i], lo, hi) - _lambda(F, x - h * eye[i], lo, hi)) / (2 * h) for i in range(F.n)]
        )

    return _richardson(stencil, cfg.h, cfg.richardson)


def fd_hess_lambda(F: PolyMatrixField, x, j: int, cfg: FDConfig | None = None, cluster: ClusterConfig | None = None) -> np.ndarray:
    """Second-order central-difference Hessian of ``lambda_j``, symmetrized."""
    cfg = cfg or FDConfig()
    x = check_vector(x, F.n, "point")
    j = check_index(j, F.m)
    lo, hi = _require_gap(F, x, j, cfg.h_hess, cluster)
    n = F.n
    eye = np.eye(n)
    f0 = _lambda(F, x, lo, hi)

    def f(y):
        return _lambda(F, y, lo, hi)

    def stencil(h):
        out = np.empty((n, n))
        for i in range(n):
            ei = h * eye[i]
            out[i, i] = (f(x + ei) - 2 * f0 + f(x - ei)) / (h * h)
            for k in range(i + 1, n):
                ek = h * eye[k]
                out[i, k] = (f(x + ei + ek) - f(x + ei - ek) - f(x - ei + ek) + f(x - ei - ek)) / (4 * h * h)
                out[k, i] = out[i, k]
        return out

    H = _richardson(stencil, cfg.h_hess, cfg.richardson)
    return 0.5 * (H + H.T)


def _tracked_projection(F, y, lo, hi):
    w, V = _eigh(F, y)
    m = w.shape[0]
    below = w[lo - 1] - w[lo - 2] if lo > 1 else math.inf
    above = w[hi] - w[hi - 1] if hi < m else math.inf
    spread = w[hi - 1] - w[lo - 1]
    if not min(below, above) > spread:
        raise UnstableTrackingError("eigenvalue group cannot be matched by sorted index")
    Q = V[:, lo - 1 : hi]
    return Q @ Q.T


def fd_dproj(F: PolyMatrixField, x, j: int, e, cfg: FDConfig | None = None, cluster: ClusterConfig | None = None) -> np.ndarray:
    """Central difference ``(P_j(x + h e) - P_j(x - h e)) / 2h``."""
    cfg = cfg or FDConfig()
    x = check_vector(x, F.n, "point")
    e = check_vector(e, F.n, "direction")
    j = check_index(j, F.m)
    lo, hi = _require_gap(F, x, j, cfg.h, cluster)

    def stencil(h):
        return (_tracked_projection(F, x + h * e, lo, hi) - _tracked_projection(F, x - h * e, lo, hi)) / (2 * h)

    D = _richardson(stencil, cfg.h, cfg.richardson)
    return 0.5 * (D + D.T)


def random_projection_frames(m: int, k: int, n_samples: int, rng) -> np.ndarray:
    """Orthonormal ``m x k`` frames, Haar-distributed, stacked as ``(n_samples, m, k)``.

    Gram-Schmidt on standard normal columns is QR with a positive diagonal
    in ``R``, which makes the distribution exactly uniform.  It is
    vectorized over samples, which beats batched LAPACK QR for small ``k``.
    """
    Q = rng.standard_normal((n_samples, m, k))
    for c in range(k):
        v = Q[:, :, c]
        # two passes keep the columns orthogonal to working precision
        for _ in range(2):
            if c:
                coef = np.einsum("smp,sm->sp", Q[:, :, :c], v)
                v -= np.einsum("smp,sp->sm", Q[:, :, :c], coef)
        v /= np.linalg.norm(v, axis=1, keepdims=True)
    return Q


def kyfan_bruteforce(X, k: int, n_samples: int = 100_000, rng_seed: int = 0, batch: int = 20_000) -> float:
    """Minimum of ``tr(R X)`` over random rank-``k`` projections ``R = Q Q^T``."""
    X = check_symmetric(X)
    m = X.shape[0]
    k = check_index(k, m, "k", low=0)
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    if k == 0:
        return 0.0
    # per-batch child seeds keep the result independent of batch scheduling
    seeds = np.random.SeedSequence(rng_seed).spawn(math.ceil(n_samples / batch))
    best = math.inf
    remaining = n_samples
    for ss in seeds:
        size = min(batch, remaining)
        remaining -= size
        Q = random_projection_frames(m, k, size, np.random.default_rng(ss))
        traces = np.einsum("sik,sik->s", Q, np.matmul(X, Q))
        best = min(best, float(traces.min()))
    return best


@dataclass(frozen=True)
class SlopeFit:
    """Log-log fit of expansion residuals against step size.

    ``used`` marks the residuals above the rounding floor that entered the
    fit.  When fewer than two survive, the expansion is exact to working
    precision: ``exact`` is set and ``fitted_order`` is ``inf``.
    """

    steps: np.ndarray
    residuals: np.ndarray
    fitted_order: float
    exact: bool = False
    used: np.ndarray = field(default=None, repr=False)


def fit_expansion_order(
    F: PolyMatrixField,
    x,
    j: int,
    e,
    steps: Sequence[float],
    cluster: ClusterConfig | None = None,
    noise_factor: float = 100.0,
) -> SlopeFit:
    """Empirical order of the second-order Taylor model of ``lambda_j`` along ``e``."""
    steps = np.asarray(steps, dtype=float)
    if steps.ndim != 1 or steps.size < 2:
        raise ValueError("need at least two steps")
    if np.any(steps <= 0) or np.any(np.diff(steps) >= 0):
        raise ValueError("steps must be positive and strictly decreasing")
    x = check_vector(x, F.n, "point")
    e = check_vector(e, F.n, "direction")
    ctx = EigenDerivativeContext.at(F, x, j, cluster)
    model = taylor2_lambda(ctx)
    lo, hi = ctx.group.index_range
    actual = np.array([_lambda(F, x + h * e, lo, hi) for h in steps])
    predicted = np.array([model.predict_along(e, h) for h in steps])
    residuals = np.abs(actual - predicted)
    floor = noise_factor * np.finfo(float).eps * np.maximum(1.0, np.abs(actual))
    used = residuals > floor
    if used.sum() < 2:
        return SlopeFit(steps, residuals, math.inf, exact=True, used=used)
    slope = np.polyfit(np.log(steps[used]), np.log(residuals[used]), 1)[0]
    return SlopeFit(steps, residuals, float(slope), exact=False, used=used)
