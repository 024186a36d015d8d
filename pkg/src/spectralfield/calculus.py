"""First and second derivatives of eigenvalues and eigenprojections of a field.

Everything is evaluated at one point through an :class:`EigenDerivativeContext`
that bundles ``H(x)``, its symbolic derivative tensors, the clustered
spectral decomposition, the group of the requested eigenvalue and the
pseudoinverse ``A_j``.

The eigenvalue gradient and Hessian are computed twice, once from a unit
eigenvector ``xi`` and once from traces against the eigenprojection.  Both
agree wherever the eigenprojection is continuous; a disagreement means the
point sits on an eigenvalue crossing and raises
:class:`~spectralfield.exceptions.InconsistentDerivativeError` unless
``strict=False``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._validation import check_index, check_vector
from .exceptions import DimensionError, InconsistentDerivativeError
from .polyfield import PolyMatrixField, Polynomial, hess_quadform_from_tensor, jac_from_tensor, poly_eval, poly_partial
from .spectral import ClusterConfig, EigenGroup, SpectralDecomposition, decompose, eig_sym, pseudoinverse_Aj

GRAD_CHECK_TOL = 1e-8
HESS_CHECK_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class EigenDerivativeContext:
    field: PolyMatrixField
    point: np.ndarray
    H: np.ndarray
    dH: np.ndarray
    d2H: np.ndarray
    decomp: SpectralDecomposition
    j: int
    group: EigenGroup
    A: np.ndarray

    @classmethod
    def at(cls, field: PolyMatrixField, x, j: int, cfg: ClusterConfig | None = None):
        x = check_vector(x, field.n, "point")
        j = check_index(j, field.m)
        H = field(x)
        decomp = decompose(H, cfg)
        return cls(
            field=field,
            point=x,
            H=H,
            dH=field.derivative_tensor(x),
            d2H=field.second_derivative_tensor(x),
            decomp=decomp,
            j=j,
            group=decomp.group_of(j),
            A=pseudoinverse_Aj(decomp, j),
        )

    @property
    def P(self) -> np.ndarray:
        return self.group.projection

    @property
    def d(self) -> int:
        return self.group.multiplicity

    @property
    def value(self) -> float:
        return self.group.value

    @property
    def xi(self) -> np.ndarray:
        """Default unit eigenvector: first basis column of the group."""
        return self.group.basis[:, 0]

    def dir_H(self, e) -> np.ndarray:
        e = check_vector(e, self.field.n, "direction")
        return np.tensordot(e, self.dH, axes=1)

    def second_dir_H(self, a, b) -> np.ndarray:
        a = check_vector(a, self.field.n, "a")
        b = check_vector(b, self.field.n, "b")
        return np.einsum("i,k,ikab->ab", a, b, self.d2H)

    def check_xi(self, xi) -> np.ndarray:
        if xi is None:
            return self.xi
        xi = check_vector(xi, self.field.m, "xi")
        if abs(np.linalg.norm(xi) - 1.0) > 1e-10:
            raise ValueError("xi must be a unit vector")
        if np.linalg.norm(self.P @ xi - xi) > 1e-8:
            raise ValueError("xi is not in the eigenspace of lambda_j")
        return xi


def eigen_context(field, x, j, cfg=None) -> EigenDerivativeContext:
    return EigenDerivativeContext.at(field, x, j, cfg)


def _scale(ctx) -> float:
    return max(1.0, float(np.max(np.linalg.norm(ctx.dH, axis=(1, 2)), initial=0.0)))


def dir_deriv_lambda(ctx: EigenDerivativeContext, e) -> float:
    """``D_e lambda_j = tr(P_j D_e H) / d_j``."""
    return float(np.trace(ctx.P @ ctx.dir_H(e))) / ctx.d


def compressed_derivative(ctx: EigenDerivativeContext, e) -> np.ndarray:
    """``Q^T D_e H Q`` for an orthonormal eigenspace basis ``Q``; ``d x d``."""
    Q = ctx.group.basis
    C = Q.T @ ctx.dir_H(e) @ Q
    return 0.5 * (C + C.T)


def grad_lambda_trace(ctx: EigenDerivativeContext) -> np.ndarray:
    return np.array([np.trace(ctx.P @ dk) for dk in ctx.dH]) / ctx.d


def grad_lambda(ctx: EigenDerivativeContext, xi=None, strict: bool = True) -> np.ndarray:
    """Gradient ``xi^T grad_xi H(x)`` of the ``j``-th eigenvalue.

    With ``strict`` the result is checked against the trace form and against
    every direction of the eigenspace (the compressed matrices
    ``Q^T dH/dx_k Q`` must be multiples of the identity).  A failure raises
    :class:`InconsistentDerivativeError`.
    """
    xi = ctx.check_xi(xi)
    g = xi @ jac_from_tensor(ctx.dH, xi)
    if strict:
        trace_form = grad_lambda_trace(ctx)
        Q = ctx.group.basis
        eye = np.eye(ctx.d)
        worst = float(np.max(np.abs(g - trace_form), initial=0.0))
        for k, dk in enumerate(ctx.dH):
            C = Q.T @ dk @ Q
            worst = max(worst, float(np.max(np.abs(C - trace_form[k] * eye))))
        if worst > GRAD_CHECK_TOL * _scale(ctx):
            raise InconsistentDerivativeError(
                f"gradient formulas disagree by {worst:.3g}; lambda_{ctx.j} is not "
                "differentiable here (eigenvalue crossing)",
                worst,
                ctx.point,
                ctx.j,
            )
    return g


def hess_lambda_trace(ctx: EigenDerivativeContext) -> np.ndarray:
    n = ctx.field.n
    P, A, dH = ctx.P, ctx.A, ctx.dH
    out = np.empty((n, n))
    for i in range(n):
        for k in range(n):
            out[i, k] = np.trace(P @ (ctx.d2H[i, k] + 2.0 * dH[i] @ A @ dH[k]))
    out /= ctx.d
    return 0.5 * (out + out.T)


def hess_lambda(ctx: EigenDerivativeContext, xi=None, strict: bool = True) -> np.ndarray:
    """Hessian ``grad_xi(grad_xi H)^T + 2 (grad_xi H)^T A_j grad_xi H``.

    ``strict`` runs the gradient consistency check and compares against the
    trace form entrywise.
    """
    xi = ctx.check_xi(xi)
    if strict:
        grad_lambda(ctx, xi, strict=True)
    J = jac_from_tensor(ctx.dH, xi)
    out = hess_quadform_from_tensor(ctx.d2H, xi) + 2.0 * J.T @ ctx.A @ J
    out = 0.5 * (out + out.T)
    if strict:
        worst = float(np.max(np.abs(out - hess_lambda_trace(ctx))))
        scale = max(1.0, float(np.max(np.abs(out))))
        if worst > HESS_CHECK_TOL * scale:
            raise InconsistentDerivativeError(
                f"Hessian formulas disagree by {worst:.3g}", worst, ctx.point, ctx.j
            )
    return out


def second_dir_lambda(ctx: EigenDerivativeContext, a, b) -> float:
    """``D_b D_a lambda_j = tr(P_j [D_b D_a H + 2 D_a H A_j D_b H]) / d_j``."""
    M = ctx.second_dir_H(a, b) + 2.0 * ctx.dir_H(a) @ ctx.A @ ctx.dir_H(b)
    return float(np.trace(ctx.P @ M)) / ctx.d


def dir_deriv_proj(ctx: EigenDerivativeContext, e) -> np.ndarray:
    """``D_e P_j = P_j D_e H A_j + A_j D_e H P_j``."""
    M = ctx.P @ ctx.dir_H(e) @ ctx.A
    return M + M.T


def jac_deriv_proj(ctx: EigenDerivativeContext, q) -> np.ndarray:
    """Jacobian ``P_j grad_{A_j q} H + A_j grad_{P_j q} H`` of ``x -> P_j(x) q``."""
    q = check_vector(q, ctx.field.m, "q")
    return ctx.P @ jac_from_tensor(ctx.dH, ctx.A @ q) + ctx.A @ jac_from_tensor(ctx.dH, ctx.P @ q)


def _curve_point(curve: Sequence[Polynomial], t: float, n: int):
    if len(curve) != n:
        raise DimensionError(f"curve needs {n} component polynomials, got {len(curve)}")
    for c in curve:
        if c.dimension != 1:
            raise DimensionError("curve components must be polynomials in one variable")
    x = np.array([poly_eval(c, [t]) for c in curve])
    dx = np.array([poly_eval(poly_partial(c, 0), [t]) for c in curve])
    return x, dx


def curve_deriv_lambda(F: PolyMatrixField, curve: Sequence[Polynomial], t: float, j: int, cfg=None) -> float:
    """``d/dt lambda_j(x(t))`` along a polynomial curve."""
    x, dx = _curve_point(curve, t, F.n)
    return dir_deriv_lambda(EigenDerivativeContext.at(F, x, j, cfg), dx)


def one_sided_sum_deriv(F: PolyMatrixField, x, e, k: int, cfg=None) -> tuple[float, float]:
    """Right and left derivatives of ``t -> sum_{i<=k} lambda_i(x + t e)`` at 0.

    The right derivative minimizes, and the left maximizes, ``tr(R D_e H)``
    over the projections ``R`` attaining the Ky Fan minimum.  Those are the
    projections below the group containing ``k`` plus any rank-``r``
    sub-projection of that group, so the extremes are the ``r`` smallest and
    largest eigenvalues of the compressed matrix ``Q^T D_e H Q``.
    """
    x = check_vector(x, F.n, "point")
    e = check_vector(e, F.n, "direction")
    k = check_index(k, F.m, "k", low=0)
    if k == 0:
        return 0.0, 0.0
    ctx = EigenDerivativeContext.at(F, x, k, cfg)
    D = ctx.dir_H(e)
    lo = ctx.group.index_range[0]
    below = sum(
        (float(np.trace(g.projection @ D)) for g in ctx.decomp.groups if g.index_range[1] < lo),
        0.0,
    )
    r = k - (lo - 1)
    mu = eig_sym(compressed_derivative(ctx, e)).values
    return below + float(np.sum(mu[:r])), below + float(np.sum(mu[-r:]))


@dataclass(frozen=True)
class Expansion2:
    """Second-order model ``base + linear.y + y^T quadratic y / 2`` of ``lambda_j(x + y)``."""

    base: float
    linear: np.ndarray
    quadratic: np.ndarray

    def predict(self, y) -> float:
        y = check_vector(y, self.linear.shape[0], "displacement")
        return float(self.base + self.linear @ y + 0.5 * y @ self.quadratic @ y)

    def predict_along(self, e, h: float) -> float:
        """Directional form: the model at ``y = h e``."""
        return self.predict(h * check_vector(e, self.linear.shape[0], "direction"))


def taylor2_lambda(ctx: EigenDerivativeContext, strict: bool = True) -> Expansion2:
    return Expansion2(
        base=ctx.value,
        linear=grad_lambda(ctx, strict=strict),
        quadratic=hess_lambda(ctx, strict=strict),
    )
