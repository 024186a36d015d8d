"""Acceptance gate.

Each ``test_criterion_NN`` checks one acceptance criterion at its stated
tolerance; the terminal summary prints a PASS/FAIL line for each.
"""
import numpy as np
import pytest

from spectralfield import (
    Polynomial,
    builtin_field,
    curve_deriv_lambda,
    decompose,
    dir_deriv_proj,
    eig_sym,
    eigen_context,
    fd_dproj,
    fd_grad_lambda,
    fd_hess_lambda,
    fit_expansion_order,
    grad_lambda,
    grad_lambda_trace,
    hess_lambda,
    hess_lambda_trace,
    index_report,
    kyfan_bruteforce,
    kyfan_sum,
    one_sided_sum_deriv,
)
from spectralfield.cli import main as cli_main
from spectralfield.testing import random_block_field, random_poly_field, random_symmetric

CUBIC = builtin_field("cubic")
QUARTIC = builtin_field("quartic")
T = Polynomial.variable(0, 1)


def random_trial(rng, min_gap=1e-2):
    """Random field (m in 2..4, n in 1..3, degree <= 3), point, index and direction."""
    while True:
        m, n = int(rng.integers(2, 5)), int(rng.integers(1, 4))
        F = random_poly_field(rng, m, n, degree=int(rng.integers(1, 4)))
        x = rng.uniform(-1, 1, n)
        if np.min(np.diff(np.linalg.eigvalsh(F(x)))) > min_gap:
            return F, x, int(rng.integers(1, m + 1)), rng.standard_normal(n)


@pytest.fixture(scope="module")
def trials():
    rng = np.random.default_rng(2024)
    return [random_trial(rng) for _ in range(200)]


def test_criterion_01(capsys):
    """cubic fixture: spectrum, gradient, Hessian, oracle match, crossing exit code"""
    ctx = eigen_context(CUBIC, [1, 0], 2)
    np.testing.assert_allclose(ctx.decomp.values, [-1, 1], rtol=0, atol=1e-12)
    g, Hs = grad_lambda(ctx), hess_lambda(ctx)
    np.testing.assert_allclose(g, [1, 0], atol=1e-12)
    np.testing.assert_allclose(Hs, [[0, 0], [0, 1]], atol=1e-12)
    np.testing.assert_allclose(g, fd_grad_lambda(CUBIC, [1, 0], 2), rtol=0, atol=1e-6)
    np.testing.assert_allclose(Hs, fd_hess_lambda(CUBIC, [1, 0], 2), rtol=0, atol=1e-4)
    assert cli_main(["derive", "--builtin", "cubic", "--point", "0,0", "--j", "1", "--grad"]) == 2
    capsys.readouterr()


def test_criterion_02():
    """quartic fixture: closed-form P_1, gradient, Hessian and D_(0,1) P_2 at (1,0)"""
    rng = np.random.default_rng(7)
    for _ in range(100):
        r, theta = rng.uniform(0.1, 2.0), rng.uniform(0, 2 * np.pi)
        x, y = r * np.cos(theta), r * np.sin(theta)
        dec = decompose(QUARTIC([x, y]))
        closed = np.array([[y * y, x * y], [x * y, x * x]]) / (x * x + y * y)
        np.testing.assert_allclose(dec.group_of(1).projection, closed, rtol=0, atol=1e-9)
        ctx = eigen_context(QUARTIC, [x, y], 2)
        np.testing.assert_allclose(grad_lambda(ctx), [2 * x, 2 * y], rtol=0, atol=1e-8)
        np.testing.assert_allclose(hess_lambda(ctx), 2 * np.eye(2), rtol=0, atol=1e-8)
    target = np.array([[0.0, -1.0], [-1.0, 0.0]])
    np.testing.assert_allclose(dir_deriv_proj(eigen_context(QUARTIC, [1, 0], 2), [0, 1]), target, rtol=0, atol=1e-8)
    np.testing.assert_allclose(fd_dproj(QUARTIC, [1, 0], 2, [0, 1]), target, rtol=0, atol=1e-8)


def test_criterion_03(trials):
    """trace identities tr(D_e P_j) = tr(D_e P_j H) = 0 on 200 separated trials"""
    for F, x, j, e in trials:
        ctx = eigen_context(F, x, j)
        dP = dir_deriv_proj(ctx, e)
        assert abs(np.trace(dP)) <= 1e-9
        assert abs(np.trace(dP @ ctx.H)) <= 1e-9


def test_criterion_04(trials):
    """eigenvector and trace forms agree; gradient independent of the eigenvector"""
    for F, x, j, _ in trials:
        ctx = eigen_context(F, x, j)
        g = grad_lambda(ctx, strict=False)
        Hs = hess_lambda(ctx, strict=False)
        assert np.max(np.abs(g - grad_lambda_trace(ctx))) <= 1e-10
        assert np.max(np.abs(Hs - hess_lambda_trace(ctx))) <= 1e-9
    rng = np.random.default_rng(11)
    for _ in range(20):
        n = int(rng.integers(1, 4))
        F = random_block_field(rng, n)
        ctx = eigen_context(F, rng.uniform(-0.5, 0.5, n), 1)
        assert ctx.d == 2
        g = grad_lambda(ctx)
        for _ in range(10):
            c = rng.standard_normal(2)
            xi = ctx.group.basis @ (c / np.linalg.norm(c))
            assert np.max(np.abs(grad_lambda(ctx, xi) - g)) <= 1e-10


def test_criterion_05():
    """formulas match finite differences on 50 random polynomial fields"""
    rng = np.random.default_rng(5)
    for _ in range(50):
        F, x, j, e = random_trial(rng)
        ctx = eigen_context(F, x, j)
        g, Hs, dP = grad_lambda(ctx), hess_lambda(ctx), dir_deriv_proj(ctx, e)
        assert np.linalg.norm(g - fd_grad_lambda(F, x, j)) <= 1e-6 * (1 + np.linalg.norm(g))
        assert np.linalg.norm(Hs - fd_hess_lambda(F, x, j)) <= 1e-4 * (1 + np.linalg.norm(Hs))
        assert np.linalg.norm(dP - fd_dproj(F, x, j, e)) <= 1e-5 * (1 + np.linalg.norm(dP))


def test_criterion_06():
    """Ky Fan sums: partial sums, brute force never below, singleton minimizer attains"""
    rng = np.random.default_rng(6)
    for i in range(100):
        m = int(rng.integers(1, 5))
        X = random_symmetric(rng, m, scale=3.0)
        if i % 3 == 0:
            # repeated eigenvalues exercise the non-unique minimizers
            vals = rng.integers(-2, 3, m).astype(float)
            Q = np.linalg.qr(rng.standard_normal((m, m)))[0]
            X = Q @ np.diag(vals) @ Q.T
            X = 0.5 * (X + X.T)
        lam = np.linalg.eigvalsh(X)
        dec = decompose(X)
        for k in range(m + 1):
            value, R = kyfan_sum(X, k, dec)
            assert abs(value - lam[:k].sum()) <= 1e-10
            at_boundary = k == 0 or dec.group_of(k).index_range[1] == k
            assert (R is not None) == at_boundary
            if R is not None:
                assert abs(np.trace(R @ X) - value) <= 1e-12 * max(1.0, np.linalg.norm(X))
        k = int(rng.integers(1, m + 1))
        value = kyfan_sum(X, k, dec)[0]
        for seed in range(5):
            assert kyfan_bruteforce(X, k, n_samples=100_000, rng_seed=seed) >= value - 1e-9


def test_criterion_07():
    """one-sided derivatives: cubic origin (-1, +1); collapse at separated points"""
    right, left = one_sided_sum_deriv(CUBIC, [0, 0], [1, 0], 1)
    assert abs(right + 1) <= 1e-10 and abs(left - 1) <= 1e-10
    rng = np.random.default_rng(17)
    for _ in range(50):
        F, x, _, e = random_trial(rng)
        line = [float(x[i]) + float(e[i]) * T for i in range(F.n)]
        for k in range(1, F.m + 1):
            right, left = one_sided_sum_deriv(F, x, e, k)
            along = sum(curve_deriv_lambda(F, line, 0.0, i) for i in range(1, k + 1))
            assert abs(right - left) <= 1e-9
            assert abs(right - along) <= 1e-9


def test_criterion_08():
    """expansion order at least 2.5 on 20 random analytic trials; quartic exact"""
    rng = np.random.default_rng(8)
    orders = []
    for _ in range(20):
        F, x, j, e = random_trial(rng)
        e /= np.linalg.norm(e)
        gap = decompose(F(x)).group_gap(j)
        steps = 0.1 * gap * 0.5 ** np.arange(5)
        orders.append(fit_expansion_order(F, x, j, e, steps).fitted_order)
    assert min(orders) >= 2.5, orders
    fit = fit_expansion_order(QUARTIC, [1, 0.5], 2, [0.6, 0.8], [0.2, 0.1, 0.05, 0.025])
    assert fit.exact


def test_criterion_09():
    """semicontinuity of d_1 along (1/k, 0) on the cubic; sum of 1/d_i equals s"""
    ks = list(range(1, 201)) + [10**p for p in range(3, 8)]
    for k in ks:
        dec = decompose(CUBIC([1.0 / k, 0.0]))
        rep = index_report(dec, 1)
        assert rep.d == 1
        assert abs(rep.inv_mult_sum - dec.s) <= 1e-9
    limit = index_report(decompose(CUBIC([0.0, 0.0])), 1)
    assert limit.d == 2
    assert abs(limit.inv_mult_sum - limit.s_total) <= 1e-9


def test_criterion_10():
    """Lipschitz bound on sorted eigenvalues over 500 random pairs"""
    rng = np.random.default_rng(10)
    for _ in range(500):
        m = int(rng.integers(1, 5))
        scale = 10 ** rng.uniform(-2, 2)
        X = random_symmetric(rng, m, scale=scale)
        # perturbations far below eps * |X| would only measure the rounding of X + E
        E = random_symmetric(rng, m, scale=scale * 10 ** rng.uniform(-5, 1))
        lhs = np.sum((eig_sym(X + E).values - eig_sym(X).values) ** 2)
        assert lhs <= np.linalg.norm(E) ** 2 * (1 + 1e-9)
