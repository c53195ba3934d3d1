"""Scalar polynomial kernel; sympy serves as an independent oracle."""

import numpy as np
import pytest
import sympy
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st

from cartan_spinors import poly
from cartan_spinors.errors import DimensionMismatchError, SizeError
from cartan_spinors.scalars import EXACT, FLOAT, GaussQ, max_abs, to_exact, to_float


def to_sympy(c, N):
    xs = sympy.symbols(f"x0:{N}")
    t = poly.table(N, poly.degree_of(c, N))
    expr = 0
    for i, e in enumerate(t.exps):
        v = c[i]
        if isinstance(v, GaussQ):
            v = sympy.Rational(int(v.re.numerator), int(v.re.denominator)) + sympy.I * sympy.Rational(
                int(v.im.numerator), int(v.im.denominator)
            )
        expr += v * sympy.prod([x**int(k) for x, k in zip(xs, e)])
    return sympy.expand(expr), xs


def laplacian_kernel_dim(N, k):
    """dim of harmonic degree-k polynomials, from the rank of the coordinate Laplacian."""
    xs = sympy.symbols(f"x0:{N}")
    src = list(sympy.itermonomials(xs, k, k))
    dst = list(sympy.itermonomials(xs, k - 2, k - 2)) if k >= 2 else []
    if not dst:
        return len(src)
    M = sympy.zeros(len(dst), len(src))
    index = {m: i for i, m in enumerate(dst)}
    for j, m in enumerate(src):
        lap = sympy.expand(sum(sympy.diff(m, x, 2) for x in xs))
        for term, coef in sympy.Poly(lap, *xs).terms():
            if coef == 0:
                continue
            mono = sympy.prod([x**p for x, p in zip(xs, term)])
            M[index[mono], j] = coef
    return len(src) - M.rank()


# frozen from the Laplacian-kernel oracle above
HARMONIC_DIMS = {3: [1, 3, 5, 7, 9], 4: [1, 4, 9, 16, 25], 5: [1, 5, 14, 30]}


@pytest.mark.parametrize("N,dims", sorted(HARMONIC_DIMS.items()))
def test_harmonic_dimensions(N, dims):
    for k, d in enumerate(dims):
        assert poly.n_harmonic(N, k) == d


@pytest.mark.parametrize("N,k", [(3, 2), (3, 4), (4, 3), (5, 2)])
def test_harmonic_dimensions_match_oracle(N, k):
    assert poly.n_harmonic(N, k) == laplacian_kernel_dim(N, k)


def test_table_layout():
    t = poly.table(3, 2)
    assert len(t) == poly.n_monomials(3, 2) == 10
    assert tuple(t.exps[0]) == (0, 0, 0)
    assert t.block(1) == slice(1, 4) and t.block(2) == slice(4, 10)
    # prefix property: lower-degree tables are leading rows
    assert np.array_equal(poly.table(3, 4).exps[:10], t.exps)
    assert poly.degree_of(np.zeros((10, 2)), 3) == 2
    with pytest.raises(DimensionMismatchError):
        poly.degree_of(np.zeros((7,)), 3)
    with pytest.raises(SizeError):
        poly.table(30, 40)


def test_x1_squared_reduction_example():
    N = 3
    c = poly.mul_var(poly.variable(N, 0, EXACT), N, 0)  # x1^2
    r = poly.harmonic_reduce(c, N)
    t = poly.table(N, 2)
    expect = {(2, 0, 0): mpq(2, 3), (0, 2, 0): mpq(-1, 3), (0, 0, 2): mpq(-1, 3), (0, 0, 0): mpq(1, 3)}
    for i, e in enumerate(t.exps):
        assert r[i] == expect.get(tuple(int(v) for v in e), 0)


def test_radius_squared_reduces_to_one():
    for mode in (FLOAT, EXACT):
        r = poly.harmonic_reduce(poly.radius_squared(4, mode), 4)
        assert len(r) == 1 and r[0] == 1


def test_legendre_oracle():
    # x3^4 on S^2: harmonic degree-4 part is (8/35) P4(x3) r^4
    N = 3
    c = poly.mul_monomial(poly.constant(N, 1, EXACT), N, (0, 0, 4))
    r = poly.harmonic_reduce(c, N)
    expr, (x0, x1, x2) = to_sympy(r, N)
    h4 = sum(t for t in sympy.Add.make_args(expr) if sympy.Poly(t, x0, x1, x2).total_degree() == 4)
    # the identity h4 = (8/35) r^4 P4(x3/r), coefficient-wise
    r2 = x0**2 + x1**2 + x2**2
    target = sympy.Rational(8, 35) * sympy.expand((35 * x2**4 - 30 * x2**2 * r2 + 3 * r2**2) / 8)
    assert sympy.expand(h4 - target) == 0


@st.composite
def polys(draw, N=3, D=4):
    M = poly.n_monomials(N, D)
    vals = draw(st.lists(st.integers(-4, 4), min_size=M, max_size=M))
    c = np.empty(M, dtype=object)
    c[:] = [GaussQ(v) for v in vals]
    return c


@given(polys())
def test_reduction_is_canonical(c):
    N = 3
    r = poly.harmonic_reduce(c, N)
    expr, xs = to_sympy(r, N)
    # every homogeneous part is harmonic
    for d in range(poly.degree_of(r, N) + 1):
        part = sum(t for t in sympy.Add.make_args(expr) if t != 0 and sympy.Poly(t, *xs).total_degree() == d)
        assert sympy.expand(sum(sympy.diff(part, x, 2) for x in xs)) == 0
    # idempotent
    assert max_abs(poly.pad(poly.harmonic_reduce(r, N), N, poly.degree_of(r, N)) - r) == 0
    # the difference vanishes at rational points of the sphere
    orig, _ = to_sympy(c, N)
    R = sympy.Rational
    for pt in [(1, 0, 0), (R(3, 5), R(4, 5), 0), (R(2, 7), R(3, 7), R(6, 7)), (R(-1, 3), R(2, 3), R(-2, 3))]:
        assert (orig - expr).subs(dict(zip(xs, pt))) == 0


def test_float_and_exact_reduction_agree(rng):
    N = 4
    c = rng.integers(-5, 6, poly.n_monomials(N, 5)).astype(float)
    rf = poly.harmonic_reduce(c.astype(complex), N)
    re = poly.harmonic_reduce(to_exact(c), N)
    assert np.max(np.abs(rf - to_float(re))) < 1e-12


def test_reduction_agrees_on_sphere(rng):
    N = 5
    c = rng.standard_normal(poly.n_monomials(N, 4)) + 0j
    r = poly.harmonic_reduce(c, N)
    pts = rng.standard_normal((50, N))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    assert np.max(np.abs(poly.evaluate(c, N, pts) - poly.evaluate(r, N, pts))) < 1e-12
    assert poly.sphere_zero_defect(poly.add(c, -r, N), N) < 1e-12


def test_derivative_and_antipodal():
    N = 3
    p = poly.mul_monomial(poly.constant(N, 1, EXACT), N, (2, 1, 0))  # x0^2 x1
    d0 = poly.diff(p, N, 0)
    t = poly.table(N, 2)
    assert d0[t.index[(1, 1, 0)]] == 2
    assert poly.antipodal(p, N)[poly.table(N, 3).index[(2, 1, 0)]] == -1
    assert max_abs(poly.antipodal(poly.antipodal(p, N), N) - p) == 0


@given(polys(D=2), polys(D=2), st.integers(0, 2))
def test_leibniz_rule_scalar(p, q, a):
    N = 3
    pq = poly.scalar_mul(p, q[:, None], N)[:, 0]
    lhs = poly.diff(pq, N, a)
    rhs = poly.add(
        poly.scalar_mul(poly.diff(p, N, a), q[:, None], N)[:, 0], poly.scalar_mul(p, poly.diff(q, N, a)[:, None], N)[:, 0], N
    )
    assert max_abs(poly.add(lhs, -rhs, N)) == 0
