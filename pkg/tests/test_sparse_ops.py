"""The cached sparse operators agree with the direct coefficient-array code."""

import numpy as np
import pytest

from cartan_spinors import dirac, poly, sparse_ops
from cartan_spinors.bundle import _curvature_array_direct, coordinate_fields, covariant_array, curvature_array
from cartan_spinors.polyspinor import (
    TangentField,
    basis_array,
    clifford_vec_array,
    clifford_x_array,
    gamma_apply,
    gamma_stack,
    reduce_array,
    spinor_dim,
)
from cartan_spinors.scalars import EXACT, FLOAT, max_abs, to_float


def random_batch(n, deg, rng, batch=3):
    M = poly.n_monomials(n + 1, deg)
    s = spinor_dim(n)
    return rng.normal(size=(M, s, batch)) + 1j * rng.normal(size=(M, s, batch))


def diff_same_shape(a, b, N):
    D = max(poly.degree_of(a, N), poly.degree_of(b, N))
    return max_abs(poly.pad(a, N, D) - poly.pad(b, N, D))


def closed_form_dirac(c, n):
    """reduce(sum_a gamma_a d_a c - x.(Euler c) - (n/2) x.c): D written without any frame."""
    N = n + 1
    g = gamma_stack(n, FLOAT)
    amb = None
    euler = None
    for a in range(N):
        d = poly.diff(c, N, a)
        t = gamma_apply(g[a], d)
        amb = t if amb is None else poly.add(amb, t, N)
        e = poly.mul_var(d, N, a)
        euler = e if euler is None else poly.add(euler, e, N)
    rest = poly.add(clifford_x_array(euler, n), clifford_x_array(c, n) * (n / 2), N)
    return reduce_array(poly.add(amb, -rest, N), n)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("deg", [0, 1, 3])
def test_dirac_sparse_matches_direct(n, deg, rng):
    c = random_batch(n, deg, rng)
    N = n + 1
    assert diff_same_shape(dirac.dirac_array(c, n), dirac._dirac_array_direct(c, n), N) <= 1e-12
    assert diff_same_shape(dirac.laplace_array(c, n), dirac._laplace_array_direct(c, n), N) <= 1e-11


@pytest.mark.parametrize("n", [2, 3, 4])
def test_dirac_closed_form_oracle(n, rng):
    c = random_batch(n, 3, rng)
    assert diff_same_shape(dirac.dirac_array(c, n), closed_form_dirac(c, n), n + 1) <= 1e-12


@pytest.mark.parametrize("n", [2, 3])
def test_lichnerowicz_sparse_matches_direct(n, rng):
    c = random_batch(n, 2, rng)
    assert max_abs(dirac.lichnerowicz_array(c, n)) <= 1e-10
    assert max_abs(dirac._lichnerowicz_array_direct(c, n)) <= 1e-10


@pytest.mark.parametrize("n", [2, 3])
def test_curvature_sparse_matches_direct(n, rng):
    c = random_batch(n, 2, rng)
    V = TangentField.projected(n, rng.normal(size=n + 1))
    W = TangentField.projected(n, rng.normal(size=n + 1))
    assert max_abs(curvature_array(V, W, c, n)) <= 1e-10
    assert max_abs(_curvature_array_direct(V, W, c, n)) <= 1e-10


def test_nabla_op_matches_covariant_array(rng):
    n = 3
    c = random_batch(n, 2, rng)
    V = TangentField.projected(n, rng.normal(size=n + 1))
    got = sparse_ops.nabla_op(V, 2).apply(c)
    want = covariant_array(V.coeffs, c, n)
    assert diff_same_shape(got, want, n + 1) <= 1e-12


def test_clifford_and_position_ops(rng):
    n = 2
    c = random_batch(n, 2, rng)
    V = TangentField.projected(n, rng.normal(size=3))
    assert max_abs(sparse_ops.clifford_op(V, 2).apply(c) - clifford_vec_array(V.coeffs, c, n)) <= 1e-13
    got = sparse_ops.position_op(n, 2).apply(c)
    assert max_abs(got - clifford_x_array(c, n)) <= 1e-13


def test_float_agrees_with_exact(rng):
    n = 2
    B = basis_array(n, 2, EXACT)
    ex = dirac.dirac_array(B, n)
    fl = dirac.dirac_array(to_float(B), n)
    assert diff_same_shape(to_float(ex), fl, n + 1) <= 1e-12


def test_operator_cache_and_degree_guard(rng):
    assert sparse_ops.dirac_op(2, 2) is sparse_ops.dirac_op(2, 2)
    op = sparse_ops.dirac_op(2, 1)
    with pytest.raises(ValueError):
        op.apply(random_batch(2, 2, rng))


def test_max_abs_on_matches_dense(rng):
    n = 2
    c = random_batch(n, 2, rng)
    op = sparse_ops.dirac_op(n, 2)
    assert op.max_abs_on(c) == pytest.approx(max_abs(op.apply(c)), rel=1e-14)
    assert op.max_abs_on(np.zeros_like(c)) == 0.0
    assert sparse_ops.lichnerowicz_op(n, 2).max_abs_on(basis_array(n, 2)) <= 1e-10
    with pytest.raises(ValueError):
        sparse_ops.dirac_op(n, 1).max_abs_on(c)


def test_linop_algebra(rng):
    n = 2
    V, W = coordinate_fields(n)[:2]
    A = sparse_ops.clifford_op(V, 1)
    B = sparse_ops.clifford_op(W, 1)
    c = random_batch(n, 1, rng)
    assert max_abs((A + B).apply(c) - (A.apply(c) + B.apply(c))) <= 1e-14
    assert max_abs((A - B).apply(c) - (A.apply(c) - B.apply(c))) <= 1e-14
    assert max_abs(A.scale(2.5).apply(c) - 2.5 * A.apply(c)) <= 1e-14
    AB = sparse_ops.clifford_op(V, A.dout) @ B
    assert max_abs(AB.apply(c) - sparse_ops.clifford_op(V, 3).apply(B.apply(c))[: poly.n_monomials(3, AB.dout)]) <= 1e-14
    with pytest.raises(ValueError):
        A @ sparse_ops.clifford_op(W, 3)
