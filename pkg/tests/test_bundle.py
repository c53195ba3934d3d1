"""Tangent geometry, antipodal lifts, sections, connection and splitting."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cartan_spinors import poly
from cartan_spinors.bundle import (
    BundleSelector,
    context,
    coordinate_fields,
    covariant_derivative,
    curvature_defect,
    dg,
    equivariance_defect,
    involution_defect,
    leibniz_defect,
    lift_g,
    metric_defect,
    mu,
    project_section,
    project_tangent,
    section_check,
    splitting_behavior,
    splitting_operator,
    tangent_frame,
)
from cartan_spinors.errors import SpherePointError, TangencyError
from cartan_spinors.polyspinor import (
    PolySpinorField,
    SpherePoint,
    TangentField,
    basis_fields,
    clifford_mul_field,
    clifford_mul_position,
    sphere_norm,
    spinor_dim,
)
from cartan_spinors.scalars import EXACT, FLOAT, max_abs


def rand_spinor(dim, rng):
    return rng.normal(size=dim) + 1j * rng.normal(size=dim)


def int_spinor(dim, rng):
    return rng.integers(-3, 4, size=dim) + 1j * rng.integers(-3, 4, size=dim)


def random_field(n, deg, rng, mode=FLOAT):
    M = poly.n_monomials(n + 1, deg)
    s = spinor_dim(n)
    if mode == EXACT:
        return PolySpinorField(n, int_spinor((M, s), rng)).as_mode(EXACT)
    return PolySpinorField(n, rand_spinor((M, s), rng))


def killing_shape(n, phi0, sign, mode=EXACT):
    """(1 + sign x) phi0."""
    c = PolySpinorField.constant(n, phi0, mode)
    t = clifford_mul_position(c)
    return c + t if sign > 0 else c - t


def random_tangent(n, rng):
    x = SpherePoint.random(n, rng).x
    return project_tangent(x, rng.normal(size=n + 1))


# ---------------------------------------------------------------------------
# context and pointwise geometry


@pytest.mark.parametrize("n", range(1, 8))
def test_context(n):
    ctx = context(n)
    assert ctx.dim == 2 ** ((n + 1) // 2)
    assert ctx.tau == n * (n - 1)
    assert ctx.rep.kind == ("pauli" if n % 2 == 0 else "dirac")


def test_project_tangent_examples(rng):
    x = SpherePoint.random(3, rng).x
    assert np.allclose(project_tangent(x, x).t, 0, atol=1e-15)
    a = rng.normal(size=4)
    a = a - (a @ x) * x
    assert np.allclose(project_tangent(x, a).t, a)
    v = project_tangent([1.0, 0.0, 0.0], [1.0, 1.0, 0.0])
    assert np.allclose(v.t, [0.0, 1.0, 0.0])
    with pytest.raises(SpherePointError):
        project_tangent([1.0, 1.0, 0.0], [0.0, 0.0, 1.0])


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_mu_examples(n, rng):
    ctx = context(n)
    phi = rand_spinor(ctx.dim, rng)
    x = SpherePoint.random(n, rng).x
    assert np.allclose(mu(ctx, project_tangent(x, x), phi), 0)
    v = random_tangent(n, rng)
    twice = mu(ctx, v, mu(ctx, v, phi))
    assert np.allclose(twice, -(v.t @ v.t) * phi, atol=1e-13)
    # orthonormal pair at the same point
    s = v.t / np.linalg.norm(v.t)
    w = project_tangent(v.x, rng.normal(size=n + 1)).t
    w = w - (w @ s) * s
    t = w / np.linalg.norm(w)
    vs, vt = project_tangent(v.x, s), project_tangent(v.x, t)
    assert np.allclose(mu(ctx, vs, mu(ctx, vt, phi)), -mu(ctx, vt, mu(ctx, vs, phi)), atol=1e-13)


def test_mu_rejects_normal_vector(rng):
    ctx = context(2)
    x = SpherePoint.random(2, rng).x
    from cartan_spinors.bundle import TangentVector

    with pytest.raises(TangencyError):
        mu(ctx, TangentVector(x, x), np.ones(2))


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
@pytest.mark.parametrize("sign", [1, -1])
def test_lift_involution_and_equivariance(n, sign, rng):
    ctx = context(n)
    worst_inv = worst_eq = 0.0
    for _ in range(100):
        v = random_tangent(n, rng)
        phi = rand_spinor(ctx.dim, rng)
        worst_inv = max(worst_inv, involution_defect(ctx, sign, v.x, phi))
        worst_eq = max(worst_eq, equivariance_defect(ctx, sign, v, phi))
    assert worst_inv <= 1e-12
    assert worst_eq <= 1e-12


def test_lift_examples(rng):
    ctx = context(3)
    x = SpherePoint.random(3, rng).x
    y, psi = lift_g(ctx, 1, x, np.zeros(4))
    assert np.allclose(y, -x) and np.allclose(psi, 0)
    phi = rand_spinor(4, rng)
    _, plus = lift_g(ctx, 1, x, phi)
    _, minus = lift_g(ctx, -1, x, phi)
    assert np.allclose(plus, -minus)
    assert np.allclose(plus, ctx.gamma(x) @ phi)
    with pytest.raises(ValueError):
        lift_g(ctx, 0, x, phi)
    v = dg(project_tangent(x, rng.normal(size=4)))
    assert np.allclose(v.x, -x)


# ---------------------------------------------------------------------------
# sections


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_section_check_examples(n, rng):
    phi0 = int_spinor(spinor_dim(n), rng)
    assert section_check("rp_plus", killing_shape(n, phi0, -1)) == 0
    assert section_check("rp_minus", killing_shape(n, phi0, +1)) == 0
    assert section_check("rp_minus", killing_shape(n, phi0, -1)) > 0
    const = PolySpinorField.constant(n, phi0, EXACT)
    assert section_check(BundleSelector.RP_PLUS, const) > 0
    assert section_check("sphere", const) == 0


@pytest.mark.parametrize("n", [2, 3])
def test_project_section_examples(n, rng):
    phi0 = int_spinor(spinor_dim(n), rng)
    phi = killing_shape(n, phi0, -1)
    assert max_abs((project_section("rp_plus", phi) - phi).coeffs) == 0
    assert sphere_norm(project_section("rp_minus", phi)) == 0
    assert project_section("sphere", phi) is phi


@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 4))
def test_projector_algebra_exact(seed, n):
    rng = np.random.default_rng(seed)
    phi = random_field(n, 2, rng, EXACT)
    plus = project_section("rp_plus", phi)
    minus = project_section("rp_minus", phi)
    assert sphere_norm(plus + minus - phi) == 0
    assert max_abs((project_section("rp_plus", plus) - plus).coeffs) == 0
    assert max_abs((project_section("rp_minus", minus) - minus).coeffs) == 0
    assert section_check("rp_plus", plus) == 0
    assert section_check("rp_minus", minus) == 0
    assert sphere_norm(project_section("rp_plus", minus)) == 0


# ---------------------------------------------------------------------------
# connection


@pytest.mark.parametrize("n", [2, 3, 4])
def test_covariant_of_constant(n, rng):
    phi0 = int_spinor(spinor_dim(n), rng)
    c = PolySpinorField.constant(n, phi0, EXACT)
    for V in coordinate_fields(n, EXACT):
        got = covariant_derivative(V, c)
        want = clifford_mul_field(V, clifford_mul_position(c)) * 0.5
        assert sphere_norm(got - want.as_mode(EXACT)) == 0


@pytest.mark.parametrize("n", [2, 3, 4, 5])
@pytest.mark.parametrize("sign", [1, -1])
def test_covariant_of_killing_shape(n, sign, rng):
    """(1 + sign x) phi0 satisfies nabla_V phi = (sign / 2) V . phi."""
    phi = killing_shape(n, int_spinor(spinor_dim(n), rng), sign)
    V = TangentField.projected(n, rng.integers(-2, 3, size=n + 1), EXACT)
    got = covariant_derivative(V, phi)
    want = clifford_mul_field(V, phi)
    want = want * (0.5 if sign > 0 else -0.5)
    assert sphere_norm(got - want.as_mode(EXACT)) == 0


def test_curvature_examples(rng):
    V, W = coordinate_fields(2)[:2]
    c = PolySpinorField.constant(2, [1.0, 2.0j])
    assert curvature_defect(V, V, c) <= 1e-12
    assert curvature_defect(V, W, c) <= 1e-12
    ex = PolySpinorField.constant(2, [1, 2j], EXACT)
    Ve, We = coordinate_fields(2, EXACT)[:2]
    assert curvature_defect(Ve, We, ex) == 0
    phi = random_field(5, 2, rng)
    A, B = (TangentField.projected(5, rng.normal(size=6)) for _ in range(2))
    assert curvature_defect(A, B, phi) <= 1e-10


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_curvature_vanishes_on_full_basis(n):
    fields = basis_fields(n, 3)
    coords = coordinate_fields(n)
    arr = np.stack([f.coeffs for f in fields], axis=-1)
    from cartan_spinors.bundle import curvature_array

    worst = 0.0
    for i in range(n + 1):
        for j in range(i + 1, n + 1):
            worst = max(worst, max_abs(curvature_array(coords[i], coords[j], arr, n)))
    assert worst <= 1e-10


def test_curvature_exact_small(rng):
    n = 2
    V, W = (TangentField.projected(n, rng.integers(-2, 3, size=3), EXACT) for _ in range(2))
    assert curvature_defect(V, W, random_field(n, 1, rng, EXACT)) == 0


@pytest.mark.parametrize("n", [2, 3])
def test_leibniz_exact(n, rng):
    V, W = (TangentField.projected(n, rng.integers(-2, 3, size=n + 1), EXACT) for _ in range(2))
    assert leibniz_defect(V, W, random_field(n, 2, rng, EXACT)) == 0


@pytest.mark.parametrize("n", [2, 3, 4])
def test_metric_compatibility(n, rng):
    phi, psi = random_field(n, 2, rng), random_field(n, 2, rng)
    V = TangentField.projected(n, rng.normal(size=n + 1))
    X = np.array([SpherePoint.random(n, rng).x for _ in range(30)])
    assert metric_defect(V, phi, psi, X) <= 1e-11


def test_tangent_clifford_is_skew(rng):
    for n in (2, 3, 4):
        ctx = context(n)
        v = random_tangent(n, rng)
        G = ctx.gamma(v.t)
        assert np.allclose(G.conj().T, -G)


# ---------------------------------------------------------------------------
# splitting


@pytest.mark.parametrize("n", range(2, 8))
def test_frame_orientation(n, rng):
    for _ in range(5):
        x = SpherePoint.random(n, rng).x
        F = tangent_frame(x)
        assert np.allclose(F @ F.T, np.eye(n))
        assert np.allclose(F @ x, 0)
        assert np.linalg.det(np.vstack([F, x])) > 0


@pytest.mark.parametrize("n", range(2, 8))
def test_splitting_operator(n, rng):
    ctx = context(n)
    for _ in range(5):
        x = SpherePoint.random(n, rng).x
        f = splitting_operator(ctx, x).matrix
        eye = np.eye(ctx.dim)
        if n % 2 == 0:
            assert np.allclose(f @ f, eye)
        else:
            k = (n - 1) // 2
            gx = ctx.gamma(x)
            assert np.allclose(f @ f, (-1) ** (k + 1) * eye)
            assert np.allclose(f @ gx, -gx @ f)
            t = project_tangent(x, rng.normal(size=n + 1)).t
            assert np.allclose(f @ ctx.gamma(t), ctx.gamma(t) @ f)


@pytest.mark.parametrize("n", range(2, 8))
def test_splitting_behavior_parity(n):
    rep = splitting_behavior(context(n), samples=20, rng=np.random.default_rng(n))
    assert rep.violations == 0
    if n % 2 == 0:
        assert rep.even_swaps and not rep.odd_preserves
    else:
        assert rep.odd_preserves and not rep.even_swaps
    doc = rep.to_json()
    assert doc["violations"] == 0 and doc["samples"] == 20
