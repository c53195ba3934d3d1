"""Dirac operator, Lichnerowicz identity, Killing spinors and spectra."""

import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cartan_spinors import poly
from cartan_spinors.bundle import BundleSelector, context, section_check
from cartan_spinors.dirac import (
    ambient_dirac_array,
    cluster,
    curvature_consistency_pointwise,
    dirac_apply,
    dirac_at_point,
    exact_characteristic_check,
    killing_field,
    killing_verify,
    laplace_apply,
    lichnerowicz_defect,
    monogenic_eigenfields,
    monogenic_kernel,
    operator_matrix,
    spectrum,
)
from cartan_spinors.errors import DegreeBoundError, SizeError
from cartan_spinors.polyspinor import PolySpinorField, SpherePoint, basis_array, evaluate, sphere_norm
from cartan_spinors.scalars import EXACT, max_abs

# kernel dimensions of the flat Dirac operator on homogeneous spinor polynomials,
# frozen from an independent sympy rank computation
MONOGENIC_DIMS = {(3, 0): 2, (3, 1): 4, (3, 2): 6, (4, 0): 4, (4, 1): 12, (4, 2): 24}

# sphere tables: value -> multiplicity, from diagonalisation at m = 3
SPHERE_S2 = {-3.0: 6, -2.0: 4, -1.0: 2, 1.0: 2, 2.0: 4, 3.0: 6}
SPHERE_S3 = {-3.5: 24, -2.5: 12, -1.5: 4, 1.5: 4, 2.5: 12, 3.5: 24}


def int_spinor(s, rng):
    return rng.integers(-3, 4, size=s) + 1j * rng.integers(-3, 4, size=s)


def as_dict(table):
    return {e.value: e.multiplicity for e in table.entries if not e.truncated}


# ---------------------------------------------------------------------------
# Dirac and Laplace examples


@pytest.mark.parametrize("n", [2, 3, 4, 5])
@pytest.mark.parametrize("sign", [-1, 1])
def test_dirac_on_killing_fields(n, sign, rng):
    ctx = context(n)
    phi = killing_field(ctx, int_spinor(ctx.dim, rng), sign, EXACT)
    want = phi * (-sign * n * 0.5)
    assert sphere_norm(dirac_apply(ctx, phi) - want.as_mode(EXACT)) == 0


def test_dirac_of_zero():
    ctx = context(3)
    assert sphere_norm(dirac_apply(ctx, PolySpinorField.zero(3))) == 0
    assert sphere_norm(laplace_apply(ctx, PolySpinorField.zero(3, EXACT))) == 0


@pytest.mark.parametrize("n", [2, 3, 4])
def test_laplace_examples(n, rng):
    ctx = context(n)
    phi0 = int_spinor(ctx.dim, rng)
    c = PolySpinorField.constant(n, phi0, EXACT)
    assert sphere_norm(laplace_apply(ctx, c) - (c * (n / 4)).as_mode(EXACT)) == 0
    k = killing_field(ctx, phi0, -1, EXACT)
    assert sphere_norm(laplace_apply(ctx, k) - (k * (n / 4)).as_mode(EXACT)) == 0


@pytest.mark.parametrize("n", [2, 3, 4])
def test_frame_free_matches_local_frame(n, rng):
    ctx = context(n)
    phi = PolySpinorField(n, rng.normal(size=(poly.n_monomials(n + 1, 2), ctx.dim)))
    Dphi = dirac_apply(ctx, phi)
    for _ in range(10):
        x = SpherePoint.random(n, rng)
        assert np.allclose(evaluate(Dphi, x), dirac_at_point(ctx, phi, x.x), atol=1e-12)


# ---------------------------------------------------------------------------
# Lichnerowicz


def test_lichnerowicz_examples(rng):
    assert lichnerowicz_defect(context(3), PolySpinorField.constant(3, int_spinor(4, rng), EXACT)) == 0
    phi = PolySpinorField(2, rng.normal(size=(poly.n_monomials(3, 3), 2)))
    assert lichnerowicz_defect(context(2), phi) <= 1e-9
    k = killing_field(context(5), int_spinor(8, rng), -1)
    assert lichnerowicz_defect(context(5), k) <= 1e-9


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_lichnerowicz_on_full_basis(n):
    from cartan_spinors.dirac import lichnerowicz_array

    assert max_abs(lichnerowicz_array(basis_array(n, 3), n)) <= 1e-9


def test_lichnerowicz_exact_degree_two():
    from cartan_spinors.dirac import lichnerowicz_array

    assert max_abs(lichnerowicz_array(basis_array(2, 2, EXACT), 2)) == 0


# ---------------------------------------------------------------------------
# Killing spinors


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_killing_fields_and_sections(n, rng):
    ctx = context(n)
    phi0 = int_spinor(ctx.dim, rng)
    minus = killing_field(ctx, phi0, -1, EXACT)
    plus = killing_field(ctx, phi0, 1, EXACT)
    assert section_check("rp_plus", minus) == 0
    assert section_check("rp_minus", plus) == 0
    assert np.allclose(complex(minus.coeffs[0, 0]), phi0[0])


def test_killing_field_errors():
    with pytest.raises(ValueError):
        killing_field(context(2), [0, 0], -1)
    with pytest.raises(ValueError):
        killing_field(context(2), [1, 0], 0)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_killing_verify(n, rng):
    ctx = context(n)
    phi0 = int_spinor(ctx.dim, rng)
    rep = killing_verify(ctx, killing_field(ctx, phi0, -1, EXACT), -0.5)
    assert rep.residual == 0 and rep.curvature_consistency == 0
    assert rep.dirac_eigenvalue == n / 2 and rep.dirac_residual == 0
    assert rep.section_residual["rp_plus"] == 0 and rep.section_residual["rp_minus"] > 0
    rep = killing_verify(ctx, killing_field(ctx, phi0, 1, EXACT), 0.5)
    assert rep.residual == 0 and rep.dirac_eigenvalue == -n / 2
    wrong = killing_verify(ctx, killing_field(ctx, phi0, -1, EXACT), 0.5)
    assert wrong.residual > 0
    other = killing_verify(ctx, killing_field(ctx, phi0, -1), 1.0)
    assert other.curvature_consistency > 0
    json.dumps(rep.to_json())


@given(lam=st.floats(-2, 2, allow_nan=False), seed=st.integers(0, 2**32 - 1))
def test_curvature_pins_killing_number(lam, seed):
    """Only lambda = +-1/2 is compatible with the curvature of the sphere."""
    rng = np.random.default_rng(seed)
    ctx = context(3)
    phi = killing_field(ctx, rng.normal(size=4) + 1j * rng.normal(size=4), -1)
    pts = np.array([SpherePoint.random(3, rng).x for _ in range(5)])
    defect, norm = curvature_consistency_pointwise(ctx, phi, lam, pts)
    assert defect == pytest.approx(abs(2 * lam**2 - 0.5) * norm, rel=1e-9, abs=1e-12)


# ---------------------------------------------------------------------------
# monogenic oracle


@pytest.mark.parametrize("Nk, dim", sorted(MONOGENIC_DIMS.items()))
def test_monogenic_kernel_dims(Nk, dim):
    N, k = Nk
    ker = monogenic_kernel(N, k, EXACT)
    assert len(ker) == dim
    for P in ker:
        assert max_abs(ambient_dirac_array(P.coeffs, N - 1)) == 0


def test_monogenic_float_matches_exact():
    assert len(monogenic_kernel(4, 2)) == len(monogenic_kernel(4, 2, EXACT))
    with pytest.raises(SizeError):
        monogenic_kernel(3, -1)


@pytest.mark.parametrize("n, table", [(2, SPHERE_S2), (3, SPHERE_S3)])
def test_monogenic_eigenvalues_match_diagonalisation(n, table):
    ctx = context(n)
    seen = {}
    for k in range(3):
        for mu, res, f in monogenic_eigenfields(ctx, k, EXACT):
            assert res == 0
            seen.setdefault(float(complex(mu).real), 0)
            seen[float(complex(mu).real)] += 1
    # (1 -+ x) P over monogenic P of degree <= 2 fill every eigenspace of the table
    assert seen == table


# ---------------------------------------------------------------------------
# operator matrices and spectra


def test_operator_matrix_dimensions():
    assert operator_matrix(context(2), "sphere", 1).dim == 8
    assert operator_matrix(context(3), "sphere", 1).dim == 20
    plus = operator_matrix(context(2), "rp_plus", 1)
    minus = operator_matrix(context(2), "rp_minus", 1)
    sphere = operator_matrix(context(2), "sphere", 1)
    assert plus.invariant_dim + minus.invariant_dim == sphere.invariant_dim == 4
    for op in (plus, minus, sphere):
        assert op.closure_residual <= 1e-9
        assert op.hermitian_defect <= 1e-9


def test_operator_matrix_degree_errors():
    with pytest.raises(DegreeBoundError):
        operator_matrix(context(2), "sphere", 0)


@pytest.mark.parametrize("n, table", [(2, SPHERE_S2), (3, SPHERE_S3)])
def test_sphere_spectrum(n, table):
    t = spectrum(context(n), "sphere", 3)
    assert as_dict(t) == table
    assert t.max_imag <= 1e-9
    assert sum(e.multiplicity for e in t.entries) == t.dimension
    assert all(e.value == 0 for e in t.entries if e.truncated)
    for v, k in as_dict(t).items():
        assert t.multiplicity(-v) == k


def test_spectrum_examples():
    t = spectrum(context(2), "sphere", 2)
    vals = t.values()
    assert min(abs(v) for v in vals) == 1.0
    assert t.multiplicity(1.0) + t.multiplicity(-1.0) >= 4
    t3 = spectrum(context(3), "sphere", 2)
    assert t3.multiplicity(1.5) > 0 and t3.multiplicity(-1.5) > 0


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("m", [1, 2, 3])
def test_partition(n, m):
    ctx = context(n)
    sphere = spectrum(ctx, "sphere", m)
    plus = spectrum(ctx, "rp_plus", m)
    minus = spectrum(ctx, "rp_minus", m)
    for v in set(sphere.values()) | set(plus.values()) | set(minus.values()):
        assert sphere.multiplicity(v) == plus.multiplicity(v) + minus.multiplicity(v)
    # the quotient tables are mirror images of each other
    assert as_dict(plus) == {-v: k for v, k in as_dict(minus).items()}
    assert plus.multiplicity(n / 2) >= ctx.dim


def test_rp_tables():
    assert as_dict(spectrum(context(2), "rp_plus", 3)) == {-2.0: 4, 1.0: 2, 3.0: 6}
    assert as_dict(spectrum(context(3), "rp_plus", 3)) == {-2.5: 12, 1.5: 4, 3.5: 24}


def test_exact_characteristic_polynomial():
    ctx = context(2)
    assert exact_characteristic_check(ctx, "sphere", 1)[0] == {1: 2, -1: 2}
    assert exact_characteristic_check(ctx, "rp_plus", 1)[0] == {1: 2}
    assert exact_characteristic_check(ctx, "rp_minus", 1)[0] == {-1: 2}


def test_spectrum_json_and_render():
    t = spectrum(context(2), BundleSelector.RP_PLUS, 2)
    doc = t.to_json()
    assert json.loads(json.dumps(doc)) == doc
    assert doc["space"] == "rp_plus" and doc["invariant_dimension"] == 6
    assert "rp_plus" in t.render()


def test_cluster():
    assert cluster([1.0, 1.0 + 2e-11, -1.0, 2.0]) == [(-1.0, 1), (1.0, 2), (2.0, 1)]
    assert cluster([]) == []
