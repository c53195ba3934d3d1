"""Dirac and Laplace operators on polynomial spinor fields, Killing spinors and spectra.

Both operators are assembled frame-free from the projected coordinate
fields ``E_b = e_b - x_b x``.  Since ``sum_b E_b (x) E_b`` is the tangential
projector, any expression that is tensorial in its vector slots has the same
trace over ``{E_b}`` as over a local orthonormal frame:

    D phi   = sum_b E_b . nabla_{E_b} phi
    Lap phi = -sum_b (nabla_{E_b} nabla_{E_b} phi - nabla_{nabla_{E_b} E_b} phi)
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np
from gmpy2 import mpq

from . import poly, sparse_ops
from .bundle import (
    BundleContext,
    BundleSelector,
    coordinate_fields,
    covariant_array,
    section_check,
    section_defect_array,
)
from .errors import DegreeBoundError, SizeError
from .linalg import adjoint, nullspace, orth, rank, solve_columns
from .polyspinor import (
    PolySpinorField,
    SpherePoint,
    TangentField,
    basis_array,
    clifford_mul_field,
    clifford_vec_array,
    clifford_x_array,
    gamma_apply,
    gamma_stack,
    reduce_array,
    sphere_norm,
)
from .scalars import EXACT, FLOAT, as_mode, is_exact, max_abs, mode_of, scalar, to_float, value, zeros

CLOSURE_TOL = 1e-9
CLUSTER_TOL = 1e-8


# ---------------------------------------------------------------------------
# operators


@lru_cache(maxsize=None)
def _frame_self_derivatives(n: int, mode: str) -> tuple[TangentField, ...]:
    return tuple(E.covariant(E).reduced() for E in coordinate_fields(n, mode))


def dirac_array(c: np.ndarray, n: int) -> np.ndarray:
    if not is_exact(c):
        return poly.trim(sparse_ops.dirac_op(n, poly.degree_of(c, n + 1)).apply(c), n + 1)
    return _dirac_array_direct(c, n)


def _dirac_array_direct(c: np.ndarray, n: int) -> np.ndarray:
    N = n + 1
    mode = mode_of(c)
    out = None
    for E in coordinate_fields(n, mode):
        t = clifford_vec_array(E.coeffs, covariant_array(E.coeffs, c, n), n)
        out = t if out is None else poly.add(out, t, N)
    return reduce_array(out, n)


def laplace_array(c: np.ndarray, n: int) -> np.ndarray:
    if not is_exact(c):
        return poly.trim(sparse_ops.laplace_op(n, poly.degree_of(c, n + 1)).apply(c), n + 1)
    return _laplace_array_direct(c, n)


def _laplace_array_direct(c: np.ndarray, n: int) -> np.ndarray:
    N = n + 1
    mode = mode_of(c)
    out = None
    for E, dEE in zip(coordinate_fields(n, mode), _frame_self_derivatives(n, mode)):
        t = covariant_array(E.coeffs, covariant_array(E.coeffs, c, n), n)
        t = poly.add(t, -covariant_array(dEE.coeffs, c, n), N)
        out = t if out is None else poly.add(out, t, N)
    return reduce_array(-out, n)


def dirac_apply(ctx: BundleContext, phi: PolySpinorField) -> PolySpinorField:
    return PolySpinorField(phi.n, dirac_array(phi.coeffs, phi.n))


def laplace_apply(ctx: BundleContext, phi: PolySpinorField) -> PolySpinorField:
    return PolySpinorField(phi.n, laplace_array(phi.coeffs, phi.n))


def lichnerowicz_array(c: np.ndarray, n: int) -> np.ndarray:
    if not is_exact(c):
        return poly.trim(sparse_ops.lichnerowicz_op(n, poly.degree_of(c, n + 1)).apply(c), n + 1)
    return _lichnerowicz_array_direct(c, n)


def _lichnerowicz_array_direct(c: np.ndarray, n: int) -> np.ndarray:
    """Canonical form of ``D^2 c - Lap c - n(n-1)/4 c``."""
    N = n + 1
    mode = mode_of(c)
    q = scalar(n * (n - 1), mode) * (mpq(1, 4) if mode == EXACT else 0.25)
    dd = dirac_array(dirac_array(c, n), n)
    rest = poly.add(laplace_array(c, n), c * q, N)
    return reduce_array(poly.add(dd, -rest, N), n)


def lichnerowicz_defect(ctx: BundleContext, phi: PolySpinorField) -> float:
    return max_abs(lichnerowicz_array(phi.coeffs, phi.n))


def dirac_at_point(ctx: BundleContext, phi: PolySpinorField, x) -> np.ndarray:
    """``sum_i e_i . (nabla_{e_i} phi)(x)`` over an orthonormal tangent frame at x."""
    from .bundle import tangent_frame
    from .polyspinor import evaluate

    x = SpherePoint(np.asarray(x, dtype=float)).x
    N = phi.N
    jac = np.stack([poly.evaluate(poly.diff(phi.coeffs, N, a), N, x) for a in range(N)])  # (N, s)
    val = evaluate(phi, x)
    gx = ctx.gamma(x)
    out = np.zeros(ctx.dim, dtype=np.complex128)
    for e in tangent_frame(x):
        ge = ctx.gamma(e)
        nab = e @ jac + 0.5 * ge @ (gx @ val)
        out += ge @ nab
    return out


# ---------------------------------------------------------------------------
# Killing spinors


@dataclass
class KillingReport:
    killing_number: float
    residual: float
    curvature_consistency: float
    dirac_eigenvalue: float | None
    dirac_residual: float
    section_residual: dict[str, float]
    mode: str

    def to_json(self) -> dict:
        return {
            "lambda": self.killing_number,
            "residual": _sig(self.residual),
            "curvature_consistency": _sig(self.curvature_consistency),
            "dirac_eigenvalue": None if self.dirac_eigenvalue is None else _tidy(self.dirac_eigenvalue),
            "dirac_residual": _sig(self.dirac_residual),
            "section_residual": {k: _sig(v) for k, v in sorted(self.section_residual.items())},
            "mode": self.mode,
        }


def killing_field(ctx: BundleContext, phi0, sign: int, mode: str = FLOAT) -> PolySpinorField:
    """``(1 - x) phi0`` for Killing number -1/2 (``sign=-1``), ``(1 + x) phi0`` for +1/2."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    phi0 = np.asarray(phi0).reshape(-1)
    if not np.any(to_float(phi0)):
        raise ValueError("phi0 must be non-zero")
    c = PolySpinorField.constant(ctx.n, phi0, mode)
    xc = clifford_x_array(c.coeffs, ctx.n)
    out = poly.add(c.coeffs, xc if sign > 0 else -xc, ctx.N)
    return PolySpinorField(ctx.n, out)


def eigen_ratio(phi: PolySpinorField, image: PolySpinorField) -> tuple[object, float]:
    """Scalar mu with ``image ~= mu * phi`` (read off at the largest coefficient) and the defect."""
    a = reduce_array(phi.coeffs, phi.n)
    b = reduce_array(image.coeffs, phi.n)
    N = phi.N
    D = max(poly.degree_of(a, N), poly.degree_of(b, N))
    a, b = poly.pad(a, N, D), poly.pad(b, N, D)
    flat = to_float(a).reshape(-1)
    k = int(np.argmax(np.abs(flat)))
    if abs(flat[k]) == 0:
        return 0, max_abs(b)
    mu = b.reshape(-1)[k] / a.reshape(-1)[k]
    return mu, max_abs(b - a * mu)


def killing_verify(ctx: BundleContext, phi: PolySpinorField, lam) -> KillingReport:
    n = ctx.n
    mode = phi.mode
    lam_s = scalar(lam, mode) if mode == FLOAT else as_mode(np.array([lam]), EXACT)[0]
    resid = 0.0
    dphi = None
    for E in coordinate_fields(n, mode):
        nab = covariant_array(E.coeffs, phi.coeffs, n)
        vphi = clifford_vec_array(E.coeffs, phi.coeffs, n)
        resid = max(resid, max_abs(reduce_array(poly.add(nab, -(vphi * lam_s), ctx.N), n)))
        # the same covariant derivatives assemble D phi = sum_E E . nabla_E phi
        t = clifford_vec_array(E.coeffs, nab, n)
        dphi = t if dphi is None else poly.add(dphi, t, ctx.N)
    # 2 lam^2 (WV + <V,W>) phi must equal the curvature 1/2 (WV + <V,W>) phi
    factor = abs(2 * float(lam) ** 2 - 0.5)
    cons = 0.0
    if factor:
        fields = coordinate_fields(n, mode)
        for i, V in enumerate(fields):
            for W in fields[i + 1 :]:
                t = clifford_vec_array(W.coeffs, clifford_vec_array(V.coeffs, phi.coeffs, n), n)
                t = poly.add(t, poly.scalar_mul(V.inner(W), phi.coeffs, ctx.N), ctx.N)
                cons = max(cons, factor * max_abs(reduce_array(t, n)))
    mu, dres = eigen_ratio(phi, PolySpinorField(n, reduce_array(dphi, n)))
    return KillingReport(
        killing_number=float(lam),
        residual=resid,
        curvature_consistency=cons,
        dirac_eigenvalue=float(complex(mu).real),
        dirac_residual=dres,
        section_residual={s.value: section_check(s, phi) for s in (BundleSelector.RP_PLUS, BundleSelector.RP_MINUS)},
        mode=mode,
    )


def curvature_consistency_pointwise(ctx: BundleContext, phi: PolySpinorField, lam: float, points) -> tuple[float, float]:
    """Max over points of ``|(2 lam^2 - 1/2)(w v + <v,w>) phi(x)|`` for an orthonormal pair (v, w).

    Returns ``(defect, sup_x |phi(x)|)``; for orthonormal v, w the product
    ``w v`` is unitary so the defect equals ``|2 lam^2 - 1/2| * sup |phi|``.
    """
    from .bundle import tangent_frame
    from .polyspinor import evaluate

    worst = 0.0
    norm = 0.0
    for x in np.atleast_2d(points):
        frame = tangent_frame(x)
        v, w = frame[0], frame[1 % len(frame)]
        val = evaluate(phi, x)
        op = ctx.gamma(w) @ ctx.gamma(v) + (v @ w) * np.eye(ctx.dim)
        d = (2 * lam**2) * (op @ val) - 0.5 * (op @ val)
        worst = max(worst, float(np.linalg.norm(d)))
        norm = max(norm, float(np.linalg.norm(val)))
    return worst, norm


# ---------------------------------------------------------------------------
# monogenic oracle


def ambient_dirac_array(c: np.ndarray, n: int) -> np.ndarray:
    """Flat Dirac operator ``sum_a gamma_a d/dx_a`` on R^(n+1)."""
    N = n + 1
    gam = gamma_stack(n, mode_of(c))
    out = None
    for a in range(N):
        t = gamma_apply(gam[a], poly.diff(c, N, a))
        out = t if out is None else out + t
    return out


def monogenic_kernel(N: int, k: int, mode: str = FLOAT) -> list[PolySpinorField]:
    """Basis of homogeneous degree-k spinor polynomials on R^N killed by the flat Dirac operator."""
    if k < 0:
        raise SizeError("degree must be >= 0")
    n = N - 1
    s = 1 << (N // 2)
    t = poly.table(N, k)
    blk = t.block(k)
    hom = blk.stop - blk.start
    M = len(t)
    probe = zeros((M, s, hom * s), mode)
    col = 0
    for i in range(blk.start, blk.stop):
        for j in range(s):
            probe[i, j, col] = value(1, mode)
            col += 1
    img = ambient_dirac_array(probe, n)
    ker = nullspace(img.reshape(-1, hom * s))
    fields = []
    for q in range(ker.shape[1]):
        c = zeros((M, s), mode)
        c[blk] = ker[:, q].reshape(hom, s)
        fields.append(PolySpinorField(n, c))
    return fields


def monogenic_eigenfields(ctx: BundleContext, k: int, mode: str = FLOAT):
    """Oracle eigenpairs ``(mu, (1 -+ x) P)`` for monogenic P of degree k."""
    out = []
    for P in monogenic_kernel(ctx.N, k, mode):
        xp = clifford_x_array(P.coeffs, ctx.n)
        for sgn in (-1, 1):
            f = PolySpinorField(ctx.n, poly.add(P.coeffs, xp * scalar(sgn, mode), ctx.N))
            mu, res = eigen_ratio(f, dirac_apply(ctx, f))
            out.append((mu, res, f))
    return out


# ---------------------------------------------------------------------------
# operator matrices and spectra


def _flatten(c: np.ndarray, N: int, D: int) -> np.ndarray:
    c = poly.pad(c, N, D)
    return c.reshape(c.shape[0] * c.shape[1], -1)


def sphere_moment_matrix(N: int, D: int) -> np.ndarray:
    """``avg_{S^(N-1)} x^a x^b`` for monomials of degree <= D (float)."""
    t = poly.table(N, D)
    exps = t.exps[:, None, :] + t.exps[None, :, :]
    even = np.all(exps % 2 == 0, axis=2)
    tot = exps.sum(axis=2)
    num = np.ones(exps.shape[:2])
    for i in range(N):
        num *= _odd_double_factorial(exps[:, :, i])
    den = np.ones(exps.shape[:2])
    for j in range(int(tot.max()) // 2):
        den *= np.where(2 * j < tot, N + 2 * j, 1)
    return np.where(even, num / den, 0.0)


def _odd_double_factorial(e: np.ndarray) -> np.ndarray:
    """(e-1)!! elementwise for even e."""
    out = np.ones(e.shape)
    for k in range(1, int(e.max()) + 1, 2):
        out *= np.where(k < e, k, 1)
    return out


@dataclass
class OperatorMatrix:
    n: int
    selector: BundleSelector
    m: int
    basis: np.ndarray  # (M, s, B) coefficient arrays of the space, invariant part first
    matrix: np.ndarray  # compression of D to span(basis), coefficient metric
    invariant_dim: int
    closure_residual: float
    hermitian_defect: float
    mode: str = FLOAT

    @property
    def dim(self) -> int:
        return self.basis.shape[2]

    def basis_fields(self) -> list[PolySpinorField]:
        return [PolySpinorField(self.n, self.basis[:, :, i]) for i in range(self.dim)]


def section_space(n: int, selector: BundleSelector, m: int, mode: str = FLOAT) -> np.ndarray:
    """Basis ``(M, s, r)`` of sections of degree <= m for the selected bundle."""
    B = basis_array(n, m, mode)
    if selector == BundleSelector.SPHERE:
        return B
    N = n + 1
    cons = section_defect_array(selector, B, n)
    K = nullspace(_flatten(cons, N, m + 1))
    return np.tensordot(B, K, axes=([2], [0]))


def operator_matrix(ctx: BundleContext, selector, m: int, mode: str = FLOAT) -> OperatorMatrix:
    """Matrix of D on the degree-<=m sections, split into the largest D-invariant part and the rest.

    D raises the polynomial degree of the top monogenic components, so the
    space of degree <= m fields is not D-invariant.  The basis is ordered
    as [invariant part | complement]; the matrix is block upper triangular
    and only the invariant block carries true eigenvalues.
    """
    selector = BundleSelector.parse(selector)
    if m < 1:
        raise DegreeBoundError(f"degree bound m={m} too small; use m >= 1")
    n, N = ctx.n, ctx.N
    S = section_space(n, selector, m, mode)
    if mode == EXACT:
        return _operator_matrix_exact(ctx, selector, m, S)
    D_top = m + 1
    Sf = _flatten(S, N, D_top)
    DS = _flatten(dirac_array(S, n), N, D_top)
    # orthonormal coordinates for span(S)
    Q = orth(Sf)
    coords = np.linalg.lstsq(Sf, Q, rcond=None)[0]  # Q = Sf @ coords
    DQ = DS @ coords
    U, DU = Q, DQ
    while U.shape[1]:
        resid = DU - U @ (adjoint(U) @ DU)
        c = nullspace(resid)
        if c.shape[1] == U.shape[1]:
            break
        U, DU = U @ c, DU @ c
    if U.shape[1] == 0:
        raise DegreeBoundError(f"no D-invariant sections of degree <= {m} for {selector.value}; increase m")
    A = adjoint(U) @ DU
    closure = float(np.max(np.abs(DU - U @ A)))
    if closure > CLOSURE_TOL:
        raise DegreeBoundError(f"closure residual {closure:.3e} exceeds {CLOSURE_TOL}; increase m")
    C = orth(Q - U @ (adjoint(U) @ Q))
    F = np.hstack([U, C])
    X = adjoint(F) @ (DS @ np.linalg.lstsq(Sf, F, rcond=None)[0])
    # L^2 metric on the invariant block
    G = adjoint(U) @ np.kron(sphere_moment_matrix(N, D_top), np.eye(ctx.dim)) @ U
    L = np.linalg.cholesky(G)
    Ah = adjoint(L) @ A @ np.linalg.inv(adjoint(L))
    herm = float(np.max(np.abs(Ah - adjoint(Ah)))) if Ah.size else 0.0
    basis = F.reshape(poly.n_monomials(N, D_top), ctx.dim, -1)[: poly.n_monomials(N, m)]
    X[: U.shape[1], : U.shape[1]] = A
    return OperatorMatrix(n, selector, m, basis, X, U.shape[1], closure, herm, FLOAT)


def _operator_matrix_exact(ctx, selector, m, S) -> OperatorMatrix:
    n, N = ctx.n, ctx.N
    D_top = m + 1
    Sf = _flatten(S, N, D_top)
    DS = _flatten(dirac_array(S, n), N, D_top)
    U, DU = Sf, DS
    while U.shape[1]:
        # c with D U c in span(U): kernel of [DU | -U]
        ker = nullspace(np.hstack([DU, -U]))
        c = ker[: U.shape[1]]
        if rank(c) == U.shape[1]:
            break
        c = _independent_columns(c)
        U, DU = U.dot(c), DU.dot(c)
    if U.shape[1] == 0:
        raise DegreeBoundError(f"no D-invariant sections of degree <= {m} for {selector.value}; increase m")
    A = solve_columns(U, DU)
    closure = max_abs(DU - U.dot(A))
    if closure != 0:
        raise DegreeBoundError(f"exact closure residual {closure} is non-zero; increase m")
    basis = U.reshape(poly.n_monomials(N, D_top), ctx.dim, -1)[: poly.n_monomials(N, m)]
    return OperatorMatrix(n, selector, m, basis, A, U.shape[1], 0.0, 0.0, EXACT)


def _independent_columns(c: np.ndarray) -> np.ndarray:
    keep = []
    for j in range(c.shape[1]):
        trial = keep + [j]
        if rank(c[:, trial]) == len(trial):
            keep = trial
    return c[:, keep]


@dataclass
class SpectrumEntry:
    value: float
    multiplicity: int
    truncated: bool = False

    def to_json(self) -> dict:
        return {"eigenvalue": self.value, "multiplicity": self.multiplicity, "truncated": self.truncated}


@dataclass
class SpectrumTable:
    n: int
    m: int
    selector: BundleSelector
    entries: list[SpectrumEntry]
    tolerance: float
    closure_residual: float
    hermitian_defect: float
    max_imag: float
    dimension: int
    invariant_dim: int

    def multiplicity(self, value: float, include_truncated: bool = False) -> int:
        return sum(
            e.multiplicity
            for e in self.entries
            if abs(e.value - value) <= self.tolerance and (include_truncated or not e.truncated)
        )

    def values(self, include_truncated: bool = False) -> list[float]:
        return [e.value for e in self.entries if include_truncated or not e.truncated]

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "space": self.selector.value,
            "dimension": self.dimension,
            "invariant_dimension": self.invariant_dim,
            "cluster_tolerance": self.tolerance,
            "closure_residual": _sig(self.closure_residual),
            "hermitian_defect": _sig(self.hermitian_defect),
            "max_imag": _sig(self.max_imag),
            "entries": [e.to_json() for e in self.entries],
        }

    def render(self) -> str:
        lines = [
            f"Dirac spectrum on {self.selector.value} (n={self.n}, degree <= {self.m})",
            f"space dimension {self.dimension}, invariant part {self.invariant_dim}, "
            f"closure residual {self.closure_residual:.2e}",
            f"{'eigenvalue':>14}  {'mult':>5}  flag",
        ]
        for e in self.entries:
            lines.append(f"{e.value:>14.8f}  {e.multiplicity:>5}  {'truncated' if e.truncated else ''}")
        return "\n".join(lines)


def cluster(values, tol: float = CLUSTER_TOL) -> list[tuple[float, int]]:
    """Group sorted real values whose neighbours differ by at most ``tol``."""
    vals = sorted(float(v) for v in values)
    out: list[list[float]] = []
    for v in vals:
        if out and v - out[-1][-1] <= tol:
            out[-1].append(v)
        else:
            out.append([v])
    return [(_tidy(sum(g) / len(g)), len(g)) for g in out]


def _sig(v: float) -> float:
    # residuals are rounding noise; 6 significant digits keep reports stable
    v = float(v)
    return float(f"{v:.6e}") if v else 0.0


def _tidy(v: float) -> float:
    # snap to a 1e-10 grid so the reported value does not depend on rounding noise
    r = round(v, 10)
    return 0.0 if r == 0 else r


def spectrum(ctx: BundleContext, selector, m: int, tol: float = CLUSTER_TOL) -> SpectrumTable:
    op = operator_matrix(ctx, selector, m)
    u = op.invariant_dim
    A = op.matrix[:u, :u]
    Y = op.matrix[u:, u:]
    N = ctx.N
    # Hermitian form of the invariant block in the L^2 metric
    Uf = _flatten(op.basis[:, :, :u], N, m)
    G = adjoint(Uf) @ np.kron(sphere_moment_matrix(N, m), np.eye(ctx.dim)) @ Uf
    L = np.linalg.cholesky(G)
    Ah = adjoint(L) @ A @ np.linalg.inv(adjoint(L))
    true_vals = np.linalg.eigvalsh(0.5 * (Ah + adjoint(Ah)))
    imag = float(np.max(np.abs(np.linalg.eigvals(A).imag))) if u else 0.0
    entries = [SpectrumEntry(v, k) for v, k in cluster(true_vals, tol)]
    if Y.size:
        entries += [SpectrumEntry(v, k, True) for v, k in cluster(np.linalg.eigvals(Y).real, tol)]
    entries.sort(key=lambda e: (e.value, e.truncated))
    return SpectrumTable(
        ctx.n, m, op.selector, entries, tol, op.closure_residual, op.hermitian_defect, imag, op.dim, u
    )


def exact_characteristic_check(ctx: BundleContext, selector, m: int):
    """Exact characteristic polynomial of D on the invariant sections and its roots.

    Returns ``{root: multiplicity}`` with sympy-exact roots.
    """
    import sympy

    op = operator_matrix(ctx, selector, m, mode=EXACT)
    from .linalg import to_domain

    cp = to_domain(op.matrix).charpoly()
    coeffs = [sympy.Rational(str(c.x)) + sympy.I * sympy.Rational(str(c.y)) for c in cp]
    return sympy.roots(sympy.Poly(coeffs, sympy.Symbol("lam"))), op
