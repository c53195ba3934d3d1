"""Spinor bundles over S^n and RP^n built from the trivial bundle S^n x Delta_(n+1).

The fibre over ``x`` is ``Delta_(n+1)``; a tangent vector ``t`` acts by the
ambient Clifford action ``t . phi``.  The antipodal lifts

    g_+(x, phi) = (-x,  x . phi)        g_-(x, phi) = (-x, -x . phi)

identify antipodal fibres.  Sections of the quotient bundles over RP^n are
fields with ``phi(-x) = x . phi(x)`` (``rp_plus``) or ``phi(-x) = -x . phi(x)``
(``rp_minus``).  The connection is

    nabla_V phi = d phi(V) + 1/2 V . x . phi.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from gmpy2 import mpq

from . import poly
from .clifford import MatrixRep
from .errors import FrameError, SpherePointError, TangencyError
from .polyspinor import (
    PolySpinorField,
    SpherePoint,
    TangentField,
    antipodal_pullback,
    clifford_mul_field,
    clifford_mul_position,
    clifford_vec_array,
    clifford_x_array,
    directional_array,
    fibre_rep,
    reduce_array,
    sphere_norm,
    spinor_dim,
)
from .scalars import EXACT, FLOAT, HALF, as_mode, is_exact, max_abs, mode_of, scalar

TANGENCY_TOL = 1e-9


class BundleSelector(str, enum.Enum):
    SPHERE = "sphere"
    RP_PLUS = "rp_plus"
    RP_MINUS = "rp_minus"

    @classmethod
    def parse(cls, v) -> "BundleSelector":
        return v if isinstance(v, cls) else cls(str(v))


@dataclass(frozen=True)
class BundleContext:
    n: int
    rep: MatrixRep = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "rep", fibre_rep(self.n))

    @property
    def N(self) -> int:
        return self.n + 1

    @property
    def dim(self) -> int:
        return self.rep.dim

    @property
    def tau(self) -> int:
        """Scalar curvature of the round S^n (and RP^n)."""
        return self.n * (self.n - 1)

    def gamma(self, v) -> np.ndarray:
        return self.rep.gamma_of(np.asarray(v, dtype=float))


@lru_cache(maxsize=None)
def context(n: int) -> BundleContext:
    return BundleContext(n)


# ---------------------------------------------------------------------------
# pointwise geometry


@dataclass(frozen=True, eq=False)
class TangentVector:
    x: np.ndarray
    t: np.ndarray


def _unit(x) -> np.ndarray:
    if isinstance(x, SpherePoint):
        return x.x
    x = np.asarray(x, dtype=float)
    if abs(float(x @ x) - 1.0) > 1e-12:
        raise SpherePointError(f"|x|^2 = {float(x @ x)!r} is not 1")
    return x


def project_tangent(x, a) -> TangentVector:
    x = _unit(x)
    a = np.asarray(a, dtype=float)
    return TangentVector(x, a - (a @ x) * x)


def dg(v: TangentVector) -> TangentVector:
    """Differential of the antipodal map."""
    return TangentVector(-v.x, -v.t)


def mu(ctx: BundleContext, v: TangentVector, phi: np.ndarray) -> np.ndarray:
    """Clifford multiplication of a tangent vector on a spinor in the fibre over ``v.x``."""
    if abs(float(v.t @ v.x)) > TANGENCY_TOL * max(1.0, float(np.linalg.norm(v.t))):
        raise TangencyError(f"<t, x> = {float(v.t @ v.x)!r} exceeds {TANGENCY_TOL}")
    return ctx.gamma(v.t) @ phi


def lift_g(ctx: BundleContext, sign: int, x, phi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Antipodal lift ``(x, phi) -> (-x, sign * x . phi)``."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    x = _unit(x)
    return -x, sign * (ctx.gamma(x) @ phi)


def equivariance_defect(ctx: BundleContext, sign: int, v: TangentVector, phi: np.ndarray) -> float:
    """``|g(mu(t, phi)) - mu(dg(t), g(phi))|`` for the commuting square."""
    _, lifted = lift_g(ctx, sign, v.x, phi)
    lhs = mu(ctx, dg(v), lifted)
    _, rhs = lift_g(ctx, sign, v.x, mu(ctx, v, phi))
    return float(np.max(np.abs(lhs - rhs)))


def involution_defect(ctx: BundleContext, sign: int, x, phi: np.ndarray) -> float:
    y, psi = lift_g(ctx, sign, x, phi)
    z, chi = lift_g(ctx, sign, y, psi)
    return float(max(np.max(np.abs(z - _unit(x))), np.max(np.abs(chi - phi))))


# ---------------------------------------------------------------------------
# sections of the quotient bundles


def _section_sign(selector: BundleSelector) -> int:
    return 1 if selector == BundleSelector.RP_PLUS else -1


def section_defect_array(selector: BundleSelector, c: np.ndarray, n: int) -> np.ndarray:
    """Canonical form of ``phi(-x) -+ x . phi(x)`` for a (batched) coefficient array."""
    N = n + 1
    xc = clifford_x_array(c, n)
    if _section_sign(selector) < 0:
        xc = -xc
    return reduce_array(poly.add(poly.antipodal(c, N), -xc, N), n)


def section_check(selector, phi: PolySpinorField) -> float:
    selector = BundleSelector.parse(selector)
    if selector == BundleSelector.SPHERE:
        return 0.0
    return max_abs(section_defect_array(selector, phi.coeffs, phi.n))


def project_section(selector, phi: PolySpinorField) -> PolySpinorField:
    """``phi_+ = (phi - x.phi(-x))/2`` for ``rp_plus``, ``phi_- = (phi + x.phi(-x))/2`` for ``rp_minus``."""
    selector = BundleSelector.parse(selector)
    if selector == BundleSelector.SPHERE:
        return phi
    t = clifford_mul_position(antipodal_pullback(phi))
    if selector == BundleSelector.RP_PLUS:
        t = -t
    out = (phi + t) * _half(phi.mode)
    return PolySpinorField(phi.n, reduce_array(out.coeffs, phi.n))


def _half(mode: str):
    return HALF if mode == EXACT else 0.5


# ---------------------------------------------------------------------------
# connection and curvature


def covariant_array(V: np.ndarray, c: np.ndarray, n: int) -> np.ndarray:
    """``nabla_V c`` for a vector-field array V ``(Mv, N)`` and a (batched) spinor array."""
    N = n + 1
    d = directional_array(c, V, n)
    conn = clifford_vec_array(V, clifford_x_array(c, n), n)
    conn = conn * _half(mode_of(c))
    return reduce_array(poly.add(d, conn, N), n)


def covariant_derivative(V: TangentField, phi: PolySpinorField) -> PolySpinorField:
    V = V.as_mode(phi.mode)
    return PolySpinorField(phi.n, covariant_array(V.coeffs, phi.coeffs, phi.n))


def curvature_array(V: TangentField, W: TangentField, c: np.ndarray, n: int) -> np.ndarray:
    """Canonical form of ``R(V,W)c - 1/2 (W.V + <V,W>) c``."""
    if not is_exact(c):
        from . import sparse_ops

        op = sparse_ops.curvature_op(V.as_mode(FLOAT), W.as_mode(FLOAT), poly.degree_of(c, n + 1))
        return poly.trim(op.apply(c), n + 1)
    return _curvature_array_direct(V, W, c, n)


def _curvature_array_direct(V: TangentField, W: TangentField, c: np.ndarray, n: int) -> np.ndarray:
    N = n + 1
    mode = mode_of(c)
    V = V.as_mode(mode)
    W = W.as_mode(mode)
    vw = covariant_array(V.coeffs, covariant_array(W.coeffs, c, n), n)
    wv = covariant_array(W.coeffs, covariant_array(V.coeffs, c, n), n)
    br = covariant_array(V.bracket(W).coeffs, c, n)
    lhs = poly.add(poly.add(vw, -wv, N), -br, N)
    wvc = clifford_vec_array(W.coeffs, clifford_vec_array(V.coeffs, c, n), n)
    ip = poly.scalar_mul(V.inner(W), c, N)
    rhs = poly.add(wvc, ip, N) * _half(mode)
    return reduce_array(poly.add(lhs, -rhs, N), n)


def curvature_defect(V: TangentField, W: TangentField, phi: PolySpinorField) -> float:
    return max_abs(curvature_array(V, W, phi.coeffs, phi.n))


def leibniz_defect(V: TangentField, W: TangentField, phi: PolySpinorField) -> float:
    """Defect of ``nabla_V(W.phi) = (nabla_V W).phi + W.nabla_V phi``."""
    V = V.as_mode(phi.mode)
    W = W.as_mode(phi.mode)
    lhs = covariant_derivative(V, clifford_mul_field(W, phi))
    rhs = clifford_mul_field(W.covariant(V), phi) + clifford_mul_field(W, covariant_derivative(V, phi))
    return sphere_norm(lhs - rhs)


def hermitian_product(phi: PolySpinorField, psi: PolySpinorField) -> np.ndarray:
    """Scalar polynomial ``<phi, psi> = sum_j conj(phi_j) psi_j``."""
    from .scalars import conj

    N = phi.N
    a = conj(phi.coeffs)
    acc = None
    for j in range(phi.dim):
        t = poly.scalar_mul(a[:, j], psi.coeffs[:, j : j + 1], N)[:, 0]
        acc = t if acc is None else acc + t
    return acc


def metric_defect(V: TangentField, phi: PolySpinorField, psi: PolySpinorField, points) -> float:
    """Pointwise defect of ``V<phi,psi> = <nabla_V phi, psi> + <phi, nabla_V psi>``."""
    from .polyspinor import evaluate

    N = phi.N
    V = V.as_mode(phi.mode)
    ip = hermitian_product(phi, psi)
    dip = directional_array(ip[:, None], V.coeffs, phi.n)[:, 0]
    lhs = poly.evaluate(dip, N, points)
    a = evaluate(covariant_derivative(V, phi), points)
    b = evaluate(psi, points)
    c = evaluate(phi, points)
    d = evaluate(covariant_derivative(V, psi), points)
    rhs = np.sum(np.conj(a) * b, axis=-1) + np.sum(np.conj(c) * d, axis=-1)
    return float(np.max(np.abs(lhs - rhs)))


@lru_cache(maxsize=None)
def _coordinate_fields(n: int, mode: str) -> tuple[TangentField, ...]:
    return tuple(TangentField.coordinate(n, b, mode) for b in range(n + 1))


def coordinate_fields(n: int, mode: str = FLOAT) -> tuple[TangentField, ...]:
    """Projected coordinate fields ``e_b - x_b x``, b = 0..n."""
    return _coordinate_fields(n, mode)


# ---------------------------------------------------------------------------
# volume-form splitting


@dataclass(frozen=True, eq=False)
class SplittingOperator:
    x: np.ndarray
    frame: np.ndarray
    matrix: np.ndarray
    eigenvalue: complex  # f acts by +eigenvalue on Delta^+ and -eigenvalue on Delta^-

    def projector(self, sign: int) -> np.ndarray:
        eye = np.eye(self.matrix.shape[0])
        return 0.5 * (eye + sign * self.matrix / self.eigenvalue)


def tangent_frame(x) -> np.ndarray:
    """Orthonormal tangent frame at x (rows), oriented so that det(e_1..e_n, x) > 0."""
    x = _unit(x)
    N = len(x)
    # drop the standard vector most aligned with x; Gram-Schmidt on the rest
    skip = int(np.argmax(np.abs(x)))
    vecs = [x]
    for a in range(N):
        if a == skip:
            continue
        v = np.zeros(N)
        v[a] = 1.0
        for u in vecs:
            v = v - (v @ u) * u
        norm = np.linalg.norm(v)
        if norm < 1e-8:
            raise FrameError(f"degenerate Gram-Schmidt step at x = {x}")
        vecs.append(v / norm)
    frame = np.array(vecs[1:])
    if np.linalg.det(np.vstack([frame, x])) < 0:
        frame[0] = -frame[0]
    return frame


def splitting_operator(ctx: BundleContext, x) -> SplittingOperator:
    """Product of the frame gammas; normalised by ``i^(n/2)`` for even n."""
    x = _unit(x)
    frame = tangent_frame(x)
    f = np.eye(ctx.dim, dtype=np.complex128)
    for e in frame:
        f = f @ ctx.gamma(e)
    n = ctx.n
    if n % 2 == 0:
        f = (1j ** (n // 2)) * f
        ev = 1.0 + 0j
    else:
        k = (n - 1) // 2
        ev = 1j ** (k + 1)
    return SplittingOperator(x, frame, f, complex(ev))


@dataclass
class SplittingReport:
    n: int
    samples: int
    swaps: int
    preserves: int
    max_residual: float

    @property
    def even_swaps(self) -> bool:
        return self.swaps == self.samples

    @property
    def odd_preserves(self) -> bool:
        return self.preserves == self.samples

    @property
    def violations(self) -> int:
        expected = self.swaps if self.n % 2 == 0 else self.preserves
        return self.samples - expected

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "samples": self.samples,
            "even_swaps": self.even_swaps,
            "odd_preserves": self.odd_preserves,
            "violations": self.violations,
            "max_residual": float(f"{self.max_residual:.6e}"),
        }


def splitting_behavior(ctx: BundleContext, samples: int = 20, rng=None, tol: float = 1e-10) -> SplittingReport:
    """Where the lift sends ``Delta^+(x)``: into ``Delta^-(-x)`` (swap) or ``Delta^+(-x)`` (preserve)."""
    rng = np.random.default_rng(0) if rng is None else rng
    swaps = preserves = 0
    worst = 0.0
    for _ in range(samples):
        x = SpherePoint.random(ctx.n, rng).x
        fx = splitting_operator(ctx, x)
        fy = splitting_operator(ctx, -x)
        plus = fx.projector(1)
        u, sv, _ = np.linalg.svd(plus)
        basis = u[:, sv > 0.5]
        images = ctx.gamma(x) @ basis
        to_minus = float(np.max(np.abs(fy.projector(1) @ images)))  # zero if images lie in Delta^-(-x)
        to_plus = float(np.max(np.abs(fy.projector(-1) @ images)))  # zero if images lie in Delta^+(-x)
        if to_minus <= tol:
            swaps += 1
            worst = max(worst, to_minus)
        if to_plus <= tol:
            preserves += 1
            worst = max(worst, to_plus)
        if to_minus > tol and to_plus > tol:
            worst = max(worst, min(to_minus, to_plus))
    return SplittingReport(ctx.n, samples, swaps, preserves, worst)
