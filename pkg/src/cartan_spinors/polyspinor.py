"""Polynomial spinor fields and vector fields on the unit sphere in R^(n+1).

A spinor field on S^n is stored as a polynomial map R^(n+1) -> Delta_(n+1):
a coefficient array of shape ``(M, s)`` (see :mod:`cartan_spinors.poly`),
where ``s = 2^floor((n+1)/2)``.  Fields are values; every operation returns a
new field.  Two fields are equal on the sphere iff their
:func:`harmonic_reduce` outputs coincide.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import poly
from .clifford import MatrixRep, spinor_rep
from .errors import DimensionMismatchError, SizeError, SpherePointError
from .scalars import (
    EXACT,
    FLOAT,
    ONE,
    as_mode,
    check_mode,
    is_exact,
    max_abs,
    mode_of,
    scalar,
    to_exact,
    zeros,
)

SPHERE_TOL = 1e-12
MAX_BASIS = 20_000


@lru_cache(maxsize=None)
def fibre_rep(n: int) -> MatrixRep:
    """Clifford representation on ``Delta_(n+1)`` (Pauli for even n, Dirac for odd n)."""
    if n < 1:
        raise SizeError(f"sphere dimension must be >= 1, got {n}")
    return spinor_rep(n + 1)


def gamma_stack(n: int, mode: str) -> np.ndarray:
    rep = fibre_rep(n)
    return rep.gamma_stack_exact if mode == EXACT else rep.gamma_stack


def spinor_dim(n: int) -> int:
    return 1 << ((n + 1) // 2)


# ---------------------------------------------------------------------------
# array-level kernels (first axis monomials, axis 1 spinor index, rest batch)


def gamma_apply(g: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Apply the matrix ``g`` on axis 1 of ``c``."""
    if is_exact(c):
        mono = _monomial_pattern(g)
        if mono is not None:
            return _monomial_apply(mono, c)
    return np.moveaxis(np.tensordot(g, c, axes=([1], [1])), 0, 1)


def _monomial_pattern(g: np.ndarray):
    """``(perm, phases)`` when ``g`` has exactly one non-zero entry per row, else None."""
    nz = [[j for j in range(g.shape[1]) if g[i, j]] for i in range(g.shape[0])]
    if any(len(r) != 1 for r in nz):
        return None
    perm = [r[0] for r in nz]
    return perm, [g[i, j] for i, j in enumerate(perm)]


def _monomial_apply(mono, c: np.ndarray) -> np.ndarray:
    perm, phases = mono
    out = np.empty_like(c)
    for i, (j, ph) in enumerate(zip(perm, phases)):
        col = c[:, j]
        if ph == 1:
            out[:, i] = col
        elif ph == -1:
            out[:, i] = -col
        else:
            out[:, i] = col * ph
    return out


def clifford_vec_array(V: np.ndarray, c: np.ndarray, n: int) -> np.ndarray:
    """``sum_a V_a(x) gamma_a c(x)`` for a polynomial vector map V of shape (Mv, N)."""
    N = n + 1
    gam = gamma_stack(n, mode_of(c))
    out = None
    for a in range(N):
        comp = V[:, a]
        if not any(bool(v) for v in comp) if is_exact(comp) else not np.any(comp):
            continue
        t = poly.scalar_mul(comp, gamma_apply(gam[a], c), N)
        out = t if out is None else poly.add(out, t, N)
    if out is None:
        out = zeros(c.shape, mode_of(c))
    return out


def clifford_x_array(c: np.ndarray, n: int) -> np.ndarray:
    """Clifford action of the position field: ``x . c(x)``."""
    N = n + 1
    gam = gamma_stack(n, mode_of(c))
    out = None
    for a in range(N):
        t = poly.mul_var(gamma_apply(gam[a], c), N, a)
        out = t if out is None else out + t
    return out


def directional_array(c: np.ndarray, V: np.ndarray, n: int) -> np.ndarray:
    """``sum_a V_a * d c / d x_a``."""
    N = n + 1
    out = None
    for a in range(N):
        comp = V[:, a]
        if not any(bool(v) for v in comp) if is_exact(comp) else not np.any(comp):
            continue
        t = poly.scalar_mul(comp, poly.diff(c, N, a), N)
        out = t if out is None else poly.add(out, t, N)
    if out is None:
        out = zeros(c[:1].shape, mode_of(c))
    return out


def reduce_array(c: np.ndarray, n: int) -> np.ndarray:
    return poly.harmonic_reduce(c, n + 1)


# ---------------------------------------------------------------------------
# value types


def _ensure_mode(coeffs: np.ndarray) -> np.ndarray:
    if coeffs.dtype == object:
        return coeffs
    return np.asarray(coeffs, dtype=np.complex128)


@dataclass(frozen=True, eq=False)
class SpherePoint:
    x: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim != 1:
            raise SpherePointError("a sphere point must be a 1-D vector")
        if abs(float(x @ x) - 1.0) > SPHERE_TOL:
            raise SpherePointError(f"|x|^2 = {float(x @ x)!r} is not 1 within {SPHERE_TOL}")
        object.__setattr__(self, "x", x)

    @property
    def n(self) -> int:
        return len(self.x) - 1

    @classmethod
    def normalized(cls, v) -> "SpherePoint":
        v = np.asarray(v, dtype=float)
        return cls(v / np.linalg.norm(v))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "SpherePoint":
        return cls.normalized(rng.normal(size=n + 1))


@dataclass(frozen=True, eq=False)
class PolySpinorField:
    n: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = _ensure_mode(self.coeffs)
        if c.ndim != 2 or c.shape[1] != spinor_dim(self.n):
            raise DimensionMismatchError(
                f"spinor field on S^{self.n} needs coefficient shape (M, {spinor_dim(self.n)}), got {c.shape}"
            )
        poly.degree_of(c, self.n + 1)
        object.__setattr__(self, "coeffs", c)

    # basic properties
    @property
    def N(self) -> int:
        return self.n + 1

    @property
    def dim(self) -> int:
        return self.coeffs.shape[1]

    @property
    def degree(self) -> int:
        return poly.degree_of(poly.trim(self.coeffs, self.N), self.N)

    @property
    def mode(self) -> str:
        return mode_of(self.coeffs)

    # constructors
    @classmethod
    def zero(cls, n: int, mode: str = FLOAT) -> "PolySpinorField":
        return cls(n, zeros((1, spinor_dim(n)), check_mode(mode)))

    @classmethod
    def constant(cls, n: int, phi0, mode: str = FLOAT) -> "PolySpinorField":
        phi0 = as_mode(np.asarray(phi0).reshape(1, -1), mode)
        return cls(n, phi0)

    @classmethod
    def from_terms(cls, n: int, terms: dict, mode: str = FLOAT) -> "PolySpinorField":
        """Build from ``{exponent tuple: spinor vector}``."""
        N = n + 1
        D = max((sum(e) for e in terms), default=0)
        t = poly.table(N, D)
        c = zeros((len(t), spinor_dim(n)), mode)
        for e, v in terms.items():
            if len(e) != N:
                raise DimensionMismatchError(f"exponent {e} has length {len(e)}, expected {N}")
            c[t.index[tuple(e)]] = c[t.index[tuple(e)]] + as_mode(np.asarray(v).reshape(-1), mode)
        return cls(n, c)

    def as_mode(self, mode: str) -> "PolySpinorField":
        if mode == self.mode:
            return self
        return PolySpinorField(self.n, as_mode(self.coeffs, mode))

    # arithmetic
    def _check(self, other: "PolySpinorField"):
        if not isinstance(other, PolySpinorField) or other.n != self.n:
            raise DimensionMismatchError("spinor fields live on different spheres")

    def __add__(self, other):
        self._check(other)
        return PolySpinorField(self.n, poly.add(self.coeffs, other.coeffs, self.N))

    def __sub__(self, other):
        self._check(other)
        return PolySpinorField(self.n, poly.add(self.coeffs, -other.coeffs, self.N))

    def __neg__(self):
        return PolySpinorField(self.n, -self.coeffs)

    def __mul__(self, k):
        return PolySpinorField(self.n, self.coeffs * scalar(k, self.mode))

    __rmul__ = __mul__

    def times_scalar_poly(self, p: np.ndarray) -> "PolySpinorField":
        return PolySpinorField(self.n, poly.scalar_mul(p, self.coeffs, self.N))

    def apply_matrix(self, g: np.ndarray) -> "PolySpinorField":
        """Apply a constant endomorphism of the spinor space pointwise."""
        g = as_mode(g, self.mode)
        return PolySpinorField(self.n, gamma_apply(g, self.coeffs))

    def terms(self) -> dict[tuple[int, ...], np.ndarray]:
        t = poly.table(self.N, poly.degree_of(self.coeffs, self.N))
        out = {}
        for i, row in enumerate(self.coeffs):
            if any(bool(v) for v in row):
                out[tuple(int(e) for e in t.exps[i])] = row
        return out

    def to_json(self) -> dict:
        comps = []
        for e, row in self.terms().items():
            for j, v in enumerate(row):
                if v:
                    z = complex(v)
                    entry = {"spinor": j, "exponents": list(e), "re": z.real, "im": z.imag}
                    if self.mode == EXACT:
                        entry["exact"] = [str(v.re), str(v.im)]
                    comps.append(entry)
        return {"n": self.n, "dim": self.dim, "mode": self.mode, "components": comps}

    def __repr__(self):
        return f"PolySpinorField(n={self.n}, degree={self.degree}, mode={self.mode})"


@dataclass(frozen=True, eq=False)
class TangentField:
    """Polynomial vector field; tangent to S^n when ``<V(x), x> = 0`` on the sphere."""

    n: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = _ensure_mode(self.coeffs)
        if c.ndim != 2 or c.shape[1] != self.n + 1:
            raise DimensionMismatchError(f"vector field on S^{self.n} needs shape (M, {self.n + 1}), got {c.shape}")
        poly.degree_of(c, self.n + 1)
        object.__setattr__(self, "coeffs", c)

    @property
    def N(self) -> int:
        return self.n + 1

    @property
    def mode(self) -> str:
        return mode_of(self.coeffs)

    @classmethod
    def projected(cls, n: int, a, mode: str = FLOAT) -> "TangentField":
        """Extension ``V(x) = a - <a, x> x`` of the constant ambient vector ``a``."""
        N = n + 1
        a = as_mode(np.asarray(a).reshape(-1), mode)
        if a.shape != (N,):
            raise DimensionMismatchError(f"ambient vector of length {len(a)} for S^{n}")
        t = poly.table(N, 2)
        c = zeros((len(t), N), mode)
        c[0] = a
        for b in range(N):
            for k in range(N):
                e = [0] * N
                e[b] += 1
                e[k] += 1
                c[t.index[tuple(e)], k] = c[t.index[tuple(e)], k] - a[b]
        return cls(n, c)

    @classmethod
    def coordinate(cls, n: int, b: int, mode: str = FLOAT) -> "TangentField":
        a = np.zeros(n + 1)
        a[b] = 1
        return cls.projected(n, a, mode)

    @classmethod
    def position(cls, n: int, mode: str = FLOAT) -> "TangentField":
        """The (normal, not tangent) position field ``x``."""
        N = n + 1
        c = zeros((poly.n_monomials(N, 1), N), mode)
        for a in range(N):
            c[1 + a, a] = ONE if mode == EXACT else 1.0
        return cls(n, c)

    def as_mode(self, mode: str) -> "TangentField":
        return self if mode == self.mode else TangentField(self.n, as_mode(self.coeffs, mode))

    def inner(self, other: "TangentField") -> np.ndarray:
        """Scalar polynomial ``<V(x), W(x)>``."""
        acc = None
        for a in range(self.N):
            t = poly.scalar_mul(self.coeffs[:, a], other.coeffs[:, a : a + 1], self.N)[:, 0]
            acc = t if acc is None else acc + t
        return acc

    def normal_component(self) -> np.ndarray:
        return self.inner(TangentField.position(self.n, self.mode))

    def tangency_residual(self) -> float:
        return poly.sphere_zero_defect(self.normal_component(), self.N)

    def derivative(self, V: "TangentField") -> "TangentField":
        """Ambient directional derivative ``dW(V)`` of this field W."""
        return TangentField(self.n, directional_array(self.coeffs, V.coeffs, self.n))

    def tangential(self) -> "TangentField":
        """Pointwise tangential projection ``Y - <Y, x> x``."""
        nc = self.normal_component()
        xs = TangentField.position(self.n, self.mode).coeffs
        return TangentField(self.n, poly.add(self.coeffs, -poly.scalar_mul(nc, xs, self.N), self.N))

    def covariant(self, V: "TangentField") -> "TangentField":
        """Levi-Civita derivative of this field along V on the sphere."""
        return self.derivative(V).tangential()

    def bracket(self, other: "TangentField") -> "TangentField":
        """Lie bracket ``[self, other] = d other(self) - d self(other)``."""
        a = other.derivative(self).coeffs
        b = self.derivative(other).coeffs
        return TangentField(self.n, poly.add(a, -b, self.N))

    def reduced(self) -> "TangentField":
        return TangentField(self.n, poly.harmonic_reduce(self.coeffs, self.N))

    def evaluate(self, x) -> np.ndarray:
        return poly.evaluate(self.coeffs, self.N, _point(x, self.n)).real

    def __add__(self, other):
        return TangentField(self.n, poly.add(self.coeffs, other.coeffs, self.N))

    def __sub__(self, other):
        return TangentField(self.n, poly.add(self.coeffs, -other.coeffs, self.N))

    def __mul__(self, k):
        return TangentField(self.n, self.coeffs * scalar(k, self.mode))

    __rmul__ = __mul__


def _point(x, n: int) -> np.ndarray:
    if isinstance(x, SpherePoint):
        x = x.x
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != n + 1:
        raise DimensionMismatchError(f"point of dimension {x.shape[-1]} for S^{n}")
    return x


# ---------------------------------------------------------------------------
# operations


def evaluate(phi: PolySpinorField, x) -> np.ndarray:
    """Spinor value(s) of ``phi`` at a point or an array of points."""
    return poly.evaluate(phi.coeffs, phi.N, _point(x, phi.n))


def directional_derivative(phi: PolySpinorField, V: TangentField) -> PolySpinorField:
    if V.n != phi.n:
        raise DimensionMismatchError("field and vector field live on different spheres")
    V = V.as_mode(phi.mode)
    return PolySpinorField(phi.n, directional_array(phi.coeffs, V.coeffs, phi.n))


def clifford_mul_field(V: TangentField, phi: PolySpinorField) -> PolySpinorField:
    """Pointwise Clifford product ``V(x) . phi(x)``; degrees add."""
    if V.n != phi.n:
        raise DimensionMismatchError("field and vector field live on different spheres")
    V = V.as_mode(phi.mode)
    return PolySpinorField(phi.n, clifford_vec_array(V.coeffs, phi.coeffs, phi.n))


def clifford_mul_position(phi: PolySpinorField) -> PolySpinorField:
    """``x . phi(x)``."""
    return PolySpinorField(phi.n, clifford_x_array(phi.coeffs, phi.n))


def antipodal_pullback(phi: PolySpinorField) -> PolySpinorField:
    """The field ``x -> phi(-x)``."""
    return PolySpinorField(phi.n, poly.antipodal(phi.coeffs, phi.N))


def harmonic_reduce(phi: PolySpinorField) -> PolySpinorField:
    return PolySpinorField(phi.n, poly.harmonic_reduce(phi.coeffs, phi.N))


def sphere_norm(phi: PolySpinorField) -> float:
    """Max canonical coefficient; zero iff ``phi`` vanishes on the sphere."""
    return max_abs(poly.harmonic_reduce(phi.coeffs, phi.N))


def is_canonical(phi: PolySpinorField) -> bool:
    r = poly.harmonic_reduce(phi.coeffs, phi.N)
    a = poly.trim(phi.coeffs, phi.N)
    if r.shape != a.shape:
        return False
    if phi.mode == EXACT:
        return all(u == v for u, v in zip(r.reshape(-1), a.reshape(-1)))
    return max_abs(r - a) <= 1e-12 * max(1.0, max_abs(a))


# ---------------------------------------------------------------------------
# harmonic bases


def harmonic_basis(N: int, k: int, mode: str = FLOAT) -> np.ndarray:
    """Basis of degree-k harmonic polynomials, shape ``(n_monomials(N, k), dim H_k)``.

    Harmonic projections of the monomials whose first exponent is 0 or 1
    form a basis of H_k.
    """
    check_mode(mode)
    t = poly.table(N, k)
    blk = t.block(k)
    hom = t.exps[blk]
    chosen = np.nonzero(hom[:, 0] <= 1)[0]
    eye = zeros((len(hom), len(chosen)), mode)
    for col, row in enumerate(chosen):
        eye[row, col] = ONE if mode == EXACT else 1.0
    h, _ = poly.harmonic_projection(eye, N, k)
    out = zeros((len(t), len(chosen)), mode)
    out[blk] = h
    return out


def basis_array(n: int, m: int, mode: str = FLOAT) -> np.ndarray:
    """All basis fields of degree <= m stacked as an array ``(M, s, B)``."""
    if m < 0:
        raise SizeError(f"degree bound must be >= 0, got {m}")
    N = n + 1
    s = spinor_dim(n)
    B = s * sum(poly.n_harmonic(N, k) for k in range(m + 1))
    if B > MAX_BASIS or poly.n_monomials(N, m) > poly.MAX_MONOMIALS:
        raise SizeError(f"basis of {B} fields for n={n}, m={m} exceeds the size guard")
    M = poly.n_monomials(N, m)
    out = zeros((M, s, B), mode)
    col = 0
    for k in range(m + 1):
        H = harmonic_basis(N, k, mode)
        for h in range(H.shape[1]):
            for j in range(s):
                out[: H.shape[0], j, col] = H[:, h]
                col += 1
    return out


def basis_fields(n: int, m: int, mode: str = FLOAT) -> list[PolySpinorField]:
    arr = basis_array(n, m, mode)
    return [PolySpinorField(n, arr[:, :, i]) for i in range(arr.shape[2])]


def field_from_array(n: int, c: np.ndarray) -> PolySpinorField:
    return PolySpinorField(n, c)


def exact(phi: PolySpinorField) -> PolySpinorField:
    return PolySpinorField(phi.n, to_exact(phi.coeffs))
