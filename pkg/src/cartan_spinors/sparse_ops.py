"""Float-mode operators as cached sparse matrices.

A spinor field of degree <= d is flattened row-major from ``(M, s)`` to
``M * s``.  Each differential operator of the bundle is composed from
sparse building blocks (monomial shifts, partial derivatives, gamma
actions, the sphere reduction) once per input degree and then applied to
whole batches of fields with a single sparse-dense product.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from . import poly
from .polyspinor import TangentField, fibre_rep, spinor_dim

ROW_TRIM_TOL = 1e-11


@dataclass(frozen=True, eq=False)
class LinOp:
    """Sparse map from spinor fields of degree <= ``din`` to degree <= ``dout``."""

    n: int
    din: int
    dout: int
    mat: sp.csr_matrix

    @property
    def N(self) -> int:
        return self.n + 1

    @property
    def s(self) -> int:
        return spinor_dim(self.n)

    def apply(self, c: np.ndarray) -> np.ndarray:
        N = self.N
        d = poly.degree_of(c, N)
        if d > self.din:
            raise ValueError(f"operator built for degree <= {self.din}, got {d}")
        c = poly.pad(c, N, self.din)
        flat = c.reshape(c.shape[0] * c.shape[1], -1)
        out = self.mat @ flat
        return np.asarray(out).reshape((poly.n_monomials(N, self.dout), self.s) + c.shape[2:])

    def max_abs_on(self, c: np.ndarray) -> float:
        """``max |self(c)|`` over all coefficients, using a sparse copy of ``c``.

        Bases of harmonic fields are sparse, so this avoids a dense output
        of size ``n_monomials(dout) * s`` by the batch size.
        """
        N = self.N
        if poly.degree_of(c, N) > self.din:
            raise ValueError(f"operator built for degree <= {self.din}, got {poly.degree_of(c, N)}")
        c = poly.pad(c, N, self.din)
        flat = sp.csr_matrix(c.reshape(c.shape[0] * c.shape[1], -1))
        out = (self.mat @ flat).tocsr()
        return float(np.max(np.abs(out.data))) if out.nnz else 0.0

    def lift(self, dout: int) -> "LinOp":
        if dout == self.dout:
            return self
        rows = poly.n_monomials(self.N, dout) * self.s
        m = sp.vstack([self.mat, sp.csr_matrix((rows - self.mat.shape[0], self.mat.shape[1]))]).tocsr()
        return LinOp(self.n, self.din, dout, m)

    def __add__(self, other: "LinOp") -> "LinOp":
        assert self.din == other.din and self.n == other.n
        d = max(self.dout, other.dout)
        return LinOp(self.n, self.din, d, (self.lift(d).mat + other.lift(d).mat).tocsr())

    def __neg__(self) -> "LinOp":
        return LinOp(self.n, self.din, self.dout, -self.mat)

    def __sub__(self, other: "LinOp") -> "LinOp":
        return self + (-other)

    def scale(self, k) -> "LinOp":
        return LinOp(self.n, self.din, self.dout, (self.mat * k).tocsr())

    def __matmul__(self, other: "LinOp") -> "LinOp":
        """Composition ``self o other``; ``other``'s output is embedded into ``self``'s input degree."""
        if other.dout > self.din:
            raise ValueError(f"cannot compose: inner output degree {other.dout} > outer input degree {self.din}")
        inner = other.lift(self.din)
        return LinOp(self.n, other.din, self.dout, (self.mat @ inner.mat).tocsr())

    def reduced(self, trim: bool = True) -> "LinOp":
        """Compose with the sphere reduction.

        With ``trim`` the numerically vanishing top degree blocks are dropped.
        Defect operators pass ``trim=False`` so that no residual is hidden.
        """
        R = sp.kron(poly.reduction_matrix(self.N, self.dout), sp.identity(self.s), format="csr")
        m = (R @ self.mat).tocsr()
        if not trim:
            return LinOp(self.n, self.din, self.dout, m)
        m.data[np.abs(m.data) < 1e-15] = 0
        m.eliminate_zeros()
        d = self.dout
        t = poly.table(self.N, d)
        while d > 0:
            blk = t.block(d)
            rows = m[blk.start * self.s : blk.stop * self.s]
            if rows.nnz and np.max(np.abs(rows.data)) > ROW_TRIM_TOL:
                break
            d -= 1
            m = m[: poly.n_monomials(self.N, d) * self.s]
        return LinOp(self.n, self.din, d, m.tocsr())


# building blocks on the monomial axis ----------------------------------------


@lru_cache(maxsize=None)
def _shift(N: int, d: int, mono: tuple[int, ...], dout: int | None = None) -> sp.csr_matrix:
    idx = poly._shift_index(N, d, mono)
    rows = poly.n_monomials(N, d + sum(mono) if dout is None else dout)
    return sp.csr_matrix((np.ones(len(idx)), (idx, np.arange(len(idx)))), shape=(rows, len(idx)))


@lru_cache(maxsize=None)
def _diff(N: int, d: int, a: int) -> sp.csr_matrix:
    src, dst, fac = poly._diff_index(N, d, a)
    return sp.csr_matrix(
        (fac.astype(float), (dst, src)), shape=(poly.n_monomials(N, max(d - 1, 0)), poly.n_monomials(N, d))
    )


def _scalar(N: int, d: int, p: np.ndarray) -> sp.csr_matrix:
    dp = poly.degree_of(p, N)
    t = poly.table(N, dp)
    out = sp.csr_matrix((poly.n_monomials(N, d + dp), poly.n_monomials(N, d)), dtype=np.complex128)
    for i, coef in enumerate(p):
        if coef != 0:
            out = out + coef * _shift(N, d, tuple(int(x) for x in t.exps[i]), d + dp)
    return out.tocsr()


def _spin(n: int, A: sp.spmatrix) -> sp.csr_matrix:
    return sp.kron(A, sp.identity(spinor_dim(n)), format="csr")


def _gamma(n: int, d: int, a: int) -> sp.csr_matrix:
    g = fibre_rep(n).gammas[a]
    return sp.kron(sp.identity(poly.n_monomials(n + 1, d)), sp.csr_matrix(g), format="csr")


# bundle operators ----------------------------------------------------------


def _field_key(V: TangentField) -> tuple:
    c = np.asarray(V.coeffs, dtype=np.complex128)
    return (V.n, c.shape, c.tobytes())


_FIELD_CACHE: dict = {}


def _intern(V: TangentField) -> tuple:
    key = _field_key(V)
    _FIELD_CACHE.setdefault(key, V)
    return key


def clifford_op(V: TangentField, din: int) -> LinOp:
    """``c -> V . c`` (no reduction)."""
    return _clifford_op(_intern(V), din)


@lru_cache(maxsize=None)
def _clifford_op(key, din: int) -> LinOp:
    V = _FIELD_CACHE[key]
    n, N = V.n, V.N
    dv = poly.degree_of(V.coeffs, N)
    acc = None
    for a in range(N):
        comp = np.asarray(V.coeffs[:, a], dtype=np.complex128)
        if not np.any(comp):
            continue
        t = _spin(n, _scalar(N, din, comp)) @ _gamma(n, din, a)
        acc = t if acc is None else acc + t
    if acc is None:
        acc = sp.csr_matrix((poly.n_monomials(N, din + dv) * spinor_dim(n), poly.n_monomials(N, din) * spinor_dim(n)))
    return LinOp(n, din, din + dv, acc.tocsr())


@lru_cache(maxsize=None)
def position_op(n: int, din: int) -> LinOp:
    """``c -> x . c``."""
    N = n + 1
    acc = None
    for a in range(N):
        e = [0] * N
        e[a] = 1
        t = _spin(n, _shift(N, din, tuple(e))) @ _gamma(n, din, a)
        acc = t if acc is None else acc + t
    return LinOp(n, din, din + 1, acc.tocsr())


def directional_op(V: TangentField, din: int) -> LinOp:
    return _directional_op(_intern(V), din)


@lru_cache(maxsize=None)
def _directional_op(key, din: int) -> LinOp:
    V = _FIELD_CACHE[key]
    n, N = V.n, V.N
    dv = poly.degree_of(V.coeffs, N)
    dout = max(din - 1, 0) + dv
    acc = sp.csr_matrix((poly.n_monomials(N, dout), poly.n_monomials(N, din)), dtype=np.complex128)
    for a in range(N):
        comp = np.asarray(V.coeffs[:, a], dtype=np.complex128)
        if not np.any(comp):
            continue
        acc = acc + _scalar(N, max(din - 1, 0), comp) @ _diff(N, din, a)
    return LinOp(n, din, dout, _spin(n, acc))


def nabla_op(V: TangentField, din: int) -> LinOp:
    """Reduced ``c -> nabla_V c``."""
    return _nabla_op(_intern(V), din)


@lru_cache(maxsize=None)
def _nabla_op(key, din: int) -> LinOp:
    V = _FIELD_CACHE[key]
    d = directional_op(V, din)
    conn = clifford_op(V, din + 1) @ position_op(V.n, din)
    return (d + conn.scale(0.5)).reduced()


def curvature_op(V: TangentField, W: TangentField, din: int) -> LinOp:
    """Reduced ``c -> R(V,W)c - 1/2 (W.V + <V,W>) c``."""
    return _curvature_op(_intern(V), _intern(W), din)


@lru_cache(maxsize=None)
def _curvature_op(kv, kw, din: int) -> LinOp:
    V, W = _FIELD_CACHE[kv], _FIELD_CACHE[kw]
    n, N = V.n, V.N
    nw, nv = nabla_op(W, din), nabla_op(V, din)
    lhs = nabla_op(V, nw.dout) @ nw - nabla_op(W, nv.dout) @ nv - nabla_op(V.bracket(W), din)
    cv = clifford_op(V, din)
    wv = clifford_op(W, cv.dout) @ cv
    ip = LinOp(n, din, din + 2, _spin(n, _scalar(N, din, np.asarray(V.inner(W), dtype=np.complex128))))
    return (lhs - (wv + ip).scale(0.5)).reduced(trim=False)


@lru_cache(maxsize=None)
def dirac_op(n: int, din: int) -> LinOp:
    from .bundle import coordinate_fields

    acc = None
    for E in coordinate_fields(n):
        nb = nabla_op(E, din)
        t = clifford_op(E, nb.dout) @ nb
        acc = t if acc is None else acc + t
    return acc.reduced()


@lru_cache(maxsize=None)
def laplace_op(n: int, din: int) -> LinOp:
    from .bundle import coordinate_fields
    from .dirac import _frame_self_derivatives

    acc = None
    for E, dEE in zip(coordinate_fields(n), _frame_self_derivatives(n, "float")):
        nb = nabla_op(E, din)
        t = nabla_op(E, nb.dout) @ nb - nabla_op(dEE, din)
        acc = t if acc is None else acc + t
    return (-acc).reduced()


@lru_cache(maxsize=None)
def lichnerowicz_op(n: int, din: int) -> LinOp:
    """Reduced ``D^2 - Lap - n(n-1)/4``; vanishes identically when the formula holds."""
    d1 = dirac_op(n, din)
    dd = dirac_op(n, d1.dout) @ d1
    ident = LinOp(n, din, din, sp.identity(poly.n_monomials(n + 1, din) * spinor_dim(n), format="csr"))
    return (dd - laplace_op(n, din) - ident.scale(n * (n - 1) / 4)).reduced(trim=False)
