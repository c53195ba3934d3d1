"""Dense coefficient arrays for polynomials in ``N`` real variables.

A polynomial of degree <= d is stored as an array whose first axis runs
over all monomials of total degree <= d in graded order (degree 0 first).
Trailing axes are free: a spinor field has shape ``(M, s)``, a vector field
``(M, N)``, a batch of spinor fields ``(M, s, B)``.  Because the ordering is
graded, an array for degree ``d`` is a prefix of the same polynomial
embedded in degree ``d + 1``.

All routines work for both ``complex128`` and exact object arrays.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations_with_replacement
from math import comb, factorial

import numpy as np
import scipy.sparse as sp
from gmpy2 import mpq

from .errors import DimensionMismatchError, SizeError
from .scalars import EXACT, FLOAT, is_exact, max_abs, mode_of, scalar, zeros
from .scalars import value as _value

MAX_MONOMIALS = 200_000

# float-mode cutoff below which a top homogeneous block is treated as zero
TRIM_TOL = 1e-13


def n_monomials(N: int, d: int) -> int:
    """Number of monomials of degree <= d in N variables."""
    return comb(N + d, N) if d >= 0 else 0


def n_homogeneous(N: int, d: int) -> int:
    return comb(N + d - 1, N - 1) if d >= 0 else 0


def n_harmonic(N: int, d: int) -> int:
    """Dimension of the space of degree-d harmonic polynomials in N variables."""
    return n_homogeneous(N, d) - n_homogeneous(N, d - 2)


@lru_cache(maxsize=None)
def _homogeneous_exps(N: int, d: int) -> np.ndarray:
    rows = []
    for combo in combinations_with_replacement(range(N), d):
        e = [0] * N
        for i in combo:
            e[i] += 1
        rows.append(e)
    if d == 0:
        rows = [[0] * N]
    arr = np.array(rows, dtype=np.int64).reshape(-1, N)
    arr.setflags(write=False)
    return arr


class MonomialTable:
    """Graded monomial ordering for ``N`` variables up to degree ``D``."""

    def __init__(self, N: int, D: int):
        if N < 1 or D < 0:
            raise SizeError(f"invalid monomial table ({N} variables, degree {D})")
        if n_monomials(N, D) > MAX_MONOMIALS:
            raise SizeError(f"{n_monomials(N, D)} monomials for {N} variables at degree {D} exceeds the guard")
        self.N = N
        self.D = D
        blocks = [_homogeneous_exps(N, d) for d in range(D + 1)]
        self.offsets = np.cumsum([0] + [len(b) for b in blocks])
        self.exps = np.concatenate(blocks, axis=0)
        self.exps.setflags(write=False)
        self.degrees = self.exps.sum(axis=1)
        self.index = {tuple(int(x) for x in e): i for i, e in enumerate(self.exps)}

    def __len__(self):
        return len(self.exps)

    def block(self, d: int) -> slice:
        return slice(int(self.offsets[d]), int(self.offsets[d + 1]))

    def lookup(self, exps: np.ndarray) -> np.ndarray:
        return np.fromiter((self.index[tuple(int(x) for x in e)] for e in exps), dtype=np.int64, count=len(exps))


@lru_cache(maxsize=None)
def table(N: int, D: int) -> MonomialTable:
    return MonomialTable(N, D)


@lru_cache(maxsize=None)
def _degree_lookup(N: int) -> dict[int, int]:
    out = {}
    d = 0
    while n_monomials(N, d) <= MAX_MONOMIALS:
        out[n_monomials(N, d)] = d
        d += 1
    return out


def degree_of(c: np.ndarray, N: int) -> int:
    """Degree bound encoded by the length of the first axis."""
    try:
        return _degree_lookup(N)[c.shape[0]]
    except KeyError:
        raise DimensionMismatchError(f"first axis of length {c.shape[0]} is not a monomial count for {N} variables")


# index maps ----------------------------------------------------------------


@lru_cache(maxsize=None)
def _shift_index(N: int, d: int, mono: tuple[int, ...]) -> np.ndarray:
    """Indices in table(N, d + |mono|) of ``x^mono * x^e`` for every e in table(N, d)."""
    t = table(N, d)
    big = table(N, d + sum(mono))
    idx = big.lookup(t.exps + np.array(mono, dtype=np.int64))
    idx.setflags(write=False)
    return idx


@lru_cache(maxsize=None)
def _diff_index(N: int, d: int, a: int):
    t = table(N, d)
    src = np.nonzero(t.exps[:, a] > 0)[0]
    shifted = t.exps[src].copy()
    shifted[:, a] -= 1
    dst = table(N, max(d - 1, 0)).lookup(shifted)
    fac = t.exps[src, a].copy()
    for arr in (src, dst, fac):
        arr.setflags(write=False)
    return src, dst, fac


def _unit(N: int, a: int) -> tuple[int, ...]:
    e = [0] * N
    e[a] = 1
    return tuple(e)


def _bcast(v: np.ndarray, ndim: int) -> np.ndarray:
    return v.reshape(v.shape + (1,) * (ndim - 1))


# elementary operations -----------------------------------------------------


def pad(c: np.ndarray, N: int, D: int) -> np.ndarray:
    """Embed ``c`` into degree ``D`` (no-op if already that size)."""
    M = n_monomials(N, D)
    if c.shape[0] == M:
        return c
    if c.shape[0] > M:
        raise DimensionMismatchError("cannot pad to a smaller degree")
    out = zeros((M,) + c.shape[1:], mode_of(c))
    out[: c.shape[0]] = c
    return out


def trim(c: np.ndarray, N: int) -> np.ndarray:
    """Drop vanishing top homogeneous blocks."""
    d = degree_of(c, N)
    t = table(N, d)
    ref = max_abs(c) if not is_exact(c) else 0.0
    while d > 0:
        blk = c[t.block(d)]
        if is_exact(c):
            if any(bool(v) for v in blk.reshape(-1)):
                break
        elif blk.size and np.max(np.abs(blk)) > TRIM_TOL * max(ref, 1.0):
            break
        d -= 1
        c = c[: n_monomials(N, d)]
    return c


def add(a: np.ndarray, b: np.ndarray, N: int) -> np.ndarray:
    D = max(degree_of(a, N), degree_of(b, N))
    return pad(a, N, D) + pad(b, N, D)


def mul_monomial(c: np.ndarray, N: int, mono: tuple[int, ...]) -> np.ndarray:
    d = degree_of(c, N)
    idx = _shift_index(N, d, tuple(mono))
    out = zeros((n_monomials(N, d + sum(mono)),) + c.shape[1:], mode_of(c))
    out[idx] = c
    return out


def mul_var(c: np.ndarray, N: int, a: int) -> np.ndarray:
    return mul_monomial(c, N, _unit(N, a))


def diff(c: np.ndarray, N: int, a: int) -> np.ndarray:
    """Partial derivative along variable ``a``; degree bound drops by one."""
    d = degree_of(c, N)
    src, dst, fac = _diff_index(N, d, a)
    out = zeros((n_monomials(N, max(d - 1, 0)),) + c.shape[1:], mode_of(c))
    if len(src):
        if is_exact(c):
            out[dst] = c[src] * _bcast(fac.astype(object), c.ndim)
        else:
            out[dst] = c[src] * _bcast(fac, c.ndim)
    return out


def antipodal(c: np.ndarray, N: int) -> np.ndarray:
    """Coefficients of ``p(-x)``."""
    d = degree_of(c, N)
    odd = (table(N, d).degrees % 2 == 1)
    out = c.copy()
    out[odd] = -out[odd]
    return out


def scalar_mul(p: np.ndarray, c: np.ndarray, N: int) -> np.ndarray:
    """Product of the scalar polynomial ``p`` (1-D) with the array ``c``."""
    if p.ndim != 1:
        raise DimensionMismatchError("scalar polynomial must be one-dimensional")
    dp, dc = degree_of(p, N), degree_of(c, N)
    mode = EXACT if (is_exact(p) or is_exact(c)) else FLOAT
    out = zeros((n_monomials(N, dp + dc),) + c.shape[1:], mode)
    tp = table(N, dp)
    for i, coef in enumerate(p):
        if coef == 0:
            continue
        idx = _shift_index(N, dc, tuple(int(x) for x in tp.exps[i]))
        out[idx] += c * coef
    return out


def variable(N: int, a: int, mode: str = FLOAT) -> np.ndarray:
    """The coordinate function ``x_a`` as a 1-D coefficient array."""
    p = zeros(n_monomials(N, 1), mode)
    p[1 + a] = _value(1, mode)
    return p


def constant(N: int, value, mode: str = FLOAT) -> np.ndarray:
    p = zeros(1, mode)
    p[0] = _value(value, mode)
    return p


def radius_squared(N: int, mode: str = FLOAT) -> np.ndarray:
    p = zeros(n_monomials(N, 2), mode)
    t = table(N, 2)
    for a in range(N):
        e = [0] * N
        e[a] = 2
        p[t.index[tuple(e)]] = _value(1, mode)
    return p


def evaluate(c: np.ndarray, N: int, x: np.ndarray) -> np.ndarray:
    """Evaluate at one point (shape ``(N,)``) or many points (``(K, N)``)."""
    from .scalars import to_float

    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = np.atleast_2d(x)
    if pts.shape[1] != N:
        raise DimensionMismatchError(f"points of dimension {pts.shape[1]} for polynomials in {N} variables")
    d = degree_of(c, N)
    vals = np.prod(pts[:, None, :] ** table(N, d).exps[None, :, :], axis=2)
    out = np.tensordot(vals, to_float(c), axes=([1], [0]))
    return out[0] if single else out


# homogeneous blocks and the sphere relation ---------------------------------


def _hom_lap(p: np.ndarray, N: int, d: int) -> np.ndarray:
    """Laplacian of a homogeneous degree-d block (hom-indexed, first axis)."""
    full = zeros((n_monomials(N, d),) + p.shape[1:], mode_of(p))
    full[table(N, d).block(d)] = p
    acc = None
    for a in range(N):
        t = diff(diff(full, N, a), N, a)
        acc = t if acc is None else acc + t
    return acc[table(N, max(d - 2, 0)).block(d - 2)] if d >= 2 else zeros((0,) + p.shape[1:], mode_of(p))


def _hom_mul_r2(p: np.ndarray, N: int, d: int) -> np.ndarray:
    full = zeros((n_monomials(N, d),) + p.shape[1:], mode_of(p))
    full[table(N, d).block(d)] = p
    acc = None
    for a in range(N):
        e = [0] * N
        e[a] = 2
        t = mul_monomial(full, N, tuple(e))
        acc = t if acc is None else acc + t
    return acc[table(N, d + 2).block(d + 2)]


def _projection_coefficient(N: int, d: int, j: int, mode: str):
    """Coefficient of ``r^{2j} Lap^j p`` in the harmonic part of a degree-d homogeneous p."""
    den = (2**j) * factorial(j)
    for i in range(1, j + 1):
        den *= N + 2 * d - 2 - 2 * i
    sign = -1 if j % 2 else 1
    return mpq(sign, den) if mode == EXACT else sign / den


def harmonic_projection(p: np.ndarray, N: int, d: int) -> tuple[np.ndarray, list[np.ndarray]]:
    """Split a homogeneous degree-d block as ``p = h + sum_j r^{2j} q_j``.

    Returns the harmonic part ``h`` and the list ``[c_1 Lap p, c_2 Lap^2 p, ...]``
    whose sign-flipped sum is ``(p - h)`` restricted to the unit sphere.
    """
    mode = mode_of(p)
    h = p.copy()
    lowers = []
    lap = p
    for j in range(1, d // 2 + 1):
        lap = _hom_lap(lap, N, d - 2 * (j - 1))
        coef = _projection_coefficient(N, d, j, mode)
        term = lap * coef
        lowers.append(term)
        lifted = term
        for k in range(j):
            lifted = _hom_mul_r2(lifted, N, d - 2 * j + 2 * k)
        h = h + lifted
    return h, lowers


def harmonic_reduce(c: np.ndarray, N: int) -> np.ndarray:
    """Canonical representative modulo ``|x|^2 - 1``.

    The output agrees with ``c`` on the unit sphere and each homogeneous
    block is harmonic.  Both modes apply a reduction matrix cached per
    ``(N, D)``: sparse real for float arrays, column lists of exact
    rationals for exact arrays.
    """
    c = trim(c, N)
    D = degree_of(c, N)
    if not is_exact(c):
        R = reduction_matrix(N, D)
        out = (R @ c.reshape(c.shape[0], -1)).reshape(c.shape)
        return trim(out, N)
    if D < 2:
        return c
    flat = c.reshape(c.shape[0], -1)
    out = zeros(flat.shape, EXACT)
    for i, (rows, vals) in enumerate(_exact_reduction_columns(N, D)):
        row = flat[i]
        if not any(bool(v) for v in row):
            continue
        out[rows] = out[rows] + vals[:, None] * row[None, :]
    return trim(out.reshape(c.shape), N)


@lru_cache(maxsize=None)
def reduction_matrix(N: int, D: int) -> sp.csr_matrix:
    """Sparse real matrix of :func:`harmonic_reduce` on polynomials of degree <= D."""
    t = table(N, D)
    M = len(t)
    cols = []
    for d in range(D + 1):
        blk = t.block(d)
        size = blk.stop - blk.start
        probe = np.zeros((M, size), dtype=np.complex128)
        probe[blk] = np.eye(size)
        cols.append(pad(_harmonic_reduce_loop(probe, N), N, D).real)
    R = np.hstack(cols)
    R[np.abs(R) < 1e-15] = 0.0
    return sp.csr_matrix(R)


@lru_cache(maxsize=None)
def _exact_reduction_columns(N: int, D: int) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
    """Exact reduction matrix, stored per input monomial as (output rows, rational values)."""
    t = table(N, D)
    M = len(t)
    cols = []
    for d in range(D + 1):
        blk = t.block(d)
        size = blk.stop - blk.start
        probe = zeros((M, size), EXACT)
        for k in range(size):
            probe[blk.start + k, k] = _value(1, EXACT)
        R = pad(_harmonic_reduce_loop(probe, N), N, D)
        for k in range(size):
            rows = np.array([r for r in range(M) if R[r, k]], dtype=np.intp)
            vals = np.empty(len(rows), dtype=object)
            vals[:] = [R[r, k] for r in rows]
            cols.append((rows, vals))
    return tuple(cols)


def _harmonic_reduce_loop(c: np.ndarray, N: int) -> np.ndarray:
    c = trim(c, N)
    D = degree_of(c, N)
    t = table(N, D)
    parts = [c[t.block(d)].copy() for d in range(D + 1)]
    for d in range(D, 1, -1):
        p = parts[d]
        if is_exact(p):
            if not any(bool(v) for v in p.reshape(-1)):
                continue
        elif not np.any(p):
            continue
        h, lowers = harmonic_projection(p, N, d)
        parts[d] = h
        for j, term in enumerate(lowers, start=1):
            parts[d - 2 * j] = parts[d - 2 * j] - term
    out = np.concatenate(parts, axis=0)
    return trim(out, N)


def sphere_zero_defect(c: np.ndarray, N: int) -> float:
    """Max coefficient of the canonical form; 0 iff ``c`` vanishes on the sphere."""
    return max_abs(harmonic_reduce(c, N))
