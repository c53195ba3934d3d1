"""Kernels, spans and solves in float (SVD) or exact (sympy DomainMatrix over Q(i)) mode."""

from __future__ import annotations

import numpy as np
from sympy.polys.domains import QQ_I
from sympy.polys.matrices import DomainMatrix

from .scalars import GaussQ, conj, is_exact, zeros, EXACT

RCOND = 1e-10


def to_domain(a: np.ndarray) -> DomainMatrix:
    rows = [[QQ_I(v.re, v.im) for v in row] for row in a]
    return DomainMatrix(rows, a.shape, QQ_I)


def from_domain(dm: DomainMatrix) -> np.ndarray:
    rows, cols = dm.shape
    out = zeros((rows, cols), EXACT)
    for i, row in enumerate(dm.to_list()):
        for j, v in enumerate(row):
            if v:
                out[i, j] = GaussQ(v.x, v.y)
    return out


def nullspace(a: np.ndarray, rcond: float = RCOND) -> np.ndarray:
    """Columns spanning the kernel of ``a``."""
    if a.shape[1] == 0:
        return a[:0, :0].copy()
    if is_exact(a):
        if a.shape[0] == 0:
            out = zeros((a.shape[1], a.shape[1]), EXACT)
            for i in range(a.shape[1]):
                out[i, i] = GaussQ(1)
            return out
        ns = to_domain(a).nullspace()
        if ns.shape[0] == 0:
            return zeros((a.shape[1], 0), EXACT)
        return from_domain(ns).T.copy()
    if a.shape[0] == 0:
        return np.eye(a.shape[1], dtype=np.complex128)
    # the cutoff is relative to max(1, s_max) so that a matrix of pure rounding
    # noise counts as zero instead of full rank
    _, sv, vh = np.linalg.svd(a, full_matrices=True)
    r = int(np.sum(sv > rcond * max(1.0, sv[0] if sv.size else 0.0)))
    return vh[r:].conj().T.copy()


def orth(a: np.ndarray, rcond: float = RCOND) -> np.ndarray:
    if a.shape[1] == 0:
        return a.copy()
    u, sv, _ = np.linalg.svd(a, full_matrices=False)
    r = int(np.sum(sv > rcond * max(1.0, sv[0] if sv.size else 0.0)))
    return u[:, :r].copy()


def rank(a: np.ndarray, rcond: float = RCOND) -> int:
    if a.size == 0:
        return 0
    if is_exact(a):
        return int(to_domain(a).rank())
    s = np.linalg.svd(a, compute_uv=False)
    return int(np.sum(s > rcond * max(1.0, s[0])))


def adjoint(a: np.ndarray) -> np.ndarray:
    return conj(a).T.copy()


def solve_columns(basis: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Coefficients ``X`` with ``basis @ X ~= rhs`` (exact normal equations or lstsq)."""
    if is_exact(basis):
        bh = adjoint(basis)
        lhs = to_domain(bh.dot(basis))
        r = to_domain(bh.dot(rhs))
        return from_domain(lhs.lu_solve(r))
    x, *_ = np.linalg.lstsq(basis, rhs, rcond=None)
    return x
