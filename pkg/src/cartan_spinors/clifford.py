"""Complex Clifford algebras and their matrix representations.

Convention: ``v*w + w*v = -2<v, w>``, so every generator squares to ``-1``.
Basis monomials ``e_A`` are indexed by bitmasks, bit ``i-1`` standing for
generator ``e_i``; a monomial is always the product of its generators in
increasing order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from typing import Iterable, Mapping

import numpy as np

from .errors import (
    AlgebraMismatchError,
    DimensionMismatchError,
    RepresentationKindError,
    SizeError,
)
from .scalars import EXACT, FLOAT, GaussQ, check_mode, to_exact

MAX_GENERATORS = 12

DIRAC = "dirac"
PAULI = "pauli"
CARTAN = "cartan"
KINDS = (DIRAC, PAULI, CARTAN)


def _popcount(a):
    return np.bitwise_count(np.asarray(a, dtype=np.uint64)).astype(np.int64)


def monomial_sign(a: int, b: int) -> int:
    """Sign ``s`` with ``e_a * e_b = s * e_{a ^ b}``."""
    swaps = 0
    bb = b
    while bb:
        low = bb & -bb
        # generators of a with larger index than this generator of b
        swaps += bin(a & ~((low << 1) - 1)).count("1")
        bb ^= low
    swaps += bin(a & b).count("1")  # e_i * e_i = -1
    return -1 if swaps & 1 else 1


@dataclass(frozen=True)
class CliffordAlgebra:
    n: int

    def __post_init__(self):
        if not (1 <= self.n <= MAX_GENERATORS):
            raise SizeError(f"generator count must be in [1, {MAX_GENERATORS}], got {self.n}")

    @property
    def dim(self) -> int:
        return 1 << self.n

    @cached_property
    def sign_table(self) -> np.ndarray:
        """``sign_table[a, b]`` is the sign of ``e_a * e_b``; the product monomial is ``a ^ b``."""
        idx = np.arange(self.dim, dtype=np.uint64)
        a = idx[:, None]
        b = idx[None, :]
        swaps = _popcount(a & b)
        for i in range(self.n):
            has = ((b >> np.uint64(i)) & np.uint64(1)).astype(np.int64)
            swaps = swaps + has * _popcount(a >> np.uint64(i + 1))
        return np.where(swaps % 2 == 0, 1, -1).astype(np.int8)

    def basis(self) -> list[tuple[int, ...]]:
        """Monomials as sorted generator-index tuples (1-based), in bitmask order."""
        return [monomial_indices(a) for a in range(self.dim)]

    # element constructors
    def element(self, coeffs: Mapping[int, object]) -> "AlgebraElement":
        return AlgebraElement(self.n, coeffs)

    def one(self) -> "AlgebraElement":
        return AlgebraElement(self.n, {0: 1})

    def gen(self, i: int) -> "AlgebraElement":
        if not 1 <= i <= self.n:
            raise SizeError(f"generator index {i} out of range 1..{self.n}")
        return AlgebraElement(self.n, {1 << (i - 1): 1})

    def monomial(self, indices: Iterable[int]) -> "AlgebraElement":
        """Product ``e_{i1} * e_{i2} * ...`` in the given order (any order allowed)."""
        return reduce(multiply, (self.gen(i) for i in indices), self.one())

    def vector(self, v: Iterable[object]) -> "AlgebraElement":
        """Degree-one element ``sum_i v_i e_i``."""
        v = list(v)
        if len(v) != self.n:
            raise DimensionMismatchError(f"vector of length {len(v)} in algebra on {self.n} generators")
        return AlgebraElement(self.n, {1 << i: c for i, c in enumerate(v)})

    def volume(self) -> "AlgebraElement":
        return AlgebraElement(self.n, {self.dim - 1: 1})


def monomial_indices(mask: int) -> tuple[int, ...]:
    return tuple(i + 1 for i in range(mask.bit_length()) if mask >> i & 1)


def monomial_mask(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        m |= 1 << (i - 1)
    return m


_EXACT_TYPES = (int, Fraction, GaussQ)


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    """Finitely supported linear combination of basis monomials."""

    n: int
    coeffs: Mapping[int, object] = field(default_factory=dict)

    def __post_init__(self):
        clean = {int(k): v for k, v in self.coeffs.items() if v != 0}
        for k in clean:
            if k < 0 or k >= (1 << self.n):
                raise SizeError(f"monomial mask {k} invalid for {self.n} generators")
        object.__setattr__(self, "coeffs", clean)

    @property
    def mode(self) -> str:
        exact = all(isinstance(v, _EXACT_TYPES) or type(v).__name__ == "mpq" for v in self.coeffs.values())
        return EXACT if exact else FLOAT

    def coefficient(self, indices: Iterable[int] = ()) -> object:
        return self.coeffs.get(monomial_mask(indices), 0)

    def grade_part(self, k: int) -> "AlgebraElement":
        return AlgebraElement(self.n, {a: c for a, c in self.coeffs.items() if bin(a).count("1") == k})

    def _check(self, other: "AlgebraElement"):
        if self.n != other.n:
            raise AlgebraMismatchError(f"elements of Cliff({self.n}) and Cliff({other.n}) cannot be combined")

    def __add__(self, other):
        if not isinstance(other, AlgebraElement):
            other = AlgebraElement(self.n, {0: other})
        self._check(other)
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0) + v
        return AlgebraElement(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return AlgebraElement(self.n, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other if isinstance(other, AlgebraElement) else -other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            return multiply(self, other)
        return AlgebraElement(self.n, {k: v * other for k, v in self.coeffs.items()})

    def __rmul__(self, other):
        return AlgebraElement(self.n, {k: other * v for k, v in self.coeffs.items()})

    def __eq__(self, other):
        if isinstance(other, AlgebraElement):
            return self.n == other.n and (self - other).coeffs == {}
        if isinstance(other, (int, float, complex, Fraction, GaussQ)):
            return self == AlgebraElement(self.n, {0: other})
        return NotImplemented

    def __hash__(self):
        return hash((self.n, frozenset(self.coeffs.items())))

    def __repr__(self):
        if not self.coeffs:
            return "0"
        terms = []
        for k in sorted(self.coeffs):
            name = "".join(f"e{i}" for i in monomial_indices(k)) or "1"
            terms.append(f"({self.coeffs[k]})*{name}")
        return " + ".join(terms)


def build_algebra(n: int) -> CliffordAlgebra:
    alg = CliffordAlgebra(n)
    alg.sign_table  # noqa: B018 - build eagerly
    return alg


def multiply(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    if a.n != b.n:
        raise AlgebraMismatchError(f"elements of Cliff({a.n}) and Cliff({b.n}) cannot be multiplied")
    out: dict[int, object] = {}
    for ka, va in a.coeffs.items():
        for kb, vb in b.coeffs.items():
            k = ka ^ kb
            term = va * vb if monomial_sign(ka, kb) > 0 else -(va * vb)
            out[k] = out.get(k, 0) + term
    return AlgebraElement(a.n, out)


def involution_alpha(a: AlgebraElement) -> AlgebraElement:
    """Canonical involution: ``e_A -> (-1)^|A| e_A``."""
    return AlgebraElement(a.n, {k: (-v if bin(k).count("1") & 1 else v) for k, v in a.coeffs.items()})


# ---------------------------------------------------------------------------
# matrix representations

_I2 = np.eye(2, dtype=np.complex128)
_S3 = np.diag([1, -1]).astype(np.complex128)
_IS1 = np.array([[0, 1j], [1j, 0]])  # i*sigma_1
_IS2 = np.array([[0, 1], [-1, 0]], dtype=np.complex128)  # i*sigma_2


def _kron_all(mats) -> np.ndarray:
    return reduce(np.kron, mats, np.ones((1, 1), dtype=np.complex128))


def _even_gammas(n: int) -> list[np.ndarray]:
    k = n // 2
    out = []
    for j in range(k):
        left = [_S3] * j
        right = [_I2] * (k - j - 1)
        out.append(_kron_all(left + [_IS1] + right))
        out.append(_kron_all(left + [_IS2] + right))
    return out


def _odd_gammas(n: int) -> list[np.ndarray]:
    k = (n - 1) // 2
    gs = _even_gammas(2 * k)
    omega = reduce(np.matmul, gs, np.eye(1 << k, dtype=np.complex128))
    # (i^(k+1) omega)^2 = -1 and it anticommutes with the first 2k gammas
    gs.append((1j ** (k + 1)) * omega)
    return [np.round(g.real) + 1j * np.round(g.imag) for g in gs]


@dataclass(frozen=True, eq=False)
class MatrixRep:
    n: int
    kind: str
    gammas: tuple[np.ndarray, ...]

    @property
    def dim(self) -> int:
        return self.gammas[0].shape[0]

    @cached_property
    def _monomials(self) -> dict[int, np.ndarray]:
        return {}

    def monomial_matrix(self, mask: int) -> np.ndarray:
        cache = self._monomials
        if mask not in cache:
            m = np.eye(self.dim, dtype=np.complex128)
            for i in monomial_indices(mask):
                m = m @ self.gammas[i - 1]
            m.setflags(write=False)
            cache[mask] = m
        return cache[mask]

    def gamma_of(self, v) -> np.ndarray:
        """Matrix of the vector ``sum_a v_a e_a`` (Clifford action of an ambient vector)."""
        v = np.asarray(v)
        if v.shape != (self.n,):
            raise DimensionMismatchError(f"vector of shape {v.shape} for a rep on {self.n} generators")
        return np.tensordot(v, np.stack(self.gammas), axes=1)

    @cached_property
    def gamma_stack(self) -> np.ndarray:
        g = np.stack(self.gammas)
        g.setflags(write=False)
        return g

    @cached_property
    def gamma_stack_exact(self) -> np.ndarray:
        return to_exact(self.gamma_stack)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "kind": self.kind,
            "dim": self.dim,
            "gammas": [
                [[[float(z.real), float(z.imag)] for z in row] for row in g] for g in self.gammas
            ],
        }


def build_rep(n: int, kind: str) -> MatrixRep:
    if kind not in KINDS:
        raise RepresentationKindError(f"unknown representation kind {kind!r}")
    if n < 1 or n > MAX_GENERATORS:
        raise SizeError(f"generator count must be in [1, {MAX_GENERATORS}], got {n}")
    if kind == DIRAC:
        if n % 2:
            raise RepresentationKindError(f"the Dirac representation needs an even generator count, got {n}")
        gs = _even_gammas(n)
    else:
        if n % 2 == 0:
            raise RepresentationKindError(f"the {kind} representation needs an odd generator count, got {n}")
        gs = _odd_gammas(n)
        if kind == CARTAN:
            z = np.zeros_like(gs[0])
            gs = [np.block([[g, z], [z, -g]]) for g in gs]
    for g in gs:
        g.setflags(write=False)
    return MatrixRep(n, kind, tuple(gs))


def spinor_rep(N: int) -> MatrixRep:
    """The irreducible rep of ``Cliff(N)`` used as the fibre ``Delta_N``."""
    return build_rep(N, DIRAC if N % 2 == 0 else PAULI)


def represent(rep: MatrixRep, a: AlgebraElement, mode: str = FLOAT) -> np.ndarray:
    if a.n != rep.n:
        raise DimensionMismatchError(f"element of Cliff({a.n}) cannot act through a rep of Cliff({rep.n})")
    check_mode(mode)
    if mode == EXACT:
        out = to_exact(np.zeros((rep.dim, rep.dim)))
        for k, c in a.coeffs.items():
            out = out + to_exact(rep.monomial_matrix(k)) * GaussQ.coerce(c)
        return out
    out = np.zeros((rep.dim, rep.dim), dtype=np.complex128)
    for k, c in a.coeffs.items():
        out = out + complex(c) * rep.monomial_matrix(k)
    return out


def volume_element(rep: MatrixRep) -> np.ndarray:
    return rep.monomial_matrix((1 << rep.n) - 1).copy()


def volume_scalar(rep: MatrixRep) -> complex:
    """Scalar by which the volume element acts in a Pauli representation."""
    if rep.kind != PAULI:
        raise RepresentationKindError("the volume element is scalar only in a Pauli representation")
    vol = volume_element(rep)
    c = vol[0, 0]
    if not np.array_equal(vol, c * np.eye(rep.dim)):
        raise RuntimeError("volume element of a Pauli representation is not scalar")
    return complex(c)


def span_dimension(rep: MatrixRep) -> int:
    """Dimension of the image of the algebra, i.e. of span{represent(e_A)}."""
    mats = np.stack([rep.monomial_matrix(a).reshape(-1) for a in range(1 << rep.n)])
    return int(np.linalg.matrix_rank(mats))


def expected_span_dimension(rep: MatrixRep) -> int:
    if rep.kind == DIRAC:
        return rep.dim**2
    if rep.kind == PAULI:
        return rep.dim**2
    half = rep.dim // 2
    return 2 * half**2


def anticommutator_defect(rep: MatrixRep) -> float:
    """Max-norm of ``g_i g_j + g_j g_i + 2 delta_ij Id`` over all pairs."""
    eye = np.eye(rep.dim)
    worst = 0.0
    for i, gi in enumerate(rep.gammas):
        for j, gj in enumerate(rep.gammas):
            d = gi @ gj + gj @ gi + (2.0 * eye if i == j else 0.0)
            worst = max(worst, float(np.max(np.abs(d))))
    return worst
