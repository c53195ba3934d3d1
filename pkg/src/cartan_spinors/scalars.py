"""Scalar arithmetic modes.

Two modes are supported throughout the package:

* ``"float"``: ``complex128`` numpy arrays.
* ``"exact"``: numpy object arrays holding :class:`GaussQ` values, i.e.
  elements of Q(i) with ``gmpy2.mpq`` real and imaginary parts.

Every array-level routine dispatches on ``dtype`` so the same code path
serves both modes.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational

import numpy as np
from gmpy2 import mpq

FLOAT = "float"
EXACT = "exact"
MODES = (FLOAT, EXACT)

_MPQ = type(mpq(0))


def _q(v) -> "mpq":
    if isinstance(v, _MPQ):
        return v
    if isinstance(v, float):
        # exact binary value of the float
        return mpq(Fraction(v))
    if isinstance(v, (int, Rational)):
        return mpq(v)
    raise TypeError(f"cannot convert {type(v).__name__} to a rational")


class GaussQ:
    """Gaussian rational ``re + i*im`` with exact rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = _q(re)
        self.im = _q(im)

    @classmethod
    def coerce(cls, v) -> "GaussQ":
        if isinstance(v, GaussQ):
            return v
        if isinstance(v, complex):
            return cls(v.real, v.imag)
        if isinstance(v, np.generic):
            v = v.item()
            return cls.coerce(v)
        return cls(v, 0)

    # arithmetic -----------------------------------------------------------
    def __add__(self, o):
        if isinstance(o, GaussQ):
            # object arrays are mostly zeros; sharing is safe since values are immutable
            if not (o.re or o.im):
                return self
            if not (self.re or self.im):
                return o
            return GaussQ._make(self.re + o.re, self.im + o.im)
        if isinstance(o, (int, _MPQ, Fraction)):
            return GaussQ._make(self.re + o, self.im)
        return self + GaussQ.coerce(o)

    __radd__ = __add__

    def __neg__(self):
        return GaussQ._make(-self.re, -self.im)

    def __pos__(self):
        return self

    def __sub__(self, o):
        return self + (-GaussQ.coerce(o))

    def __rsub__(self, o):
        return GaussQ.coerce(o) + (-self)

    def __mul__(self, o):
        if isinstance(o, GaussQ):
            a, b, c, d = self.re, self.im, o.re, o.im
            if not (a or b) or not (c or d):
                return ZERO
            return GaussQ._make(a * c - b * d, a * d + b * c)
        if isinstance(o, (int, _MPQ)):
            return GaussQ._make(self.re * o, self.im * o)
        if isinstance(o, Fraction):
            o = mpq(o)
            return GaussQ._make(self.re * o, self.im * o)
        return self * GaussQ.coerce(o)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = GaussQ.coerce(o)
        den = o.re * o.re + o.im * o.im
        if den == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        num = self * o.conjugate()
        return GaussQ._make(num.re / den, num.im / den)

    def __rtruediv__(self, o):
        return GaussQ.coerce(o) / self

    def conjugate(self) -> "GaussQ":
        return GaussQ._make(self.re, -self.im)

    # comparisons / conversion ---------------------------------------------
    def __eq__(self, o):
        if isinstance(o, GaussQ):
            return self.re == o.re and self.im == o.im
        if isinstance(o, (int, _MPQ, Fraction)):
            return self.im == 0 and self.re == o
        if isinstance(o, (float, complex)):
            o = complex(o)
            return complex(self) == o
        return NotImplemented

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return self.re != 0 or self.im != 0

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __abs__(self) -> float:
        return abs(complex(self))

    def abs2(self):
        """Exact squared modulus."""
        return self.re * self.re + self.im * self.im

    def __repr__(self):
        if self.im == 0:
            return f"GaussQ({self.re})"
        return f"GaussQ({self.re}, {self.im})"

    @staticmethod
    def _make(re, im) -> "GaussQ":
        g = object.__new__(GaussQ)
        g.re = re
        g.im = im
        return g


ZERO = GaussQ(0)
ONE = GaussQ(1)
HALF = mpq(1, 2)


def is_exact(a: np.ndarray) -> bool:
    return a.dtype == object


def mode_of(a: np.ndarray) -> str:
    return EXACT if is_exact(a) else FLOAT


def check_mode(mode: str) -> str:
    if mode not in MODES:
        raise ValueError(f"unknown arithmetic mode {mode!r}; expected one of {MODES}")
    return mode


def zeros(shape, mode: str) -> np.ndarray:
    if mode == EXACT:
        return np.full(shape, ZERO, dtype=object)
    return np.zeros(shape, dtype=np.complex128)


def to_exact(a) -> np.ndarray:
    """Convert an array (or scalar) to exact mode.

    Float entries are converted through their exact binary value, which is
    lossless for the small integer / dyadic data produced by the gamma
    matrix constructions.
    """
    arr = np.asarray(a)
    if arr.dtype == object:
        out = np.empty(arr.shape, dtype=object)
        flat = out.reshape(-1)
        for i, v in enumerate(arr.reshape(-1)):
            flat[i] = GaussQ.coerce(v)
        return out
    arr = arr.astype(np.complex128)
    out = np.empty(arr.shape, dtype=object)
    flat = out.reshape(-1)
    for i, v in enumerate(arr.reshape(-1)):
        flat[i] = GaussQ(float(v.real), float(v.imag))
    return out


def to_float(a) -> np.ndarray:
    arr = np.asarray(a)
    if arr.dtype == object:
        return np.array([complex(v) for v in arr.reshape(-1)], dtype=np.complex128).reshape(arr.shape)
    return arr.astype(np.complex128)


def as_mode(a, mode: str) -> np.ndarray:
    return to_exact(a) if mode == EXACT else to_float(a)


def scalar(v, mode: str):
    """A scalar usable as a multiplier for arrays of the given mode."""
    if mode == EXACT:
        if isinstance(v, (int, _MPQ)):
            return v
        if isinstance(v, Fraction):
            return mpq(v)
        return GaussQ.coerce(v)
    return complex(v) if isinstance(v, complex) else float(v)


def value(v, mode: str):
    """A scalar suitable for storing in an array of the given mode."""
    return GaussQ.coerce(v) if mode == EXACT else complex(v)


def conj(a: np.ndarray) -> np.ndarray:
    if is_exact(a):
        out = np.empty(a.shape, dtype=object)
        flat = out.reshape(-1)
        for i, v in enumerate(a.reshape(-1)):
            flat[i] = v.conjugate()
        return out
    return np.conj(a)


def max_abs(a: np.ndarray) -> float:
    """Max modulus of the entries (0.0 for an empty array)."""
    if a.size == 0:
        return 0.0
    if is_exact(a):
        best = mpq(0)
        for v in a.reshape(-1):
            if v:
                m = v.abs2()
                if m > best:
                    best = m
        return float(best) ** 0.5
    return float(np.max(np.abs(a)))


def all_zero(a: np.ndarray) -> bool:
    if is_exact(a):
        return not any(bool(v) for v in a.reshape(-1))
    return not np.any(a)
