"""Arithmetic in GF(2^s).

Elements are polynomials over GF(2) stored as integers, bit ``i`` holding the
coefficient of ``x**i`` (least significant bit = constant term). Every other
module and every file format uses that same convention.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import CapabilityError, ParameterError

# One fixed reduction polynomial per degree, so results are reproducible.
REDUCTION_POLYS = {
    1: 0b11,                     # x + 1
    2: 0b111,                    # x^2 + x + 1
    3: 0b1011,                   # x^3 + x + 1
    4: 0b10011,                  # x^4 + x + 1
    5: 0b100101,                 # x^5 + x^2 + 1
    6: 0b1000011,                # x^6 + x + 1
    7: 0b10000011,               # x^7 + x + 1
    8: 0b100011011,              # x^8 + x^4 + x^3 + x + 1
    9: 0b1000010001,             # x^9 + x^4 + 1
    10: 0b10000001001,           # x^10 + x^3 + 1
    11: 0b100000000101,          # x^11 + x^2 + 1
    12: 0b1000001010011,         # x^12 + x^6 + x^4 + x + 1
    13: 0b10000000011011,        # x^13 + x^4 + x^3 + x + 1
    14: 0b100010001000011,       # x^14 + x^10 + x^6 + x + 1
    15: 0b1000000000000011,      # x^15 + x + 1
    16: 0b10001000000001011,     # x^16 + x^12 + x^3 + x + 1
    24: (1 << 24) | 0b10000111,  # x^24 + x^7 + x^2 + x + 1
    32: (1 << 32) | 0b10001101,  # x^32 + x^7 + x^3 + x^2 + 1
    48: (1 << 48) | 0b1010010001,  # x^48 + x^9 + x^7 + x^4 + 1
    64: (1 << 64) | 0b11011,     # x^64 + x^4 + x^3 + x + 1
}

MAX_VERIFIED_DEGREE = 16
MAX_DEGREE = 64


def clmul(a: int, b: int) -> int:
    """Carry-less product of two GF(2)[x] polynomials."""
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def poly_mod(a: int, m: int) -> int:
    dm = m.bit_length() - 1
    while a and a.bit_length() - 1 >= dm:
        a ^= m << (a.bit_length() - 1 - dm)
    return a


@lru_cache(maxsize=None)
def is_irreducible(poly: int) -> bool:
    """Exhaustive trial division by every polynomial of degree <= deg/2."""
    deg = poly.bit_length() - 1
    if deg < 1:
        return False
    if deg > MAX_VERIFIED_DEGREE:
        raise CapabilityError(
            f"exhaustive irreducibility check is limited to degree "
            f"{MAX_VERIFIED_DEGREE}, got {deg}")
    for d in range(2, 1 << (deg // 2 + 1)):
        if poly_mod(poly, d) == 0:
            return False
    return True


@dataclass(frozen=True)
class FieldParams:
    """The field GF(2^s) defined by ``reduction_poly``.

    Parameters
    ----------
    s : int
        Bits per element.
    reduction_poly : int, optional
        Irreducible polynomial of degree ``s`` (bit ``i`` = coefficient of
        ``x**i``). Defaults to the built-in table entry for ``s``.
    """

    s: int
    reduction_poly: int = 0

    def __post_init__(self):
        if not 1 <= self.s <= MAX_DEGREE:
            raise ParameterError(f"s must lie in [1, {MAX_DEGREE}], got {self.s}")
        if self.reduction_poly == 0:
            if self.s not in REDUCTION_POLYS:
                raise ParameterError(f"no built-in reduction polynomial for s={self.s}")
            object.__setattr__(self, "reduction_poly", REDUCTION_POLYS[self.s])
        if self.reduction_poly.bit_length() - 1 != self.s:
            raise ParameterError("reduction polynomial must have degree s")
        if self.s <= MAX_VERIFIED_DEGREE and not is_irreducible(self.reduction_poly):
            raise ParameterError(f"{self.reduction_poly:#x} is reducible")

    @property
    def order(self) -> int:
        return 1 << self.s

    def check(self, value: int) -> int:
        value = int(value)
        if not 0 <= value < self.order:
            raise ParameterError(f"{value} is not an element of GF(2^{self.s})")
        return value

    def mul(self, a: int, b: int) -> int:
        """Shift-and-add multiplication with interleaved reduction."""
        top = 1 << self.s
        out = 0
        while b:
            if b & 1:
                out ^= a
            b >>= 1
            a <<= 1
            if a & top:
                a ^= self.reduction_poly
        return out

    def pow(self, a: int, e: int) -> int:
        out = 1
        while e:
            if e & 1:
                out = self.mul(out, a)
            a = self.mul(a, a)
            e >>= 1
        return out

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("zero has no inverse")
        return self.pow(a, self.order - 2)

    def horner(self, coeffs: Sequence[int], k: int) -> int:
        """Evaluate ``sum_i coeffs[i] * k**(r-i)`` (leading coefficient first)."""
        acc = 0
        for c in coeffs:
            acc = self.mul(acc, k) ^ int(c)
        return acc

    def mul_table(self) -> np.ndarray:
        return _mul_table(self)

    def elem(self, value: int) -> "FieldElem":
        return FieldElem(self.check(value), self)


@lru_cache(maxsize=16)
def _mul_table(params: FieldParams) -> np.ndarray:
    if params.s > 12:
        raise CapabilityError("multiplication tables are limited to s <= 12")
    q = params.order
    table = np.zeros((q, q), dtype=np.int64)
    for a in range(q):
        for b in range(a, q):
            table[a, b] = table[b, a] = params.mul(a, b)
    return table


@lru_cache(maxsize=None)
def default_field(s: int) -> FieldParams:
    return FieldParams(s)


@dataclass(frozen=True)
class FieldElem:
    """An element of GF(2^s) bound to its field parameters."""

    value: int
    params: FieldParams

    def __post_init__(self):
        self.params.check(self.value)

    def _same(self, other: "FieldElem"):
        if not isinstance(other, FieldElem) or other.params != self.params:
            raise ParameterError("field elements belong to different fields")

    def __add__(self, other):
        return add(self, other)

    __sub__ = __add__

    def __mul__(self, other):
        return mul(self, other)

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"GF(2^{self.params.s})({self.value})"


def add(a: FieldElem, b: FieldElem) -> FieldElem:
    a._same(b)
    return FieldElem(a.value ^ b.value, a.params)


def mul(a: FieldElem, b: FieldElem) -> FieldElem:
    a._same(b)
    return FieldElem(a.params.mul(a.value, b.value), a.params)


def poly_eval(coeffs: Sequence[FieldElem], k: FieldElem) -> FieldElem:
    """Horner evaluation of ``m_0 k^r + m_1 k^(r-1) + ... + m_r``."""
    if len(coeffs) == 0:
        raise ParameterError("polynomial needs at least one coefficient")
    for c in coeffs:
        k._same(c)
    return FieldElem(k.params.horner([c.value for c in coeffs], k.value), k.params)


def mul_array(params: FieldParams, a, b) -> np.ndarray:
    """Elementwise product of integer arrays (broadcasting)."""
    a, b = np.broadcast_arrays(np.asarray(a, dtype=np.int64),
                               np.asarray(b, dtype=np.int64))
    a = a.copy()
    b = b.copy()
    out = np.zeros_like(a)
    top = np.int64(1) << params.s
    poly = np.int64(params.reduction_poly)
    for _ in range(params.s):
        out ^= np.where(b & 1, a, 0)
        b >>= 1
        a <<= 1
        a ^= np.where(a & top, poly, 0)
    return out


def horner_array(params: FieldParams, coeffs, k) -> np.ndarray:
    """Vectorized Horner rule; ``coeffs`` has the coefficient axis last."""
    coeffs = np.asarray(coeffs, dtype=np.int64)
    k = np.asarray(k, dtype=np.int64)
    acc = np.zeros(np.broadcast_shapes(coeffs.shape[:-1], k.shape), dtype=np.int64)
    for i in range(coeffs.shape[-1]):
        acc = mul_array(params, acc, k) ^ coeffs[..., i]
    return acc
