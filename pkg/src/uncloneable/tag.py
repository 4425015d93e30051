"""Polynomial authentication tag over GF(2^s).

A message of ``n = r*s`` bits is cut into registers ``m_0 .. m_{r-1}``; a final
register ``m_r`` is appended so that the degree-``r`` polynomial
``f(z) = m_0 z^r + ... + m_{r-1} z + m_r`` vanishes at the key ``k``.

Packing: register ``m_j`` occupies bits ``j*s .. j*s+s-1`` of the bit string,
and within a register the first bit is the constant-term coefficient.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .bits import all_vectors, as_bits
from .errors import CapabilityError, ParameterError
from .field import FieldElem, FieldParams, horner_array, mul_array

MAX_ENUMERATION_S = 16


def bits_to_registers(bits, s: int) -> list[int]:
    bits = as_bits(bits)
    if bits.size % s:
        raise ParameterError(f"{bits.size} bits do not split into {s}-bit registers")
    weights = 1 << np.arange(s)
    return [int(chunk @ weights) for chunk in bits.reshape(-1, s).astype(np.int64)]


def registers_to_bits(registers: Sequence[int], s: int) -> np.ndarray:
    out = np.zeros(len(registers) * s, dtype=np.uint8)
    for j, value in enumerate(registers):
        for t in range(s):
            out[j * s + t] = (int(value) >> t) & 1
    return out


@dataclass(frozen=True)
class TaggedMessage:
    """Registers ``m_0 .. m_r`` of a tagged message."""

    registers: tuple
    params: FieldParams

    def __post_init__(self):
        if len(self.registers) < 2:
            raise ParameterError("a tagged message has at least two registers")
        for v in self.registers:
            self.params.check(v)

    @property
    def r(self) -> int:
        return len(self.registers) - 1

    @property
    def n(self) -> int:
        return self.r * self.params.s

    def to_bits(self) -> np.ndarray:
        return registers_to_bits(self.registers, self.params.s)

    def message_bits(self) -> np.ndarray:
        return self.to_bits()[: self.n]

    @classmethod
    def from_bits(cls, bits, params: FieldParams) -> "TaggedMessage":
        return cls(tuple(bits_to_registers(bits, params.s)), params)


def _key_value(k, params: FieldParams) -> int:
    if isinstance(k, FieldElem):
        if k.params != params:
            raise ParameterError("key belongs to a different field")
        return k.value
    return params.check(k)


def append_tag(message, k, params: FieldParams | None = None) -> TaggedMessage:
    """Append the register that makes the message polynomial vanish at ``k``.

    ``k`` is a :class:`FieldElem` or, with ``params`` given, a plain integer.
    """
    if params is None:
        if not isinstance(k, FieldElem):
            raise ParameterError("pass params when k is a plain integer")
        params = k.params
    kv = _key_value(k, params)
    regs = bits_to_registers(message, params.s)
    if not regs:
        raise ParameterError("message must hold at least one register")
    # f(k) = k * g(k) + m_r with g the polynomial of the message registers.
    last = params.mul(params.horner(regs, kv), kv)
    return TaggedMessage(tuple(regs) + (last,), params)


def verify_tag(tagged: TaggedMessage, k) -> bool:
    kv = _key_value(k, tagged.params)
    return tagged.params.horner(tagged.registers, kv) == 0


def forgery_fraction(delta: Sequence, params: FieldParams) -> Fraction:
    """Fraction of keys ``k`` for which the tamper polynomial vanishes at ``k``.

    ``delta`` holds the ``r+1`` registers that an adversary XORs onto a tagged
    message; the tamper goes unnoticed under key ``k`` exactly when the
    polynomial with these coefficients has a root at ``k``.
    """
    if params.s > MAX_ENUMERATION_S:
        raise CapabilityError(f"enumerating 2^{params.s} keys is not supported")
    coeffs = np.array([params.check(int(d)) for d in delta], dtype=np.int64)
    if coeffs.size == 0:
        raise ParameterError("delta needs at least one register")
    keys = np.arange(params.order, dtype=np.int64)
    roots = np.count_nonzero(horner_array(params, coeffs[None, :], keys) == 0)
    return Fraction(int(roots), params.order)


@lru_cache(maxsize=32)
def valid_tag_table(params: FieldParams, r: int) -> np.ndarray:
    """Boolean table ``[k, x]``: does the (n+s)-bit string with index ``x`` pass?

    ``x`` indexes bit strings with position 0 as most significant bit.
    """
    width = (r + 1) * params.s
    if width > 20 or params.s > 12:
        raise CapabilityError("valid-tag tables are limited to n+s <= 20")
    vecs = all_vectors(width).astype(np.int64).reshape(-1, r + 1, params.s)
    regs = (vecs << np.arange(params.s)).sum(axis=2)
    keys = np.arange(params.order, dtype=np.int64)[:, None]
    vals = horner_array(params, regs[None, :, :], keys)
    return vals == 0


@lru_cache(maxsize=32)
def tag_index_table(params: FieldParams, r: int) -> np.ndarray:
    """``[k, m]`` -> index of the tagged (n+s)-bit string for message index ``m``."""
    n = r * params.s
    width = n + params.s
    if width > 20 or params.s > 12:
        raise CapabilityError("tag tables are limited to n+s <= 20")
    msgs = all_vectors(n).astype(np.int64).reshape(-1, r, params.s)
    regs = (msgs << np.arange(params.s)).sum(axis=2)
    keys = np.arange(params.order, dtype=np.int64)[:, None]
    last = horner_array(params, regs[None, :, :], keys)
    last = mul_array(params, last, keys)
    # Tagged index = message index shifted left by s, plus the last register
    # written with its constant-term bit first.
    rev = np.zeros_like(last)
    for t in range(params.s):
        rev |= ((last >> t) & 1) << (params.s - 1 - t)
    return (np.arange(1 << n, dtype=np.int64)[None, :] << params.s) | rev
