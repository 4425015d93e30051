"""Encryption and decryption pipelines.

Alice tags the message, masks it with ``e``, picks a random element ``z`` of
the ``C2^perp`` coset fixed by the ``C1`` syndrome ``c1`` and the label ``y``,
and sends ``z`` qubit by qubit in the bases ``b``. Bob measures in ``b``,
corrects toward ``c1`` with the coset-leader table, reads the label, removes
``e`` and checks the tag.

The coherent variant keeps ``z`` in superposition over the coset (with a
phase pattern chosen by ``c2``); it exists to check that measuring before
sending changes nothing Bob can observe.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import bits as gf2
from .bits import as_bits, bits_to_int, int_to_bits
from .codes import ProtocolParams
from .errors import CapabilityError, ParameterError, UsageError
from .qsim import (EXACT_MAX_QUBITS, PURE, QuantumRegister, hadamard_layer,
                   measure_in_bases, prepare)
from .tag import TaggedMessage, append_tag, verify_tag

ACC = "ACC"
REJ = "REJ"


@dataclass(frozen=True)
class KeyMaterial:
    """The secret key ``(k, e, c1, b)``.

    ``k`` is a field element (integer below ``2**s``); the others are bit
    arrays of lengths ``n + s``, ``N - K`` and ``N``.
    """

    k: int
    e: np.ndarray
    c1: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        for name in ("e", "c1", "b"):
            object.__setattr__(self, name, as_bits(getattr(self, name)))

    def check(self, params: ProtocolParams) -> None:
        want = {"e": params.n + params.s, "c1": params.N - params.K, "b": params.N}
        for name, length in want.items():
            got = getattr(self, name).size
            if got != length:
                raise ParameterError(f"key field {name} has {got} bits, expected {length}")
        params.field.check(self.k)

    def to_bits(self, params: ProtocolParams) -> np.ndarray:
        """Stream layout ``b | k | e | c1`` (the order keys are drawn in)."""
        return np.concatenate([self.b, int_to_bits(self.k, params.s), self.e, self.c1])

    @classmethod
    def from_bits(cls, stream, params: ProtocolParams) -> "KeyMaterial":
        stream = as_bits(stream, key_length(params))
        N, s, ns = params.N, params.s, params.n + params.s
        b = stream[:N]
        k = bits_to_int(stream[N:N + s])
        e = stream[N + s:N + s + ns]
        c1 = stream[N + s + ns:]
        return cls(k, e, c1, b)

    @classmethod
    def generate(cls, params: ProtocolParams, rng) -> "KeyMaterial":
        return cls.from_bits(rng.integers(0, 2, size=key_length(params), dtype=np.uint8), params)

    def __eq__(self, other):
        if not isinstance(other, KeyMaterial):
            return NotImplemented
        return (self.k == other.k and np.array_equal(self.e, other.e)
                and np.array_equal(self.c1, other.c1) and np.array_equal(self.b, other.b))

    __hash__ = None


def key_length(params: ProtocolParams) -> int:
    return params.N + params.s + params.n + params.s + params.N - params.K


@dataclass
class ReusableKeySchedule:
    """Reusable ``(k, b)`` plus a list of one-time pads ``e'`` of ``N`` bits.

    Each pad may be used for one encryption only; the schedule records which
    have been consumed. Not safe to share between threads.
    """

    k: int
    b: np.ndarray
    pads: list = field(default_factory=list)
    used: set = field(default_factory=set)

    def __post_init__(self):
        self.b = as_bits(self.b)
        self.pads = [as_bits(p, self.b.size) for p in self.pads]

    @classmethod
    def generate(cls, params: ProtocolParams, n_messages: int, rng) -> "ReusableKeySchedule":
        b = rng.integers(0, 2, size=params.N, dtype=np.uint8)
        k = int(rng.integers(0, params.field.order))
        pads = [rng.integers(0, 2, size=params.N, dtype=np.uint8) for _ in range(n_messages)]
        return cls(k, b, pads)

    def add_pad(self, pad) -> int:
        self.pads.append(as_bits(pad, self.b.size))
        return len(self.pads) - 1

    def next_unused(self) -> int:
        for i in range(len(self.pads)):
            if i not in self.used:
                return i
        raise UsageError("every one-time pad in the schedule has been used")

    def consume(self, index: int) -> np.ndarray:
        if not 0 <= index < len(self.pads):
            raise UsageError(f"no one-time pad with index {index}")
        if index in self.used:
            raise UsageError(f"one-time pad {index} was already used")
        self.used.add(index)
        return self.pads[index]


@dataclass(frozen=True)
class CoherentKeyExtras:
    """Phase syndrome ``c2`` for the coherent encoding; ``zpad`` for the
    measured one. Both have ``N - K'`` bits. ``zpad`` is never written to key
    files."""

    c2: np.ndarray
    zpad: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "c2", as_bits(self.c2))
        object.__setattr__(self, "zpad", as_bits(self.zpad))

    @classmethod
    def generate(cls, params: ProtocolParams, rng) -> "CoherentKeyExtras":
        r = params.N - params.K2
        return cls(rng.integers(0, 2, size=r, dtype=np.uint8),
                   rng.integers(0, 2, size=r, dtype=np.uint8))


@dataclass(frozen=True)
class TransmissionDescriptor:
    """``N`` qubits in flight, or ``register=None`` for a blocked transmission."""

    register: QuantumRegister | None
    params_digest: str
    pad_index: int | None = None

    @property
    def missing(self) -> bool:
        return self.register is None


class Decryption(NamedTuple):
    verdict: str
    message: np.ndarray | None
    reason: str | None = None

    @property
    def accepted(self) -> bool:
        return self.verdict == ACC


def _digest(params: ProtocolParams) -> str:
    from .formats import params_digest

    return params_digest(params)


def _message_bits(m, params: ProtocolParams) -> np.ndarray:
    if isinstance(m, (int, np.integer)):
        return int_to_bits(int(m), params.n)
    return as_bits(m, params.n)


# --------------------------------------------------------------------------
# Classical halves


def masked_tag(m, key: KeyMaterial, params: ProtocolParams) -> np.ndarray:
    """``y = tag(m) xor e`` (``n + s`` bits)."""
    tagged = append_tag(_message_bits(m, params), key.k, params.field).to_bits()
    return tagged ^ key.e


def encode_string(m, key: KeyMaterial, params: ProtocolParams, rng=None, zpad=None) -> np.ndarray:
    """Alice's classical string ``z``; the ``N - K'`` private bits come from
    ``zpad`` when given, otherwise from ``rng``."""
    key.check(params)
    y = masked_tag(m, key, params)
    pair = params.pair
    if zpad is None:
        if rng is None:
            raise ParameterError("either rng or zpad is required")
        return pair.sample_coset(key.c1, y, rng)
    zpad = as_bits(zpad, params.N - params.K2)
    z = pair.representative(key.c1, y)
    return z ^ gf2.matvec(pair.c2_perp.T, zpad) if zpad.size else z


def decode_string(v, key: KeyMaterial, params: ProtocolParams) -> Decryption:
    """Bob's classical steps on a measured string ``v``."""
    v = as_bits(v, params.N)
    pair = params.pair
    corrected = pair.c1.decode(v, key.c1)
    tagged = pair.coset_label(corrected) ^ key.e
    tm = TaggedMessage.from_bits(tagged, params.field)
    if verify_tag(tm, key.k):
        return Decryption(ACC, tm.message_bits())
    return Decryption(REJ, None, "tag")


# --------------------------------------------------------------------------
# Quantum pipelines


def encrypt(m, key: KeyMaterial, params: ProtocolParams, rng, mode: str | None = None
            ) -> TransmissionDescriptor:
    """Encrypt the ``n``-bit message ``m`` into ``N`` qubits."""
    z = encode_string(m, key, params, rng)
    return TransmissionDescriptor(prepare(z, key.b, mode), _digest(params))


def decrypt(tx: TransmissionDescriptor | None, key: KeyMaterial, params: ProtocolParams,
            rng) -> Decryption:
    """Measure in the key's bases and run the classical decoder.

    A blocked transmission yields ``REJ`` with reason ``"missing"``.
    """
    key.check(params)
    if tx is None or tx.missing:
        return Decryption(REJ, None, "missing")
    if tx.register.n_qubits != params.N:
        raise ParameterError(f"transmission has {tx.register.n_qubits} qubits, expected {params.N}")
    measured, _ = measure_in_bases(tx.register, key.b, rng)
    return decode_string(measured, key, params)


def encrypt_reusable(m, schedule: ReusableKeySchedule, params: ProtocolParams, rng,
                     index: int | None = None, mode: str | None = None) -> TransmissionDescriptor:
    """Encrypt with reusable ``(k, b)`` and a fresh pad ``e'`` on ``z``.

    The coset is chosen with syndrome 0 and label ``tag(m)``; sending
    ``z xor e'`` is the same as using ``c1 = H1 e'`` and masking the label
    with ``L e'``.
    """
    if index is None:
        index = schedule.next_unused()
    if schedule.b.size != params.N:
        raise ParameterError("schedule bases do not match N")
    pad = schedule.consume(index)
    tagged = append_tag(_message_bits(m, params), schedule.k, params.field).to_bits()
    zero = np.zeros(params.N - params.K, dtype=np.uint8)
    z = params.pair.sample_coset(zero, tagged, rng) ^ pad
    return TransmissionDescriptor(prepare(z, schedule.b, mode), _digest(params), index)


def decrypt_reusable(tx: TransmissionDescriptor | None, schedule: ReusableKeySchedule,
                     params: ProtocolParams, rng) -> Decryption:
    if tx is None or tx.missing:
        return Decryption(REJ, None, "missing")
    if tx.pad_index is None or not 0 <= tx.pad_index < len(schedule.pads):
        raise UsageError("transmission does not name a pad of this schedule")
    pad = schedule.pads[tx.pad_index]
    measured, _ = measure_in_bases(tx.register, schedule.b, rng)
    v = measured ^ pad
    pair = params.pair
    corrected = pair.c1.decode(v, np.zeros(params.N - params.K, dtype=np.uint8))
    tm = TaggedMessage.from_bits(pair.coset_label(corrected), params.field)
    if verify_tag(tm, schedule.k):
        return Decryption(ACC, tm.message_bits())
    return Decryption(REJ, None, "tag")


# --------------------------------------------------------------------------
# Coherent CSS variant


def _coset_shifts(params: ProtocolParams) -> np.ndarray:
    """Integers ``w(a)`` for every combination ``a`` of the ``C2^perp`` generators."""
    return gf2.pack_rows(gf2.span(params.pair.c2_perp)) if params.N - params.K2 else \
        np.zeros(1, dtype=np.int64)


def coherent_codeword(c1, y, c2, params: ProtocolParams) -> np.ndarray:
    """``2^{-(N-K')/2} sum_a (-1)^{c2.a} |z0 xor w(a)>`` before any Hadamards."""
    N = params.N
    if N > EXACT_MAX_QUBITS:
        raise CapabilityError(f"coherent encoding needs N <= {EXACT_MAX_QUBITS}")
    c2 = as_bits(c2, N - params.K2)
    z0 = bits_to_int(params.pair.representative(c1, y))
    shifts = _coset_shifts(params)
    a = gf2.all_vectors(N - params.K2)
    signs = 1 - 2 * (gf2.matvec(a, c2) if c2.size else np.zeros(1, dtype=np.uint8)).astype(float)
    vec = np.zeros(1 << N, dtype=complex)
    vec[z0 ^ shifts] = signs / np.sqrt(shifts.size)
    return vec


def coherent_encode_state(phi, key: KeyMaterial, extras: CoherentKeyExtras,
                          params: ProtocolParams) -> np.ndarray:
    """Encode a message-space state ``phi`` (``2**n`` amplitudes) coherently."""
    key.check(params)
    phi = np.asarray(phi, dtype=complex)
    if phi.shape != (1 << params.n,):
        raise ParameterError(f"message state needs {1 << params.n} amplitudes")
    out = np.zeros(1 << params.N, dtype=complex)
    for m in np.nonzero(phi)[0]:
        y = masked_tag(int(m), key, params)
        out += phi[m] * coherent_codeword(key.c1, y, extras.c2, params)
    return hadamard_layer(out, key.b, params.N)


def coherent_encode(m, key: KeyMaterial, extras: CoherentKeyExtras,
                    params: ProtocolParams) -> QuantumRegister:
    """CSS encoding of a classical message, then Hadamards on the ``b`` positions."""
    phi = np.zeros(1 << params.n, dtype=complex)
    phi[bits_to_int(_message_bits(m, params))] = 1.0
    return QuantumRegister(PURE, params.N, data=coherent_encode_state(phi, key, extras, params))


@dataclass(frozen=True)
class CoherentDecoding:
    """Result of Bob's coherent decoder on a pure input.

    ``accepted[s1, s2]`` is the unnormalized message-space vector left in the
    ACC branch for syndrome outcomes ``(s1, s2)``; ``rejected_mass`` is the
    probability of the REJ flag.
    """

    accepted: np.ndarray
    rejected_mass: float

    @property
    def accept_probability(self) -> float:
        return float(np.sum(np.abs(self.accepted) ** 2))

    def bad_mass(self, psi) -> float:
        """Probability of ACC together with a message orthogonal to ``psi``."""
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        acc = self.accepted.reshape(-1, psi.size)
        overlap = np.abs(acc @ psi.conj()) ** 2
        return max(0.0, float(np.sum(np.abs(acc) ** 2) - overlap.sum()))

    def message_distribution(self) -> np.ndarray:
        """``P(ACC, m)`` for every message index."""
        return np.sum(np.abs(self.accepted.reshape(-1, self.accepted.shape[-1])) ** 2, axis=0)


def coherent_decode(vec, key: KeyMaterial, extras: CoherentKeyExtras,
                    params: ProtocolParams) -> CoherentDecoding:
    """Bob's coherent decoder, one explicit step at a time.

    Undo ``H^b``; project onto each bit syndrome ``s1`` and phase syndrome
    ``s2``; apply the coset-leader corrections ``X^{l1} Z^{l2}``; expand in
    the codewords ``psi_y``; unmask ``e``; sort into ACC (valid tag, message
    register) and REJ.
    """
    key.check(params)
    N, pair = params.N, params.pair
    v = hadamard_layer(np.asarray(vec, dtype=complex), key.b, N)
    idx = np.arange(1 << N, dtype=np.int64)
    syn1 = pair.c1.syndrome_int(idx)
    shifts = _coset_shifts(params)
    r1, r2 = N - params.K, N - params.K2
    a_vecs = gf2.all_vectors(r2)
    table1 = pair.c1.decode_table
    table2 = pair.c2.decode_table
    if table1 is None or table2 is None:
        raise CapabilityError("coherent decoding needs decode tables for both codes")
    c1_int, c2_int = bits_to_int(key.c1), bits_to_int(extras.c2)
    ns = params.n + params.s
    codewords = [coherent_codeword(key.c1, int_to_bits(y, ns), extras.c2, params)
                 for y in range(1 << ns)]
    n_msgs = 1 << params.n
    accepted = np.zeros((1 << r1, 1 << r2, n_msgs), dtype=complex)
    total = 0.0
    for s1 in range(1 << r1):
        masked = np.where(syn1 == s1, v, 0)
        for s2 in range(1 << r2):
            s2_bits = int_to_bits(s2, r2)
            signs = 1 - 2 * (gf2.matvec(a_vecs, s2_bits) if r2 else np.zeros(1, np.uint8)).astype(np.int64)
            proj = sum(sg * masked[idx ^ w] for sg, w in zip(signs, shifts)) / shifts.size
            l1 = int(table1[s1 ^ c1_int])
            l2 = int(table2[s2 ^ c2_int])
            zsign = 1 - 2 * np.array([bin(int(x) & l2).count("1") & 1 for x in idx])
            corrected = zsign * proj[idx ^ l1]
            amps = np.array([np.vdot(cw, corrected) for cw in codewords])
            total += float(np.sum(np.abs(amps) ** 2))
            for m in range(n_msgs):
                tagged = append_tag(int_to_bits(m, params.n), key.k, params.field).to_bits()
                accepted[s1, s2, m] = amps[bits_to_int(tagged ^ key.e)]
    acc_mass = float(np.sum(np.abs(accepted) ** 2))
    return CoherentDecoding(accepted, max(0.0, total - acc_mass))


# --------------------------------------------------------------------------
# Key accounting


@dataclass(frozen=True)
class KeyAccounting:
    k: int
    e: int
    c1: int
    b: int
    core: int
    total: int
    reusable: int
    one_time: int
    private_randomness: int

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def key_accounting(params: ProtocolParams) -> KeyAccounting:
    """Bit counts of every key part.

    ``core = n + 2s + (N - K)`` counts ``k``, ``e`` and ``c1``; ``total``
    adds the basis string. The reusable variant keeps ``s + N`` bits and
    spends ``N`` per message. ``private_randomness`` is Alice's ``N - K'``
    unshared bits.
    """
    n, s, N, K, K2 = params.n, params.s, params.N, params.K, params.K2
    core = n + 2 * s + (N - K)
    return KeyAccounting(k=s, e=n + s, c1=N - K, b=N, core=core,
                         total=core + N, reusable=s + N, one_time=N,
                         private_randomness=N - K2)
