"""Quantum registers: an exact engine and a per-qubit sampled engine.

The exact engine stores amplitudes (``2**N`` complex) or a density matrix and
is the verification oracle for ``N <= 10``. The sampled engine stores, per
qubit, a classical bit and the basis it is encoded in (Z or X); it supports
only single-qubit preparations, Pauli errors and basis measurements, which is
everything a prepare-and-measure run needs at large ``N``.

Qubit 0 is the most significant bit of a computational-basis index. Basis
flag 0 means Z (``|0>, |1>``) and flag 1 means X (``|+>, |->``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bits import as_bits, bits_to_int, int_to_bits
from .errors import CapabilityError, ParameterError

EXACT_MAX_QUBITS = 10

PURE = "exact-pure"
DENSITY = "exact-density"
SAMPLED = "sampled"

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
PAULIS = {"I": I2, "X": X, "Y": Y, "Z": Z}


@dataclass(frozen=True)
class QuantumRegister:
    """State of ``n_qubits`` simulated qubits.

    Exactly one representation is populated: ``data`` (amplitudes or a density
    matrix) for the exact modes, ``bits``/``bases`` for the sampled mode.
    ``phase`` is the sampled register's global phase as a power of ``i``.
    """

    mode: str
    n_qubits: int
    data: np.ndarray | None = None
    bits: np.ndarray | None = None
    bases: np.ndarray | None = None
    phase: int = 0

    def __post_init__(self):
        if self.mode in (PURE, DENSITY):
            if self.n_qubits > EXACT_MAX_QUBITS:
                raise CapabilityError(
                    f"exact engine is limited to {EXACT_MAX_QUBITS} qubits")
            dim = 1 << self.n_qubits
            want = (dim,) if self.mode == PURE else (dim, dim)
            if self.data is None or self.data.shape != want:
                raise ParameterError(f"{self.mode} data must have shape {want}")
        elif self.mode == SAMPLED:
            if self.bits is None or self.bases is None \
                    or len(self.bits) != self.n_qubits or len(self.bases) != self.n_qubits:
                raise ParameterError("sampled registers need one bit and basis per qubit")
        else:
            raise ParameterError(f"unknown register mode {self.mode!r}")

    @property
    def is_exact(self) -> bool:
        return self.mode != SAMPLED

    def density(self) -> np.ndarray:
        return to_density(self)

    def check(self, atol: float = 1e-10) -> None:
        """Validate normalization (and Hermiticity/positivity for densities)."""
        if self.mode == PURE:
            norm = np.vdot(self.data, self.data).real
            if abs(norm - 1) > atol:
                raise ParameterError(f"state norm {norm} differs from 1")
        elif self.mode == DENSITY:
            check_density(self.data, atol)


@dataclass(frozen=True)
class PauliChannel:
    """Independent per-qubit Pauli errors with probabilities ``px, py, pz``."""

    px: float = 0.0
    py: float = 0.0
    pz: float = 0.0

    def __post_init__(self):
        probs = (self.px, self.py, self.pz)
        if min(probs) < 0 or sum(probs) > 1 + 1e-12:
            raise ParameterError("Pauli probabilities must be nonnegative and sum to <= 1")

    @property
    def bit_error_rate(self) -> float:
        return self.px + self.py

    @property
    def phase_error_rate(self) -> float:
        return self.py + self.pz

    @classmethod
    def depolarizing(cls, p: float) -> "PauliChannel":
        return cls(p / 3, p / 3, p / 3)

    @classmethod
    def symmetric(cls, flip: float) -> "PauliChannel":
        """Bit-flip rate ``flip`` in both frames, no Y errors."""
        return cls(flip, 0.0, flip)


# --------------------------------------------------------------------------
# Pauli strings


def parse_pauli(pauli) -> tuple[np.ndarray, np.ndarray]:
    """Return the (X-part, Z-part) bit vectors of a Pauli string like ``"XIZY"``."""
    if isinstance(pauli, tuple) and len(pauli) == 2:
        return as_bits(pauli[0]), as_bits(pauli[1])
    text = str(pauli).upper()
    if any(c not in "IXYZ" for c in text):
        raise ParameterError(f"not a Pauli string: {pauli!r}")
    xs = np.array([c in "XY" for c in text], dtype=np.uint8)
    zs = np.array([c in "ZY" for c in text], dtype=np.uint8)
    return xs, zs


def pauli_string(xs, zs) -> str:
    return "".join("IXZY"[int(x) + 2 * int(z)] for x, z in zip(xs, zs))


def pauli_action(pauli, n_qubits: int) -> tuple[np.ndarray, np.ndarray]:
    """``P|v> = phase[v] |target[v]>`` for every basis index ``v``."""
    xs, zs = parse_pauli(pauli)
    if xs.size != n_qubits:
        raise ParameterError(f"Pauli string has length {xs.size}, expected {n_qubits}")
    idx = np.arange(1 << n_qubits, dtype=np.int64)
    target = idx ^ bits_to_int(xs)
    zmask = bits_to_int(zs)
    parity = np.array([bin(int(v) & zmask).count("1") & 1 for v in idx], dtype=np.int64)
    # Y = i X Z, so the string carries i^(#Y) in front of X^x Z^z.
    ny = int(np.count_nonzero(xs & zs))
    phase = (1j ** ny) * (1 - 2 * parity)
    return target, phase


def pauli_matrix(pauli, n_qubits: int | None = None) -> np.ndarray:
    xs, zs = parse_pauli(pauli)
    n = xs.size if n_qubits is None else n_qubits
    target, phase = pauli_action((xs, zs), n)
    m = np.zeros((1 << n, 1 << n), dtype=complex)
    m[target, np.arange(1 << n)] = phase
    return m


def apply_pauli_vectors(vecs: np.ndarray, pauli, n_qubits: int) -> np.ndarray:
    """Apply a Pauli to (a batch of) state vectors along the last axis."""
    target, phase = pauli_action(pauli, n_qubits)
    out = np.empty_like(vecs, dtype=complex)
    out[..., target] = vecs * phase
    return out


# --------------------------------------------------------------------------
# Low-level exact helpers (batched over leading axes)


def apply_1q(vecs: np.ndarray, U: np.ndarray, qubit: int, n_qubits: int) -> np.ndarray:
    """Apply a single-qubit operator to state vectors (last axis)."""
    lead = vecs.shape[:-1]
    v = vecs.reshape(lead + (1 << qubit, 2, 1 << (n_qubits - qubit - 1)))
    out = np.einsum("ab,...ibj->...iaj", U, v)
    return out.reshape(lead + (1 << n_qubits,))


def apply_1q_density(rho: np.ndarray, U: np.ndarray, qubit: int, n_qubits: int) -> np.ndarray:
    """``U rho U^dagger`` on one qubit of (a batch of) density matrices."""
    left = apply_1q(np.swapaxes(rho, -1, -2), U, qubit, n_qubits)
    left = np.swapaxes(left, -1, -2)
    return np.conj(apply_1q(np.conj(left), U, qubit, n_qubits))


def hadamard_layer(vecs: np.ndarray, b, n_qubits: int) -> np.ndarray:
    """Apply ``H`` on every qubit ``i`` with ``b[i] = 1``.

    ``b`` is a bit vector, or a ``(batch, n_qubits)`` array giving a different
    pattern for each vector of the batch.
    """
    b = np.asarray(b, dtype=bool)
    out = np.asarray(vecs, dtype=complex)
    for q in range(n_qubits):
        mask = b[..., q]
        if not np.any(mask):
            continue
        flipped = apply_1q(out, H, q, n_qubits)
        if mask.ndim == 0:
            out = flipped
        else:
            out = np.where(mask[..., None], flipped, out)
    return out


def basis_state(index: int, n_qubits: int) -> np.ndarray:
    v = np.zeros(1 << n_qubits, dtype=complex)
    v[index] = 1.0
    return v


def product_state(z, b) -> np.ndarray:
    """Amplitudes of ``H^b |z>``."""
    z = as_bits(z)
    b = as_bits(b, z.size)
    n = z.size
    return hadamard_layer(basis_state(bits_to_int(z), n), b, n)


def hermitize(rho: np.ndarray) -> np.ndarray:
    return (rho + np.conj(np.swapaxes(rho, -1, -2))) / 2


def check_density(rho: np.ndarray, atol: float = 1e-10) -> None:
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ParameterError("density matrix must be square")
    tr = np.trace(rho).real
    if abs(tr - 1) > atol:
        raise ParameterError(f"density matrix trace {tr} differs from 1")
    if np.abs(rho - rho.conj().T).max() > atol:
        raise ParameterError("density matrix is not Hermitian")
    if np.linalg.eigvalsh(hermitize(rho)).min() < -1e-9:
        raise ParameterError("density matrix has a negative eigenvalue")


def _clamped(rho: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(hermitize(rho))
    if w.min() >= 0:
        return hermitize(rho)
    w = np.where(w < 0, 0.0, w)
    return (v * w) @ v.conj().T


# --------------------------------------------------------------------------
# Register operations


def prepare(z, b, mode: str | None = None) -> QuantumRegister:
    """Product state with qubit ``i`` holding ``z[i]`` in basis ``b[i]``."""
    z = as_bits(z)
    b = as_bits(b)
    if z.size != b.size:
        raise ParameterError("z and b must have the same length")
    n = z.size
    if mode is None:
        mode = PURE if n <= EXACT_MAX_QUBITS else SAMPLED
    if mode == SAMPLED:
        return QuantumRegister(SAMPLED, n, bits=z.copy(), bases=b.copy())
    amps = product_state(z, b)
    if mode == PURE:
        return QuantumRegister(PURE, n, data=amps)
    if mode == DENSITY:
        return QuantumRegister(DENSITY, n, data=np.outer(amps, amps.conj()))
    raise ParameterError(f"unknown mode {mode!r}")


def to_density(reg: QuantumRegister) -> np.ndarray:
    if reg.mode == PURE:
        return np.outer(reg.data, reg.data.conj())
    if reg.mode == DENSITY:
        return reg.data
    if reg.n_qubits > EXACT_MAX_QUBITS:
        raise CapabilityError("sampled register too large to expand")
    amps = product_state(reg.bits, reg.bases) * (1j ** reg.phase)
    return np.outer(amps, amps.conj())


def as_density_register(reg: QuantumRegister) -> QuantumRegister:
    return reg if reg.mode == DENSITY else QuantumRegister(DENSITY, reg.n_qubits,
                                                           data=to_density(reg))


def outcome_probabilities(reg: QuantumRegister, b) -> np.ndarray:
    """Born probabilities of every outcome when measuring in bases ``b``."""
    b = as_bits(b, reg.n_qubits)
    n = reg.n_qubits
    if reg.mode == PURE:
        amps = hadamard_layer(reg.data, b, n)
        probs = np.abs(amps) ** 2
    elif reg.mode == DENSITY:
        rho = reg.data
        for q in np.nonzero(b)[0]:
            rho = apply_1q_density(rho, H, int(q), n)
        probs = np.real(np.diag(rho)).copy()
    else:
        raise CapabilityError("outcome tables need an exact register")
    probs[probs < 0] = 0.0
    return probs / probs.sum()


def measure_in_bases(reg: QuantumRegister, b, rng) -> tuple[np.ndarray, QuantumRegister]:
    """Measure qubit ``i`` in Z (``b[i] = 0``) or X (``b[i] = 1``).

    Returns the outcome bits and the post-measurement register, which is the
    product state of the outcomes in the measured bases.
    """
    b = as_bits(b, reg.n_qubits)
    if reg.mode == SAMPLED:
        same = reg.bases == b
        random_bits = rng.integers(0, 2, size=reg.n_qubits, dtype=np.uint8)
        out = np.where(same, reg.bits, random_bits).astype(np.uint8)
        return out, QuantumRegister(SAMPLED, reg.n_qubits, bits=out, bases=b.copy())
    probs = outcome_probabilities(reg, b)
    idx = int(rng.choice(probs.size, p=probs))
    out = int_to_bits(idx, reg.n_qubits)
    post = prepare(out, b, mode=PURE)
    return out, post


def measure_qubits(reg: QuantumRegister, qubits: Sequence[int], bases, rng):
    """Projectively measure a subset of qubits, leaving the rest untouched."""
    qubits = [int(q) for q in qubits]
    bases = as_bits(bases, len(qubits))
    if reg.mode == SAMPLED:
        bits = reg.bits.copy()
        rb = reg.bases.copy()
        out = np.zeros(len(qubits), dtype=np.uint8)
        for j, q in enumerate(qubits):
            out[j] = bits[q] if rb[q] == bases[j] else rng.integers(0, 2)
            bits[q], rb[q] = out[j], bases[j]
        return out, QuantumRegister(SAMPLED, reg.n_qubits, bits=bits, bases=rb, phase=reg.phase)
    n = reg.n_qubits
    rho = to_density(reg)
    out = np.zeros(len(qubits), dtype=np.uint8)
    for j, q in enumerate(qubits):
        if bases[j]:
            rho = apply_1q_density(rho, H, q, n)
        p1 = _prob_one(rho, q, n)
        bit = int(rng.random() < p1)
        proj = np.diag([1.0 - bit, float(bit)]).astype(complex)
        rho = apply_1q_density(rho, proj, q, n)
        rho = rho / np.trace(rho).real
        if bases[j]:
            rho = apply_1q_density(rho, H, q, n)
        out[j] = bit
    return out, QuantumRegister(DENSITY, n, data=hermitize(rho))


def _prob_one(rho: np.ndarray, qubit: int, n_qubits: int) -> float:
    diag = np.real(np.diag(rho)).reshape(1 << qubit, 2, 1 << (n_qubits - qubit - 1))
    return float(diag[:, 1, :].sum())


def apply_pauli(reg: QuantumRegister, pauli) -> QuantumRegister:
    xs, zs = parse_pauli(pauli)
    if xs.size != reg.n_qubits:
        raise ParameterError("Pauli string length differs from the register size")
    if reg.mode == SAMPLED:
        bits, phase = reg.bits.copy(), reg.phase
        for q in np.nonzero(xs | zs)[0]:
            bits[q], dphase = _sampled_pauli(int(xs[q]), int(zs[q]), int(reg.bases[q]), int(bits[q]))
            phase += dphase
        return QuantumRegister(SAMPLED, reg.n_qubits, bits=bits, bases=reg.bases.copy(),
                               phase=phase % 4)
    P = pauli_matrix((xs, zs))
    if reg.mode == PURE:
        return QuantumRegister(PURE, reg.n_qubits, data=P @ reg.data)
    return QuantumRegister(DENSITY, reg.n_qubits, data=hermitize(P @ reg.data @ P.conj().T))


def _sampled_pauli(x: int, z: int, basis: int, bit: int) -> tuple[int, int]:
    """New bit and phase increment (power of i) of one eigenstate under X^x Z^z."""
    if basis == 0:
        if x and z:      # Y|v> = i (-1)^v |v+1>
            return bit ^ 1, 1 + 2 * bit
        if x:
            return bit ^ 1, 0
        return bit, 2 * bit
    if x and z:          # Y|+> = -i|->, Y|-> = i|+>
        return bit ^ 1, 3 + 2 * bit
    if z:
        return bit ^ 1, 0
    return bit, 2 * bit


def apply_pauli_channel(reg: QuantumRegister, ch: PauliChannel, rng) -> QuantumRegister:
    """Independent Pauli noise on every qubit.

    The sampled engine draws one error per qubit; the exact engine applies the
    mixing superoperator (pure registers become density registers).
    """
    n = reg.n_qubits
    if reg.mode == SAMPLED:
        u = rng.random(n)
        kind = np.select([u < ch.px, u < ch.px + ch.py, u < ch.px + ch.py + ch.pz],
                         [1, 2, 3], default=0)
        if not kind.any():
            return reg
        text = "".join("IXYZ"[k] for k in kind)
        return apply_pauli(reg, text)
    if ch.px == ch.py == ch.pz == 0:
        return reg
    rho = to_density(reg)
    p0 = 1.0 - ch.px - ch.py - ch.pz
    for q in range(n):
        acc = p0 * rho
        for p, P in ((ch.px, X), (ch.py, Y), (ch.pz, Z)):
            if p:
                acc = acc + p * apply_1q_density(rho, P, q, n)
        rho = acc
    return QuantumRegister(DENSITY, n, data=hermitize(rho))


# --------------------------------------------------------------------------
# Distances and reductions


def trace_norm(a: np.ndarray) -> float | np.ndarray:
    """Sum of absolute eigenvalues of Hermitian matrices (batched)."""
    return np.abs(np.linalg.eigvalsh(hermitize(np.asarray(a)))).sum(axis=-1)


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """``D(rho, sigma) = 1/2 Tr|rho - sigma|`` for density matrices."""
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if rho.shape != sigma.shape:
        raise ParameterError(f"shape mismatch {rho.shape} vs {sigma.shape}")
    check_density(rho)
    check_density(sigma)
    d = 0.5 * float(trace_norm(_clamped(rho) - _clamped(sigma)))
    return min(max(d, 0.0), 1.0)


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """``|<a|b>|`` of two normalized pure states."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ParameterError(f"shape mismatch {a.shape} vs {b.shape}")
    for v in (a, b):
        if abs(np.vdot(v, v).real - 1) > 1e-10:
            raise ParameterError("fidelity expects normalized states")
    return min(1.0, float(abs(np.vdot(a, b))))


def partial_trace(rho: np.ndarray, dims: Sequence[int], keep) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    ``dims`` gives the subsystem dimensions in tensor order; ``keep`` is an
    index or a sequence of indices (kept in ascending order).
    """
    rho = np.asarray(rho)
    dims = [int(d) for d in dims]
    keep = sorted([keep] if np.isscalar(keep) else [int(k) for k in keep])
    total = int(np.prod(dims))
    if rho.shape != (total, total):
        raise ParameterError(f"density of shape {rho.shape} does not match dims {dims}")
    if any(k < 0 or k >= len(dims) for k in keep):
        raise ParameterError("subsystem index out of range")
    traced = [i for i in range(len(dims)) if i not in keep]
    m = len(dims)
    t = rho.reshape(dims + dims)
    t = t.transpose(keep + traced + [m + i for i in keep] + [m + i for i in traced])
    dk = int(np.prod([dims[i] for i in keep])) if keep else 1
    dt = int(np.prod([dims[i] for i in traced])) if traced else 1
    return np.einsum("ajbj->ab", t.reshape(dk, dt, dk, dt))


ACC, REJ = 0, 1


def bad_subspace_mass(out: np.ndarray, psi: np.ndarray) -> float:
    """``Tr[Pi out]`` with ``Pi`` projecting onto ``|ACC> (x) psi^perp``.

    ``out`` lives on flag (x) message space with the flag as the leading
    qubit: index block 0 is ACC, block 1 is REJ.
    """
    out = np.asarray(out)
    psi = np.asarray(psi, dtype=complex)
    d = psi.size
    if out.shape != (2 * d, 2 * d):
        raise ParameterError(f"output of shape {out.shape} does not match 2 x {d}")
    acc = out[:d, :d]
    mass = np.trace(acc).real - np.real(np.vdot(psi, acc @ psi)) / np.vdot(psi, psi).real
    return max(0.0, float(mass))
