"""Eavesdropper models.

Every attack can act on a batch of pure state vectors and return its branches:
a list of ``(label, array)`` pairs where ``label`` is Eve's classical record
(``None`` when she learns nothing classical) and ``array`` has shape
``(..., d_E, 2**N)``: Eve's quantum subsystem on the second-to-last axis,
Bob's qubits on the last. Summing ``|array|**2`` over labels and both axes
gives the input norm. This is the form used by the exact analysis engine.

:func:`apply_attack` runs one trajectory on a single transmission (both
engines); measurement outcomes are drawn from ``rng``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .bits import all_vectors
from .errors import CapabilityError, ParameterError
from .protocol import TransmissionDescriptor
from .qsim import (DENSITY, EXACT_MAX_QUBITS, PURE, SAMPLED, QuantumRegister,
                   apply_pauli, apply_pauli_vectors, hadamard_layer, hermitize,
                   measure_qubits, parse_pauli, pauli_string)

EXACT = "exact"
BOTH = "both"


class Attack:
    """Base class. Subclasses set ``name`` and ``engine_support``."""

    name = "attack"
    engine_support = BOTH
    blocks = False

    def branches(self, vecs: np.ndarray, n_qubits: int):
        raise NotImplementedError

    def kraus_branches(self, n_qubits: int):
        """Explicit ``(label, K)`` pairs with ``K`` of shape ``(d_E * 2**N, 2**N)``."""
        if self.blocks:
            return None
        eye = np.eye(1 << n_qubits, dtype=complex)
        out = []
        for label, arr in self.branches(eye, n_qubits):
            # arr[x, e, y] = <e, y| K |x>
            out.append((label, arr.reshape(1 << n_qubits, -1).T.copy()))
        return out

    def eve_dim(self, n_qubits: int) -> int:
        return 1

    @property
    def spec(self) -> str:
        return self.name

    def __repr__(self):
        return f"{type(self).__name__}({self.spec})"


@dataclass(frozen=True, repr=False)
class Identity(Attack):
    name = "identity"

    def branches(self, vecs, n_qubits):
        return [(None, np.asarray(vecs, dtype=complex)[..., None, :])]


@dataclass(frozen=True, repr=False)
class Steal(Attack):
    """Eve keeps every qubit; Bob receives nothing."""

    name = "steal"
    blocks = True

    def branches(self, vecs, n_qubits):
        return []


def _project(vecs, qubits, outcome, n_qubits):
    idx = np.arange(1 << n_qubits, dtype=np.int64)
    keep = np.ones(idx.size, dtype=bool)
    for q, o in zip(qubits, outcome):
        keep &= ((idx >> (n_qubits - 1 - q)) & 1) == o
    return np.where(keep, vecs, 0)


def _measure_branches(vecs, n_qubits, qubits, bases_choices):
    """Measure ``qubits`` in each basis pattern (equiprobable choice by Eve)."""
    vecs = np.asarray(vecs, dtype=complex)
    weight = 1.0 / np.sqrt(len(bases_choices))
    out = []
    for beta in bases_choices:
        hmask = np.zeros(n_qubits, dtype=np.uint8)
        hmask[list(qubits)] = beta
        rotated = hadamard_layer(vecs, hmask, n_qubits)
        for o in product((0, 1), repeat=len(qubits)):
            proj = _project(rotated, qubits, o, n_qubits)
            back = hadamard_layer(proj, hmask, n_qubits) * weight
            label = (tuple(int(x) for x in beta), o) if len(bases_choices) > 1 else o
            out.append((label, back[..., None, :]))
    return out


@dataclass(frozen=True, repr=False)
class InterceptResendZ(Attack):
    """Measure every qubit in Z and resend the outcomes in Z."""

    name = "ir-z"

    def branches(self, vecs, n_qubits):
        return _measure_branches(vecs, n_qubits, range(n_qubits), [(0,) * n_qubits])


@dataclass(frozen=True, repr=False)
class InterceptResendRandom(Attack):
    """Measure each qubit in a basis of Eve's own random choice and resend."""

    name = "ir-rand"

    def branches(self, vecs, n_qubits):
        choices = [tuple(int(x) for x in row) for row in all_vectors(n_qubits)]
        return _measure_branches(vecs, n_qubits, range(n_qubits), choices)


@dataclass(frozen=True, repr=False)
class PartialMeasure(Attack):
    """Intercept-resend on the first ``t`` qubits only.

    ``basis_rule`` is ``"z"``, ``"x"`` or ``"random"`` (Eve picks uniformly).
    """

    t: int = 1
    basis_rule: str = "z"
    name = "partial"

    def __post_init__(self):
        if self.t < 0:
            raise ParameterError("t must be nonnegative")
        if self.basis_rule not in ("z", "x", "random"):
            raise ParameterError(f"unknown basis rule {self.basis_rule!r}")

    @property
    def spec(self) -> str:
        return f"partial:{self.t}" + ("" if self.basis_rule == "z" else f":{self.basis_rule}")

    def _choices(self):
        if self.basis_rule == "random":
            return [tuple(int(x) for x in row) for row in all_vectors(self.t)]
        return [(int(self.basis_rule == "x"),) * self.t]

    def branches(self, vecs, n_qubits):
        if self.t > n_qubits:
            raise ParameterError(f"cannot measure {self.t} of {n_qubits} qubits")
        return _measure_branches(vecs, n_qubits, range(self.t), self._choices())


@dataclass(frozen=True, repr=False)
class PauliTamper(Attack):
    """Apply a fixed Pauli string (``"IXZY..."``, one letter per qubit)."""

    pauli: str = ""
    name = "pauli"

    def __post_init__(self):
        xs, zs = parse_pauli(self.pauli)
        object.__setattr__(self, "pauli", pauli_string(xs, zs))

    @property
    def spec(self) -> str:
        return f"pauli:{self.pauli}"

    def branches(self, vecs, n_qubits):
        if len(self.pauli) != n_qubits:
            raise ParameterError(f"Pauli string has length {len(self.pauli)}, expected {n_qubits}")
        return [(None, apply_pauli_vectors(np.asarray(vecs, dtype=complex),
                                           self.pauli, n_qubits)[..., None, :])]


@dataclass(frozen=True, repr=False)
class AncillaCopy(Attack):
    """CNOT every qubit (Z frame) into a fresh ancilla that Eve keeps."""

    name = "copy"
    engine_support = EXACT

    def eve_dim(self, n_qubits):
        return 1 << n_qubits

    def branches(self, vecs, n_qubits):
        vecs = np.asarray(vecs, dtype=complex)
        d = 1 << n_qubits
        out = np.zeros(vecs.shape[:-1] + (d, d), dtype=complex)
        diag = np.arange(d)
        out[..., diag, diag] = vecs
        return [(None, out)]


@dataclass(frozen=True, repr=False, eq=False)
class KrausAttack(Attack):
    """User-supplied instrument: operators ``K_j`` of shape ``(d_E * 2**N, 2**N)``.

    Eve's output factor comes first, so ``K_j`` maps ``|x>`` to a vector
    indexed by ``e * 2**N + y``. Branch ``j`` carries classical label ``j``.
    Completeness (``sum K^dagger K = I``) is checked.
    """

    ops: tuple = field(default_factory=tuple)
    eve_dimension: int = 1
    label_name: str = "kraus"
    name = "kraus"
    engine_support = EXACT

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=complex) for k in self.ops)
        if not ops:
            raise ParameterError("a Kraus attack needs at least one operator")
        d_in = ops[0].shape[1]
        for k in ops:
            if k.shape != (self.eve_dimension * d_in, d_in):
                raise ParameterError("Kraus operators must map d_B to d_E * d_B")
        total = sum(k.conj().T @ k for k in ops)
        if not np.allclose(total, np.eye(d_in), atol=1e-9):
            raise ParameterError("Kraus operators are not trace preserving")
        object.__setattr__(self, "ops", ops)

    @property
    def spec(self) -> str:
        return self.label_name

    def eve_dim(self, n_qubits):
        return self.eve_dimension

    def branches(self, vecs, n_qubits):
        vecs = np.asarray(vecs, dtype=complex)
        d = 1 << n_qubits
        if self.ops[0].shape[1] != d:
            raise ParameterError("Kraus operators do not match the qubit count")
        return [(j, (vecs @ k.T).reshape(vecs.shape[:-1] + (self.eve_dimension, d)))
                for j, k in enumerate(self.ops)]


def random_kraus_attack(n_qubits: int, seed: int, eve_dim: int = 2, n_ops: int = 2) -> KrausAttack:
    """A random instrument from the QR factor of a complex Gaussian matrix."""
    rng = np.random.default_rng(seed)
    d = 1 << n_qubits
    rows = n_ops * eve_dim * d
    g = rng.normal(size=(rows, d)) + 1j * rng.normal(size=(rows, d))
    q, r = np.linalg.qr(g)
    q = q * (np.diag(r) / np.abs(np.diag(r)))  # fix the column phases
    ops = tuple(q[j * eve_dim * d:(j + 1) * eve_dim * d] for j in range(n_ops))
    return KrausAttack(ops, eve_dim, label_name=f"kraus:{seed}")


def attack_battery(n_qubits: int, n_random: int = 20) -> list[Attack]:
    """Every named variant plus ``n_random`` seeded random instruments."""
    battery = [Identity(), Steal(), InterceptResendZ(), InterceptResendRandom(),
               PartialMeasure(1, "z"), PartialMeasure(2, "random"),
               PauliTamper("X" + "I" * (n_qubits - 1)),
               PauliTamper("Z" * n_qubits), PauliTamper("Y" + "I" * (n_qubits - 1)),
               AncillaCopy()]
    battery += [random_kraus_attack(n_qubits, seed) for seed in range(n_random)]
    return battery


def parse_attack(text: str) -> Attack:
    """CLI syntax: ``identity|steal|ir-z|ir-rand|partial:t[:rule]|pauli:<string>|copy``."""
    head, _, rest = text.strip().partition(":")
    head = head.lower()
    simple = {"identity": Identity, "steal": Steal, "ir-z": InterceptResendZ,
              "ir-rand": InterceptResendRandom, "copy": AncillaCopy}
    if head in simple and not rest:
        return simple[head]()
    if head == "partial" and rest:
        t, _, rule = rest.partition(":")
        if not t.isdigit():
            raise ParameterError(f"partial attack needs a qubit count, got {t!r}")
        return PartialMeasure(int(t), rule or "z")
    if head == "pauli" and rest:
        return PauliTamper(rest)
    raise ParameterError(f"unknown attack {text!r}")


# --------------------------------------------------------------------------
# Single trajectories


@dataclass(frozen=True)
class AttackOutcome:
    """What reaches Bob and what Eve keeps.

    ``eve_bits``/``eve_bases`` hold measurement records; ``eve_state`` is the
    density matrix of Eve's quantum subsystem and ``joint`` the Eve-then-Bob
    joint density matrix, both only for the exact engine. ``label`` is the
    classical branch label of an instrument.
    """

    to_bob: TransmissionDescriptor | None
    eve_bits: np.ndarray | None = None
    eve_bases: np.ndarray | None = None
    eve_state: np.ndarray | None = None
    joint: np.ndarray | None = None
    label: object = None
    stolen: QuantumRegister | None = None


def _forward(tx, reg):
    return TransmissionDescriptor(reg, tx.params_digest, tx.pad_index)


def apply_attack(attack: Attack, tx: TransmissionDescriptor, rng) -> AttackOutcome:
    """Run ``attack`` on one transmission."""
    if tx is None or tx.missing:
        return AttackOutcome(None)
    reg = tx.register
    n = reg.n_qubits
    if reg.mode == SAMPLED and attack.engine_support == EXACT:
        raise CapabilityError(f"{attack.spec} needs the exact engine")
    if isinstance(attack, Identity):
        return AttackOutcome(tx)
    if isinstance(attack, Steal):
        return AttackOutcome(None, stolen=reg)
    if isinstance(attack, PauliTamper):
        if len(attack.pauli) != n:
            raise ParameterError("Pauli string length differs from the qubit count")
        return AttackOutcome(_forward(tx, apply_pauli(reg, attack.pauli)))
    if isinstance(attack, (InterceptResendZ, InterceptResendRandom, PartialMeasure)):
        if isinstance(attack, PartialMeasure):
            if attack.t > n:
                raise ParameterError(f"cannot measure {attack.t} of {n} qubits")
            qubits = list(range(attack.t))
            rule = attack.basis_rule
        else:
            qubits = list(range(n))
            rule = "z" if isinstance(attack, InterceptResendZ) else "random"
        if rule == "random":
            bases = rng.integers(0, 2, size=len(qubits), dtype=np.uint8)
        else:
            bases = np.full(len(qubits), int(rule == "x"), dtype=np.uint8)
        bits, post = measure_qubits(reg, qubits, bases, rng)
        return AttackOutcome(_forward(tx, post), eve_bits=bits, eve_bases=bases)
    return _apply_instrument(attack, tx, rng)


def _apply_instrument(attack: Attack, tx, rng) -> AttackOutcome:
    reg = tx.register
    n = reg.n_qubits
    if reg.mode == PURE:
        weights, vecs = np.ones(1), reg.data[None, :]
    else:
        rho = reg.data if reg.mode == DENSITY else reg.density()
        w, v = np.linalg.eigh(hermitize(rho))
        keep = w > 1e-14
        weights, vecs = w[keep], v[:, keep].T
    branches = attack.branches(vecs, n)
    probs = np.array([float(np.sum(weights[:, None, None] * np.abs(arr) ** 2))
                      for _, arr in branches])
    j = int(rng.choice(len(branches), p=probs / probs.sum()))
    label, arr = branches[j]
    arr = arr / np.sqrt(probs[j])
    # rho_B = sum_i w_i M_i^T conj(M_i), rho_E = sum_i w_i M_i M_i^dagger
    bob = hermitize(np.einsum("i,iex,iey->xy", weights, arr, arr.conj()))
    eve = hermitize(np.einsum("i,iex,ifx->ef", weights, arr, arr.conj()))
    d_e = arr.shape[-2]
    joint = None
    if d_e * (1 << n) <= 1 << EXACT_MAX_QUBITS:
        flat = arr.reshape(arr.shape[0], -1)
        joint = hermitize(np.einsum("i,ia,ib->ab", weights, flat, flat.conj()))
    to_bob = _forward(tx, QuantumRegister(DENSITY, n, data=bob))
    return AttackOutcome(to_bob, eve_state=eve, joint=joint, label=label)

