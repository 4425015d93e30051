"""Key distribution on top of uncloneable encryption.

``run_direct``: Alice encrypts a fresh random key ``x`` under fresh key
material, Bob acknowledges receipt, only then does Alice announce the key
material, and Bob decrypts. ``run_sifted``: Alice sends random bits in random
bases, Bob measures in bases of his own, both keep the positions where the
bases agree, and the tag/label/correction pipeline runs on the kept string.

The classical channel is assumed authenticated. Reusable key schedules are
refused: announcing ``(k, b)`` would expose every later message.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import bits as gf2
from .adversary import Attack, Identity, apply_attack
from .codes import ProtocolParams, size_parameters
from .errors import SearchExhaustedError, UsageError
from .formats import fnv1a64
from .protocol import (ACC, REJ, KeyMaterial, ReusableKeySchedule, TransmissionDescriptor,
                       decode_string, decrypt, encrypt)
from .qsim import EXACT_MAX_QUBITS, PURE, SAMPLED, measure_in_bases, prepare
from .tag import append_tag

DIRECT = "direct"
SIFTED = "sifted"


@dataclass
class QkdTranscript:
    """Record of one run.

    ``events`` lists the protocol steps in the order they happened.
    ``shared_key`` is Bob's copy of ``x`` and is present iff he accepted.
    """

    mode: str
    attack: str
    alice_key_draws: dict
    announced: dict | None
    bob_verdict: str
    shared_key: np.ndarray | None
    alice_key: np.ndarray | None
    events: list = field(default_factory=list)
    reason: str | None = None
    seed: int | None = None
    sift: dict | None = None

    @property
    def keys_match(self) -> bool:
        return (self.shared_key is not None and self.alice_key is not None
                and np.array_equal(self.shared_key, self.alice_key))

    def as_dict(self) -> dict:
        bits = lambda v: None if v is None else gf2.bits_to_str(v)  # noqa: E731
        return {"mode": self.mode, "attack": self.attack,
                "alice_key_draws": self.alice_key_draws, "announced": self.announced,
                "bob_verdict": self.bob_verdict, "shared_key": bits(self.shared_key),
                "alice_key": bits(self.alice_key), "events": self.events,
                "reason": self.reason, "seed": self.seed, "sift": self.sift}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)


def _rng(rng):
    if isinstance(rng, (int, np.integer)):
        return np.random.default_rng(int(rng)), int(rng)
    return rng, None


def _draw_id(rng) -> str:
    """Fingerprint of the generator state right before a draw."""
    state = json.dumps(rng.bit_generator.state, sort_keys=True, default=str)
    return f"{fnv1a64(state.encode()):016x}"


def _announce(key: KeyMaterial, params: ProtocolParams) -> dict:
    return {"k": int(key.k), "e": gf2.bits_to_str(key.e),
            "c1": gf2.bits_to_str(key.c1), "b": gf2.bits_to_str(key.b)}


def run_direct(params: ProtocolParams, attack: Attack | None, rng, *, engine: str | None = None,
               schedule: ReusableKeySchedule | None = None) -> QkdTranscript:
    """Five-step key distribution with a one-time key.

    ``engine`` is ``"exact"`` or ``"sampled"``; the default is exact for
    ``N <= 10``. ``rng`` may be a seed.
    """
    if schedule is not None:
        raise UsageError("reusable key schedules must not be combined with key distribution")
    rng, seed = _rng(rng)
    attack = attack or Identity()
    if engine is None:
        engine = "exact" if params.N <= EXACT_MAX_QUBITS else "sampled"
    mode = PURE if engine == "exact" else SAMPLED
    draws = {"key": _draw_id(rng)}
    key = KeyMaterial.generate(params, rng)
    draws["x"] = _draw_id(rng)
    x = rng.integers(0, 2, size=params.n, dtype=np.uint8)
    events = ["alice_send"]
    tx = encrypt(x, key, params, rng, mode)
    outcome = apply_attack(attack, tx, rng)
    events.append("channel")
    received = outcome.to_bob is not None
    events.append("bob_ack")
    if not received:
        return QkdTranscript(DIRECT, attack.spec, draws, None, REJ, None, x, events,
                             "missing", seed)
    events.append("alice_announce")
    announced = _announce(key, params)
    events.append("bob_validate")
    result = decrypt(outcome.to_bob, key, params, rng)
    shared = result.message if result.accepted else None
    return QkdTranscript(DIRECT, attack.spec, draws, announced, result.verdict, shared, x,
                         events, result.reason, seed)


def run_sifted(params: ProtocolParams, attack: Attack | None, rng, *,
               raw_qubits: int | None = None, trials_budget: int = 2000) -> QkdTranscript:
    """Sifted variant on the sampled engine.

    ``raw_qubits`` (default ``params.N``) qubits are sent. After sifting, a
    configuration with ``n = s * floor((L - s) / s)`` is sized for the kept
    length ``L`` using ``params.s``, ``params.delta`` and ``params.eta``; Alice
    then announces ``c1 = H1 z`` and ``e = L z xor tag(x)`` for her kept string
    ``z`` and fresh ``x``, ``k``.
    """
    rng, seed = _rng(rng)
    attack = attack or Identity()
    raw = raw_qubits or params.N
    s = params.s
    draws = {"raw": _draw_id(rng)}
    z_a = rng.integers(0, 2, size=raw, dtype=np.uint8)
    b_a = rng.integers(0, 2, size=raw, dtype=np.uint8)
    events = ["alice_send"]
    tx = TransmissionDescriptor(prepare(z_a, b_a, SAMPLED), "raw")
    outcome = apply_attack(attack, tx, rng)
    events.append("channel")
    if outcome.to_bob is None:
        events.append("bob_ack")
        return QkdTranscript(SIFTED, attack.spec, draws, None, REJ, None, None, events,
                             "missing", seed)
    b_b = rng.integers(0, 2, size=raw, dtype=np.uint8)
    z_b, _ = measure_in_bases(outcome.to_bob.register, b_b, rng)
    events += ["bob_measure", "bob_ack", "basis_exchange"]
    keep = np.nonzero(b_a == b_b)[0]
    kept = int(keep.size)
    errors = int(np.count_nonzero(z_a[keep] != z_b[keep]))
    sift = {"raw": raw, "kept": kept, "sift_fraction": kept / raw,
            "kept_errors": errors, "kept_error_rate": errors / kept if kept else 0.0,
            "kept_positions": keep.tolist()}
    if kept < 2 * s:
        return QkdTranscript(SIFTED, attack.spec, draws, None, REJ, None, None, events,
                             "insufficient sift", seed, sift)
    n = s * ((kept - s) // s)
    try:
        sized = size_parameters(n, s, params.delta, params.eta, max_N=kept,
                                trials=trials_budget, seed=0)
    except SearchExhaustedError:
        return QkdTranscript(SIFTED, attack.spec, draws, None, REJ, None, None, events,
                             "insufficient sift", seed, sift)
    N2 = sized.N
    sift.update({"n": n, "N": N2})
    za, zb = z_a[keep][:N2], z_b[keep][:N2]
    draws["key"] = _draw_id(rng)
    k = int(rng.integers(0, sized.field.order))
    draws["x"] = _draw_id(rng)
    x = rng.integers(0, 2, size=n, dtype=np.uint8)
    pair = sized.pair
    c1 = gf2.matvec(pair.c1.H, za) if pair.c1.H.shape[0] else np.zeros(0, np.uint8)
    tagged = append_tag(x, k, sized.field).to_bits()
    e = pair.coset_label(za) ^ tagged
    events.append("alice_announce")
    key = KeyMaterial(k, e, c1, np.zeros(N2, dtype=np.uint8))
    announced = {"k": k, "e": gf2.bits_to_str(e), "c1": gf2.bits_to_str(c1)}
    events.append("bob_validate")
    result = decode_string(zb, key, sized)
    shared = result.message if result.accepted else None
    return QkdTranscript(SIFTED, attack.spec, draws, announced, result.verdict, shared, x,
                         events, result.reason, seed, sift)


def accepted_runs(transcripts) -> int:
    return sum(t.bob_verdict == ACC for t in transcripts)
