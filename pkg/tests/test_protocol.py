import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from uncloneable.bits import as_bits, int_to_bits
from uncloneable.codes import even_weight_config, hamming_config, trivial_config
from uncloneable.errors import ParameterError, UsageError
from uncloneable.protocol import (ACC, REJ, CoherentKeyExtras, KeyMaterial, ReusableKeySchedule,
                                  TransmissionDescriptor, coherent_encode_state, decode_string,
                                  decrypt, decrypt_reusable, encode_string, encrypt,
                                  encrypt_reusable, key_accounting, key_length, masked_tag)
from uncloneable.qsim import (PURE, SAMPLED, PauliChannel, apply_pauli, apply_pauli_channel,
                              prepare, to_density, trace_distance)
from uncloneable.tag import bits_to_registers

TRIVIAL = trivial_config()


def zero_key(params):
    return KeyMaterial(0, np.zeros(params.n + params.s, np.uint8),
                       np.zeros(params.N - params.K, np.uint8), np.zeros(params.N, np.uint8))


def frame_pauli(delta, b):
    """Pauli that flips Bob's outcome on the qubits in ``delta`` for bases ``b``."""
    return "".join("I" if not d else ("Z" if bb else "X") for d, bb in zip(delta, b))


class TestEncrypt:
    def test_zero_key_zero_message(self, rng):
        key = zero_key(TRIVIAL)
        assert masked_tag(0, key, TRIVIAL).tolist() == [0, 0, 0, 0]
        assert encode_string(0, key, TRIVIAL, rng).tolist() == [0, 0, 0, 0]
        tx = encrypt(0, key, TRIVIAL, rng, PURE)
        assert np.allclose(tx.register.data, np.eye(16)[0])

    def test_mask_layer(self):
        key = KeyMaterial(0, as_bits("1111"), np.zeros(0, np.uint8), np.zeros(4, np.uint8))
        assert masked_tag(as_bits("00"), key, TRIVIAL).tolist() == [1, 1, 1, 1]

    def test_wrong_key_lengths(self):
        key = KeyMaterial(0, as_bits("111"), np.zeros(0, np.uint8), np.zeros(4, np.uint8))
        with pytest.raises(ParameterError):
            key.check(TRIVIAL)

    def test_key_stream_round_trip(self, rng):
        p = hamming_config()
        key = KeyMaterial.generate(p, rng)
        assert key_length(p) == key.to_bits(p).size
        assert KeyMaterial.from_bits(key.to_bits(p), p) == key


class TestDecrypt:
    @pytest.mark.parametrize("params", [TRIVIAL, even_weight_config(), hamming_config()],
                             ids=["trivial", "even", "hamming"])
    @pytest.mark.parametrize("mode", [PURE, SAMPLED])
    def test_round_trip(self, params, mode, rng):
        for _ in range(100):
            key = KeyMaterial.generate(params, rng)
            m = rng.integers(0, 2, params.n, dtype=np.uint8)
            result = decrypt(encrypt(m, key, params, rng, mode), key, params, rng)
            assert result.verdict == ACC and result.message.tolist() == m.tolist()

    def test_single_flip_corrected(self, rng):
        p = hamming_config()
        for _ in range(40):
            key = KeyMaterial.generate(p, rng)
            m = rng.integers(0, 2, p.n, dtype=np.uint8)
            tx = encrypt(m, key, p, rng, SAMPLED)
            q = int(rng.integers(0, p.N))
            delta = np.zeros(p.N, np.uint8)
            delta[q] = 1
            bad = TransmissionDescriptor(apply_pauli(tx.register, frame_pauli(delta, key.b)),
                                         tx.params_digest)
            result = decrypt(bad, key, p, rng)
            assert result.accepted and result.message.tolist() == m.tolist()

    def test_detected_tamper(self, rng):
        # flipping the last tag bit gives Delta = (0, 1): f(k) = 1 for every k
        key = KeyMaterial.generate(TRIVIAL, rng)
        tx = encrypt(0, key, TRIVIAL, rng)
        delta = as_bits("0001")
        bad = TransmissionDescriptor(apply_pauli(tx.register, frame_pauli(delta, key.b)),
                                     tx.params_digest)
        assert decrypt(bad, key, TRIVIAL, rng) == (REJ, None, "tag")

    def test_missing(self, rng):
        key = KeyMaterial.generate(TRIVIAL, rng)
        assert decrypt(None, key, TRIVIAL, rng).reason == "missing"
        assert decrypt(TransmissionDescriptor(None, "x"), key, TRIVIAL, rng).verdict == REJ


def test_tamper_acceptance_follows_tag_polynomial():
    """Exhaustive at N = 4: accept iff the label difference is a root-polynomial at k."""
    p = TRIVIAL
    f = p.field
    rng = np.random.default_rng(0)
    for k in range(4):
        for m in range(4):
            for d in range(16):
                delta = int_to_bits(d, 4)
                key = KeyMaterial(k, rng.integers(0, 2, 4, dtype=np.uint8), np.zeros(0, np.uint8),
                                  rng.integers(0, 2, 4, dtype=np.uint8))
                z = encode_string(m, key, p, rng)
                got = decode_string(z ^ delta, key, p).accepted
                regs = bits_to_registers(delta, p.s)
                assert got == (f.horner(regs, k) == 0)
                if d % 5 == 0:
                    tx = encrypt(m, key, p, rng)
                    reg = apply_pauli(tx.register, frame_pauli(delta, key.b))
                    quantum = decrypt(TransmissionDescriptor(reg, tx.params_digest), key, p, rng)
                    assert quantum.accepted == got


def test_perfect_encryption_density():
    """With ``e`` uniform the key-averaged state is maximally mixed."""
    p = TRIVIAL
    for k, b in [(0, "0000"), (3, "1010"), (2, "1111")]:
        for m in range(4):
            rho = np.zeros((16, 16), complex)
            for e in range(16):
                key = KeyMaterial(k, int_to_bits(e, 4), np.zeros(0, np.uint8), as_bits(b))
                z = encode_string(m, key, p, zpad=np.zeros(0, np.uint8))
                rho += to_density(prepare(z, key.b)) / 16
            assert np.allclose(rho, np.eye(16) / 16, atol=1e-10)


def test_honest_channel_acceptance(rng):
    p = hamming_config()
    channel = PauliChannel.symmetric(0.01)
    accepted = 0
    for _ in range(1000):
        key = KeyMaterial.generate(p, rng)
        m = rng.integers(0, 2, p.n, dtype=np.uint8)
        tx = encrypt(m, key, p, rng, SAMPLED)
        noisy = TransmissionDescriptor(apply_pauli_channel(tx.register, channel, rng),
                                       tx.params_digest)
        result = decrypt(noisy, key, p, rng)
        accepted += result.accepted and result.message.tolist() == m.tolist()
    assert accepted >= 990


class TestReusable:
    @pytest.mark.parametrize("params", [TRIVIAL, even_weight_config(), hamming_config()],
                             ids=["trivial", "even", "hamming"])
    def test_round_trip(self, params, rng):
        sched = ReusableKeySchedule.generate(params, 100, rng)
        for _ in range(100):
            m = rng.integers(0, 2, params.n, dtype=np.uint8)
            tx = encrypt_reusable(m, sched, params, rng)
            result = decrypt_reusable(tx, sched, params, rng)
            assert result.accepted and result.message.tolist() == m.tolist()

    def test_same_k_and_b_different_pads(self, rng):
        p = even_weight_config()
        sched = ReusableKeySchedule.generate(p, 2, rng)
        txs = [encrypt_reusable(m, sched, p, rng) for m in (0, 1)]
        assert [tx.pad_index for tx in txs] == [0, 1]
        assert [decrypt_reusable(tx, sched, p, rng).message.tolist() for tx in txs] == [[0], [1]]

    def test_pad_reuse_refused(self, rng):
        sched = ReusableKeySchedule.generate(TRIVIAL, 1, rng)
        encrypt_reusable(0, sched, TRIVIAL, rng)
        with pytest.raises(UsageError):
            encrypt_reusable(1, sched, TRIVIAL, rng, index=0)
        with pytest.raises(UsageError):
            encrypt_reusable(1, sched, TRIVIAL, rng)
        sched.add_pad(np.zeros(4, np.uint8))
        assert encrypt_reusable(1, sched, TRIVIAL, rng).pad_index == 1

    def test_missing(self, rng):
        sched = ReusableKeySchedule.generate(TRIVIAL, 1, rng)
        assert decrypt_reusable(None, sched, TRIVIAL, rng).reason == "missing"


def test_coherent_average_equals_measured_average(rng):
    """Averaging the phase syndrome gives the same state as sending a random coset element."""
    p = even_weight_config()
    r2 = p.N - p.K2
    for _ in range(5):
        key = KeyMaterial.generate(p, rng)
        for m in range(1 << p.n):
            phi = np.eye(1 << p.n)[m]
            coherent = np.zeros((16, 16), complex)
            measured = np.zeros((16, 16), complex)
            for a in itertools.product([0, 1], repeat=r2):
                extras = CoherentKeyExtras(np.array(a, np.uint8), np.array(a, np.uint8))
                v = coherent_encode_state(phi, key, extras, p)
                coherent += np.outer(v, v.conj()) / 2 ** r2
                z = encode_string(m, key, p, zpad=extras.zpad)
                measured += to_density(prepare(z, key.b)) / 2 ** r2
            assert trace_distance(coherent, measured) <= 1e-10


class TestKeyAccounting:
    def test_trivial(self):
        acc = key_accounting(TRIVIAL)
        assert (acc.core, acc.b, acc.private_randomness, acc.total) == (6, 4, 0, 10)
        assert (acc.reusable, acc.one_time) == (2 + 4, 4)

    @pytest.mark.parametrize("params", [TRIVIAL, trivial_config(4, 2), even_weight_config(),
                                        hamming_config(), trivial_config(6, 3)])
    def test_formula(self, params):
        acc = key_accounting(params)
        assert acc.core == params.n + 2 * params.s + params.N - params.K
        assert acc.core == acc.k + acc.e + acc.c1
        assert acc.total == key_length(params)

    def test_asymptote(self):
        acc = key_accounting(trivial_config(64, 8))
        assert abs(acc.total - 152) <= 0.05 * 152


@given(st.integers(0, 2 ** 32 - 1), st.sampled_from(["trivial", "even", "hamming"]))
def test_round_trip_property(seed, name):
    params = {"trivial": TRIVIAL, "even": even_weight_config(), "hamming": hamming_config()}[name]
    rng = np.random.default_rng(seed)
    key = KeyMaterial.generate(params, rng)
    m = rng.integers(0, 2, params.n, dtype=np.uint8)
    result = decrypt(encrypt(m, key, params, rng, SAMPLED), key, params, rng)
    assert result.accepted and result.message.tolist() == m.tolist()
