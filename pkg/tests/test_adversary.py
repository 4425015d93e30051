import numpy as np
import pytest
from hypothesis import given, strategies as st

from uncloneable.adversary import (AncillaCopy, Identity, InterceptResendRandom,
                                   InterceptResendZ, KrausAttack, PartialMeasure, PauliTamper,
                                   Steal, apply_attack, attack_battery, parse_attack,
                                   random_kraus_attack)
from uncloneable.analysis import acceptance_probability
from uncloneable.codes import trivial_config
from uncloneable.errors import CapabilityError, ParameterError
from uncloneable.protocol import KeyMaterial, TransmissionDescriptor, decrypt, encrypt
from uncloneable.qsim import (PURE, SAMPLED, QuantumRegister, measure_in_bases,
                              outcome_probabilities, prepare, to_density)

P = trivial_config()


def tx_of(z, b, mode=PURE):
    return TransmissionDescriptor(prepare(z, b, mode), "test")


class TestSimpleAttacks:
    @pytest.mark.parametrize("mode", [PURE, SAMPLED])
    def test_identity(self, mode, rng):
        tx = tx_of([1, 0, 1], [0, 1, 1], mode)
        out = apply_attack(Identity(), tx, rng)
        assert out.to_bob is tx
        assert out.eve_bits is None and out.eve_state is None and out.label is None

    def test_steal(self, rng):
        key = KeyMaterial.generate(P, rng)
        tx = encrypt(0, key, P, rng)
        out = apply_attack(Steal(), tx, rng)
        assert out.to_bob is None and out.stolen is tx.register
        assert decrypt(out.to_bob, key, P, rng).reason == "missing"

    def test_identity_pauli_matches_identity(self):
        tx = tx_of([1, 0, 1, 1], [0, 1, 1, 0], SAMPLED)
        a = apply_attack(PauliTamper("IIII"), tx, np.random.default_rng(5))
        b = apply_attack(Identity(), tx, np.random.default_rng(5))
        ra, rb = a.to_bob.register, b.to_bob.register
        assert ra.bits.tolist() == rb.bits.tolist() and ra.phase == rb.phase

    def test_pauli_length_checked(self, rng):
        with pytest.raises(ParameterError):
            apply_attack(PauliTamper("XX"), tx_of([0, 0, 0], [0, 0, 0]), rng)


class TestInterceptResend:
    def test_x_qubit_disturbance_exact(self):
        # 1-qubit oracle: a Z measurement leaves |0> or |1>, each uniform in X
        vec = prepare([0], [1]).data[None, :]
        disturbed = 0.0
        for _, arr in InterceptResendZ().branches(vec, 1):
            amp = arr[0, 0]
            weight = np.vdot(amp, amp).real
            reg = QuantumRegister(PURE, 1, data=amp / np.sqrt(weight))
            disturbed += weight * outcome_probabilities(reg, [1])[1]
        assert disturbed == pytest.approx(0.5, abs=1e-9)

    @pytest.mark.parametrize("mode", [PURE, SAMPLED])
    def test_x_qubit_disturbance_sampled(self, mode, rng):
        trials = 4000
        flips = 0
        for _ in range(trials):
            out = apply_attack(InterceptResendZ(), tx_of([0], [1], mode), rng)
            flips += int(measure_in_bases(out.to_bob.register, [1], rng)[0][0])
        assert abs(flips - trials / 2) <= 5 * np.sqrt(trials / 4)

    def test_z_qubits_untouched(self, rng):
        out = apply_attack(InterceptResendZ(), tx_of([1, 0, 1], [0, 0, 0], SAMPLED), rng)
        assert out.eve_bits.tolist() == [1, 0, 1]
        assert out.to_bob.register.bits.tolist() == [1, 0, 1]

    def test_random_bases_recorded(self, rng):
        out = apply_attack(InterceptResendRandom(), tx_of([1, 0, 1, 0], [1, 1, 0, 0]), rng)
        assert out.eve_bases.size == 4 and out.eve_bits.size == 4

    def test_partial_measure_only_touches_prefix(self, rng):
        out = apply_attack(PartialMeasure(1, "x"), tx_of([0, 1], [0, 1]), rng)
        rho = out.to_bob.register.data
        probs = outcome_probabilities(out.to_bob.register, [0, 1])
        assert np.isclose(probs.reshape(2, 2)[:, 1].sum(), 1.0)
        assert np.isclose(np.trace(rho).real, 1.0)


class TestAncillaCopy:
    def test_z_basis_copy_is_perfect(self, rng):
        z = np.array([1, 0, 1, 1], np.uint8)
        out = apply_attack(AncillaCopy(), tx_of(z, np.zeros(4, np.uint8)), rng)
        idx = int("".join(map(str, z)), 2)
        assert np.isclose(out.eve_state[idx, idx].real, 1.0)
        assert np.allclose(out.to_bob.register.data, to_density(prepare(z, np.zeros(4, np.uint8))))

    def test_acceptance_is_one_when_b_is_zero(self):
        assert acceptance_probability(AncillaCopy(), P, 0, fixed={"b": 0}) == pytest.approx(1.0)

    def test_needs_exact_engine(self, rng):
        with pytest.raises(CapabilityError):
            apply_attack(AncillaCopy(), tx_of([0, 1], [0, 0], SAMPLED), rng)


class TestKraus:
    def test_completeness_checked(self):
        with pytest.raises(ParameterError):
            KrausAttack((np.eye(2) * 0.5,))

    def test_random_instrument_is_complete(self):
        att = random_kraus_attack(2, seed=3)
        total = sum(k.conj().T @ k for k in att.ops)
        assert np.allclose(total, np.eye(4))
        assert att.spec == "kraus:3"

    def test_trajectory(self, rng):
        out = apply_attack(random_kraus_attack(2, 1), tx_of([0, 1], [1, 0]), rng)
        assert out.label in (0, 1)
        assert np.isclose(np.trace(out.eve_state).real, 1.0)
        assert np.isclose(np.trace(out.joint).real, 1.0)


def test_parse_attack_round_trip():
    for text in ["identity", "steal", "ir-z", "ir-rand", "partial:2", "partial:1:random",
                 "pauli:IXYZ", "copy"]:
        assert parse_attack(text).spec == text
    with pytest.raises(ParameterError):
        parse_attack("nonsense")


@pytest.mark.parametrize("attack", attack_battery(3, n_random=3), ids=lambda a: a.spec)
def test_branches_preserve_norm(attack):
    rng = np.random.default_rng(0)
    vecs = rng.normal(size=(5, 8)) + 1j * rng.normal(size=(5, 8))
    vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
    if attack.blocks:
        assert attack.branches(vecs, 3) == []
        return
    total = sum(np.sum(np.abs(arr) ** 2, axis=(-2, -1)) for _, arr in attack.branches(vecs, 3))
    assert np.allclose(total, 1.0, atol=1e-10)


@given(st.integers(0, 1000), st.integers(1, 3))
def test_random_kraus_preserves_trace(seed, n):
    att = random_kraus_attack(n, seed)
    rng = np.random.default_rng(seed)
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    v /= np.linalg.norm(v)
    total = sum(np.sum(np.abs(arr) ** 2) for _, arr in att.branches(v, n))
    assert abs(total - 1) <= 1e-10
