import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from uncloneable import bits as gf2
from uncloneable.bits import as_bits, int_to_bits
from uncloneable.codes import (BinaryLinearCode, NestedCodePair, ProtocolParams, binary_entropy,
                               even_weight_pair, hamming_code, hamming_config,
                               hamming_full_pair, protocol_params, repetition_code,
                               required_distances, size_parameters, steane_pair, trivial_config,
                               trivial_pair)
from uncloneable.errors import ParameterError, SearchExhaustedError
from uncloneable.protocol import key_accounting

# 30-digit mpmath evaluation of the binary entropy at 0.11
H_011 = 0.49991595816452799564


def brute_min_distance(code):
    best = code.N + 1
    for v in itertools.product([0, 1], repeat=code.N):
        v = np.array(v, np.uint8)
        if v.any() and not gf2.matvec(code.H, v).any():
            best = min(best, int(v.sum()))
    return best


class TestSyndrome:
    def test_zero(self):
        assert not hamming_code().syndrome(np.zeros(7, np.uint8)).any()

    def test_generator_rows(self):
        code = hamming_code()
        for row in code.generator:
            assert not code.syndrome(row).any()

    def test_unit_vector_gives_column(self):
        code = hamming_code()
        e3 = np.zeros(7, np.uint8)
        e3[2] = 1
        assert code.syndrome(e3).tolist() == code.H[:, 2].tolist()

    def test_vectorized_agrees(self):
        code = hamming_code()
        for v in range(128):
            want = gf2.bits_to_int(code.syndrome(int_to_bits(v, 7)))
            assert code.syndrome_int(v) == want


class TestDecode:
    def test_already_in_target(self):
        code = hamming_code()
        v = code.generator[1]
        assert code.decode(v).tolist() == v.tolist()

    def test_single_flip_corrected_for_every_codeword(self):
        code = hamming_code()
        for c in code.codewords():
            for i in range(7):
                v = c.copy()
                v[i] ^= 1
                assert code.decode(v).tolist() == c.tolist()

    def test_single_flip_corrected_in_every_coset(self):
        code = hamming_code()
        for target in itertools.product([0, 1], repeat=3):
            target = np.array(target, np.uint8)
            for base in range(128):
                v = int_to_bits(base, 7)
                if code.syndrome(v).tolist() != target.tolist():
                    continue
                for i in range(7):
                    w = v.copy()
                    w[i] ^= 1
                    assert code.decode(w, target).tolist() == v.tolist()

    def test_repetition_example(self):
        assert repetition_code(3).decode(as_bits("110")).tolist() == [1, 1, 1]

    def test_ties_go_to_smallest_string(self):
        # even-weight code of length 4: every odd vector has syndrome 1 and the
        # lexicographically smallest weight-1 string is 0001
        code = BinaryLinearCode(np.ones((1, 4), np.uint8))
        assert code.decode_table.tolist() == [0, 1]


class TestMinDistance:
    @pytest.mark.parametrize("code,want", [
        (repetition_code(3), 3), (BinaryLinearCode.full_space(5), 1), (hamming_code(), 3)])
    def test_examples(self, code, want):
        assert code.min_distance() == want

    def test_against_exhaustive_weights(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            H = rng.integers(0, 2, size=(3, 8), dtype=np.uint8)
            if gf2.rank(H) < 3:
                continue
            code = BinaryLinearCode(H)
            assert code.min_distance() == brute_min_distance(code)


class TestNestedPair:
    def test_trivial_label(self):
        pair = trivial_pair(4)
        assert pair.L.tolist() == np.eye(4, dtype=int).tolist()
        assert pair.coset_label(as_bits("1010")).tolist() == [1, 0, 1, 0]

    def test_label_is_matrix_product(self):
        pair = hamming_full_pair()
        v = as_bits("1101001")
        assert pair.coset_label(v).tolist() == (pair.L.astype(int) @ v % 2).tolist()

    def test_trivial_representative(self):
        pair = trivial_pair(4)
        z = pair.sample_coset(np.zeros(0, np.uint8), as_bits("0110"), np.random.default_rng(0))
        assert z.tolist() == [0, 1, 1, 0]

    @pytest.mark.parametrize("pair", [even_weight_pair(4), steane_pair(), hamming_full_pair()],
                             ids=["even", "steane", "hamming"])
    def test_nesting_and_label_invariance_exhaustive(self, pair):
        pair.check()
        perp = gf2.span(pair.c2_perp) if pair.c2_perp.shape[0] else np.zeros((1, pair.N), np.uint8)
        for w in perp:
            assert pair.c1.contains(w)
        for v in range(1 << pair.N):
            v = int_to_bits(v, pair.N)
            for w in perp:
                assert pair.c1.syndrome(v ^ w).tolist() == pair.c1.syndrome(v).tolist()
                assert pair.coset_label(v ^ w).tolist() == pair.coset_label(v).tolist()

    def test_coset_samples_are_uniform(self):
        pair = steane_pair()
        c1, y = as_bits("101"), as_bits("1")
        elements = {tuple(e) for e in pair.coset_elements(c1, y)}
        assert len(elements) == 1 << (pair.N - pair.K2)
        rng = np.random.default_rng(7)
        trials = 1000
        counts = dict.fromkeys(elements, 0)
        for _ in range(trials):
            z = pair.sample_coset(c1, y, rng)
            assert pair.c1.syndrome(z).tolist() == c1.tolist()
            assert pair.coset_label(z).tolist() == y.tolist()
            counts[tuple(z)] += 1
        p = 1 / len(elements)
        sigma = np.sqrt(trials * p * (1 - p))
        assert all(abs(c - trials * p) <= 5 * sigma for c in counts.values())

    def test_rejects_non_nested(self):
        H1 = np.array([[1, 1, 0, 0]], np.uint8)
        H2 = np.array([[1, 0, 0, 0]], np.uint8)
        with pytest.raises(ParameterError):
            NestedCodePair(H1, H2)


class TestSizing:
    def test_trivial_config(self):
        p = size_parameters(2, 2, 0, 0, max_N=10)
        assert (p.N, p.K, p.K2) == (4, 4, 4)
        assert p.pair.c1.H.shape[0] == 0

    def test_key_accounting_of_trivial(self):
        acc = key_accounting(trivial_config())
        assert acc.core == 2 + 4 + 0
        assert acc.total == 10

    def test_distance_target_met(self):
        p = size_parameters(4, 4, Fraction(1, 15), 0, max_N=15, min_N=15)
        assert p.N == 15
        assert p.pair.c1.min_distance() >= 2
        assert brute_min_distance(p.pair.c1) >= 2

    def test_search_exhausted(self):
        with pytest.raises(SearchExhaustedError) as exc:
            size_parameters(4, 4, Fraction(1, 5), 0, max_N=9, trials=20)
        assert exc.value.trials == 0  # every split fails the Singleton bound first

    def test_bad_rates(self):
        with pytest.raises(ParameterError):
            size_parameters(2, 2, Fraction(1, 3), 0, max_N=10)

    def test_required_distances(self):
        assert required_distances(7, Fraction(1, 14), 0) == (1, 1)
        assert required_distances(14, Fraction(1, 14), 0) == (2, 2)
        assert required_distances(15, Fraction(1, 15), Fraction(1, 15)) == (2, 4)

    @pytest.mark.parametrize("n,s,delta,eta", [
        (2, 2, 0, 0), (4, 2, 0, 0), (2, 1, Fraction(1, 12), 0), (3, 3, Fraction(1, 20), Fraction(1, 40))])
    def test_label_length_equation(self, n, s, delta, eta):
        p = size_parameters(n, s, delta, eta, max_N=16, trials=3000)
        assert p.K + p.K2 - p.N == n + s
        assert p.check_distances()


class TestEntropy:
    def test_endpoints(self):
        assert binary_entropy(0) == 0
        assert binary_entropy(0.5) == 1

    def test_value(self):
        assert binary_entropy(0.11) == pytest.approx(H_011, abs=1e-12)


def test_asymptotic_key_rate():
    p = trivial_config(64, 8)
    acc = key_accounting(p)
    assert abs(acc.total - (2 * 64 + 3 * 8)) <= 0.05 * (2 * 64 + 3 * 8)


def test_hamming_config_shape():
    p = hamming_config()
    assert (p.N, p.K, p.K2, p.n, p.s) == (7, 4, 7, 2, 2)
    assert p.pair.c1.min_distance() == 3


def test_params_equality_includes_codes():
    a = protocol_params(1, 1, even_weight_pair(4))
    b = protocol_params(1, 1, even_weight_pair(4))
    assert a == b and hash(a) == hash(b)
    assert a != trivial_config()
    assert isinstance(a, ProtocolParams)


@given(st.data())
def test_decode_idempotent(data):
    code = data.draw(st.sampled_from([hamming_code(), repetition_code(5),
                                      BinaryLinearCode(np.ones((1, 6), np.uint8))]))
    v = np.array(data.draw(st.lists(st.integers(0, 1), min_size=code.N, max_size=code.N)), np.uint8)
    target = np.array(data.draw(st.lists(st.integers(0, 1), min_size=code.N - code.K,
                                         max_size=code.N - code.K)), np.uint8)
    once = code.decode(v, target)
    assert code.syndrome(once).tolist() == target.tolist()
    assert code.decode(once, target).tolist() == once.tolist()


@given(st.data())
def test_label_and_syndrome_invariant_under_perp(data):
    pair = data.draw(st.sampled_from([steane_pair(), even_weight_pair(6), hamming_full_pair()]))
    v = np.array(data.draw(st.lists(st.integers(0, 1), min_size=pair.N, max_size=pair.N)), np.uint8)
    if pair.c2_perp.shape[0] == 0:
        return
    coeffs = np.array(data.draw(st.lists(st.integers(0, 1), min_size=pair.c2_perp.shape[0],
                                         max_size=pair.c2_perp.shape[0])), np.uint8)
    w = gf2.matvec(pair.c2_perp.T, coeffs)
    assert pair.c1.syndrome(v ^ w).tolist() == pair.c1.syndrome(v).tolist()
    assert pair.coset_label(v ^ w).tolist() == pair.coset_label(v).tolist()


@given(st.integers(1, 3), st.integers(1, 3))
def test_sized_pairs_satisfy_length_equation(r, s):
    p = size_parameters(r * s, s, 0, 0, max_N=12)
    assert p.K + p.K2 - p.N == p.n + p.s
