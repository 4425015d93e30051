import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from uncloneable.errors import ParameterError
from uncloneable.field import (REDUCTION_POLYS, FieldElem, FieldParams, add, clmul,
                               default_field, horner_array, is_irreducible, mul, mul_array,
                               poly_eval)


def schoolbook_mul(a, b, s, poly):
    """Independent oracle: full product first, then long division by ``poly``."""
    prod = 0
    for i in range(s):
        if (b >> i) & 1:
            prod ^= a << i
    for deg in range(2 * s - 2, s - 1, -1):
        if (prod >> deg) & 1:
            prod ^= poly << (deg - s)
    return prod


F4 = default_field(2)


def el(v, f=F4):
    return FieldElem(v, f)


class TestAdd:
    @pytest.mark.parametrize("a,b,want", [(5, 5, 0), (5, 0, 5), (3, 6, 5)])
    def test_examples(self, a, b, want):
        f = default_field(3)
        assert add(el(a, f), el(b, f)).value == want

    def test_rejects_mixed_fields(self):
        with pytest.raises(ParameterError):
            add(el(1), el(1, default_field(3)))


class TestMul:
    def test_identity_and_zero(self):
        assert mul(el(2), el(1)).value == 2
        for a in range(4):
            assert mul(el(0), el(a)).value == 0

    def test_gf4_product(self):
        assert mul(el(3), el(2)).value == 1

    @pytest.mark.parametrize("s", [2, 3, 4, 5, 8])
    def test_matches_schoolbook_oracle(self, s):
        f = default_field(s)
        rng = np.random.default_rng(s)
        pairs = itertools.product(range(f.order), repeat=2) if s <= 4 else \
            rng.integers(0, f.order, size=(500, 2))
        for a, b in pairs:
            assert f.mul(int(a), int(b)) == schoolbook_mul(int(a), int(b), s, f.reduction_poly)

    def test_vectorized_table_agrees(self):
        f = default_field(4)
        a, b = np.meshgrid(np.arange(16), np.arange(16))
        table = mul_array(f, a, b)
        assert all(table[i, j] == f.mul(int(a[i, j]), int(b[i, j]))
                   for i in range(16) for j in range(16))

    def test_out_of_range_element(self):
        with pytest.raises(ParameterError):
            el(4)


class TestPolyEval:
    def test_constant(self):
        for k in range(4):
            assert poly_eval([el(2)], el(k)).value == 2

    def test_identity_polynomial(self):
        assert poly_eval([el(1), el(0)], el(3)).value == 3

    def test_derived_example(self):
        assert poly_eval([el(3), el(1)], el(2)).value == 0

    def test_array_version(self):
        f = default_field(3)
        coeffs = np.array([[1, 2, 3], [0, 0, 5]])
        keys = np.arange(8)
        got = horner_array(f, coeffs[:, None, :], keys[None, :])
        for i, c in enumerate(coeffs):
            for k in keys:
                assert got[i, k] == f.horner([int(x) for x in c], int(k))


class TestFieldParams:
    def test_builtin_table_is_irreducible(self):
        for s, poly in REDUCTION_POLYS.items():
            if s <= 16:
                assert is_irreducible(poly), s

    def test_known_polynomials(self):
        assert default_field(2).reduction_poly == 0b111
        assert default_field(3).reduction_poly == 0b1011
        assert default_field(8).reduction_poly == 0x11B

    def test_reducible_rejected(self):
        with pytest.raises(ParameterError):
            FieldParams(2, 0b101)

    def test_inverse(self):
        f = default_field(5)
        for a in range(1, f.order):
            assert f.mul(a, f.inv(a)) == 1

    def test_clmul(self):
        assert clmul(0b11, 0b11) == 0b101


@pytest.mark.parametrize("s", [1, 2, 3, 4])
def test_distributive_exhaustive(s):
    f = default_field(s)
    for a, b, c in itertools.product(range(f.order), repeat=3):
        assert f.mul(a, b ^ c) == f.mul(a, b) ^ f.mul(a, c)


@pytest.mark.parametrize("s", [1, 2, 3, 4])
def test_multiplication_by_nonzero_is_bijection(s):
    f = default_field(s)
    for a in range(1, f.order):
        assert sorted(f.mul(a, x) for x in range(f.order)) == list(range(f.order))


@given(st.integers(5, 16).flatmap(lambda s: st.tuples(
    st.just(s), *[st.integers(0, (1 << s) - 1)] * 3)))
def test_distributive_random(args):
    s, a, b, c = args
    f = default_field(s)
    assert f.mul(a, b ^ c) == f.mul(a, b) ^ f.mul(a, c)


@given(st.integers(1, 8).flatmap(lambda s: st.tuples(
    st.just(s),
    st.lists(st.integers(0, (1 << s) - 1), min_size=1, max_size=6),
    st.lists(st.integers(0, (1 << s) - 1), min_size=1, max_size=6),
    st.integers(0, (1 << s) - 1))))
def test_evaluation_is_linear(args):
    s, p, q, k = args
    f = default_field(s)
    size = max(len(p), len(q))
    p = [0] * (size - len(p)) + p
    q = [0] * (size - len(q)) + q
    both = [a ^ b for a, b in zip(p, q)]
    assert f.horner(both, k) == f.horner(p, k) ^ f.horner(q, k)
