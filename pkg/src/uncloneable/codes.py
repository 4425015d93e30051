"""Binary linear codes, nested CSS pairs and parameter sizing.

A code is given by its parity-check matrix ``H``; vectors with the same
syndrome ``H v`` form a coset. A :class:`NestedCodePair` holds ``C1`` (bit-flip
correction) and ``C2`` with ``C2^perp`` inside ``C1``; the cosets of
``C2^perp`` inside one coset of ``C1`` are told apart by a label matrix ``L``
whose rows lie in ``C2`` but not in ``C1^perp``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache

import numpy as np

from . import bits as gf2
from .bits import all_vectors, as_bits, bits_to_int, column_ints, int_to_bits
from .errors import CapabilityError, InvariantError, ParameterError, SearchExhaustedError

MAX_TABLE_N = 20
MAX_DISTANCE_N = 16
DEFAULT_TRIALS = 10_000


class BinaryLinearCode:
    """An ``[N, K]`` binary code defined by an ``(N-K) x N`` parity-check matrix.

    Parameters
    ----------
    H : array_like
        Parity-check matrix with full row rank. Zero rows are allowed for
        ``N == K`` (pass ``np.zeros((0, N))``).
    """

    def __init__(self, H, N: int | None = None):
        H = np.asarray(H, dtype=np.uint8) % 2
        if H.ndim != 2:
            if N is None:
                raise ParameterError("parity-check matrix must be 2-D")
            H = H.reshape(0, N)
        if N is not None and H.shape[1] != N:
            raise ParameterError("parity-check matrix width differs from N")
        if gf2.rank(H) != H.shape[0]:
            raise ParameterError("parity-check matrix must have full row rank")
        self.H = H
        self.H.setflags(write=False)

    @classmethod
    def full_space(cls, N: int) -> "BinaryLinearCode":
        return cls(np.zeros((0, N), dtype=np.uint8))

    @classmethod
    def from_generator(cls, G) -> "BinaryLinearCode":
        G = np.asarray(G, dtype=np.uint8)
        return cls(gf2.nullspace(G, width=G.shape[1]))

    @property
    def N(self) -> int:
        return self.H.shape[1]

    @property
    def K(self) -> int:
        return self.N - self.H.shape[0]

    @cached_property
    def generator(self) -> np.ndarray:
        return gf2.nullspace(self.H, width=self.N)

    @cached_property
    def _column_syndromes(self) -> np.ndarray:
        return column_ints(self.H)

    def syndrome_int(self, v_int) -> np.ndarray | int:
        """Syndromes of vectors given as integers (vectorized)."""
        v_int = np.asarray(v_int, dtype=np.int64)
        out = np.zeros(v_int.shape, dtype=np.int64)
        for i, col in enumerate(self._column_syndromes):
            out ^= np.where((v_int >> (self.N - 1 - i)) & 1, col, 0)
        return out

    @cached_property
    def decode_table(self) -> np.ndarray | None:
        """Syndrome index -> coset leader (as an integer), or ``None``.

        Leaders have minimum weight; ties go to the lexicographically
        smallest bit string.
        """
        r = self.N - self.K
        if r == 0:
            return np.zeros(1, dtype=np.int64)
        if self.N > MAX_TABLE_N:
            return None
        table = np.full(1 << r, -1, dtype=np.int64)
        remaining = 1 << r
        for w in range(self.N + 1):
            if w == 0:
                vals = np.zeros(1, dtype=np.int64)
            else:
                combos = np.array(list(itertools.combinations(range(self.N), w)),
                                  dtype=np.int64)
                vals = np.sort((np.int64(1) << (self.N - 1 - combos)).sum(axis=1))
            synd = self.syndrome_int(vals)
            uniq, first = np.unique(synd, return_index=True)
            fresh = table[uniq] < 0
            table[uniq[fresh]] = vals[first[fresh]]
            remaining -= int(fresh.sum())
            if remaining == 0:
                break
        return table

    def contains(self, v) -> bool:
        return not self.syndrome(v).any()

    def syndrome(self, v) -> np.ndarray:
        v = as_bits(v)
        if v.size != self.N:
            raise ParameterError(f"expected a {self.N}-bit vector, got {v.size}")
        return gf2.matvec(self.H, v)

    def decode(self, v, target_syndrome=None) -> np.ndarray:
        """Move ``v`` into the coset ``target_syndrome`` via the leader table."""
        v = as_bits(v, self.N)
        r = self.N - self.K
        target = np.zeros(r, np.uint8) if target_syndrome is None else as_bits(target_syndrome, r)
        table = self.decode_table
        if table is None:
            raise CapabilityError(f"no decoding table for N={self.N} > {MAX_TABLE_N}")
        offset = bits_to_int(self.syndrome(v) ^ target)
        return v ^ int_to_bits(int(table[offset]), self.N)

    def codewords(self) -> np.ndarray:
        if self.K > 22:
            raise CapabilityError("too many codewords to enumerate")
        return gf2.span(self.generator)

    def min_distance(self) -> int:
        if self.N > MAX_DISTANCE_N:
            raise CapabilityError(f"brute-force distance is limited to N <= {MAX_DISTANCE_N}")
        return _min_distance(self.generator.tobytes(), self.generator.shape)

    def __repr__(self):
        return f"BinaryLinearCode(N={self.N}, K={self.K})"


@lru_cache(maxsize=4096)
def _min_distance(gen_bytes: bytes, shape) -> int:
    G = np.frombuffer(gen_bytes, dtype=np.uint8).reshape(shape)
    k, n = shape
    if k == 0:
        return n + 1  # no nonzero codewords; larger than any target
    words = gf2.span(G)[1:]
    return int(words.sum(axis=1).min())


def hamming_code(m: int = 3) -> BinaryLinearCode:
    """The ``[2^m - 1, 2^m - 1 - m]`` Hamming code; column ``j`` of H is ``j+1``."""
    n = (1 << m) - 1
    H = np.array([[((j + 1) >> (m - 1 - i)) & 1 for j in range(n)] for i in range(m)],
                 dtype=np.uint8)
    return BinaryLinearCode(H)


def repetition_code(n: int) -> BinaryLinearCode:
    H = np.zeros((n - 1, n), dtype=np.uint8)
    for i in range(n - 1):
        H[i, i] = H[i, i + 1] = 1
    return BinaryLinearCode(H)


class NestedCodePair:
    """``C1`` and ``C2`` with ``C2^perp`` contained in ``C1``.

    Parameters
    ----------
    H1 : array_like
        Parity checks of ``C1`` (``(N-K) x N``).
    H2 : array_like
        Parity checks of ``C2`` (``(N-K') x N``); its rows span ``C2^perp``.
    L : array_like, optional
        Label matrix. Computed by extending a basis of ``C1^perp`` inside
        ``C2`` when omitted.
    """

    def __init__(self, H1, H2, L=None, N: int | None = None):
        self.c1 = BinaryLinearCode(H1, N=N)
        self.c2 = BinaryLinearCode(H2, N=self.c1.N)
        N = self.c1.N
        if self.c2.N != N:
            raise ParameterError("codes of a pair must share the block length")
        if self.c2.H.shape[0] and self.c1.H.shape[0]:
            if gf2.matmul(self.c1.H, self.c2.H.T).any():
                raise ParameterError("C2^perp is not contained in C1")
        if L is None:
            L = self._extend_basis()
        L = np.asarray(L, dtype=np.uint8).reshape(-1, N)
        if L.shape[0] != self.label_length:
            raise ParameterError(f"label matrix needs {self.label_length} rows")
        if self.c2.H.shape[0] and L.shape[0] and gf2.matmul(self.c2.H, L.T).any():
            raise ParameterError("label rows must lie in C2")
        self.L = L
        self.L.setflags(write=False)
        if gf2.rank(self.stacked) != self.c2.K:
            raise ParameterError("label rows must be independent modulo C1^perp")

    def _extend_basis(self) -> np.ndarray:
        basis = [row for row in self.c1.H]
        picked = []
        for g in self.c2.generator:
            trial = np.array(basis + [g], dtype=np.uint8)
            if gf2.rank(trial) == len(basis) + 1:
                basis.append(g)
                picked.append(g)
        return np.array(picked, dtype=np.uint8).reshape(-1, self.c1.N)

    @property
    def N(self) -> int:
        return self.c1.N

    @property
    def K(self) -> int:
        return self.c1.K

    @property
    def K2(self) -> int:
        return self.c2.K

    @property
    def label_length(self) -> int:
        return self.K + self.K2 - self.N

    @property
    def c2_perp(self) -> np.ndarray:
        """Generators of ``C2^perp`` (the rows of ``H2``)."""
        return self.c2.H

    @cached_property
    def stacked(self) -> np.ndarray:
        return np.vstack([self.c1.H, self.L]).astype(np.uint8)

    @cached_property
    def _right_inverse(self) -> np.ndarray:
        return gf2.right_inverse(self.stacked)

    @cached_property
    def _label_columns(self) -> np.ndarray:
        return column_ints(self.L)

    def coset_label(self, v) -> np.ndarray:
        v = as_bits(v)
        if v.size != self.N:
            raise ParameterError(f"expected a {self.N}-bit vector, got {v.size}")
        return gf2.matvec(self.L, v)

    def label_int(self, v_int) -> np.ndarray:
        v_int = np.asarray(v_int, dtype=np.int64)
        out = np.zeros(v_int.shape, dtype=np.int64)
        for i, col in enumerate(self._label_columns):
            out ^= np.where((v_int >> (self.N - 1 - i)) & 1, col, 0)
        return out

    def representative(self, c1_syndrome, label) -> np.ndarray:
        """The canonical (linear in its inputs) solution of ``H1 z = c1, L z = y``."""
        c1 = as_bits(c1_syndrome, self.N - self.K)
        y = as_bits(label, self.label_length)
        z = gf2.matvec(self._right_inverse, np.concatenate([c1, y]))
        if gf2.matvec(self.stacked, z).tolist() != np.concatenate([c1, y]).tolist():
            raise InvariantError("coset representative does not solve its equations")
        return z

    def sample_coset(self, c1_syndrome, label, rng) -> np.ndarray:
        """Uniform element of the ``C2^perp`` coset with the given syndrome and label.

        Consumes ``N - K'`` random bits from ``rng``.
        """
        z = self.representative(c1_syndrome, label)
        pad = rng.integers(0, 2, size=self.N - self.K2, dtype=np.uint8)
        return z ^ gf2.matvec(self.c2_perp.T, pad) if pad.size else z

    def coset_elements(self, c1_syndrome, label) -> np.ndarray:
        z = self.representative(c1_syndrome, label)
        return gf2.span(self.c2_perp) ^ z if self.N - self.K2 else z[None, :]

    def check(self) -> None:
        """Re-verify the nesting and labeling invariants."""
        if self.c2.H.shape[0] and self.c1.H.shape[0]:
            if gf2.matmul(self.c1.H, self.c2.H.T).any():
                raise InvariantError("C2^perp escaped C1")
        if gf2.rank(self.stacked) != self.K2:
            raise InvariantError("labels do not separate C2^perp cosets")

    def __repr__(self):
        return f"NestedCodePair(N={self.N}, K={self.K}, K'={self.K2})"


def trivial_pair(N: int) -> NestedCodePair:
    """``C1 = C2 = F_2^N``: no syndrome, identity labels."""
    empty = np.zeros((0, N), dtype=np.uint8)
    return NestedCodePair(empty, empty, L=np.eye(N, dtype=np.uint8), N=N)


def even_weight_pair(N: int = 4) -> NestedCodePair:
    """``C1 = C2 =`` even-weight code, so ``C2^perp`` is ``{0, 1...1}``."""
    ones = np.ones((1, N), dtype=np.uint8)
    return NestedCodePair(ones, ones)


def steane_pair() -> NestedCodePair:
    """``C1 = C2 =`` [7,4] Hamming code (one label bit)."""
    H = hamming_code(3).H
    return NestedCodePair(H, H)


def hamming_full_pair() -> NestedCodePair:
    """``C1 =`` [7,4] Hamming code, ``C2 =`` full space: four label bits."""
    return NestedCodePair(hamming_code(3).H, np.zeros((0, 7), dtype=np.uint8), N=7)


def binary_entropy(x) -> float:
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise ParameterError(f"binary entropy needs 0 <= x <= 1, got {x}")
    if x in (0.0, 1.0):
        return 0.0
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)


@dataclass(frozen=True)
class ProtocolParams:
    """Sizing for one instance of the scheme.

    ``n`` message bits, ``s`` tag bits, ``r = n / s`` registers, and a code
    pair with ``K + K' - N = n + s``. ``delta`` is the channel error rate the
    codes are sized for and ``eta`` the extra margin given to ``C2``.
    """

    n: int
    s: int
    delta: Fraction
    eta: Fraction
    pair: NestedCodePair = field(compare=False)
    distance_status: str = "verified"
    seed: int | None = None

    def __post_init__(self):
        if self.n <= 0 or self.s <= 0 or self.n % self.s:
            raise ParameterError("n must be a positive multiple of s")
        if self.pair.label_length != self.n + self.s:
            raise ParameterError(
                f"K + K' - N = {self.pair.label_length} but n + s = {self.n + self.s}")
        object.__setattr__(self, "delta", Fraction(self.delta))
        object.__setattr__(self, "eta", Fraction(self.eta))

    @property
    def r(self) -> int:
        return self.n // self.s

    @property
    def N(self) -> int:
        return self.pair.N

    @property
    def K(self) -> int:
        return self.pair.K

    @property
    def K2(self) -> int:
        return self.pair.K2

    @property
    def field(self):
        from .field import default_field
        return default_field(self.s)

    def distance_targets(self) -> tuple[int, int]:
        return required_distances(self.N, self.delta, self.eta)

    def check_distances(self) -> bool:
        """Brute-force the distance targets when ``N <= 16``."""
        if self.N > MAX_DISTANCE_N:
            return self.distance_status == "asserted"
        d1, d2 = self.distance_targets()
        return self.pair.c1.min_distance() >= d1 and self.pair.c2.min_distance() >= d2

    def __eq__(self, other):
        if not isinstance(other, ProtocolParams):
            return NotImplemented
        return (self.n, self.s, self.delta, self.eta) == (other.n, other.s, other.delta, other.eta) \
            and _pair_key(self.pair) == _pair_key(other.pair)

    def __hash__(self):
        return hash((self.n, self.s, self.delta, self.eta, _pair_key(self.pair)))


def _pair_key(pair: NestedCodePair):
    return (pair.N, pair.c1.H.tobytes(), pair.c1.H.shape, pair.c2.H.tobytes(),
            pair.c2.H.shape, pair.L.tobytes())


def required_distances(N: int, delta, eta) -> tuple[int, int]:
    """Smallest integers ``>= 2 delta N`` and ``>= 2 (delta + eta) N``."""
    delta, eta = Fraction(delta), Fraction(eta)
    return math.ceil(2 * delta * N), math.ceil(2 * (delta + eta) * N)


def _random_full_rank(rng, rows: int, cols: int) -> np.ndarray:
    while True:
        m = rng.integers(0, 2, size=(rows, cols), dtype=np.uint8)
        if gf2.rank(m) == rows:
            return m


def _split_order(N: int, total: int, delta, eta):
    """Candidate ``(K, K')`` splits with ``K + K' = total``, GV-proportional first."""
    w1 = max(1e-9, 1 - binary_entropy(min(0.5, 2 * float(delta))))
    w2 = max(1e-9, 1 - binary_entropy(min(0.5, 2 * float(delta + eta))))
    ideal = total * w1 / (w1 + w2)
    splits = [(K, total - K) for K in range(max(0, total - N), N + 1) if 0 <= total - K <= N]
    return sorted(splits, key=lambda kk: (abs(kk[0] - ideal), -kk[0]))


def _singleton_ok(N, K, d):
    return d <= 1 or K <= N - d + 1


def size_parameters(n: int, s: int, delta, eta, max_N: int, *, min_N: int | None = None,
                    trials: int = DEFAULT_TRIALS, seed: int = 0) -> ProtocolParams:
    """Find the smallest block length ``N <= max_N`` with a feasible nested pair.

    Random parity-check matrices are drawn (seeded) until both distance
    targets hold; for ``N <= 16`` distances are brute-forced, beyond that the
    rates must sit under the Gilbert-Varshamov curve and distances are marked
    as asserted. ``trials`` is the budget per block length.
    """
    delta, eta = Fraction(delta), Fraction(eta)
    if n <= 0 or s <= 0 or n % s:
        raise ParameterError("n must be a positive multiple of s")
    if not (0 <= delta and 0 <= eta and 2 * delta < Fraction(1, 2)
            and 2 * (delta + eta) < Fraction(1, 2)):
        raise ParameterError("need 0 <= 2 delta < 1/2 and 2 (delta + eta) < 1/2")
    total_trials = 0
    start = max(n + s, min_N or 0)
    for N in range(start, max_N + 1):
        d1, d2 = required_distances(N, delta, eta)
        total = n + s + N
        if d1 <= 1 and d2 <= 1 and N == n + s:
            return ProtocolParams(n, s, delta, eta, trivial_pair(N), "verified", seed)
        verify = N <= MAX_DISTANCE_N
        splits = []
        for K, K2 in _split_order(N, total, delta, eta):
            if not (_singleton_ok(N, K, d1) and _singleton_ok(N, K2, d2)):
                continue
            if not verify:
                if K > N * (1 - binary_entropy(min(0.5, 2 * float(delta)))) + 1e-12:
                    continue
                if K2 > N * (1 - binary_entropy(min(0.5, 2 * float(delta + eta)))) + 1e-12:
                    continue
            splits.append((K, K2))
        if not splits:
            continue
        rng = np.random.default_rng([seed, N])
        for t in range(trials):
            total_trials += 1
            K, K2 = splits[t % len(splits)]
            H1 = _random_full_rank(rng, N - K, N) if K < N else np.zeros((0, N), np.uint8)
            c1 = BinaryLinearCode(H1, N=N)
            if verify and d1 > 1 and c1.min_distance() < d1:
                continue
            gen1 = c1.generator
            coeffs = _random_full_rank(rng, N - K2, K) if K2 < N else np.zeros((0, K), np.uint8)
            H2 = gf2.matmul(coeffs, gen1) if K2 < N else np.zeros((0, N), np.uint8)
            pair = NestedCodePair(H1, H2, N=N)
            if verify and d2 > 1 and pair.c2.min_distance() < d2:
                continue
            status = "verified" if verify else "asserted"
            return ProtocolParams(n, s, delta, eta, pair, status, seed)
    raise SearchExhaustedError(
        f"no nested pair for n={n}, s={s}, delta={delta}, eta={eta} with N <= {max_N}",
        total_trials)


def protocol_params(n: int, s: int, pair: NestedCodePair, delta=0, eta=0) -> ProtocolParams:
    """Wrap a hand-built pair (no search)."""
    return ProtocolParams(n, s, Fraction(delta), Fraction(eta), pair)


def trivial_config(n: int = 2, s: int = 2) -> ProtocolParams:
    """The full-space configuration with ``N = n + s``."""
    return protocol_params(n, s, trivial_pair(n + s))


def hamming_config() -> ProtocolParams:
    """Single-error-correcting configuration: ``C1 =`` [7,4] Hamming, n = s = 2."""
    return protocol_params(2, 2, hamming_full_pair(), delta=Fraction(1, 14))


def even_weight_config() -> ProtocolParams:
    """``N = 4`` with ``C2^perp = {0000, 1111}``: n = s = 1."""
    return protocol_params(1, 1, even_weight_pair(4))
