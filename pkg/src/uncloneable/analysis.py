"""Executable security checks on small, fully enumerable configurations.

The exact engine here works on whole key spaces at once: every key becomes a
row of a batch, states are unnormalized pure vectors, and mixtures (Alice's
private randomness, averages over keys) are kept as ensembles until a
density matrix is needed. Attacks enter through
:meth:`uncloneable.adversary.Attack.branches`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import bits as gf2
from .adversary import Attack, PauliTamper
from .bits import all_vectors, bits_to_int, int_to_bits
from .codes import ProtocolParams, trivial_config
from .errors import CapabilityError, ParameterError
from .formats import params_digest
from .protocol import KeyMaterial, key_length
from .qsim import EXACT_MAX_QUBITS, apply_pauli_vectors, hadamard_layer, parse_pauli
from .tag import tag_index_table, valid_tag_table

MAX_KEYS = 1 << 16
CHUNK = 1 << 21


def _popcount_parity(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.int64).copy()
    out = np.zeros(x.shape, dtype=np.int64)
    while np.any(x):
        out ^= x & 1
        x >>= 1
    return out


# --------------------------------------------------------------------------
# Tables and key enumeration


class CodeTables:
    """Integer lookup tables for one configuration (bit strings as ints)."""

    def __init__(self, params: ProtocolParams):
        if params.N > EXACT_MAX_QUBITS:
            raise CapabilityError(f"exact analysis needs N <= {EXACT_MAX_QUBITS}")
        self.params = params
        pair = params.pair
        self.N, self.n, self.s = params.N, params.n, params.s
        self.r1 = params.N - params.K
        self.r2 = params.N - params.K2
        self.ns = params.n + params.s
        self.leaders1 = pair.c1.decode_table
        self.leaders2 = pair.c2.decode_table
        if self.leaders1 is None or self.leaders2 is None:
            raise CapabilityError("exact analysis needs decode tables")
        idx = np.arange(1 << self.N, dtype=np.int64)
        self.syndrome1 = pair.c1.syndrome_int(idx)
        self.syndrome2 = pair.c2.syndrome_int(idx)
        self.label = pair.label_int(idx)
        # z0[c1, y]: the linear coset representative.
        inputs = all_vectors(self.r1 + self.ns)
        reps = gf2.matmul(inputs, pair._right_inverse.T)
        self.z0 = gf2.pack_rows(reps).reshape(1 << self.r1, 1 << self.ns) if reps.size else \
            np.zeros((1 << self.r1, 1 << self.ns), dtype=np.int64)
        self.shifts = gf2.pack_rows(gf2.span(pair.c2_perp)) if self.r2 else \
            np.zeros(1, dtype=np.int64)
        a = np.arange(1 << self.r2, dtype=np.int64)
        self.walsh = 1 - 2 * _popcount_parity(a[:, None] & a[None, :])
        self.tag_index = tag_index_table(params.field, params.r)
        self.valid = valid_tag_table(params.field, params.r)

    def outcome_table(self, keys: "KeyBatch") -> np.ndarray:
        """Bob's classical result for every key and measured string.

        Entry ``[key, x]`` is the decoded message index, or -1 for REJ.
        """
        x = np.arange(1 << self.N, dtype=np.int64)[None, :]
        syn = self.syndrome1[x]
        corrected = x ^ self.leaders1[syn ^ keys.c1[:, None]]
        tagged = self.label[corrected] ^ keys.e[:, None]
        ok = self.valid[keys.k[:, None], tagged]
        return np.where(ok, tagged >> self.s, -1)


@dataclass(frozen=True)
class KeyBatch:
    """A batch of keys as integer arrays (bit strings packed MSB first)."""

    k: np.ndarray
    e: np.ndarray
    c1: np.ndarray
    b: np.ndarray
    c2: np.ndarray

    @property
    def size(self) -> int:
        return int(self.k.size)

    def key(self, i: int, params: ProtocolParams) -> KeyMaterial:
        return KeyMaterial(int(self.k[i]), int_to_bits(int(self.e[i]), params.n + params.s),
                           int_to_bits(int(self.c1[i]), params.N - params.K),
                           self.b[i].copy())

    def key_id(self, i: int, params: ProtocolParams) -> str:
        key = self.key(i, params)
        c1 = gf2.bits_to_str(key.c1) or "-"
        return f"k={key.k} e={gf2.bits_to_str(key.e)} c1={c1} b={gf2.bits_to_str(key.b)}"

    def take(self, idx) -> "KeyBatch":
        return KeyBatch(self.k[idx], self.e[idx], self.c1[idx], self.b[idx], self.c2[idx])


def enumerate_keys(params: ProtocolParams, fixed: dict | None = None,
                   include_c2: bool = False, limit: int = MAX_KEYS) -> KeyBatch:
    """Every key ``(k, e, c1, b)`` (and ``c2`` if asked), ``k`` varying slowest.

    ``fixed`` freezes named parts, e.g. ``{"e": 0}`` (ints or bit strings).
    """
    fixed = dict(fixed or {})
    sizes = {"k": params.s, "e": params.n + params.s, "c1": params.N - params.K,
             "b": params.N, "c2": (params.N - params.K2) if include_c2 else 0}
    unknown = set(fixed) - set(sizes)
    if unknown:
        raise ParameterError(f"unknown key parts {sorted(unknown)}")
    ranges = []
    for name, width in sizes.items():
        if name in fixed:
            v = fixed[name]
            v = int(v) if isinstance(v, (int, np.integer)) else bits_to_int(gf2.as_bits(v, width))
            if name == "k":
                params.field.check(v)
            elif v >> width:
                raise ParameterError(f"{name}={v} does not fit in {width} bits")
            ranges.append(np.array([v], dtype=np.int64))
        else:
            ranges.append(np.arange(1 << width, dtype=np.int64))
    total = int(np.prod([r.size for r in ranges]))
    if total > limit:
        raise CapabilityError(f"{total} keys exceed the enumeration limit {limit}")
    grids = np.meshgrid(*ranges, indexing="ij")
    k, e, c1, b, c2 = (g.reshape(-1) for g in grids)
    bbits = ((b[:, None] >> np.arange(params.N - 1, -1, -1)) & 1).astype(np.uint8)
    return KeyBatch(k, e, c1, bbits, c2)


def _message_index(m, params: ProtocolParams) -> int:
    if isinstance(m, (int, np.integer)):
        if not 0 <= int(m) < 1 << params.n:
            raise ParameterError(f"message index {m} out of range")
        return int(m)
    return bits_to_int(gf2.as_bits(m, params.n))


# --------------------------------------------------------------------------
# Prepare-and-measure exact engine


def prepared_vectors(tables: CodeTables, keys: KeyBatch, m: int) -> np.ndarray:
    """``H^b |z>`` for every key and every value of Alice's private bits.

    Shape ``(keys, 2**(N-K'), 2**N)``; each row has unit norm.
    """
    y = tables.tag_index[keys.k, m] ^ keys.e
    z = tables.z0[keys.c1, y][:, None] ^ tables.shifts[None, :]
    vecs = np.zeros(z.shape + (1 << tables.N,), dtype=complex)
    np.put_along_axis(vecs, z[..., None], 1.0, axis=-1)
    return hadamard_layer(vecs, keys.b[:, None, :], tables.N)


def _bob_frame(arr: np.ndarray, keys: KeyBatch, n_qubits: int) -> np.ndarray:
    """Rotate Bob's qubits so a Z measurement is a measurement in ``b``."""
    extra = arr.ndim - 2
    b = keys.b.reshape((keys.size,) + (1,) * extra + (n_qubits,))
    return hadamard_layer(arr, b, n_qubits)


def encryption_error(params: ProtocolParams, m, m2, fixed: dict | None = None) -> float:
    """``D(sigma(m), sigma(m2))`` with ``sigma`` the key-averaged transmitted state.

    ``fixed`` freezes key parts (to study deliberately weakened schemes).
    """
    from .qsim import trace_distance

    tables = CodeTables(params)
    keys = enumerate_keys(params, fixed)
    i, j = _message_index(m, params), _message_index(m2, params)
    if i == j:
        return 0.0
    i, j = min(i, j), max(i, j)  # exact symmetry in the arguments
    return trace_distance(_average_state(tables, keys, i), _average_state(tables, keys, j))


def _average_state(tables, keys, m) -> np.ndarray:
    d = 1 << tables.N
    rho = np.zeros((d, d), dtype=complex)
    per_key = (1 << tables.r2) * d
    step = max(1, CHUNK // per_key)
    count = 0
    for start in range(0, keys.size, step):
        part = keys.take(slice(start, start + step))
        v = prepared_vectors(tables, part, m).reshape(-1, d)
        rho += v.T @ v.conj()
        count += v.shape[0]
    return rho / count


def acceptance_probability(attack: Attack, params: ProtocolParams, m=0,
                           fixed: dict | None = None) -> float:
    """Key-averaged probability that Bob accepts after ``attack``."""
    tables = CodeTables(params)
    keys = enumerate_keys(params, fixed)
    return float(np.mean(_scan_arrays(attack, tables, keys, _message_index(m, params))[1]))


def _scan_arrays(attack: Attack, tables: CodeTables, keys: KeyBatch, m: int):
    """Per-label residual blocks ``A_l`` and per-key acceptance ``P(m)``.

    ``A_l[key]`` is Eve's unnormalized state (her quantum part) jointly with
    Bob accepting, averaged over Alice's private bits.
    """
    if attack.blocks:
        return [], np.zeros(keys.size)
    outcomes = tables.outcome_table(keys)
    accept = (outcomes >= 0).astype(float)
    vecs = prepared_vectors(tables, keys, m)
    blocks = []
    p_acc = np.zeros(keys.size)
    for label, arr in attack.branches(vecs, tables.N):
        u = _bob_frame(arr, keys, tables.N)
        a = np.einsum("kzex,kzfx,kx->kef", u, u.conj(), accept) / vecs.shape[1]
        blocks.append((label, a))
        p_acc += np.real(np.trace(a, axis1=1, axis2=2))
    return blocks, p_acc


def epsilon_empirical(distances) -> float:
    """Smallest ``eps`` with at least a ``1 - eps`` fraction of distances ``<= eps``."""
    d = np.sort(np.asarray(distances, dtype=float))
    total = d.size
    if total == 0:
        return 0.0
    best = 1.0
    for j in range(total + 1):
        bound = d[j - 1] if j else 0.0
        best = min(best, max(bound, 1.0 - j / total))
    return float(min(1.0, max(0.0, best)))


@dataclass
class AnalysisReport:
    """Per-key table of one uncloneability scan.

    ``rows`` hold ``key_id``, ``p_m``, ``p_m2`` and ``distance`` (the trace
    distance between Eve's accept-weighted residuals for the two messages).
    ``key_fraction`` is the fraction of keys with distance at most
    ``epsilon_empirical``.
    """

    attack: str
    messages: tuple
    rows: list
    epsilon_empirical: float
    config_digest: str
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    @property
    def distances(self) -> np.ndarray:
        return np.array([r["distance"] for r in self.rows])

    @property
    def p_m(self) -> np.ndarray:
        return np.array([r["p_m"] for r in self.rows])

    @property
    def p_m2(self) -> np.ndarray:
        return np.array([r["p_m2"] for r in self.rows])

    @property
    def key_fraction(self) -> float:
        return float(np.mean(self.distances <= self.epsilon_empirical + 1e-15))

    def as_dict(self) -> dict:
        return {
            "attack": self.attack,
            "messages": list(self.messages),
            "epsilon_empirical": self.epsilon_empirical,
            "key_fraction": self.key_fraction,
            "max_distance": float(self.distances.max()) if self.rows else 0.0,
            "mean_acceptance_m": float(self.p_m.mean()) if self.rows else 0.0,
            "mean_acceptance_m2": float(self.p_m2.mean()) if self.rows else 0.0,
            "rows": self.rows,
            "seed": self.seed,
            "config_digest": self.config_digest,
            **self.meta,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)


def uncloneability_scan(attack: Attack, params: ProtocolParams, m, m2,
                        fixed: dict | None = None, seed: int | None = None) -> AnalysisReport:
    """Run every key through encrypt, ``attack`` and Bob's decoder exactly."""
    tables = CodeTables(params)
    keys = enumerate_keys(params, fixed)
    i, j = _message_index(m, params), _message_index(m2, params)
    blocks_a, p_a = _scan_arrays(attack, tables, keys, i)
    blocks_b, p_b = _scan_arrays(attack, tables, keys, j)
    dist = np.zeros(keys.size)
    for (_, a), (_, b) in zip(blocks_a, blocks_b):
        dist += 0.5 * np.abs(np.linalg.eigvalsh((a - b + np.conj(np.swapaxes(a - b, 1, 2))) / 2)
                             ).sum(axis=1)
    dist = np.clip(dist, 0.0, 1.0)
    rows = [{"key_id": keys.key_id(x, params), "p_m": round(float(p_a[x]), 15),
             "p_m2": round(float(p_b[x]), 15), "distance": round(float(dist[x]), 15)}
            for x in range(keys.size)]
    return AnalysisReport(attack.spec, (i, j), rows, epsilon_empirical(dist),
                          params_digest(params), seed)


# --------------------------------------------------------------------------
# Coherent exact engine


def coherent_vectors(tables: CodeTables, keys: KeyBatch, phi) -> np.ndarray:
    """Coherent encodings of the message state ``phi`` for every key (with ``c2``)."""
    phi = np.asarray(phi, dtype=complex)
    N = tables.N
    out = np.zeros((keys.size, 1 << N), dtype=complex)
    rows = np.arange(keys.size)
    a = np.arange(1 << tables.r2, dtype=np.int64)
    signs = (1 - 2 * _popcount_parity(keys.c2[:, None] & a[None, :])) / np.sqrt(a.size)
    for m in np.nonzero(phi)[0]:
        y = tables.tag_index[keys.k, m] ^ keys.e
        z0 = tables.z0[keys.c1, y]
        for col, w in enumerate(tables.shifts):
            out[rows, z0 ^ w] += phi[m] * signs[:, col]
    return hadamard_layer(out, keys.b, N)


def coherent_decode_batch(tables: CodeTables, keys: KeyBatch, vecs: np.ndarray) -> np.ndarray:
    """ACC-branch message amplitudes for a batch of (key, Eve) states.

    ``vecs`` has shape ``(keys, d_E, 2**N)``. Returns ``(keys, d_E, S1, S2,
    2**n)``: for each bit syndrome ``s1`` and phase syndrome ``s2`` the
    corrected, decoded message register restricted to valid tags.

    After projecting onto syndromes ``(s1, s2)`` and applying the leader
    corrections, the amplitude on codeword ``psi_y`` reduces to
    ``2^{-r2/2} (-1)^{l2 . z0(y)} sum_a (-1)^{s2 . a} v[z0(y) ^ l1 ^ w(a)]``.
    """
    N = tables.N
    v = _bob_frame(vecs, keys, N)
    B = keys.size
    n_y = 1 << tables.ns
    s1 = np.arange(1 << tables.r1, dtype=np.int64)
    s2 = np.arange(1 << tables.r2, dtype=np.int64)
    l1 = tables.leaders1[s1[None, :] ^ keys.c1[:, None]]                  # (B, S1)
    l2 = tables.leaders2[s2[None, :] ^ keys.c2[:, None]]                  # (B, S2)
    z0 = tables.z0[keys.c1]                                               # (B, Y)
    x = (z0[:, None, :, None] ^ l1[:, :, None, None]) ^ tables.shifts[None, None, None, :]
    rows = np.arange(B)[:, None, None, None]
    g = v[rows, :, x]                                         # (B, S1, Y, A, d_E)
    f = np.einsum("sa,bpyae->bepsy", tables.walsh, g) / np.sqrt(tables.shifts.size)
    sign = 1 - 2 * _popcount_parity(l2[:, :, None] & z0[:, None, :])     # (B, S2, Y)
    f = f * sign[:, None, None, :, :]
    y_of_m = tables.tag_index[keys.k] ^ keys.e[:, None]                   # (B, M)
    idx = np.broadcast_to(y_of_m[:, None, None, None, :], f.shape[:-1] + (y_of_m.shape[1],))
    assert f.shape[-1] == n_y
    return np.take_along_axis(f, idx, axis=-1)


def _bad_mass(acc: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """Per-key ``Tr[(|ACC><ACC| x (I - |psi><psi|)) rho]`` from ACC amplitudes."""
    psi = psi / np.linalg.norm(psi)
    flat = acc.reshape(acc.shape[0], -1, acc.shape[-1])
    total = np.sum(np.abs(flat) ** 2, axis=(1, 2))
    overlap = np.sum(np.abs(flat @ psi.conj()) ** 2, axis=1)
    return np.maximum(0.0, total - overlap)


def coherent_bad_mass(attack: Attack, tables: CodeTables, keys: KeyBatch, phi) -> np.ndarray:
    """Per-key probability of ACC with a message orthogonal to ``phi``."""
    phi = np.asarray(phi, dtype=complex)
    if attack.blocks:
        return np.zeros(keys.size)
    vecs = coherent_vectors(tables, keys, phi / np.linalg.norm(phi))
    bad = np.zeros(keys.size)
    for _, arr in attack.branches(vecs, tables.N):
        bad += _bad_mass(coherent_decode_batch(tables, keys, arr), phi)
    return bad


def canonical_inputs(params: ProtocolParams) -> list[np.ndarray]:
    """The basis state ``|0...0>`` and ``(|0...0> + |1...1>)/sqrt(2)``."""
    M = 1 << params.n
    basis = np.zeros(M, dtype=complex)
    basis[0] = 1
    sup = basis.copy()
    sup[M - 1] += 1
    return [basis, sup / np.linalg.norm(sup)]


# --------------------------------------------------------------------------
# Pauli sweep


def conjugate_by_hadamards(xs, zs, b):
    """``H^b E H^b`` up to phase: swap the X and Z parts where ``b = 1``."""
    b = np.asarray(b, dtype=np.uint8)
    return np.where(b, zs, xs).astype(np.uint8), np.where(b, xs, zs).astype(np.uint8)


@dataclass(frozen=True)
class SweepPrediction:
    handled_fraction: float
    phase_slack: float
    worst_tag_slice: float


def predict_sweep(params: ProtocolParams, pauli, tables: CodeTables | None = None
                  ) -> SweepPrediction:
    """Pauli-algebra prediction of the sweep for one error ``E``.

    For each ``b``: after the frame change the X part, less its ``C1``
    correction, shifts the label by ``dy``; the Z part, less its ``C2``
    correction, multiplies codeword ``psi_y`` by ``(-1)^{lambda . y}``. With
    ``dy != 0`` Bob accepts exactly when the tamper polynomial vanishes at
    ``k``; with ``dy = 0`` he always accepts and the superposition input is
    spoiled when ``lambda`` separates the two tagged strings.
    """
    tables = tables or CodeTables(params)
    xs, zs = parse_pauli(pauli)
    N = params.N
    k_all = np.arange(params.field.order)
    handled = 0.0
    slack = 0
    worst = 0.0
    m_hi = (1 << params.n) - 1
    dt = tables.tag_index[:, 0] ^ tables.tag_index[:, m_hi]
    for b in all_vectors(N):
        ex, ez = conjugate_by_hadamards(xs, zs, b)
        rx, rz = bits_to_int(ex), bits_to_int(ez)
        res_x = rx ^ int(tables.leaders1[tables.syndrome1[rx]])
        res_z = rz ^ int(tables.leaders2[tables.syndrome2[rz]])
        dy = int(tables.label[res_x])
        if dy:
            fails = tables.valid[k_all, dy]          # tamper string passes the tag
            handled += 1.0 - fails.mean()
            worst = max(worst, float(fails.mean()))
        else:
            phase_fn = _popcount_parity(res_z & tables.z0[0])   # lambda . y for every y
            if phase_fn.any():
                slack += 1
            spoiled = phase_fn[dt]
            handled += 1.0 - spoiled.mean()
    total = 1 << N
    return SweepPrediction(handled / total, slack / total, worst)


def all_paulis(n_qubits: int, include_identity: bool = False) -> list[str]:
    from itertools import product as _product

    out = ["".join(p) for p in _product("IXYZ", repeat=n_qubits)]
    return out if include_identity else out[1:]


def pauli_sweep(params: ProtocolParams, tolerance: float = 1e-9) -> dict:
    """Handled fraction of keys for every non-identity Pauli error.

    A key handles ``E`` when the bad-subspace mass stays below
    ``tolerance`` for both canonical inputs.
    """
    if params.N > 4:
        raise CapabilityError("the Pauli sweep is limited to N <= 4")
    tables = CodeTables(params)
    keys = enumerate_keys(params, include_c2=True)
    inputs = canonical_inputs(params)
    encoded = [coherent_vectors(tables, keys, phi) for phi in inputs]
    rows = []
    for pauli in all_paulis(params.N):
        ok = np.ones(keys.size, dtype=bool)
        for phi, vecs in zip(inputs, encoded):
            tampered = apply_pauli_vectors(vecs, pauli, params.N)[:, None, :]
            bad = _bad_mass(coherent_decode_batch(tables, keys, tampered), phi)
            ok &= bad <= tolerance
        pred = predict_sweep(params, pauli, tables)
        frac = float(ok.mean())
        rows.append({
            "pauli": pauli,
            "handled_fraction": frac,
            "predicted_fraction": float(pred.handled_fraction),
            "phase_slack": pred.phase_slack,
            "worst_tag_slice": pred.worst_tag_slice,
            "bound": 1.0 - params.r / params.field.order - pred.phase_slack,
        })
    return {
        "rows": rows,
        "min_handled_fraction": min(r["handled_fraction"] for r in rows),
        "tag_bound": params.r / params.field.order,
        "tolerance": tolerance,
        "config_digest": params_digest(params),
    }


def basis_mixing_stats(pauli, trials: int, rng) -> dict:
    """X-part weight of ``H^b E H^b`` over uniformly random ``b``.

    Exact law: the Y positions always contribute, every X or Z position
    contributes with probability 1/2.
    """
    xs, zs = parse_pauli(pauli)
    n = xs.size
    n_y = int(np.count_nonzero(xs & zs))
    n_free = int(np.count_nonzero(xs ^ zs))
    bs = rng.integers(0, 2, size=(trials, n), dtype=np.uint8)
    weights = np.array([int(conjugate_by_hadamards(xs, zs, b)[0].sum()) for b in bs])
    hist = np.bincount(weights, minlength=n + 1)[:n + 1]
    exact = np.zeros(n + 1)
    exact[n_y:n_y + n_free + 1] = stats.binom.pmf(np.arange(n_free + 1), n_free, 0.5)
    support = exact > 0
    if support.sum() > 1:
        p_value = float(stats.chisquare(hist[support], exact[support] * trials).pvalue)
    else:
        p_value = 1.0 if np.all(hist[~support] == 0) else 0.0
    return {"histogram": hist.tolist(), "exact": exact.tolist(),
            "expected_weight": n_y + n_free / 2, "mean_weight": float(weights.mean()),
            "chi2_pvalue": p_value, "trials": trials}


# --------------------------------------------------------------------------
# Measuring before sending


def shor_preskill_check(attack: Attack, params: ProtocolParams) -> float:
    """Largest total-variation distance, over keys and messages, between Bob's
    ``(verdict, message)`` law in the coherent protocol (averaged over ``c2``)
    and in the prepare-and-measure protocol (averaged over Alice's pad)."""
    if params.N > 6:
        raise CapabilityError("the equivalence check is limited to N <= 6")
    tables = CodeTables(params)
    keys = enumerate_keys(params)
    M = 1 << params.n
    outcomes = tables.outcome_table(keys)
    n_c2 = 1 << tables.r2
    worst = 0.0
    for m in range(M):
        pm = np.zeros((keys.size, M))
        coh = np.zeros((keys.size, M))
        if not attack.blocks:
            vecs = prepared_vectors(tables, keys, m)
            for _, arr in attack.branches(vecs, tables.N):
                u = _bob_frame(arr, keys, tables.N)
                probs = np.sum(np.abs(u) ** 2, axis=2).mean(axis=1)       # (B, 2^N)
                for msg in range(M):
                    pm[:, msg] += np.sum(np.where(outcomes == msg, probs, 0), axis=1)
            phi = np.zeros(M, dtype=complex)
            phi[m] = 1
            for c2 in range(n_c2):
                kc = KeyBatch(keys.k, keys.e, keys.c1, keys.b, np.full(keys.size, c2))
                cvecs = coherent_vectors(tables, kc, phi)
                for _, arr in attack.branches(cvecs, tables.N):
                    acc = coherent_decode_batch(tables, kc, arr)
                    coh += np.sum(np.abs(acc) ** 2, axis=(1, 2, 3)) / n_c2
        tv = 0.5 * (np.abs(pm - coh).sum(axis=1) + np.abs(pm.sum(1) - coh.sum(1)))
        worst = max(worst, float(tv.max()))
    return worst


# --------------------------------------------------------------------------
# Pseudorandom keys


def lfsr16_bits(seed: int, length: int) -> np.ndarray:
    """Fibonacci LFSR with feedback polynomial x^16 + x^14 + x^13 + x^11 + 1."""
    state = int(seed) & 0xFFFF
    if state == 0:
        raise ParameterError("LFSR seed must be nonzero")
    out = np.zeros(length, dtype=np.uint8)
    for i in range(length):
        out[i] = state & 1
        fb = (state ^ (state >> 2) ^ (state >> 3) ^ (state >> 5)) & 1
        state = (state >> 1) | (fb << 15)
    return out


@dataclass(frozen=True)
class KeySource:
    """Where key bits come from.

    ``kind`` is ``"random"``, ``"block"`` (a ``period``-bit block repeated)
    or ``"lfsr16"``. With ``seed`` set, one stream is expanded from it and
    successive keys read consecutive chunks; otherwise every key gets a
    fresh seed drawn from the caller's rng.
    """

    kind: str = "random"
    period: int | None = None
    seed: tuple | int | None = None

    def __post_init__(self):
        if self.kind not in ("random", "block", "lfsr16"):
            raise ParameterError(f"unknown key source {self.kind!r}")
        if self.kind == "block" and (self.period is None or self.period < 1):
            raise ParameterError("block sources need a positive period")

    @classmethod
    def parse(cls, text: str) -> "KeySource":
        head, _, rest = text.strip().lower().partition(":")
        if head == "block":
            if not rest.isdigit():
                raise ParameterError("block source needs an integer period")
            return cls("block", int(rest))
        if head in ("lfsr16", "random") and not rest:
            return cls(head)
        raise ParameterError(f"unknown key source {text!r}")

    @property
    def spec(self) -> str:
        return f"block:{self.period}" if self.kind == "block" else self.kind

    def _expand(self, seed, length: int) -> np.ndarray:
        if self.kind == "block":
            block = gf2.as_bits(seed, self.period)
            return np.resize(block, length).astype(np.uint8)
        return lfsr16_bits(int(seed), length)

    def _fresh_seed(self, rng):
        if self.kind == "block":
            return rng.integers(0, 2, size=self.period, dtype=np.uint8)
        return int(rng.integers(1, 1 << 16))

    def keys(self, length: int, count: int, rng) -> np.ndarray:
        """``count`` key strings of ``length`` bits."""
        if self.kind == "random":
            return rng.integers(0, 2, size=(count, length), dtype=np.uint8)
        if self.seed is not None:
            return self._expand(self.seed, length * count).reshape(count, length)
        return np.array([self._expand(self._fresh_seed(rng), length) for _ in range(count)])


def distinguisher_config() -> ProtocolParams:
    """``n = s = 5`` over the trivial pair (``N = 10``)."""
    return trivial_config(5, 5)


def exploit_attack(params: ProtocolParams) -> PauliTamper:
    """Bit flips on every tag-register qubit.

    When the bases of those qubits are all X, the flips turn into phase flips
    that slip past the tag check and rotate ``|m> + |m'>`` toward
    ``|m> - |m'>``; a key stream that repeats a single bit produces that
    situation half of the time.
    """
    return PauliTamper("I" * params.n + "X" * params.s)


def exploit_messages(params: ProtocolParams) -> tuple[int, int]:
    """``(0, m')`` whose tags under the all-ones key differ in odd parity."""
    k = params.field.order - 1
    tags = gf2_tag_register(params, k)
    for m2 in range(1, 1 << params.n):
        if bin(int(tags[m2] ^ tags[0])).count("1") & 1:
            return 0, m2
    raise ParameterError("no message pair with odd tag parity")


def gf2_tag_register(params: ProtocolParams, k: int) -> np.ndarray:
    return tag_index_table(params.field, params.r)[k] & ((1 << params.s) - 1)


@dataclass(frozen=True)
class DistinguisherResult:
    verdict: str
    events: int
    trials: int
    rate: float
    ci_low: float
    ci_high: float
    mean_bad_mass: float
    source: str
    attack: str

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def clopper_pearson(events: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    alpha = 1 - confidence
    lo = 0.0 if events == 0 else float(stats.beta.ppf(alpha / 2, events, trials - events + 1))
    hi = 1.0 if events == trials else float(stats.beta.ppf(1 - alpha / 2, events + 1, trials - events))
    return lo, hi


def distinguisher(attack: Attack, source: KeySource, trials: int, rng,
                  params: ProtocolParams | None = None, messages=None) -> DistinguisherResult:
    """Simulated Alice and Bob with keys drawn from ``source``.

    Each trial encodes ``(|m> + |m'>)/sqrt(2)`` coherently, applies ``attack``
    and measures Bob's output in a basis containing the input. The event
    "accepted and orthogonal" fires with the exact bad-subspace probability.
    The verdict is ``"pseudorandom"`` iff any event fires.
    """
    params = params or distinguisher_config()
    m, m2 = messages if messages is not None else exploit_messages(params)
    tables = CodeTables(params)
    width = key_length(params) + (params.N - params.K2)
    streams = source.keys(width, trials, rng)
    phi = np.zeros(1 << params.n, dtype=complex)
    phi[m] = phi[m2] = 1
    events = 0
    masses = np.zeros(trials)
    for t in range(trials):
        kb = _batch_from_stream(streams[t], params)
        masses[t] = coherent_bad_mass(attack, tables, kb, phi)[0]
        events += int(rng.random() < masses[t])
    lo, hi = clopper_pearson(events, trials)
    verdict = "pseudorandom" if events else "random"
    return DistinguisherResult(verdict, events, trials, events / trials, lo, hi,
                               float(masses.mean()), source.spec, attack.spec)


def _batch_from_stream(stream, params: ProtocolParams) -> KeyBatch:
    key = KeyMaterial.from_bits(stream[:key_length(params)], params)
    c2 = stream[key_length(params):]
    return KeyBatch(np.array([key.k]), np.array([bits_to_int(key.e)]),
                    np.array([bits_to_int(key.c1)]), key.b[None, :],
                    np.array([bits_to_int(c2)]))


def compare_sources(attack: Attack, source: KeySource, trials: int, rng,
                    params: ProtocolParams | None = None) -> dict:
    """Run the distinguisher on ``source`` and on true randomness."""
    prg = distinguisher(attack, source, trials, rng, params)
    rand = distinguisher(attack, KeySource("random"), trials, rng, params)
    return {"prg": prg.as_dict(), "random": rand.as_dict(),
            "advantage": prg.rate - rand.rate}
