"""Text file formats: params, key and transmission files, plus the params digest.

Every file is line oriented ``name = value``; ``#`` starts a comment. Bit
fields are written ``<length>:<HEX>`` with the first bit of the field as the
most significant bit of the (left zero-padded) hexadecimal value, uppercase.
Matrices are ``<rows>x<cols>:<HEX>`` over the row-major concatenation of
their entries.

The params digest is 64-bit FNV-1a (offset basis ``0xcbf29ce484222325``,
prime ``0x100000001b3``) over the UTF-8 bytes of :func:`canonical_params`,
written as 16 lowercase hex digits.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from .bits import as_bits, bits_to_int, int_to_bits
from .codes import NestedCodePair, ProtocolParams
from .errors import ParameterError
from .field import FieldParams

FORMAT_VERSION = 1
PARAMS_BANNER = f"# uncloneable params v{FORMAT_VERSION}"
KEY_BANNER = f"# uncloneable key v{FORMAT_VERSION}"
TX_BANNER = "# SIMULATION ONLY — contains plaintext-equivalent secrets"
TX_VERSION = f"# uncloneable transmission v{FORMAT_VERSION}"

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3


class FormatError(ParameterError):
    """Malformed input file; the message names the file, line and field."""

    def __init__(self, message, *, source="<input>", line=None, field=None):
        where = source if line is None else f"{source}:{line}"
        what = f" [{field}]" if field else ""
        super().__init__(f"{where}{what}: {message}")
        self.source, self.line, self.field = source, line, field


def fnv1a64(data: bytes) -> int:
    h = FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h


# --------------------------------------------------------------------------
# Field encodings


def encode_bits(bits) -> str:
    bits = as_bits(bits)
    if bits.size == 0:
        return "0:"
    return f"{bits.size}:{bits_to_int(bits):0{(bits.size + 3) // 4}X}"


def decode_bits(text: str) -> np.ndarray:
    length, sep, digits = text.strip().partition(":")
    if not sep or not length.isdigit():
        raise ParameterError(f"bit field {text!r} is not of the form <length>:<HEX>")
    length = int(length)
    if length == 0:
        if digits:
            raise ParameterError("zero-length field must have no digits")
        return np.zeros(0, dtype=np.uint8)
    if len(digits) != (length + 3) // 4 or digits != digits.upper():
        raise ParameterError(f"field of {length} bits needs {(length + 3) // 4} uppercase hex digits")
    try:
        value = int(digits, 16)
    except ValueError:
        raise ParameterError(f"invalid hex digits {digits!r}") from None
    return int_to_bits(value, length)


def encode_matrix(matrix) -> str:
    matrix = np.asarray(matrix, dtype=np.uint8)
    rows, cols = matrix.shape
    body = encode_bits(matrix.reshape(-1)).partition(":")[2]
    return f"{rows}x{cols}:{body}"


def decode_matrix(text: str) -> np.ndarray:
    dims, sep, digits = text.strip().partition(":")
    rows, x, cols = dims.partition("x")
    if not sep or not x or not rows.isdigit() or not cols.isdigit():
        raise ParameterError(f"matrix {text!r} is not of the form <rows>x<cols>:<HEX>")
    rows, cols = int(rows), int(cols)
    flat = decode_bits(f"{rows * cols}:{digits}")
    return flat.reshape(rows, cols)


def _fraction_text(x) -> str:
    return str(Fraction(x))


# --------------------------------------------------------------------------
# Params


def params_fields(params: ProtocolParams) -> list[tuple[str, str]]:
    pair = params.pair
    return [
        ("n", str(params.n)),
        ("s", str(params.s)),
        ("N", str(params.N)),
        ("K", str(params.K)),
        ("K2", str(params.K2)),
        ("delta", _fraction_text(params.delta)),
        ("eta", _fraction_text(params.eta)),
        ("reduction_poly", f"{params.field.reduction_poly:X}"),
        ("H1", encode_matrix(pair.c1.H)),
        ("H2", encode_matrix(pair.c2.H)),
        ("L", encode_matrix(pair.L)),
    ]


def canonical_params(params: ProtocolParams) -> str:
    return "".join(f"{k}={v}\n" for k, v in params_fields(params))


def params_digest(params: ProtocolParams) -> str:
    return f"{fnv1a64(canonical_params(params).encode('utf-8')):016x}"


def dump_params(params: ProtocolParams, seed=None) -> str:
    lines = [PARAMS_BANNER, f"digest = {params_digest(params)}"]
    lines += [f"{k} = {v}" for k, v in params_fields(params)]
    lines.append(f"distance_status = {params.distance_status}")
    if seed is not None:
        lines.append(f"seed = {seed}")
    return "\n".join(lines) + "\n"


def parse_fields(text: str, source: str = "<input>", banner: str | None = None):
    """``name -> (value, line number)`` for a ``name = value`` file."""
    lines = text.splitlines()
    if banner is not None and (not lines or lines[0].strip() != banner):
        raise FormatError(f"missing banner {banner!r}", source=source, line=1)
    fields: dict[str, tuple[str, int]] = {}
    for no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        name, sep, value = line.partition("=")
        if not sep:
            raise FormatError("expected 'name = value'", source=source, line=no)
        name = name.strip()
        if name in fields:
            raise FormatError("duplicate field", source=source, line=no, field=name)
        fields[name] = (value.strip(), no)
    return fields


def _take(fields, name, conv, source):
    if name not in fields:
        raise FormatError("missing field", source=source, field=name)
    value, line = fields[name]
    try:
        return conv(value)
    except (ValueError, ZeroDivisionError, ParameterError) as exc:
        raise FormatError(str(exc), source=source, line=line, field=name) from None


def load_params(text: str, source: str = "<params>") -> ProtocolParams:
    f = parse_fields(text, source, PARAMS_BANNER)
    n = _take(f, "n", int, source)
    s = _take(f, "s", int, source)
    poly = _take(f, "reduction_poly", lambda v: int(v, 16), source)
    H1 = _take(f, "H1", decode_matrix, source)
    H2 = _take(f, "H2", decode_matrix, source)
    L = _take(f, "L", decode_matrix, source)
    N = _take(f, "N", int, source)
    try:
        pair = NestedCodePair(H1, H2, L=L, N=N)
    except ParameterError as exc:
        raise FormatError(str(exc), source=source, field="H1/H2/L") from None
    status = f["distance_status"][0] if "distance_status" in f else "verified"
    try:
        FieldParams(s, poly)
        params = ProtocolParams(n, s, _take(f, "delta", Fraction, source),
                                _take(f, "eta", Fraction, source), pair,
                                distance_status=status)
    except ParameterError as exc:
        raise FormatError(str(exc), source=source) from None
    for name, want in (("K", params.K), ("K2", params.K2)):
        if _take(f, name, int, source) != want:
            raise FormatError(f"declared value disagrees with the matrices ({want})",
                              source=source, line=f[name][1], field=name)
    if params.field.reduction_poly != poly:
        raise FormatError("only the built-in reduction polynomial is supported",
                          source=source, line=f["reduction_poly"][1], field="reduction_poly")
    if "digest" in f and f["digest"][0] != params_digest(params):
        raise FormatError("digest does not match the file contents", source=source,
                          line=f["digest"][1], field="digest")
    return params


# --------------------------------------------------------------------------
# Keys


def dump_key(key, params: ProtocolParams, seed=None) -> str:
    lines = [KEY_BANNER, f"params_digest = {params_digest(params)}"]
    for name in ("n", "s", "N", "K", "K2", "delta", "eta"):
        lines.append(f"{name} = {dict(params_fields(params))[name]}")
    lines += [
        f"k = {encode_bits(int_to_bits(key.k, params.s))}",
        f"e = {encode_bits(key.e)}",
        f"c1 = {encode_bits(key.c1)}",
        f"b = {encode_bits(key.b)}",
    ]
    if seed is not None:
        lines.append(f"seed = {seed}")
    return "\n".join(lines) + "\n"


def load_key(text: str, params: ProtocolParams | None = None, source: str = "<key>"):
    """Parse a key file; returns ``(KeyMaterial, params_digest)``."""
    from .protocol import KeyMaterial

    f = parse_fields(text, source, KEY_BANNER)
    digest = _take(f, "params_digest", str, source)
    k = _take(f, "k", decode_bits, source)
    key = KeyMaterial(bits_to_int(k) if k.size else 0,
                      _take(f, "e", decode_bits, source),
                      _take(f, "c1", decode_bits, source),
                      _take(f, "b", decode_bits, source))
    if params is not None:
        if digest != params_digest(params):
            raise FormatError("key was generated for different parameters",
                              source=source, line=f["params_digest"][1], field="params_digest")
        if k.size != params.s:
            raise FormatError(f"expected {params.s} bits", source=source,
                              line=f["k"][1], field="k")
        try:
            key.check(params)
        except ParameterError as exc:
            raise FormatError(str(exc), source=source) from None
    return key, digest


# --------------------------------------------------------------------------
# Transmissions


def dump_transmission(tx) -> str:
    from .qsim import SAMPLED

    lines = [TX_BANNER, TX_VERSION, f"params_digest = {tx.params_digest}"]
    reg = tx.register
    if reg is None:
        lines.append("missing = 1")
        return "\n".join(lines) + "\n"
    lines += [f"mode = {reg.mode}", f"qubits = {reg.n_qubits}"]
    if reg.mode == SAMPLED:
        lines += [f"z = {encode_bits(reg.bits)}", f"b = {encode_bits(reg.bases)}",
                  f"phase = {reg.phase}"]
    else:
        flat = np.asarray(reg.data).reshape(-1)
        pairs = [[float(v.real), float(v.imag)] for v in flat]
        lines.append(f"state = {json.dumps(pairs, separators=(',', ':'))}")
    return "\n".join(lines) + "\n"


def load_transmission(text: str, source: str = "<transmission>"):
    from .protocol import TransmissionDescriptor
    from .qsim import DENSITY, PURE, SAMPLED, QuantumRegister

    lines = text.splitlines()
    if not lines or lines[0].strip() != TX_BANNER:
        raise FormatError("missing simulation banner", source=source, line=1)
    f = parse_fields(text, source)
    digest = _take(f, "params_digest", str, source)
    if "missing" in f:
        return TransmissionDescriptor(None, digest)
    mode = _take(f, "mode", str, source)
    n = _take(f, "qubits", int, source)
    try:
        if mode == SAMPLED:
            z = _take(f, "z", decode_bits, source)
            b = _take(f, "b", decode_bits, source)
            phase = _take(f, "phase", int, source)
            reg = QuantumRegister(SAMPLED, n, bits=z, bases=b, phase=phase % 4)
        elif mode in (PURE, DENSITY):
            pairs = _take(f, "state", json.loads, source)
            flat = np.array([complex(re, im) for re, im in pairs])
            dim = 1 << n
            data = flat if mode == PURE else flat.reshape(dim, dim)
            reg = QuantumRegister(mode, n, data=data)
            reg.check(1e-8)
        else:
            raise FormatError(f"unknown mode {mode!r}", source=source,
                              line=f["mode"][1], field="mode")
    except FormatError:
        raise
    except (ParameterError, ValueError, TypeError) as exc:
        raise FormatError(str(exc), source=source) from None
    return TransmissionDescriptor(reg, digest)


def read_text(path) -> str:
    return Path(path).read_text(encoding="utf-8")
