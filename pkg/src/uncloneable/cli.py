"""Command-line front end.

Every subcommand takes ``--seed`` and writes its result to ``--out`` (or
stdout). Exit status: 0 success or ACC, 1 REJ or abort, 2 usage error or
malformed input (with a ``file:line [field]`` diagnostic on stderr).

Typical round trip::

    uncloneable params --n 2 --s 2 --delta 0 --eta 0 --out p.txt
    uncloneable keygen --params p.txt --seed 1 --out k.txt
    uncloneable encrypt --params p.txt --key k.txt --message 10 --seed 2 --out t.txt
    uncloneable attack --params p.txt --tx t.txt --attack ir-z --seed 3 --out t2.txt
    uncloneable decrypt --params p.txt --key k.txt --tx t2.txt --seed 4
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction

import numpy as np

from . import __version__
from . import analysis, qkd
from .adversary import apply_attack, attack_battery, parse_attack
from .bits import as_bits, bits_to_str
from .codes import size_parameters, trivial_config
from .errors import ParameterError, SearchExhaustedError, UncloneableError
from .formats import (FormatError, dump_key, dump_params, dump_transmission, load_key,
                      load_params, load_transmission, params_digest, read_text)
from .protocol import KeyMaterial, TransmissionDescriptor, decrypt, encrypt
from .qsim import PURE, SAMPLED

EXIT_OK, EXIT_REJ, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageFailure(f"{self.prog}: {message}")


class UsageFailure(Exception):
    pass


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _report(payload: dict, args, digest: str | None) -> str:
    payload = {"tool_version": __version__, "seed": args.seed, "config_digest": digest,
               **payload}
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _load_params(path: str):
    return load_params(read_text(path), source=path)


def _rng(args):
    return np.random.default_rng(args.seed)


def _message_bits(text: str, n: int) -> np.ndarray:
    try:
        m = as_bits(text)
    except (ValueError, ParameterError):
        raise ParameterError(f"message {text!r} is not a bit string") from None
    if m.size != n:
        raise ParameterError(f"message must have {n} bits, got {m.size}")
    return m


# --------------------------------------------------------------------------
# Subcommands


def cmd_params(args) -> int:
    params = size_parameters(args.n, args.s, Fraction(args.delta), Fraction(args.eta),
                             max_N=args.max_N, trials=args.trials, seed=args.seed or 0)
    _emit(dump_params(params, args.seed), args.out)
    return EXIT_OK


def cmd_keygen(args) -> int:
    params = _load_params(args.params)
    key = KeyMaterial.generate(params, _rng(args))
    _emit(dump_key(key, params, args.seed), args.out)
    return EXIT_OK


def cmd_encrypt(args) -> int:
    params = _load_params(args.params)
    key, _ = load_key(read_text(args.key), params, source=args.key)
    m = _message_bits(args.message, params.n)
    mode = {"exact": PURE, "sampled": SAMPLED, None: None}[args.engine]
    tx = encrypt(m, key, params, _rng(args), mode)
    _emit(dump_transmission(tx), args.out)
    return EXIT_OK


def cmd_attack(args) -> int:
    params = _load_params(args.params)
    tx = load_transmission(read_text(args.tx), source=args.tx)
    _check_digest(tx, params, args.tx)
    outcome = apply_attack(parse_attack(args.attack), tx, _rng(args))
    forwarded = TransmissionDescriptor(outcome.to_bob.register if outcome.to_bob else None,
                                       tx.params_digest)
    _emit(dump_transmission(forwarded), args.out)
    if args.eve_out:
        eve = {"attack": args.attack, "label": str(outcome.label),
               "eve_bits": None if outcome.eve_bits is None else bits_to_str(outcome.eve_bits),
               "eve_bases": None if outcome.eve_bases is None else bits_to_str(outcome.eve_bases),
               "stolen": outcome.stolen is not None}
        _emit(_report(eve, args, tx.params_digest), args.eve_out)
    return EXIT_OK


def _check_digest(tx, params, source):
    if tx.params_digest != params_digest(params):
        raise FormatError("transmission was produced under different parameters",
                          source=source, field="params_digest")
    reg = tx.register
    if reg is not None and reg.n_qubits != params.N:
        raise FormatError(f"expected {params.N} qubits", source=source, field="qubits")


def cmd_decrypt(args) -> int:
    params = _load_params(args.params)
    key, _ = load_key(read_text(args.key), params, source=args.key)
    tx = load_transmission(read_text(args.tx), source=args.tx)
    _check_digest(tx, params, args.tx)
    result = decrypt(tx, key, params, _rng(args))
    if result.accepted:
        _emit(f"ACC {bits_to_str(result.message)}\n", args.out)
        return EXIT_OK
    _emit(f"REJ {result.reason}\n", args.out)
    return EXIT_REJ


def cmd_verify(args) -> int:
    params = _load_params(args.params) if args.params else trivial_config()
    digest = params_digest(params)
    if args.expect_digest and args.expect_digest != digest:
        raise FormatError(f"config digest is {digest}", source=args.params or "<builtin>",
                          field="digest")
    suite = args.suite
    if suite == "def1":
        pairs = [(a, b) for a in range(1 << params.n) for b in range(a + 1, 1 << params.n)]
        errors = {f"{a},{b}": analysis.encryption_error(params, a, b) for a, b in pairs}
        payload = {"suite": suite, "encryption_error": max(errors.values(), default=0.0),
                   "pairs": errors}
    elif suite == "def2":
        attack = parse_attack(args.attack)
        report = analysis.uncloneability_scan(attack, params, args.m, args.m2, seed=args.seed)
        payload = {"suite": suite, **report.as_dict()}
    elif suite == "sweep":
        payload = {"suite": suite, **analysis.pauli_sweep(params)}
    else:
        attacks = attack_battery(params.N, n_random=args.random_attacks)
        tv = {a.spec: analysis.shor_preskill_check(a, params) for a in attacks}
        payload = {"suite": suite, "tv_distance": tv, "max_tv_distance": max(tv.values())}
    _emit(_report(payload, args, digest), args.out)
    return EXIT_OK


def cmd_qkd(args) -> int:
    params = _load_params(args.params) if args.params else trivial_config()
    attack = parse_attack(args.attack)
    if args.mode == "direct":
        t = qkd.run_direct(params, attack, args.seed or 0, engine=args.engine)
    else:
        t = qkd.run_sifted(params, attack, args.seed or 0, raw_qubits=args.raw_qubits)
    payload = t.as_dict()
    payload["keys_match"] = t.keys_match
    _emit(_report(payload, args, params_digest(params)), args.out)
    return EXIT_OK if t.bob_verdict == qkd.ACC else EXIT_REJ


def cmd_distinguish(args) -> int:
    params = analysis.distinguisher_config()
    source = analysis.KeySource.parse(args.prg)
    out = analysis.compare_sources(analysis.exploit_attack(params), source, args.trials,
                                   _rng(args), params=params)
    payload = {**out, "prg_source": source.spec, "trials": args.trials}
    _emit(_report(payload, args, params_digest(params)), args.out)
    return EXIT_OK


def cmd_bench(args) -> int:
    params = _load_params(args.params) if args.params else trivial_config()
    rng = _rng(args)
    timings = {}
    start = time.perf_counter()
    analysis.encryption_error(params, 0, 1)
    timings["encryption_error_pair"] = time.perf_counter() - start
    start = time.perf_counter()
    analysis.uncloneability_scan(parse_attack("ir-z"), params, 0, 1)
    timings["scan_ir_z"] = time.perf_counter() - start
    start = time.perf_counter()
    for _ in range(args.runs):
        qkd.run_direct(params, None, rng)
    timings[f"qkd_direct_x{args.runs}"] = time.perf_counter() - start
    payload = {"timings_seconds": {k: round(v, 6) for k, v in timings.items()}}
    _emit(_report(payload, args, params_digest(params)), args.out)
    return EXIT_OK


# --------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="uncloneable", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None, help="output file (default stdout)")
        p.set_defaults(func=func)
        return p

    p = add("params", cmd_params, "size a configuration and write a params file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--delta", default="0")
    p.add_argument("--eta", default="0")
    p.add_argument("--max-N", dest="max_N", type=int, default=20)
    p.add_argument("--trials", type=int, default=10000)

    p = add("keygen", cmd_keygen, "draw fresh one-time key material")
    p.add_argument("--params", required=True)

    p = add("encrypt", cmd_encrypt, "encrypt a message into a transmission file")
    p.add_argument("--params", required=True)
    p.add_argument("--key", required=True)
    p.add_argument("--message", required=True, help="bit string of length n")
    p.add_argument("--engine", choices=("exact", "sampled"), default=None)

    p = add("attack", cmd_attack, "pass a transmission through an eavesdropper")
    p.add_argument("--params", required=True)
    p.add_argument("--tx", required=True)
    p.add_argument("--attack", default="identity")
    p.add_argument("--eve-out", default=None, help="write Eve's classical record here")

    p = add("decrypt", cmd_decrypt, "decrypt a transmission; exit 1 on REJ")
    p.add_argument("--params", required=True)
    p.add_argument("--key", required=True)
    p.add_argument("--tx", required=True)

    p = add("verify", cmd_verify, "run an exact analysis suite and emit a JSON report")
    p.add_argument("--suite", choices=("def1", "def2", "sweep", "sp"), required=True)
    p.add_argument("--params", default=None, help="params file (default: trivial N=4)")
    p.add_argument("--expect-digest", default=None, help="refuse to run on another config")
    p.add_argument("--attack", default="ir-z")
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--m2", type=int, default=1)
    p.add_argument("--random-attacks", type=int, default=0)

    p = add("qkd", cmd_qkd, "run one key distribution session")
    p.add_argument("--mode", choices=("direct", "sifted"), default="direct")
    p.add_argument("--params", default=None)
    p.add_argument("--attack", default="identity")
    p.add_argument("--engine", choices=("exact", "sampled"), default=None)
    p.add_argument("--raw-qubits", type=int, default=None)

    p = add("distinguish", cmd_distinguish, "key-reuse distinguisher against a PRG")
    p.add_argument("--prg", default="block:1", help="block:<period> or lfsr16")
    p.add_argument("--trials", type=int, default=500)

    p = add("bench", cmd_bench, "time the main code paths")
    p.add_argument("--params", default=None)
    p.add_argument("--runs", type=int, default=100)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageFailure as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SearchExhaustedError as exc:
        print(f"abort: {exc}", file=sys.stderr)
        return EXIT_REJ
    except (ParameterError, UncloneableError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
