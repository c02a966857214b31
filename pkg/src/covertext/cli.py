"""Operator commands: encode, decode, bench, session and corpus management.

Exit codes are stable for scripting:
  0 success
  2 input error (missing/malformed files, bad specs)
  3 session fingerprint mismatch
  4 decode integrity failure (support mismatch, framing, coder errors)
  5 provider failure (connection, protocol, nondeterminism)
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

from . import bench as bench_mod
from .errors import (
    CoderError,
    CovertextError,
    InputError,
    ProviderError,
    SessionMismatch,
    VocabularyError,
)
from .methods import method_from_spec
from .metrics import reports_to_table
from .ngram import load_corpus
from .pipeline import Session, SessionConfig, hide_with_traces, reveal
from .vocab import Vocabulary

CONFIG_DIR_ENV = "COVERTEXT_CONFIG_DIR"

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SESSION = 3
EXIT_INTEGRITY = 4
EXIT_PROVIDER = 5


def _exit_code(exc: BaseException) -> int:
    seen = exc
    while seen is not None:
        if isinstance(seen, SessionMismatch):
            return EXIT_SESSION
        if isinstance(seen, ProviderError):
            return EXIT_PROVIDER
        if isinstance(seen, CoderError):
            return EXIT_INTEGRITY
        if isinstance(seen, (InputError, VocabularyError, OSError, json.JSONDecodeError)):
            return EXIT_INPUT
        seen = seen.__cause__
    return EXIT_INPUT


def _resolve(path: str) -> Path:
    p = Path(path)
    if p.exists():
        return p
    config_dir = os.environ.get(CONFIG_DIR_ENV)
    if config_dir and not p.is_absolute():
        candidate = Path(config_dir) / path
        if candidate.exists():
            return candidate
    raise InputError(f"file not found: {path}")


def _load_session(path: str) -> Session:
    return Session(config=SessionConfig.load(_resolve(path)))


def _read_in(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    return _resolve(path).read_bytes()


def _write_out(path: str, data: bytes) -> None:
    if path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
    else:
        Path(path).write_bytes(data)


def cmd_encode(args) -> int:
    session = _load_session(args.session)
    plaintext = _read_in(args.infile)
    text, traces = hide_with_traces(plaintext, session)
    _write_out(args.out, text.encode("utf-8"))
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            for tr in traces:
                fh.write(json.dumps(
                    {"t": tr.t, "token": tr.token, "K": tr.k, "Z_K": tr.z, "kl": tr.kl}
                ) + "\n")
    return EXIT_OK


def cmd_decode(args) -> int:
    session = _load_session(args.session)
    if args.fingerprint and args.fingerprint != session.config.fingerprint():
        raise SessionMismatch(
            f"session fingerprint {session.config.fingerprint()[:12]}... does not match "
            f"expected {args.fingerprint[:12]}..."
        )
    cover_text = _read_in(args.infile).decode("utf-8")
    plaintext = reveal(cover_text, session)
    _write_out(args.out, plaintext)
    try:
        plaintext.decode("utf-8")
    except UnicodeDecodeError:
        print(
            "warning: recovered plaintext is not valid UTF-8; "
            "the session key may be wrong",
            file=sys.stderr,
        )
    return EXIT_OK


def cmd_bench(args) -> int:
    spec = bench_mod.BenchSpec.load(_resolve(args.spec))
    if args.seed is not None:
        spec.seed = args.seed
    result = bench_mod.run_bench(spec, workers=args.workers)
    written = bench_mod.write_outputs(result, args.out)
    print(reports_to_table(result.reports))
    for method_id, error in result.failures.items():
        print(f"FAILED {method_id}: {error}", file=sys.stderr)
    print("\n".join(written), file=sys.stderr)
    return EXIT_OK if result.reports else EXIT_INTEGRITY


def cmd_init_session(args) -> int:
    if args.key_b64:
        import base64

        key = base64.b64decode(args.key_b64)
    elif args.key:
        key = args.key.encode("utf-8")
    else:
        raise InputError("provide --key or --key-b64")
    policy_spec = json.loads(args.policy)
    method_from_spec(policy_spec, precision_bits=args.precision)  # validate early
    corpus_path = _resolve(args.corpus)
    provider_spec = {
        "type": "ngram",
        "corpus": str(corpus_path),
        "order": args.order,
        "smoothing": args.smoothing,
    }
    if args.pin_corpus:
        provider_spec["corpus_sha256"] = hashlib.sha256(corpus_path.read_bytes()).hexdigest()

    context = ()
    if args.context:
        from .ngram import train_ngram

        provider = train_ngram(load_corpus(corpus_path), order=args.order,
                               smoothing=args.smoothing)
        context = tuple(provider.vocabulary.id_of(w) for w in args.context.split())

    config = SessionConfig(
        key=key,
        context=context,
        provider_spec=provider_spec,
        policy_spec=policy_spec,
        precision_bits=args.precision,
    )
    config.save(args.out)
    print(config.fingerprint())
    return EXIT_OK


def cmd_fingerprint(args) -> int:
    config = SessionConfig.load(_resolve(args.session))
    print(config.fingerprint())
    return EXIT_OK


def cmd_vocab(args) -> int:
    corpus = load_corpus(_resolve(args.corpus))
    if not corpus:
        raise InputError(f"corpus {args.corpus} is empty")
    vocab = Vocabulary.from_surfaces(w for s in corpus for w in s)
    vocab.save(args.out)
    print(f"{vocab.size} tokens -> {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="covertext",
                                     description="steganographic entropy coding toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    enc = sub.add_parser("encode", help="hide a plaintext file inside cover text")
    enc.add_argument("--session", required=True)
    enc.add_argument("--in", dest="infile", required=True)
    enc.add_argument("--out", required=True)
    enc.add_argument("--trace", help="write one JSON line per generated token")
    enc.set_defaults(fn=cmd_encode)

    dec = sub.add_parser("decode", help="recover the plaintext from cover text")
    dec.add_argument("--session", required=True)
    dec.add_argument("--in", dest="infile", required=True)
    dec.add_argument("--out", required=True)
    dec.add_argument("--fingerprint", help="expected session fingerprint (hex)")
    dec.set_defaults(fn=cmd_decode)

    ben = sub.add_parser("bench", help="run methods over a message corpus")
    ben.add_argument("--spec", required=True)
    ben.add_argument("--out", required=True)
    ben.add_argument("--workers", type=int, default=1)
    ben.add_argument("--seed", type=int, default=None)
    ben.set_defaults(fn=cmd_bench)

    init = sub.add_parser("init-session", help="write a session config file")
    init.add_argument("--key")
    init.add_argument("--key-b64")
    init.add_argument("--corpus", required=True)
    init.add_argument("--order", type=int, default=3)
    init.add_argument("--smoothing", type=float, default=0.01)
    init.add_argument("--context", default="")
    init.add_argument("--policy", required=True, help='e.g. {"policy":"saac","delta0":0.01}')
    init.add_argument("--precision", type=int, default=26)
    init.add_argument("--pin-corpus", action="store_true",
                      help="record the corpus digest in the session")
    init.add_argument("--out", required=True)
    init.set_defaults(fn=cmd_init_session)

    fpr = sub.add_parser("fingerprint", help="print a session's fingerprint")
    fpr.add_argument("--session", required=True)
    fpr.set_defaults(fn=cmd_fingerprint)

    voc = sub.add_parser("vocab", help="ingest a corpus into a vocabulary file")
    voc.add_argument("--corpus", required=True)
    voc.add_argument("--out", required=True)
    voc.set_defaults(fn=cmd_vocab)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (CovertextError, OSError, json.JSONDecodeError, UnicodeDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
