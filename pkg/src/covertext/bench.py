"""Benchmark harness: run methods over a message corpus, collect reports.

Runs are raw-mode (no framing header) so bits/word measures pure coding
efficiency; every encode is round-trip verified against its decoder before
it counts. All randomness flows from the spec's seed, and the same message
list is reused for every method so parameter sweeps compare like for like.
"""

from __future__ import annotations

import json
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .bits import bits_from_bytes
from .errors import CovertextError, InputError
from .methods import StegoMethod, method_from_spec
from .metrics import MessageRecord, MetricsReport, build_report, reports_to_csv
from .ngram import load_corpus, train_ngram
from .vocab import Context

DEFAULT_MIN_BITS = 8
DEFAULT_MAX_BITS = 504  # uniform over 8..504 has mean 256, the reference regime


@dataclass
class BenchSpec:
    corpus: str
    methods: list[dict]
    message_count: int = 100
    seed: int = 0
    min_bits: int = DEFAULT_MIN_BITS
    max_bits: int = DEFAULT_MAX_BITS
    message_files: list[str] = field(default_factory=list)
    message_bit_lengths: list[int] = field(default_factory=list)
    context_text: str = ""
    order: int = 3
    smoothing: float = 0.01
    precision_bits: int = 26

    @classmethod
    def from_json_dict(cls, data: dict) -> "BenchSpec":
        try:
            messages = data.get("messages", {})
            return cls(
                corpus=data["corpus"],
                methods=list(data["methods"]),
                message_count=int(messages.get("count", 100)),
                seed=int(messages.get("seed", data.get("seed", 0))),
                min_bits=int(messages.get("min_bits", DEFAULT_MIN_BITS)),
                max_bits=int(messages.get("max_bits", DEFAULT_MAX_BITS)),
                message_files=list(messages.get("files", [])),
                message_bit_lengths=list(messages.get("bit_lengths", [])),
                context_text=data.get("context", ""),
                order=int(data.get("order", 3)),
                smoothing=float(data.get("smoothing", 0.01)),
                precision_bits=int(data.get("precision_bits", 26)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed bench spec: {exc}") from exc
    @classmethod
    def load(cls, path) -> "BenchSpec":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json_dict(json.load(fh))

    def __post_init__(self):
        if not self.methods:
            raise InputError("bench spec needs at least one method")
        if not (1 <= self.min_bits <= self.max_bits):
            raise InputError("message length bounds must satisfy 1 <= min <= max")


def generate_messages(count: int, seed: int, min_bits: int, max_bits: int) -> list[list[int]]:
    rng = random.Random(seed)
    messages = []
    for _ in range(count):
        length = rng.randint(min_bits, max_bits)
        messages.append([rng.getrandbits(1) for _ in range(length)])
    return messages


def load_message_files(paths, bit_lengths=()) -> list[list[int]]:
    """Read raw big-endian bit-order ciphertext files; the spec envelope may
    pin an exact bit length per file (defaults to all 8*size bits)."""
    if bit_lengths and len(bit_lengths) != len(paths):
        raise InputError("bit_lengths must match message files one to one")
    messages = []
    for i, path in enumerate(paths):
        data = Path(path).read_bytes()
        if not data:
            raise InputError(f"message file {path} is empty")
        bits = bits_from_bytes(data)
        if bit_lengths:
            n = bit_lengths[i]
            if not 1 <= n <= len(bits):
                raise InputError(f"bit length {n} invalid for {path} ({len(bits)} bits)")
            bits = bits[:n]
        messages.append(bits)
    return messages


def run_method(
    method: StegoMethod,
    provider,
    messages,
    ctx: Context = (),
    workers: int = 1,
) -> list[MessageRecord]:
    """Encode every message, verify its round trip, and collect records."""

    def one(bits):
        start = time.perf_counter()
        cover, traces = method.encode_raw(bits, provider, ctx)
        recovered, _ = method.decode_raw(cover, provider, ctx)
        if recovered[: len(bits)] != list(bits):
            raise CovertextError(f"round-trip failure under {method.method_id}")
        elapsed = time.perf_counter() - start
        if method.params.get("policy") == "binlm":
            bits_encoded = len(cover) * int(method.params["b"])
        else:
            bits_encoded = len(bits)
        return MessageRecord(
            bits_encoded=bits_encoded,
            token_count=len(cover),
            traces=traces,
            wall_time=elapsed,
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, messages))
    return [one(bits) for bits in messages]


@dataclass
class BenchResult:
    spec: BenchSpec
    reports: list[MetricsReport]
    failures: dict
    seed: int


def run_bench(spec: BenchSpec, workers: int = 1) -> BenchResult:
    corpus = load_corpus(spec.corpus)
    if not corpus:
        raise InputError(f"corpus {spec.corpus} is empty")
    provider = train_ngram(corpus, order=spec.order, smoothing=spec.smoothing)
    ctx: Context = ()
    if spec.context_text:
        vocab = provider.vocabulary
        ctx = tuple(vocab.id_of(w) for w in spec.context_text.split())

    if spec.message_files:
        messages = load_message_files(spec.message_files, spec.message_bit_lengths)
    else:
        messages = generate_messages(spec.message_count, spec.seed, spec.min_bits, spec.max_bits)

    reports = []
    failures = {}
    for method_spec in spec.methods:
        method = method_from_spec(method_spec, precision_bits=spec.precision_bits)
        try:
            records = run_method(method, provider, messages, ctx, workers=workers)
            reports.append(
                build_report(method.method_id, method.params, records, policy=method.policy)
            )
        except CovertextError as exc:
            failures[method.method_id] = str(exc)
    return BenchResult(spec=spec, reports=reports, failures=failures, seed=spec.seed)


def write_outputs(result: BenchResult, out_dir) -> list[str]:
    """Write per-method JSON, a combined JSON, and the table-layout CSV."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    combined = {
        "schema_version": 1,
        "seed": result.seed,
        "corpus": result.spec.corpus,
        "reports": [rep.to_json_dict() for rep in result.reports],
        "failures": result.failures,
    }
    combined_path = out / "bench.json"
    combined_path.write_text(json.dumps(combined, indent=2, sort_keys=True) + "\n")
    written.append(str(combined_path))
    csv_path = out / "bench.csv"
    csv_path.write_text(reports_to_csv(result.reports))
    written.append(str(csv_path))
    return written
