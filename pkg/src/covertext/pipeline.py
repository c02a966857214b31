"""End-to-end flow: plaintext -> ciphertext -> cover text, and back.

The keystream cipher is a reference construction for pipeline completeness,
not a security claim; real deployments swap in a vetted cipher in front of
the steganographic coder. Both parties derive the session from shared
material and compare fingerprints out of band before decoding anything.
"""

from __future__ import annotations

import base64
import hashlib
import json
from dataclasses import dataclass, field

from .bits import Ciphertext
from .coder import DEFAULT_PRECISION
from .distributions import DistributionProvider
from .errors import CovertextError, InputError, PipelineError, SessionMismatch
from .methods import StegoMethod, method_from_spec
from .ngram import load_corpus, train_ngram
from .vocab import Context

KEYSTREAM_SHA256_CTR = "sha256-ctr"


def keystream(key: bytes, n: int, algorithm: str = KEYSTREAM_SHA256_CTR) -> bytes:
    """Deterministic key-seeded stream: SHA-256 over (key || block counter)."""
    if not key:
        raise InputError("key must be non-empty")
    if algorithm != KEYSTREAM_SHA256_CTR:
        raise InputError(f"unknown keystream algorithm {algorithm!r}")
    out = bytearray()
    counter = 0
    while len(out) < n:
        out.extend(hashlib.sha256(key + counter.to_bytes(8, "big")).digest())
        counter += 1
    return bytes(out[:n])


def encrypt(plaintext: bytes, key: bytes, algorithm: str = KEYSTREAM_SHA256_CTR) -> Ciphertext:
    """XOR with the keystream; with a uniform stream the output bits are
    indistinguishable from fair coin flips."""
    if not plaintext:
        raise InputError("message must be non-empty")
    stream = keystream(key, len(plaintext), algorithm)
    return Ciphertext.from_bytes(bytes(a ^ b for a, b in zip(plaintext, stream)))


def decrypt(ciphertext: Ciphertext, key: bytes, algorithm: str = KEYSTREAM_SHA256_CTR) -> bytes:
    data = ciphertext.to_bytes()
    if len(ciphertext) % 8:
        raise InputError("ciphertext bit length must be a whole number of bytes")
    stream = keystream(key, len(data), algorithm)
    return bytes(a ^ b for a, b in zip(data, stream))


def monobit_sigma(bits) -> float:
    """How many binomial standard deviations the ones-count sits from n/2."""
    n = len(bits)
    ones = sum(bits)
    return abs(ones - n / 2.0) / ((n ** 0.5) / 2.0)


@dataclass(frozen=True)
class SessionConfig:
    """Shared material both parties must derive identically."""

    key: bytes
    context: Context
    provider_spec: dict
    policy_spec: dict
    precision_bits: int = DEFAULT_PRECISION
    keystream_algorithm: str = KEYSTREAM_SHA256_CTR
    detokenizer: str = "whitespace"

    def to_json_dict(self) -> dict:
        return {
            "key": base64.b64encode(self.key).decode("ascii"),
            "context": list(self.context),
            "provider": self.provider_spec,
            "policy": self.policy_spec,
            "precision_bits": self.precision_bits,
            "keystream": self.keystream_algorithm,
            "detokenizer": self.detokenizer,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "SessionConfig":
        try:
            return cls(
                key=base64.b64decode(data["key"]),
                context=tuple(int(t) for t in data["context"]),
                provider_spec=dict(data["provider"]),
                policy_spec=dict(data["policy"]),
                precision_bits=int(data.get("precision_bits", DEFAULT_PRECISION)),
                keystream_algorithm=data.get("keystream", KEYSTREAM_SHA256_CTR),
                detokenizer=data.get("detokenizer", "whitespace"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed session config: {exc}") from exc

    def fingerprint(self) -> str:
        canonical = json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "SessionConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json_dict(json.load(fh))


def provider_from_spec(spec: dict) -> DistributionProvider:
    """Instantiate the distribution provider a session names."""
    kind = spec.get("type")
    if kind == "ngram":
        corpus = load_corpus(spec["corpus"])
        expected = spec.get("corpus_sha256")
        if expected is not None:
            digest = hashlib.sha256(open(spec["corpus"], "rb").read()).hexdigest()
            if digest != expected:
                raise SessionMismatch(
                    f"corpus digest {digest[:12]}... does not match session {expected[:12]}..."
                )
        return train_ngram(
            corpus,
            order=int(spec.get("order", 3)),
            smoothing=float(spec.get("smoothing", 0.01)),
        )
    if kind == "remote":
        from .wire import RemoteProvider

        return RemoteProvider(
            address=spec["address"],
            top_n=int(spec.get("top_n", 512)),
            probe_ctx=tuple(spec.get("probe_ctx", ())),
            vocab_size=spec.get("vocab_size"),
        )
    raise InputError(f"unknown provider spec: {spec!r}")


@dataclass
class Session:
    """A bound session: config plus live provider and coder."""

    config: SessionConfig
    provider: DistributionProvider = field(init=False)
    method: StegoMethod = field(init=False)

    def __post_init__(self):
        self.provider = provider_from_spec(self.config.provider_spec)
        self.method = method_from_spec(
            self.config.policy_spec, precision_bits=self.config.precision_bits
        )

    def close(self):
        self.provider.close()


def _stage(stage: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except PipelineError:
        raise
    except CovertextError as exc:
        raise PipelineError(stage, str(exc)) from exc


def detokenize(tokens, provider: DistributionProvider, detokenizer: str) -> str:
    if detokenizer == "whitespace":
        vocab = provider.vocabulary
        return " ".join(vocab.surface(t) for t in tokens)
    if detokenizer == "ids":
        return " ".join(str(int(t)) for t in tokens)
    raise InputError(f"unknown detokenizer {detokenizer!r}")


def tokenize(text: str, provider: DistributionProvider, detokenizer: str):
    if detokenizer == "whitespace":
        vocab = provider.vocabulary
        return [vocab.id_of(w) for w in text.split()]
    if detokenizer == "ids":
        return [int(w) for w in text.split()]
    raise InputError(f"unknown detokenizer {detokenizer!r}")


def hide_with_traces(plaintext: bytes, session: Session):
    """Like hide(), also returning the per-step coding traces."""
    if not plaintext:
        raise PipelineError("encrypt", "message must be non-empty")
    cfg = session.config
    ciphertext = _stage("encrypt", encrypt, plaintext, cfg.key, cfg.keystream_algorithm)
    cover, traces = _stage(
        "encode", session.method.encode, ciphertext, session.provider, cfg.context
    )
    text = _stage("detokenize", detokenize, cover, session.provider, cfg.detokenizer)
    return text, traces


def hide(plaintext: bytes, session: Session) -> str:
    """plaintext -> cover text string. The introductory context is shared via
    the session and never part of the transmitted cover."""
    text, _ = hide_with_traces(plaintext, session)
    return text


def reveal(cover_text: str, session: Session) -> bytes:
    cfg = session.config
    tokens = _stage("tokenize", tokenize, cover_text, session.provider, cfg.detokenizer)
    ciphertext = _stage(
        "decode", session.method.decode, tokens, session.provider, cfg.context
    )
    return _stage("decrypt", decrypt, ciphertext, cfg.key, cfg.keystream_algorithm)
