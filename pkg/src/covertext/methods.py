"""Uniform coder objects over every encoding method, for benches and sessions.

Config-file forms:
  {"policy": "static",  "k": 300}
  {"policy": "saac",    "delta0": 0.01, "schedule": "constant"}
  {"policy": "binlm",   "b": 3}
  {"policy": "huffman", "h": 5}
  {"policy": "patient", "epsilon": 1.0, "seed": 7}

A method instance keeps one derived-table cache per provider (weakly keyed),
so repeated messages against the same provider reuse truncation decisions,
bin tables, and Huffman codes; all cached values are pure functions of the
provider's context key, which is what makes sharing sound.
"""

from __future__ import annotations

import weakref

from . import baselines, coder
from .baselines import BinLMConfig, HuffmanConfig, PatienceConfig
from .bits import Ciphertext
from .errors import InputError
from .truncation import SelfAdjusting, StaticK, policy_from_spec
from .vocab import Context


class StegoMethod:
    """One encoding method bound to its parameters (not to a provider)."""

    def __init__(self, method_id: str, params: dict, policy=None,
                 precision_bits: int = coder.DEFAULT_PRECISION):
        self.method_id = method_id
        self.params = params
        self.policy = policy
        self.precision_bits = precision_bits
        self._caches: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()

    def __repr__(self):
        return f"StegoMethod({self.method_id})"

    def _cache_for(self, provider) -> dict:
        cache = self._caches.get(provider)
        if cache is None:
            cache = {}
            self._caches[provider] = cache
        return cache

    # Arithmetic and baseline kinds share this surface; subclasses bind the
    # actual coder functions.
    def encode_raw(self, bits, provider, ctx: Context = ()):
        raise NotImplementedError

    def decode_raw(self, cover, provider, ctx: Context = ()):
        raise NotImplementedError

    def encode(self, ciphertext: Ciphertext, provider, ctx: Context = ()):
        raise NotImplementedError

    def decode(self, cover, provider, ctx: Context = ()) -> Ciphertext:
        raise NotImplementedError


class _ArithmeticMethod(StegoMethod):
    def encode_raw(self, bits, provider, ctx: Context = ()):
        return coder.encode_raw(
            bits, provider, self.policy, ctx,
            precision_bits=self.precision_bits,
            decision_cache=self._cache_for(provider),
        )

    def decode_raw(self, cover, provider, ctx: Context = ()):
        return coder.decode_raw(
            cover, provider, self.policy, ctx,
            precision_bits=self.precision_bits,
            decision_cache=self._cache_for(provider),
        )

    def encode(self, ciphertext, provider, ctx: Context = ()):
        return coder.encode(
            ciphertext, provider, self.policy, ctx,
            precision_bits=self.precision_bits,
            decision_cache=self._cache_for(provider),
        )

    def decode(self, cover, provider, ctx: Context = ()):
        return coder.decode(
            cover, provider, self.policy, ctx,
            precision_bits=self.precision_bits,
            decision_cache=self._cache_for(provider),
        )


class _BaselineMethod(StegoMethod):
    def __init__(self, method_id, params, cfg, enc_raw, dec_raw, enc, dec):
        super().__init__(method_id, params, policy=None)
        self.cfg = cfg
        self._enc_raw = enc_raw
        self._dec_raw = dec_raw
        self._enc = enc
        self._dec = dec

    def encode_raw(self, bits, provider, ctx: Context = ()):
        return self._enc_raw(bits, provider, self.cfg, ctx,
                             table_cache=self._cache_for(provider))

    def decode_raw(self, cover, provider, ctx: Context = ()):
        return self._dec_raw(cover, provider, self.cfg, ctx,
                             table_cache=self._cache_for(provider))

    def encode(self, ciphertext, provider, ctx: Context = ()):
        return self._enc(ciphertext, provider, self.cfg, ctx,
                         table_cache=self._cache_for(provider))

    def decode(self, cover, provider, ctx: Context = ()):
        return self._dec(cover, provider, self.cfg, ctx,
                         table_cache=self._cache_for(provider))


def method_from_spec(spec: dict, precision_bits: int = coder.DEFAULT_PRECISION) -> StegoMethod:
    kind = spec.get("policy")
    if kind in ("static", "saac"):
        policy = policy_from_spec(spec)
        if isinstance(policy, StaticK):
            method_id = f"arithmetic(k={policy.k})"
        else:
            assert isinstance(policy, SelfAdjusting)
            method_id = f"saac(delta0={policy.delta0},schedule={policy.schedule})"
        return _ArithmeticMethod(method_id, dict(spec), policy, precision_bits)
    if kind == "binlm":
        cfg = BinLMConfig(b=int(spec["b"]))
        return _BaselineMethod(
            f"binlm(b={cfg.b})", dict(spec), cfg,
            baselines.binlm_encode_raw, baselines.binlm_decode_raw,
            baselines.binlm_encode, baselines.binlm_decode,
        )
    if kind == "huffman":
        cfg = HuffmanConfig(h=int(spec["h"]))
        return _BaselineMethod(
            f"huffman(h={cfg.h})", dict(spec), cfg,
            baselines.huffman_encode_raw, baselines.huffman_decode_raw,
            baselines.huffman_encode, baselines.huffman_decode,
        )
    if kind == "patient":
        cfg = PatienceConfig(
            epsilon=float(spec["epsilon"]),
            seed=int(spec.get("seed", 0)),
            h=int(spec.get("h", 5)),
        )
        return _BaselineMethod(
            f"patient(epsilon={cfg.epsilon},h={cfg.h})", dict(spec), cfg,
            baselines.patient_encode_raw, baselines.patient_decode_raw,
            baselines.patient_huffman_encode, baselines.patient_huffman_decode,
        )
    raise InputError(f"unknown method spec: {spec!r}")
