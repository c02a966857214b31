"""Causal-LM backend: next-token distributions at temperature 1.

Determinism is the load-bearing property: the steganographic decoder replays
the encoder's distributions, so two queries with the same context must return
identical bytes. Deterministic mode pins seeds and disables nondeterministic
kernels; cross-process determinism on one machine follows for CPU inference,
but cross-machine bit-identity is runtime-dependent and not claimed.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ServerConfig:
    model_path: str
    top_n_cap: int = 512
    device: str = "cpu"
    deterministic: bool = True
    host: str = "127.0.0.1"
    port: int = 0


class ModelLoadError(Exception):
    pass


class ContextTooLong(Exception):
    pass


class CausalLMBackend:
    """Wraps a pretrained causal LM in an id-in, distribution-out interface."""

    def __init__(self, config: ServerConfig):
        import torch
        from transformers import AutoModelForCausalLM

        self._torch = torch
        if config.deterministic:
            torch.manual_seed(0)
            torch.use_deterministic_algorithms(True)
        try:
            self.model = AutoModelForCausalLM.from_pretrained(config.model_path)
        except Exception as exc:
            raise ModelLoadError(f"cannot load model from {config.model_path}: {exc}") from exc
        self.model.to(config.device)
        self.model.eval()
        self.device = config.device
        self.vocab_size = int(self.model.config.vocab_size)
        self.window = int(
            getattr(self.model.config, "n_positions", None)
            or getattr(self.model.config, "max_position_embeddings", 1024)
        )
        self._cache: dict = {}

    def next_distribution(self, ctx: tuple[int, ...]) -> list[tuple[int, float]]:
        """Full distribution over the next token, rank-sorted.

        The context conditions the model as-is; an empty context uses a
        single zero token as the degenerate prompt.
        """
        hit = self._cache.get(ctx)
        if hit is not None:
            return hit
        for t in ctx:
            if not 0 <= t < self.vocab_size:
                raise ValueError(f"token id {t} outside model vocabulary")
        prompt = list(ctx) if ctx else [0]
        if len(prompt) > self.window:
            raise ContextTooLong(
                f"context of {len(prompt)} tokens exceeds the model window {self.window}"
            )
        torch = self._torch
        with torch.no_grad():
            ids = torch.tensor([prompt], dtype=torch.long, device=self.device)
            logits = self.model(ids).logits[0, -1].double()
            probs = torch.softmax(logits, dim=-1).cpu()
        entries = sorted(
            ((i, p) for i, p in enumerate(probs.tolist()) if p > 0.0),
            key=lambda e: (-e[1], e[0]),
        )
        self._cache[ctx] = entries
        return entries


def materialize_demo_model(path: str, seed: int = 0) -> str:
    """Write a tiny deterministically initialized GPT-2 to `path`.

    Stands in for a shared pretrained model in offline environments; the
    weights are random but fixed by the seed, which is all the coding stack
    needs.
    """
    import torch
    from transformers import GPT2Config, GPT2LMHeadModel

    torch.manual_seed(seed)
    config = GPT2Config(
        vocab_size=96,
        n_positions=128,
        n_embd=32,
        n_layer=2,
        n_head=2,
        bos_token_id=0,
        eos_token_id=0,
    )
    model = GPT2LMHeadModel(config)
    model.save_pretrained(path)
    return path
