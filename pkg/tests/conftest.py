import hashlib
import random

import pytest

from covertext.demo import make_corpus
from covertext.distributions import DistributionProvider, NextTokenDistribution
from covertext.ngram import train_ngram
from covertext.vocab import Vocabulary


class ScriptedProvider(DistributionProvider):
    """Provider with hand-placed distributions per context, uniform elsewhere.

    script maps a context tuple (of generated tokens, excluding any fixed
    prefix) to a ready-made NextTokenDistribution.
    """

    def __init__(self, script, vocab_size=8, default_support=None):
        self._script = {tuple(k): v for k, v in script.items()}
        self._vocab = Vocabulary.from_surfaces(f"w{i:02d}" for i in range(vocab_size - 1))
        self._support = default_support or vocab_size
        assert self._vocab.size == vocab_size

    @property
    def vocabulary(self):
        return self._vocab

    def next_distribution(self, ctx):
        key = tuple(ctx)
        if key in self._script:
            return self._script[key]
        p = 1.0 / self._support
        return NextTokenDistribution(entries=tuple((t, p) for t in range(self._support)))


class HashProvider(DistributionProvider):
    """Deterministic pseudo-random distributions derived from a seed and the
    trailing context; the workhorse for property tests."""

    def __init__(self, seed: int, vocab_size: int = 8, window: int = 3):
        self.seed = seed
        self.window = window
        self._vocab = Vocabulary.from_surfaces(f"w{i:02d}" for i in range(vocab_size - 1))
        self._cache = {}

    @property
    def vocabulary(self):
        return self._vocab

    def context_key(self, ctx):
        return tuple(ctx[max(0, len(ctx) - self.window):])

    def next_distribution(self, ctx):
        key = self.context_key(ctx)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        material = f"{self.seed}|{key}".encode()
        digest = hashlib.sha256(material).digest()
        size = self._vocab.size
        weights = [1 + digest[i % len(digest)] + 256 * ((i * 7) % 3) for i in range(size)]
        total = float(sum(weights))
        probs = {t: w / total for t, w in enumerate(weights)}
        from covertext.distributions import make_distribution

        dist = make_distribution(probs)
        self._cache[key] = dist
        return dist


@pytest.fixture(scope="session")
def demo_corpus():
    return make_corpus(400, seed=7)


@pytest.fixture(scope="session")
def demo_provider(demo_corpus):
    return train_ngram(demo_corpus, order=3, smoothing=0.01)


@pytest.fixture(scope="session")
def demo_corpus_file(tmp_path_factory, demo_corpus):
    path = tmp_path_factory.mktemp("corpus") / "demo.txt"
    path.write_text("\n".join(" ".join(s) for s in demo_corpus) + "\n", encoding="utf-8")
    return path


def random_bits(rng: random.Random, length: int) -> list[int]:
    return [rng.getrandbits(1) for _ in range(length)]
