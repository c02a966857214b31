"""Deterministic demo corpus: template sentences with mixed-entropy contexts.

Some slots are nearly forced (a noun picks from few verbs) and others are
flat (after "the" most nouns are live), so per-step distributions range from
concentrated to diffuse. That spread is what makes adaptive truncation
policies distinguishable from static ones at desk scale.
"""

from __future__ import annotations

import random

_NOUNS = [
    "river", "market", "garden", "engine", "letter", "signal", "harbor",
    "forest", "bridge", "window", "mountain", "journal", "orchard", "station",
]
_VERBS = {
    "river": ["flows", "rises", "turns"],
    "market": ["opens", "closes", "hums"],
    "garden": ["grows", "rests"],
    "engine": ["runs", "stalls", "hums"],
    "letter": ["arrives", "waits"],
    "signal": ["fades", "returns", "repeats"],
    "harbor": ["sleeps", "opens"],
    "forest": ["darkens", "breathes"],
    "bridge": ["holds", "sways"],
    "window": ["brightens", "rattles"],
    "mountain": ["looms", "waits"],
    "journal": ["records", "closes"],
    "orchard": ["blooms", "rests"],
    "station": ["empties", "fills"],
}
_ADJECTIVES = [
    "quiet", "old", "bright", "distant", "narrow", "busy", "cold", "green",
    "heavy", "pale", "steep", "warm",
]
_ADVERBS = ["slowly", "again", "early", "late", "softly", "suddenly"]
_OPENERS = ["the", "the", "the", "a", "every", "some"]
_CONNECTORS = ["and", "while", "before", "after"]


def make_corpus(n_sentences: int = 400, seed: int = 7) -> list[list[str]]:
    rng = random.Random(seed)
    sentences = []
    for _ in range(n_sentences):
        words = _clause(rng)
        if rng.random() < 0.45:
            words.append(rng.choice(_CONNECTORS))
            words.extend(_clause(rng))
        sentences.append(words)
    return sentences


def _clause(rng: random.Random) -> list[str]:
    words = [rng.choice(_OPENERS)]
    if rng.random() < 0.5:
        words.append(rng.choice(_ADJECTIVES))
    noun = rng.choice(_NOUNS)
    words.append(noun)
    words.append(rng.choice(_VERBS[noun]))
    if rng.random() < 0.4:
        words.append(rng.choice(_ADVERBS))
    return words


def write_corpus(path, n_sentences: int = 400, seed: int = 7) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for sentence in make_corpus(n_sentences, seed):
            fh.write(" ".join(sentence) + "\n")


if __name__ == "__main__":
    import sys

    for line in make_corpus(
        int(sys.argv[1]) if len(sys.argv) > 1 else 400,
        int(sys.argv[2]) if len(sys.argv) > 2 else 7,
    ):
        sys.stdout.write(" ".join(line) + "\n")
