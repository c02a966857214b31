"""Vocabulary and context types shared by every distribution provider."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import VocabularyError

EOS_SURFACE = "</s>"

TokenId = int


@dataclass(frozen=True)
class Vocabulary:
    """Dense id->surface map with a distinguished end-of-sequence token.

    Ids are 0..size-1; surfaces are unique. The EOS token is an ordinary
    member so coders can select it like any other token.
    """

    surfaces: tuple[str, ...]
    eos: TokenId

    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        index = {s: i for i, s in enumerate(self.surfaces)}
        if len(index) != len(self.surfaces):
            raise VocabularyError("surface strings must be unique")
        if not 0 <= self.eos < len(self.surfaces):
            raise VocabularyError("eos must be a vocabulary member")
        object.__setattr__(self, "_index", index)

    @classmethod
    def from_surfaces(cls, surfaces) -> "Vocabulary":
        """Build a vocabulary from an iterable of surfaces, adding EOS if absent.

        Surfaces are sorted so construction is deterministic regardless of
        input order.
        """
        unique = set(surfaces)
        unique.add(EOS_SURFACE)
        ordered = tuple(sorted(unique))
        return cls(surfaces=ordered, eos=ordered.index(EOS_SURFACE))

    def __len__(self) -> int:
        return len(self.surfaces)

    @property
    def size(self) -> int:
        return len(self.surfaces)

    def surface(self, token: TokenId) -> str:
        if not 0 <= token < len(self.surfaces):
            raise VocabularyError(f"token id {token} out of range")
        return self.surfaces[token]

    def id_of(self, surface: str) -> TokenId:
        try:
            return self._index[surface]
        except KeyError:
            raise VocabularyError(f"surface {surface!r} not in vocabulary") from None

    def __contains__(self, token: TokenId) -> bool:
        return 0 <= token < len(self.surfaces)

    def validate_context(self, tokens) -> None:
        for t in tokens:
            if t not in self:
                raise VocabularyError(f"context token id {t} not in vocabulary")

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump({s: i for i, s in enumerate(self.surfaces)}, fh, indent=0, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "Vocabulary":
        with open(path, encoding="utf-8") as fh:
            mapping = json.load(fh)
        if sorted(mapping.values()) != list(range(len(mapping))):
            raise VocabularyError("vocabulary ids must be dense 0..size-1")
        surfaces = [None] * len(mapping)
        for surface, idx in mapping.items():
            surfaces[idx] = surface
        if EOS_SURFACE not in mapping:
            raise VocabularyError(f"vocabulary file lacks the EOS surface {EOS_SURFACE!r}")
        return cls(surfaces=tuple(surfaces), eos=mapping[EOS_SURFACE])


Context = tuple[TokenId, ...]
