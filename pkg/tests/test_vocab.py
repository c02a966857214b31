import pytest

from covertext.errors import VocabularyError
from covertext.vocab import EOS_SURFACE, Vocabulary


def test_from_surfaces_is_deterministic_and_dense():
    v1 = Vocabulary.from_surfaces(["b", "a", "c"])
    v2 = Vocabulary.from_surfaces(["c", "a", "b", "a"])
    assert v1.surfaces == v2.surfaces
    assert sorted(v1.id_of(s) for s in v1.surfaces) == list(range(v1.size))
    assert v1.surface(v1.eos) == EOS_SURFACE


def test_duplicate_surfaces_rejected():
    with pytest.raises(VocabularyError):
        Vocabulary(surfaces=("a", "a", EOS_SURFACE), eos=2)


def test_eos_must_be_member():
    with pytest.raises(VocabularyError):
        Vocabulary(surfaces=("a", "b"), eos=5)


def test_lookup_errors():
    v = Vocabulary.from_surfaces(["a"])
    with pytest.raises(VocabularyError):
        v.id_of("missing")
    with pytest.raises(VocabularyError):
        v.surface(99)
    with pytest.raises(VocabularyError):
        v.validate_context([0, 99])


def test_save_load_roundtrip(tmp_path):
    v = Vocabulary.from_surfaces(["the", "quick", "fox"])
    path = tmp_path / "vocab.json"
    v.save(path)
    loaded = Vocabulary.load(path)
    assert loaded == v
    assert loaded.eos == v.eos


def test_load_rejects_sparse_ids(tmp_path):
    path = tmp_path / "vocab.json"
    path.write_text('{"a": 0, "b": 2}')
    with pytest.raises(VocabularyError):
        Vocabulary.load(path)
