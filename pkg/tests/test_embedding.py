import math

import numpy as np
import pytest

from emoship.embedding import EmbeddingStore, similarity, tokenize
from emoship.errors import DataError


TOY = EmbeddingStore({
    "dog": np.array([1.0, 1.0]),
    "puppy": np.array([1.0, 0.9]),
    "car": np.array([-1.0, 0.0]),
})


class TestTokenize:
    def test_lowercase_and_punctuation_split(self):
        assert tokenize("A Dog, the CAR!") == ["a", "dog", "the", "car"]

    def test_apostrophes_kept(self):
        assert tokenize("dog's toy") == ["dog's", "toy"]

    def test_empty(self):
        assert tokenize("...") == []


class TestStore:
    def test_load_glove_style(self, tmp_path):
        f = tmp_path / "emb.txt"
        f.write_text("dog 1.0 2.0\nCAT 0.5 -0.5\n")
        store = EmbeddingStore.load(f)
        assert store.dim == 2
        np.testing.assert_allclose(store.get("cat"), [0.5, -0.5])

    def test_inconsistent_dims_rejected(self, tmp_path):
        f = tmp_path / "emb.txt"
        f.write_text("dog 1.0 2.0\ncat 0.5\n")
        with pytest.raises(DataError):
            EmbeddingStore.load(f)

    def test_malformed_line_cites_file(self, tmp_path):
        f = tmp_path / "emb.txt"
        f.write_text("dog 1.0 two\n")
        with pytest.raises(DataError):
            EmbeddingStore.load(f)

    def test_empty_store_rejected(self):
        with pytest.raises(DataError):
            EmbeddingStore({})

    def test_mean_vector(self):
        v = TOY.mean_vector("dog car")
        np.testing.assert_allclose(v, [0.0, 0.5])
        assert TOY.mean_vector("zebra") is None


class TestSimilarity:
    def test_identical_in_vocab_strings_are_one(self):
        assert abs(similarity("dog", "dog", TOY) - 1.0) < 1e-6

    def test_hand_cosines(self):
        # dog.puppy = 1.9, |dog| = sqrt2, |puppy| = sqrt(1.81): cos = 0.99868...
        sp = similarity("dog", "puppy", TOY)
        sc = similarity("dog", "car", TOY)
        assert abs(sp - 1.9 / (math.sqrt(2) * math.sqrt(1.81))) < 1e-9
        assert abs(sc - (-1.0 / (math.sqrt(2) * 1.0))) < 1e-9
        assert sp > sc

    def test_out_of_vocab_falls_back_to_jaccard(self):
        assert abs(similarity("red zebra", "red zebra park", TOY) - 2 / 3) < 1e-12

    def test_identical_oov_strings_are_one(self):
        assert similarity("zebra", "zebra", TOY) == 1.0

    def test_symmetry(self):
        for a, b in [("dog", "puppy"), ("dog car", "puppy"), ("x y", "y z")]:
            assert similarity(a, b, TOY) == similarity(b, a, TOY)

    def test_range(self):
        for a, b in [("dog", "car"), ("dog puppy", "car"), ("q", "r")]:
            assert -1.0 <= similarity(a, b, TOY) <= 1.0
