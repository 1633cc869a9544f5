"""Text pipeline: preprocessing, n-grams, vocabulary, sparse vectors."""

from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from triagebot.errors import DataFormatError
from triagebot.text import (
    SparseVector,
    Vocabulary,
    build_vocabulary,
    extract_ngrams,
    load_stopwords,
    preprocess,
    vectorize,
)


class TestPreprocess:
    def test_stopword_removal(self):
        assert preprocess("Preciso de ajuda com o contrato!", {"de", "com", "o"}) == [
            "preciso", "ajuda", "contrato",
        ]

    def test_accent_strip_and_uncase(self):
        assert preprocess("Visita de amanhã") == ["visita", "de", "amanha"]

    def test_empty_input(self):
        assert preprocess("") == []

    def test_punctuation_only(self):
        assert preprocess("?!... ---") == []

    def test_digits_kept(self):
        assert preprocess("contrato 12345-B") == ["contrato", "12345", "b"]

    def test_cedilla(self):
        assert preprocess("informações do serviço") == ["informacoes", "do", "servico"]

    def test_idempotent(self):
        text = "Olá, preciso REAGENDAR a visita de AMANHÃ às 15h!"
        stop = frozenset({"a", "de", "as"})
        once = preprocess(text, stop)
        again = preprocess(" ".join(once), stop)
        assert once == again

    @given(st.text(max_size=200))
    @settings(max_examples=100)
    def test_idempotent_property(self, text):
        once = preprocess(text)
        assert preprocess(" ".join(once)) == once

    @given(st.text(max_size=200))
    @settings(max_examples=100)
    def test_token_charset(self, text):
        for token in preprocess(text):
            assert token
            assert all(c in "abcdefghijklmnopqrstuvwxyz0123456789_" for c in token)


class TestNgrams:
    def test_orders_shorter_first(self):
        assert extract_ngrams(["a", "b", "c"], 3) == ["a", "b", "c", "a_b", "b_c", "a_b_c"]

    def test_short_sequence(self):
        assert extract_ngrams(["a"], 3) == ["a"]

    def test_empty(self):
        assert extract_ngrams([], 3) == []

    @pytest.mark.parametrize("bad", [0, 4, -1])
    def test_range_check(self, bad):
        with pytest.raises(ValueError):
            extract_ngrams(["a"], bad)


class TestVocabulary:
    def test_frequency_ranking(self):
        corpus = [["visita"]] * 10 + [["foto"]] * 3
        vocab = build_vocabulary(corpus, n_max=1, max_size=1)
        assert vocab.entries == {"visita": 0}

    def test_tie_lexicographic(self):
        corpus = [["b", "a"], ["a", "b"]]
        vocab = build_vocabulary(corpus, n_max=1, max_size=1)
        assert vocab.entries == {"a": 0}

    def test_empty_corpus(self):
        with pytest.raises(ValueError):
            build_vocabulary([], 1, 10)

    def test_order_invariance(self, tickets, stopwords):
        docs = [preprocess(t.message, stopwords) for t in tickets[:300]]
        v1 = build_vocabulary(docs, 2, 500)
        v2 = build_vocabulary(list(reversed(docs)), 2, 500)
        assert v1.entries == v2.entries

    def test_against_brute_force_document_frequency(self, tickets, stopwords):
        docs = [preprocess(t.message, stopwords) for t in tickets[:1000]]
        vocab = build_vocabulary(docs, 3, 5000)

        oracle = Counter()
        for doc in docs:
            oracle.update(set(extract_ngrams(doc, 3)))
        expected_size = min(5000, len(oracle))
        assert len(vocab) == expected_size
        ranked = sorted(oracle.items(), key=lambda kv: (-kv[1], kv[0]))
        expected = {gram: idx for idx, (gram, _) in enumerate(ranked[:5000])}
        assert vocab.entries == expected

    def test_serialization_roundtrip(self, tmp_path):
        vocab = build_vocabulary([["a", "b"], ["a"]], 2, 10)
        path = tmp_path / "vocab.tsv"
        vocab.save(path)
        loaded = Vocabulary.load(path, max_size=10, ngram_max=2)
        assert loaded.entries == vocab.entries

    def test_load_rejects_malformed(self, tmp_path):
        path = tmp_path / "vocab.tsv"
        path.write_text("a\t0\nbroken line\n", encoding="utf-8")
        with pytest.raises(DataFormatError) as err:
            Vocabulary.load(path)
        assert err.value.line == 2


class TestVectorize:
    def test_counts(self):
        vocab = Vocabulary(entries={"a": 0, "b": 1}, max_size=10, ngram_max=1)
        assert vectorize(["a", "a", "b"], vocab).pairs == ((0, 2), (1, 1))

    def test_all_out_of_vocabulary(self):
        vocab = Vocabulary(entries={"a": 0}, max_size=10, ngram_max=1)
        vec = vectorize(["x", "y"], vocab)
        assert vec.pairs == ()
        assert vec.dimension == 1

    def test_deterministic(self, stopwords):
        vocab = build_vocabulary([["visita", "amanha"]], 2, 10)
        text = "Visita de amanhã!"
        v1 = vectorize(preprocess(text, stopwords), vocab)
        v2 = vectorize(preprocess(text, stopwords), vocab)
        assert v1 == v2

    @given(st.lists(st.sampled_from("abcdef"), max_size=30))
    @settings(max_examples=100)
    def test_counts_match_brute_force(self, tokens):
        vocab = Vocabulary(
            entries={g: i for i, g in enumerate("abcdef")}, max_size=6, ngram_max=1)
        vec = vectorize(tokens, vocab, n_max=1)
        brute = Counter(extract_ngrams(tokens, 1))
        assert all(idx < len(vocab) for idx, _ in vec.pairs)
        for gram, idx in vocab.entries.items():
            count = dict(vec.pairs).get(idx, 0)
            assert count == brute.get(gram, 0)


class TestSparseVector:
    def test_rejects_unsorted(self):
        with pytest.raises(ValueError):
            SparseVector(dimension=5, pairs=((2, 1), (1, 1)))

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            SparseVector(dimension=2, pairs=((2, 1),))

    def test_rejects_zero_count(self):
        with pytest.raises(ValueError):
            SparseVector(dimension=2, pairs=((0, 0),))


def test_stopword_file_normalized(tmp_path):
    path = tmp_path / "stop.txt"
    path.write_text("# comment\nDe\naté\n\n", encoding="utf-8")
    assert load_stopwords(path) == frozenset({"de", "ate"})
