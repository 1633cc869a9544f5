"""Reason fusion model: class filtering, feature building, prediction."""

import numpy as np
import pytest

from triagebot.corpus import default_schema, persona_preset
from triagebot.embeddings import BowProvider, FileProvider
from triagebot.errors import MissingEmbeddingError
from triagebot.reasons import (
    LabelCatalog,
    Prediction,
    build_features,
    filter_classes,
    predict_reasons,
)
from triagebot.tabular import fit as fit_tabular
from triagebot.text import Vocabulary


class TestFilterClasses:
    def test_boundary_kept_at_exactly_min(self):
        labels = ["a"] * 60 + ["b"] * 49 + ["c"] * 50
        assert filter_classes(labels, 50) == {"a", "c"}

    def test_min_one_keeps_everything(self):
        labels = ["a", "b", "b"]
        assert filter_classes(labels, 1) == {"a", "b"}

    def test_production_shape(self):
        # 306 classes, 235 of them at or above the 50-sample bar
        labels = []
        for i in range(235):
            labels += [f"kept{i}"] * 50
        for i in range(71):
            labels += [f"rare{i}"] * 49
        kept = filter_classes(labels, 50)
        assert len(kept) == 235
        assert len(set(labels)) == 306

    def test_empty_kept_set_rejected(self):
        with pytest.raises(ValueError):
            filter_classes(["a"] * 3, 50)

    def test_min_count_validated(self):
        with pytest.raises(ValueError):
            filter_classes(["a"], 0)

    def test_conserves_rows_when_applied(self, splits, fusion_model):
        train, val, test = splits
        kept = set(fusion_model.catalog.labels)
        for rows in (train, val, test):
            kept_rows = [t for t in rows if t.reason in kept]
            dropped_rows = [t for t in rows if t.reason not in kept]
            assert len(kept_rows) + len(dropped_rows) == len(rows)


class TestBuildFeatures:
    def test_concatenation_length(self, stopwords):
        vocab = Vocabulary(entries={"visita": 0, "cancelar": 1}, max_size=5, ngram_max=1)
        provider = BowProvider(vocabulary=vocab)
        schema = default_schema()
        fitted = fit_tabular(schema, [persona_preset("tenant"), persona_preset("owner")])
        out = build_features("quero cancelar a visita", persona_preset("tenant"),
                             provider, fitted, stopwords)
        assert out.shape == (2 + fitted.dimension,)

    def test_missing_embedding_id_is_hard_error(self):
        provider = FileProvider(table={"t-1": np.zeros(4)}, dimension=4)
        schema = default_schema()
        fitted = fit_tabular(schema, [persona_preset("tenant")])
        with pytest.raises(MissingEmbeddingError):
            build_features("apenas texto", persona_preset("tenant"), provider, fitted,
                           item_id="t-99")

    def test_token_truncation(self):
        vocab = Vocabulary(
            entries={f"w{i}": i for i in range(70)}, max_size=70, ngram_max=1)
        provider = BowProvider(vocabulary=vocab, token_limit=64)
        tokens = [f"w{i}" for i in range(70)]
        vector = provider.embed(tokens)
        assert vector[:64].sum() == 64
        assert vector[64:].sum() == 0  # tokens past the limit dropped


class TestPrediction:
    def test_topk_values(self, fusion_model):
        preset = persona_preset("tenant")
        prediction = predict_reasons(fusion_model, "o boleto do aluguel não chegou", preset, k=3)
        probs = [p for _, p in prediction.top]
        assert probs == sorted(probs, reverse=True)
        assert sum(prediction.probabilities.values()) == pytest.approx(1.0, abs=1e-9)

    def test_k1_equals_argmax(self, fusion_model):
        preset = persona_preset("owner")
        top1 = predict_reasons(fusion_model, "o repasse não caiu", preset, k=1)
        full = top1.probabilities
        best = max(full, key=lambda c: (full[c], ))
        assert top1.top[0][0] == best or full[top1.top[0][0]] == pytest.approx(full[best])

    def test_topk_prefix_property(self, fusion_model):
        preset = persona_preset("photographer")
        text = "preciso remarcar o horário de amanhã"
        tops = [predict_reasons(fusion_model, text, preset, k=k).top for k in (1, 2, 3)]
        assert tops[1][:1] == tops[0]
        assert tops[2][:2] == tops[1]

    def test_k_out_of_range(self, fusion_model):
        with pytest.raises(ValueError):
            predict_reasons(fusion_model, "x", persona_preset("tenant"),
                            k=len(fusion_model.catalog.labels) + 1)

    def test_ambiguous_message_resolved_by_profile(self, fusion_model):
        message = "preciso cancelar a visita de amanhã"
        photo = predict_reasons(fusion_model, message, persona_preset("photographer"), k=1)
        tenant = predict_reasons(fusion_model, message, persona_preset("prospective_tenant"), k=1)
        assert photo.top[0][0] != tenant.top[0][0]
        assert photo.top[0][0] == "ft_ag_cancelamento"
        assert tenant.top[0][0] == "iq_vs_cancelamento"

    def test_tie_break_lower_class_index_first(self, fusion_model):
        probs = np.zeros(len(fusion_model.catalog.labels))
        probs[:] = 1.0 / len(probs)
        order = sorted(range(len(probs)), key=lambda i: (-probs[i], i))
        assert order[0] == 0  # uniform probabilities resolve by index

    def test_schema_permutation_invariance(self, splits, bow_provider, dept_map, stopwords):
        """Permuting schema columns (and refitting) leaves predictions unchanged."""
        from triagebot.reasons import HeadConfig, train_reason_model
        from triagebot.models import TrainConfig
        from triagebot.tabular import FeatureSchema

        train, val, _ = splits
        schema = default_schema()
        permuted = FeatureSchema(columns=tuple(reversed(schema.columns)))
        head = HeadConfig(kind="logistic", train=TrainConfig(seed=0, max_epochs=40), C=1.0)
        m1, _ = train_reason_model(train[:600], val[:80], bow_provider, schema,
                                   dept_map.by_reason, head=head, stopwords=stopwords,
                                   min_class_count=5)
        m2, _ = train_reason_model(train[:600], val[:80], bow_provider, permuted,
                                   dept_map.by_reason, head=head, stopwords=stopwords,
                                   min_class_count=5)
        message = "quero agendar uma visita no imóvel QA-1234"
        preset = persona_preset("prospective_tenant")
        p1 = predict_reasons(m1, message, preset, k=3)
        p2 = predict_reasons(m2, message, preset, k=3)
        assert [c for c, _ in p1.top] == [c for c, _ in p2.top]
        for (c1, v1), (c2, v2) in zip(p1.top, p2.top):
            assert v1 == pytest.approx(v2, abs=1e-6)


class TestLabelCatalog:
    def test_requires_department_mapping(self):
        with pytest.raises(ValueError):
            LabelCatalog(labels=("a",), department_map={})

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            LabelCatalog(labels=(), department_map={})

    def test_prediction_descending_enforced(self):
        with pytest.raises(ValueError):
            Prediction(top=(("a", 0.1), ("b", 0.5)), probabilities={"a": 0.1, "b": 0.5})
