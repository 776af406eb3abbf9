"""Scoring, activation components, discounting and decisions."""

import math
from dataclasses import replace

import numpy as np
import pytest

from ina import (
    Ambiguous,
    Answered,
    FeatureSet,
    InaModel,
    LemmaTable,
    ModelConfig,
    ModelStats,
    QueryAnalysis,
    Rejected,
    ScoreBreakdown,
    SynonymTable,
    activate,
    analyze,
    classify,
    confidence,
    decide,
    discount_factor,
    positive_share,
    score_raw,
    softmax,
    train,
)
from ina.errors import InvalidModel


def stub_model(labels, w_max=1.0, **cfg):
    labels = tuple(sorted(labels))
    return InaModel(
        config=ModelConfig(**cfg),
        weights={"w": {labels[0]: w_max}},
        vocabulary=frozenset({"w"}),
        feature_index=frozenset({"w"}),
        class_list=labels,
        representatives={label: f"example {label}" for label in labels},
        stats=ModelStats(
            w_max=w_max,
            classes=len(labels),
            vocab_size=1,
            positive_features={label: 0 for label in labels},
        ),
        synonyms=SynonymTable(),
        lemmas=LemmaTable(),
    )


def stub_analysis(known=(), unknown=0):
    return QueryAnalysis(
        features=FeatureSet(frozenset(), frozenset(), ()),
        known_features=tuple(known),
        unknown_count=unknown,
    )


class TestDiscountFactor:
    def test_no_unknowns_is_identity(self):
        for alpha in (0.0, 0.5, 1.0, 2.0, 7.5):
            assert discount_factor(0, alpha) == 1.0

    def test_small_count_values_exact(self):
        assert discount_factor(1, 2.0) == 0.0
        assert discount_factor(2, 2.0) == -1 / 3
        assert discount_factor(3, 2.0) == -1 / 2

    def test_strictly_decreasing(self):
        values = [discount_factor(u, 2.0) for u in range(200)]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_limit(self):
        assert discount_factor(10**6, 2.0) == pytest.approx(-1.0, abs=2.1e-6)

    def test_range_with_default_alpha(self):
        for u in range(500):
            assert -1.0 < discount_factor(u, 2.0) <= 1.0

    def test_rejects_negative_input(self):
        with pytest.raises(ValueError):
            discount_factor(-1, 2.0)
        with pytest.raises(ValueError):
            discount_factor(1, -0.5)


class TestAnalyze:
    def test_all_known(self, four_doc_model):
        analysis = analyze("wheel steering", four_doc_model)
        assert analysis.unknown_count == 0
        assert set(analysis.known_features) == {"wheel", "steering", "wheel+steering"}

    def test_unknown_counted_once(self, four_doc_model):
        analysis = analyze("wheel steering zzz", four_doc_model)
        assert analysis.unknown_count == 1
        assert set(analysis.known_features) == {"wheel", "steering", "wheel+steering"}

    def test_empty_query(self, four_doc_model):
        analysis = analyze("", four_doc_model)
        assert analysis.unknown_count == 0
        assert analysis.n_known == 0

    def test_unknown_bigrams_do_not_count(self, four_doc_model):
        analysis = analyze("wheel zzz", four_doc_model)
        assert analysis.unknown_count == 1
        assert analysis.known_features == ("wheel",)

    def test_duplicate_unknowns_collapse(self, four_doc_model):
        analysis = analyze("zzz zzz qqq", four_doc_model)
        assert analysis.unknown_count == 2

    def test_untrained_bigram_of_known_tokens_excluded(self, four_doc_model):
        # 'steering' and 'arm' are both known but never co-occurred.
        analysis = analyze("steering arm", four_doc_model)
        assert "steering+arm" not in analysis.known_features

    def test_partition_covers_token_list(self, make_random_model):
        # unknown count + known unigrams always account for every token
        rng = np.random.default_rng(12)
        pool = ["amber", "basalt", "cedar", "delta", "zzq", "wwx", "vvy"]
        for _ in range(20):
            model = make_random_model(rng)
            for _ in range(10):
                query = " ".join(
                    str(t) for t in rng.choice(pool, size=rng.integers(0, 8))
                )
                analysis = analyze(query, model)
                known_unigrams = [f for f in analysis.known_features if "+" not in f]
                assert analysis.unknown_count + len(known_unigrams) == len(
                    analysis.features.token_list
                )


class TestScoreRaw:
    def test_two_features(self, four_doc_model):
        analysis = stub_analysis(known=("wheel", "steering"))
        scores = score_raw(analysis, four_doc_model)
        assert scores["car"] == 2.0
        assert scores["excavator"] == 0.0

    def test_no_known_features(self, four_doc_model):
        scores = score_raw(stub_analysis(), four_doc_model)
        assert set(scores.values()) == {0.0}

    def test_sparse_entries_contribute_nothing(self, four_doc_model):
        base = score_raw(stub_analysis(known=("wheel",)), four_doc_model)
        extended = score_raw(stub_analysis(known=("wheel", "dipper")), four_doc_model)
        assert extended["car"] == base["car"]


class TestActivationComponents:
    def test_softmax_symmetry(self):
        sm = softmax(np.array([1.0, 1.0]))
        assert sm[0] == sm[1] == 0.5

    def test_softmax_example(self):
        sm = softmax(np.array([2.0, 0.0]))
        e2 = math.exp(2.0)
        assert sm[0] == pytest.approx(e2 / (e2 + 1), abs=1e-12)
        assert sm[1] == pytest.approx(1 / (e2 + 1), abs=1e-12)

    def test_softmax_shift_invariance(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            scores = rng.normal(size=rng.integers(2, 10)) * 10
            shift = rng.normal() * 100
            np.testing.assert_allclose(
                softmax(scores), softmax(scores + shift), atol=1e-9
            )

    def test_softmax_large_scores_stable(self):
        sm = softmax(np.array([1000.0, 0.0]))
        assert np.isfinite(sm).all()
        assert sm.sum() == pytest.approx(1.0, abs=1e-9)

    def test_positive_share_example(self):
        np.testing.assert_array_equal(
            positive_share(np.array([2.0, 0.0])), np.array([1.0, 0.0])
        )

    def test_positive_share_all_nonpositive(self):
        np.testing.assert_array_equal(
            positive_share(np.array([-1.0, 0.0, -3.0])), np.zeros(3)
        )


class TestActivate:
    def test_tied_scores(self, four_doc_model):
        breakdown = activate(
            {"car": 1.0, "excavator": 1.0}, stub_analysis(known=("w",)), four_doc_model
        )
        assert breakdown.sm["car"] == breakdown.sm["excavator"] == 0.5

    def test_no_known_features_zeroes_tanh(self, four_doc_model):
        breakdown = activate({"car": 1.0, "excavator": 0.0}, stub_analysis(), four_doc_model)
        assert breakdown.tanh_comp == {"car": 0.0, "excavator": 0.0}

    def test_invalid_w_max(self):
        model = stub_model(["a", "b"])
        model = replace(model, stats=replace(model.stats, w_max=0.0))
        with pytest.raises(InvalidModel):
            activate({"a": 1.0, "b": 0.0}, stub_analysis(), model)

    def test_tanh_uses_average_weight(self, four_doc_model):
        # Two known features summing to 2 bits: average 1.0, w_max 1.0.
        breakdown = activate(
            {"car": 2.0, "excavator": 0.0},
            stub_analysis(known=("wheel", "steering")),
            four_doc_model,
        )
        assert breakdown.tanh_comp["car"] == pytest.approx(math.tanh(1.0), abs=1e-12)

    def test_pre_activation_scales_scores(self):
        model = stub_model(["a", "b"], discount_stage="pre_activation", alpha_f=1.0)
        analysis = stub_analysis(known=("w",), unknown=1)  # factor 0.5
        breakdown = activate({"a": 2.0, "b": 0.0}, analysis, model)
        e1 = math.exp(1.0)
        assert breakdown.sm["a"] == pytest.approx(e1 / (e1 + 1), abs=1e-12)
        assert breakdown.raw["a"] == 2.0  # raw scores reported undiscounted


class TestConfidence:
    def test_identity_without_unknowns(self, four_doc_model):
        _, breakdown, _ = classify("wheel steering", four_doc_model)
        assert breakdown.confidence == breakdown.ai

    def test_post_activation_product(self):
        model = stub_model(["a", "b"])
        breakdown = ScoreBreakdown(
            classes=("a", "b"),
            raw={"a": 0.0, "b": 0.0},
            sm={"a": 0.5, "b": 0.5},
            relu_norm={"a": 0.0, "b": 0.0},
            tanh_comp={"a": 0.0, "b": 0.0},
            ai={"a": 0.9, "b": 0.1},
            discount=discount_factor(3, 2.0),
        )
        conf = confidence(breakdown, stub_analysis(unknown=3), model)
        assert conf["a"] == -0.45

    def test_large_unknown_count_approaches_negated_activation(self):
        model = stub_model(["a", "b"])
        breakdown = ScoreBreakdown(
            classes=("a", "b"),
            raw={"a": 0.0, "b": 0.0},
            sm={"a": 0.5, "b": 0.5},
            relu_norm={"a": 0.0, "b": 0.0},
            tanh_comp={"a": 0.0, "b": 0.0},
            ai={"a": 0.8, "b": -0.2},
            discount=discount_factor(10**6, 2.0),
        )
        conf = confidence(breakdown, stub_analysis(unknown=10**6), model)
        assert conf["a"] == pytest.approx(-0.8, abs=2e-6)
        assert conf["b"] == pytest.approx(0.2, abs=2e-6)

    def test_clamped_for_large_alpha(self):
        model = stub_model(["a", "b"], alpha_f=4.0)
        breakdown = ScoreBreakdown(
            classes=("a", "b"),
            raw={"a": 0.0, "b": 0.0},
            sm={"a": 0.5, "b": 0.5},
            relu_norm={"a": 0.0, "b": 0.0},
            tanh_comp={"a": 0.0, "b": 0.0},
            ai={"a": 0.9, "b": 0.0},
            discount=discount_factor(100, 4.0),
        )
        conf = confidence(breakdown, stub_analysis(unknown=100), model)
        assert conf["a"] == -1.0


class TestDecide:
    def test_clear_answer(self):
        model = stub_model(["A", "B"])
        decision = decide({"A": 0.80, "B": 0.10}, model)
        assert decision == Answered("A", 0.80)

    def test_band_triggers_ambiguity(self):
        model = stub_model(["A", "B", "C"])
        decision = decide({"A": 0.70, "B": 0.68, "C": 0.10}, model)
        assert isinstance(decision, Ambiguous)
        assert [c.label for c in decision.candidates] == ["A", "B"]
        assert decision.candidates[0].representative == "example A"

    def test_below_threshold_rejects(self):
        model = stub_model(["A", "B"])
        assert decide({"A": 0.55, "B": 0.30}, model) == Rejected(0.55)

    def test_tie_breaks_lexicographically(self):
        model = stub_model(["B", "A"])
        decision = decide({"A": 0.9, "B": 0.9}, model)
        assert isinstance(decision, Ambiguous)
        assert [c.label for c in decision.candidates] == ["A", "B"]

    def test_candidates_truncated(self):
        labels = [f"c{i}" for i in range(8)]
        model = stub_model(labels, max_candidates=5, ambiguity_band=1.0, threshold=0.0)
        decision = decide({label: 0.8 for label in labels}, model)
        assert isinstance(decision, Ambiguous)
        assert len(decision.candidates) == 5

    def test_candidates_sorted_by_confidence_then_label(self):
        model = stub_model(["A", "B", "C"], ambiguity_band=0.5, threshold=0.1)
        decision = decide({"A": 0.6, "B": 0.7, "C": 0.6}, model)
        assert [c.label for c in decision.candidates] == ["B", "A", "C"]


class TestClassify:
    def test_four_doc_answer(self, four_doc_model):
        _, breakdown, decision = classify("wheel steering", four_doc_model)
        assert decision == Answered("car", decision.confidence)
        # independent recomputation of the expected confidence
        e3 = math.exp(3.0)
        expected = (e3 / (e3 + 1) + 1.0 + math.tanh(1.0)) / 3.0
        assert decision.confidence == pytest.approx(expected, abs=1e-12)

    def test_all_unknown_rejected(self, four_doc_model):
        _, breakdown, decision = classify("qqq www eee", four_doc_model)
        assert isinstance(decision, Rejected)
        assert breakdown.discount == -0.5

    def test_empty_query_rejected(self, four_doc_model):
        _, _, decision = classify("", four_doc_model)
        assert isinstance(decision, Rejected)

    def test_deterministic(self, four_doc_model):
        first = classify("wheel steering zzz", four_doc_model)
        second = classify("wheel steering zzz", four_doc_model)
        assert first == second

    def test_ambiguous_flow(self, tie_model):
        _, _, decision = classify("alpha beta", tie_model)
        assert isinstance(decision, Ambiguous)
        assert [c.label for c in decision.candidates] == ["tie_a", "tie_b"]
        assert decision.candidates[0].confidence == decision.candidates[1].confidence


class TestUnknownIdentityInvariance:
    """Scores may depend on how many unknown tokens, never which ones."""

    def test_identity_irrelevant(self, four_doc_model):
        rng = np.random.default_rng(5)
        letters = "abcdefghijklmnopqrstuvwxyz"
        for _ in range(200):
            k = int(rng.integers(0, 5))
            first = ["zq" + "".join(rng.choice(list(letters), 6)) for _ in range(k)]
            second = ["zq" + "".join(rng.choice(list(letters), 6)) for _ in range(k)]
            if len(set(first)) != k or len(set(second)) != k:
                continue
            _, bd_a, dec_a = classify(" ".join(["wheel steering", *first]), four_doc_model)
            _, bd_b, dec_b = classify(" ".join(["wheel steering", *second]), four_doc_model)
            assert bd_a == bd_b
            assert dec_a == dec_b

    def test_confidence_non_increasing_in_unknown_count(self, four_doc_model):
        suffix = []
        previous = None
        baseline_ai = None
        for u in range(7):
            query = " ".join(["wheel steering", *suffix])
            _, breakdown, _ = classify(query, four_doc_model)
            if baseline_ai is None:
                baseline_ai = breakdown.ai
            if previous is not None:
                for label, ai_value in baseline_ai.items():
                    if ai_value >= 0:
                        assert breakdown.confidence[label] <= previous[label]
            previous = breakdown.confidence
            suffix.append(f"unk{u}x")

    def test_zero_factor_zeroes_every_confidence(self, four_doc_model):
        # alpha=2, u=1 gives factor exactly 0.
        _, breakdown, decision = classify("wheel steering onlyunknown", four_doc_model)
        assert breakdown.discount == 0.0
        assert set(breakdown.confidence.values()) == {0.0}
        assert isinstance(decision, Rejected)

    def test_negative_factor_never_answers(self, four_doc_model):
        # With all activations >= 0 and a positive threshold, a negative
        # factor pushes every confidence below zero: always rejected.
        rng = np.random.default_rng(8)
        known_pool = ["wheel", "steering", "bucket", "arm", "fast", "dipper"]
        for _ in range(200):
            base = [str(t) for t in rng.choice(known_pool, size=rng.integers(1, 4))]
            u = int(rng.integers(2, 8))
            query = " ".join(base + [f"unkn{i}q" for i in range(u)])
            _, breakdown, decision = classify(query, four_doc_model)
            assert breakdown.discount < 0
            if all(v >= 0 for v in breakdown.ai.values()):
                assert not isinstance(decision, Answered)

    def test_argmax_stable_when_factor_positive(self, four_doc_model):
        rng = np.random.default_rng(6)
        for _ in range(200):
            alpha = float(rng.uniform(0.0, 1.0))
            u = int(rng.integers(0, 6))
            model = four_doc_model.with_alpha(alpha)
            tokens = ["wheel", "steering", "bucket", "arm"]
            query = " ".join(
                [str(t) for t in rng.choice(tokens, size=rng.integers(1, 4))]
                + [f"zq{i}" for i in range(u)]
            )
            _, breakdown, _ = classify(query, model)
            assert breakdown.discount > 0
            by_ai = max(breakdown.ai.items(), key=lambda kv: (kv[1], kv[0]))
            by_cl = max(breakdown.confidence.items(), key=lambda kv: (kv[1], kv[0]))
            assert by_ai[0] == by_cl[0]


class TestConcurrency:
    def test_parallel_classification_matches_serial(self, four_doc_model):
        from concurrent.futures import ThreadPoolExecutor

        queries = ["wheel steering", "bucket arm", "qqq www", "wheel zz", ""] * 8
        serial = [classify(q, four_doc_model) for q in queries]
        with ThreadPoolExecutor(max_workers=8) as pool:
            parallel = list(pool.map(lambda q: classify(q, four_doc_model), queries))
        assert parallel == serial


class TestActivationBounds:
    def test_bounds_on_random_scores(self):
        rng = np.random.default_rng(7)
        for _ in range(300):
            n = int(rng.integers(1, 12))
            labels = tuple(f"c{i:02d}" for i in range(n))
            model = stub_model(labels)
            raw = {label: float(v) for label, v in zip(labels, rng.normal(size=n) * 10)}
            analysis = stub_analysis(
                known=tuple(f"f{i}" for i in range(int(rng.integers(0, 6)))),
                unknown=int(rng.integers(0, 6)),
            )
            breakdown = activate(raw, analysis, model)
            sm_total = sum(breakdown.sm.values())
            assert sm_total == pytest.approx(1.0, abs=1e-9)
            relu_total = sum(breakdown.relu_norm.values())
            assert relu_total == 0.0 or relu_total == pytest.approx(1.0, abs=1e-9)
            assert all(0.0 <= v <= 1.0 for v in breakdown.relu_norm.values())
            assert all(-1.0 <= v <= 1.0 for v in breakdown.ai.values())
            conf = confidence(breakdown, analysis, model)
            assert all(-1.0 <= v <= 1.0 for v in conf.values())
