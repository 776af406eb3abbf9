"""Scoring, activation, discounting and the decision policy.

A query is scored per class by summing the stored weights of its known
features (binary presence).  Three bounded views of the raw scores are
averaged into a per-class activation in [-1, 1]:

* ``softmax``         -- share of exponentiated score mass;
* ``positive_share``  -- share of the positive score mass (all zero when
                         no score is positive);
* ``average_weight_tanh`` -- tanh of the class's mean weight per known
                         feature, normalized by the largest single
                         weight in the model.

Unknown words discount the result through the factor

    1 - alpha_f * u / (1 + u)

where u counts the distinct query unigrams absent from the trained
vocabulary.  The factor is 1 at u = 0, strictly decreasing, and tends to
1 - alpha_f; with the default alpha_f = 2 the confidence range is
exactly (-1, 1].  By default the factor multiplies the activation, so
unknown words can only shrink confidence, never reorder classes; the
``pre_activation`` stage applies it to the raw scores instead (and is
restricted to alpha_f <= 1, where the factor cannot go negative).

The decision policy answers with the best class when its confidence
clears the threshold and no rival sits within the ambiguity band,
returns up to ``max_candidates`` candidates for an interactive pick when
rivals do, and rejects the query otherwise.  All scoring is pure: the
same query against the same model yields bit-identical results.  In
particular, two queries with the same known tokens and the same number
of unknown tokens score identically no matter which unknown tokens they
contain.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidModel
from .model import InaModel, PRE_ACTIVATION
from .preprocess import FeatureSet, preprocess

__all__ = [
    "QueryAnalysis",
    "ScoreBreakdown",
    "Candidate",
    "Answered",
    "Ambiguous",
    "Rejected",
    "Decision",
    "softmax",
    "positive_share",
    "average_weight_tanh",
    "discount_factor",
    "analyze",
    "score_raw",
    "activate",
    "confidence",
    "decide",
    "classify",
]


@dataclass(frozen=True)
class QueryAnalysis:
    """A preprocessed query split into known and unknown parts.

    ``known_features`` lists the query features present in the model's
    feature index, in deterministic order (unigrams in query order, then
    bigrams sorted).  ``unknown_count`` is the number of distinct query
    unigrams outside the trained vocabulary; bigrams touching an unknown
    token are neither known features nor counted here.
    """

    features: FeatureSet
    known_features: tuple[str, ...]
    unknown_count: int

    @property
    def n_known(self) -> int:
        return len(self.known_features)


@dataclass(frozen=True)
class ScoreBreakdown:
    """Per-class numbers produced while classifying one query."""

    classes: tuple[str, ...]
    raw: dict[str, float]
    sm: dict[str, float]
    relu_norm: dict[str, float]
    tanh_comp: dict[str, float]
    ai: dict[str, float]
    discount: float
    confidence: dict[str, float] | None = None


@dataclass(frozen=True)
class Candidate:
    label: str
    confidence: float
    representative: str


@dataclass(frozen=True)
class Answered:
    label: str
    confidence: float


@dataclass(frozen=True)
class Ambiguous:
    candidates: tuple[Candidate, ...]


@dataclass(frozen=True)
class Rejected:
    best_confidence: float


Decision = Answered | Ambiguous | Rejected


def softmax(scores: np.ndarray) -> np.ndarray:
    """Numerically stable softmax (max-subtracted); sums to 1."""
    shifted = scores - scores.max()
    exps = np.exp(shifted)
    return exps / exps.sum()


def positive_share(scores: np.ndarray) -> np.ndarray:
    """Each class's share of the positive score mass.

    All-zero when no score is positive, so the vector sums to exactly 0
    or approximately 1.
    """
    clipped = np.maximum(scores, 0.0)
    total = clipped.sum()
    if total <= 0.0:
        return np.zeros_like(scores)
    return clipped / total


def average_weight_tanh(scores: np.ndarray, n_known: int, w_max: float) -> np.ndarray:
    """tanh of (mean weight per known feature) / (largest model weight).

    Zero everywhere when the query has no known features.  Because a
    class's mean feature weight can never exceed the largest single
    weight, this component stays within (-tanh(1), tanh(1)) in practice.
    """
    if n_known <= 0:
        return np.zeros_like(scores)
    return np.tanh((scores / n_known) / w_max)


def discount_factor(unknown_count: int, alpha_f: float) -> float:
    """Confidence multiplier ``1 - alpha_f * u / (1 + u)``.

    Equals 1.0 at u = 0, decreases strictly with u, and approaches
    1 - alpha_f from above as u grows.  Evaluated as a single division
    of exact integers, ``(1 + u - alpha_f*u) / (1 + u)``, so small-count
    values land on the correctly rounded binary64 result (e.g. exactly
    -1/3 at u = 2, alpha_f = 2).
    """
    if unknown_count < 0:
        raise ValueError("unknown_count must be >= 0")
    if alpha_f < 0:
        raise ValueError("alpha_f must be >= 0")
    u = float(unknown_count)
    return (1.0 + u - alpha_f * u) / (1.0 + u)


def analyze(raw: str, model: InaModel) -> QueryAnalysis:
    """Preprocess a query with the model's tables and split it by knowledge."""
    features = preprocess(raw, model.pipeline())
    known: list[str] = []
    unknown_count = 0
    for token in features.token_list:
        if token in model.vocabulary:
            if token in model.feature_index:
                known.append(token)
        else:
            unknown_count += 1
    known.extend(sorted(b for b in features.bigrams if b in model.feature_index))
    return QueryAnalysis(features, tuple(known), unknown_count)


def score_raw(analysis: QueryAnalysis, model: InaModel) -> dict[str, float]:
    """Sum the stored weights of the known features, per class.

    Every class gets a value; (feature, class) pairs without a stored
    weight contribute nothing.
    """
    scores = {label: 0.0 for label in model.class_list}
    for feat in analysis.known_features:
        for label, w in model.weights[feat].items():
            scores[label] += w
    return scores


def activate(
    raw_scores: dict[str, float], analysis: QueryAnalysis, model: InaModel
) -> ScoreBreakdown:
    """Combine the three activation components into per-class values.

    In ``pre_activation`` mode the discount factor scales the raw scores
    before any component is computed; otherwise the components see the
    raw scores unchanged and the factor is applied later, on the
    activation itself.
    """
    w_max = model.stats.w_max
    if not w_max > 0:
        raise InvalidModel(f"model w_max must be > 0, got {w_max!r}")
    classes = model.class_list
    vec = np.array([raw_scores[label] for label in classes], dtype=np.float64)
    factor = discount_factor(analysis.unknown_count, model.config.alpha_f)
    effective = vec * factor if model.config.discount_stage == PRE_ACTIVATION else vec

    sm = softmax(effective)
    relu = positive_share(effective)
    th = average_weight_tanh(effective, analysis.n_known, w_max)
    ai = np.clip((sm + relu + th) / 3.0, -1.0, 1.0)

    def as_map(values: np.ndarray) -> dict[str, float]:
        return {label: float(v) for label, v in zip(classes, values)}

    return ScoreBreakdown(
        classes=classes,
        raw=as_map(vec),
        sm=as_map(sm),
        relu_norm=as_map(relu),
        tanh_comp=as_map(th),
        ai=as_map(ai),
        discount=factor,
    )


def confidence(
    breakdown: ScoreBreakdown, analysis: QueryAnalysis, model: InaModel
) -> dict[str, float]:
    """Final per-class confidence in [-1, 1].

    Post-activation mode multiplies the activation by the discount
    factor (clamped into range for alpha_f > 2); in pre-activation mode
    the discount already happened inside ``activate``.
    """
    if model.config.discount_stage == PRE_ACTIVATION:
        return dict(breakdown.ai)
    factor = breakdown.discount
    return {
        label: min(1.0, max(-1.0, factor * value))
        for label, value in breakdown.ai.items()
    }


def decide(confidences: dict[str, float], model: InaModel) -> Decision:
    """Apply the answer / disambiguate / reject policy.

    The best class (ties broken toward the lexicographically smallest
    label) must clear the threshold or the query is rejected.  Classes
    within the ambiguity band of the best confidence become candidates,
    sorted by confidence descending then label ascending and truncated
    to ``max_candidates``; a single candidate is a direct answer.
    """
    cfg = model.config
    best = max(confidences[label] for label in model.class_list)
    if best < cfg.threshold:
        return Rejected(best)
    cutoff = best - cfg.ambiguity_band
    contenders = [
        (label, confidences[label])
        for label in model.class_list
        if confidences[label] >= cutoff
    ]
    contenders.sort(key=lambda item: (-item[1], item[0]))
    contenders = contenders[: cfg.max_candidates]
    if len(contenders) == 1:
        label, value = contenders[0]
        return Answered(label, value)
    return Ambiguous(
        tuple(
            Candidate(label, value, model.representatives[label])
            for label, value in contenders
        )
    )


def classify(raw: str, model: InaModel) -> tuple[QueryAnalysis, ScoreBreakdown, Decision]:
    """Full pipeline: analyze, score, activate, discount, decide."""
    analysis = analyze(raw, model)
    scores = score_raw(analysis, model)
    breakdown = activate(scores, analysis, model)
    conf = confidence(breakdown, analysis, model)
    breakdown = replace(breakdown, confidence=conf)
    return analysis, breakdown, decide(conf, model)
