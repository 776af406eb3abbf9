"""Training and persistence.

A trained model stores one interpretable weight per (feature, class)
pair: the number of bits by which observing the feature shifts belief
toward the class,

    w = P(class | feature) * log2(P(class | feature) / P(class)),

estimated from document-level binary presence counts over the training
corpus.  No smoothing is applied: pairs that never co-occur simply have
no entry and contribute nothing at scoring time, while negative weights
(features that make a class less likely) are kept.

The model file is canonical JSON: a fixed format tag, every map emitted
with lexicographically sorted keys, and floats written as the shortest
decimal that round-trips binary64, which makes save -> load -> save
byte-identical.  The file embeds the synonym and lemma tables so one
file is enough to classify.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import IO, Sequence

from .errors import (
    BadFormat,
    DegenerateCorpus,
    EmptyCorpus,
    InvariantViolation,
    MalformedRow,
    MissingColumn,
    NoPositiveWeight,
)
from .preprocess import (
    LemmaTable,
    PipelineConfig,
    SynonymTable,
    preprocess,
)

__all__ = [
    "MODEL_FORMAT",
    "CorpusExample",
    "CountsTable",
    "WeightMatrix",
    "ModelConfig",
    "ModelStats",
    "InaModel",
    "ingest_corpus",
    "compute_counts",
    "compute_weights",
    "train",
    "save_model",
    "load_model",
]

MODEL_FORMAT = "ina-model/1"

POST_ACTIVATION = "post_activation"
PRE_ACTIVATION = "pre_activation"

# feature -> class -> weight in bits
WeightMatrix = dict[str, dict[str, float]]


@dataclass
class CorpusExample:
    """One labeled training query; unknown CSV columns ride along in ``extra``."""

    query: str
    class_label: str
    extra: dict[str, str] = field(default_factory=dict)


@dataclass
class CountsTable:
    """Document-level presence counts behind the weight estimates."""

    n_docs: int
    n_class: dict[str, int]
    n_feat: dict[str, int]
    n_joint: dict[tuple[str, str], int]


@dataclass(frozen=True)
class ModelConfig:
    """Inference-time knobs stored with the model.

    ``alpha_f`` scales the unknown-word discount; the default 2.0 makes
    the confidence range exactly (-1, 1].  ``discount_stage`` selects
    whether the discount multiplies the final activation (default) or
    the raw scores before activation; the pre-activation variant
    requires alpha_f <= 1 so the factor stays non-negative and cannot
    invert the class ordering.
    """

    alpha_f: float = 2.0
    window: int = 2
    threshold: float = 0.6
    ambiguity_band: float = 0.05
    max_candidates: int = 5
    discount_stage: str = POST_ACTIVATION

    def __post_init__(self):
        if self.alpha_f < 0:
            raise ValueError("alpha_f must be >= 0")
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError("threshold must be in [0, 1]")
        if self.ambiguity_band < 0:
            raise ValueError("ambiguity_band must be >= 0")
        if self.max_candidates < 1:
            raise ValueError("max_candidates must be >= 1")
        if self.discount_stage not in (POST_ACTIVATION, PRE_ACTIVATION):
            raise ValueError(f"unknown discount_stage {self.discount_stage!r}")
        if self.discount_stage == PRE_ACTIVATION and self.alpha_f > 1:
            raise ValueError("pre_activation discounting requires alpha_f <= 1")


@dataclass(frozen=True)
class ModelStats:
    """Summary numbers recorded at train time.

    ``w_max`` is the largest single stored weight; it normalizes the
    tanh activation component, so it must be positive.
    ``positive_features`` counts per class how many features carry a
    strictly positive weight.
    """

    w_max: float
    classes: int
    vocab_size: int
    positive_features: dict[str, int]


@dataclass
class InaModel:
    """A trained classifier: weights, vocabulary, tables and config.

    Instances are immutable by convention after construction and safe to
    share across threads.  ``class_list`` is sorted lexicographically;
    ``representatives`` maps every class to the original text of its
    first training example, shown to users during disambiguation.
    """

    config: ModelConfig
    weights: WeightMatrix
    vocabulary: frozenset[str]
    feature_index: frozenset[str]
    class_list: tuple[str, ...]
    representatives: dict[str, str]
    stats: ModelStats
    synonyms: SynonymTable
    lemmas: LemmaTable

    def pipeline(self) -> PipelineConfig:
        """The preprocessing configuration embedded in this model."""
        return PipelineConfig(self.config.window, self.synonyms, self.lemmas)

    def with_alpha(self, alpha_f: float) -> "InaModel":
        """Copy of this model with a different discount coefficient."""
        return replace(self, config=replace(self.config, alpha_f=alpha_f))


def _open_text(source) -> IO[str]:
    # utf-8-sig so spreadsheet-exported files with a BOM ingest cleanly
    if isinstance(source, (str, Path)):
        return open(source, "r", encoding="utf-8-sig", newline="")
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(source.decode("utf-8-sig"))
    if hasattr(source, "read"):
        data = source.read()
        if isinstance(data, bytes):
            data = data.decode("utf-8-sig")
        return io.StringIO(data)
    raise TypeError(f"cannot read corpus from {type(source).__name__}")


def ingest_corpus(source) -> list[CorpusExample]:
    """Read a labeled corpus from CSV.

    The header must contain ``query`` and ``class`` columns; any other
    columns are preserved in each example's ``extra`` map.  Standard CSV
    quoting applies.
    """
    with _open_text(source) as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyCorpus("corpus file has no header row") from None
        missing = [col for col in ("query", "class") if col not in header]
        if missing:
            raise MissingColumn(f"corpus header lacks column(s): {', '.join(missing)}")
        query_idx = header.index("query")
        class_idx = header.index("class")
        extra_cols = [
            (i, name)
            for i, name in enumerate(header)
            if i not in (query_idx, class_idx)
        ]
        examples: list[CorpusExample] = []
        for rowno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise MalformedRow(
                    f"row {rowno}: expected {len(header)} fields, got {len(row)}"
                )
            extra = {name: row[i] for i, name in extra_cols}
            examples.append(CorpusExample(row[query_idx], row[class_idx], extra))
    if not examples:
        raise EmptyCorpus("corpus has a header but no data rows")
    return examples


def compute_counts(
    examples: Sequence[CorpusExample], pipeline: PipelineConfig
) -> CountsTable:
    """Accumulate document-level presence counts.

    Each distinct feature of an example (unigrams and bigrams after
    preprocessing) increments its feature and joint counters once, no
    matter how often it occurred in the raw text.
    """
    if not examples:
        raise EmptyCorpus("cannot count an empty corpus")
    n_class: dict[str, int] = {}
    n_feat: dict[str, int] = {}
    n_joint: dict[tuple[str, str], int] = {}
    for example in examples:
        label = example.class_label
        n_class[label] = n_class.get(label, 0) + 1
        features = preprocess(example.query, pipeline)
        for feat in features.unigrams | features.bigrams:
            n_feat[feat] = n_feat.get(feat, 0) + 1
            key = (feat, label)
            n_joint[key] = n_joint.get(key, 0) + 1
    return CountsTable(len(examples), n_class, n_feat, n_joint)


def compute_weights(counts: CountsTable) -> WeightMatrix:
    """Turn counts into information-bit weights.

    One entry exists per (feature, class) pair with a positive joint
    count; zero and negative weights are retained.
    """
    raw: dict[str, dict[str, float]] = {}
    n_docs = counts.n_docs
    for (feat, label), joint in counts.n_joint.items():
        p_ji = joint / counts.n_feat[feat]
        p_j = counts.n_class[label] / n_docs
        raw.setdefault(feat, {})[label] = p_ji * math.log2(p_ji / p_j)
    # Sorted maps give deterministic iteration and canonical serialization.
    return {feat: dict(sorted(classes.items())) for feat, classes in sorted(raw.items())}


def train(
    examples: Sequence[CorpusExample],
    config: ModelConfig | None = None,
    synonyms: SynonymTable | None = None,
    lemmas: LemmaTable | None = None,
) -> InaModel:
    """Train a model from labeled examples.

    Needs at least two distinct classes and at least one feature with a
    strictly positive weight.  Weights are invariant under corpus row
    permutation; only the per-class representative (first example in
    corpus order) depends on ordering.
    """
    if not examples:
        raise EmptyCorpus("cannot train on an empty corpus")
    cfg = config or ModelConfig()
    syn = synonyms if synonyms is not None else SynonymTable()
    lem = lemmas if lemmas is not None else LemmaTable()
    labels = sorted({ex.class_label for ex in examples})
    if len(labels) < 2:
        raise DegenerateCorpus(
            f"training needs >= 2 distinct classes, got {len(labels)}"
        )
    pipeline = PipelineConfig(cfg.window, syn, lem)
    counts = compute_counts(examples, pipeline)
    weights = compute_weights(counts)

    vocabulary: set[str] = set()
    representatives: dict[str, str] = {}
    for example in examples:
        vocabulary.update(preprocess(example.query, pipeline).unigrams)
        representatives.setdefault(example.class_label, example.query)

    w_max = max((w for classes in weights.values() for w in classes.values()), default=0.0)
    if w_max <= 0:
        raise NoPositiveWeight("every feature weight is <= 0; corpus is uninformative")
    positive = {label: 0 for label in labels}
    for classes in weights.values():
        for label, w in classes.items():
            if w > 0:
                positive[label] += 1

    stats = ModelStats(
        w_max=w_max,
        classes=len(labels),
        vocab_size=len(vocabulary),
        positive_features=positive,
    )
    return InaModel(
        config=cfg,
        weights=weights,
        vocabulary=frozenset(vocabulary),
        feature_index=frozenset(weights),
        class_list=tuple(labels),
        representatives=representatives,
        stats=stats,
        synonyms=syn,
        lemmas=lem,
    )


def _model_to_dict(model: InaModel) -> dict:
    cfg = model.config
    return {
        "format": MODEL_FORMAT,
        "config": {
            "alpha_f": float(cfg.alpha_f),
            "window": cfg.window,
            "threshold": float(cfg.threshold),
            "ambiguity_band": float(cfg.ambiguity_band),
            "max_candidates": cfg.max_candidates,
            "discount_stage": cfg.discount_stage,
        },
        "class_list": list(model.class_list),
        "vocabulary": sorted(model.vocabulary),
        "weights": {
            feat: {label: float(w) for label, w in sorted(classes.items())}
            for feat, classes in sorted(model.weights.items())
        },
        "representatives": dict(sorted(model.representatives.items())),
        "stats": {
            "w_max": float(model.stats.w_max),
            "classes": model.stats.classes,
            "vocab_size": model.stats.vocab_size,
            "positive_features": dict(sorted(model.stats.positive_features.items())),
        },
        "synonyms": [
            [list(rule.pattern), list(rule.replacement)] for rule in model.synonyms.rules
        ],
        "lemmas": dict(sorted(model.lemmas.entries.items())),
    }


def save_model(model: InaModel, sink) -> None:
    """Write the model as canonical JSON (UTF-8, sorted keys)."""
    text = (
        json.dumps(
            _model_to_dict(model),
            sort_keys=True,
            ensure_ascii=False,
            separators=(",", ":"),
            allow_nan=False,
        )
        + "\n"
    )
    if isinstance(sink, (str, Path)):
        with open(sink, "w", encoding="utf-8") as handle:
            handle.write(text)
        return
    if hasattr(sink, "write"):
        try:
            sink.write(text)
        except TypeError:
            sink.write(text.encode("utf-8"))
        return
    raise TypeError(f"cannot write model to {type(sink).__name__}")


def _require(condition: bool, invariant: str, message: str) -> None:
    if not condition:
        raise InvariantViolation(invariant, message)


def _is_token(value) -> bool:
    return (
        isinstance(value, str)
        and value != ""
        and not any(ch.isspace() for ch in value)
        and value == value.lower()
    )


def _load_payload(source) -> dict:
    # A str is JSON text when it looks like a document, a path otherwise.
    if isinstance(source, Path):
        data = source.read_text(encoding="utf-8")
    elif isinstance(source, str):
        if source.lstrip().startswith("{"):
            data = source
        else:
            data = Path(source).read_text(encoding="utf-8")
    elif isinstance(source, (bytes, bytearray)):
        data = source.decode("utf-8", errors="replace")
    elif hasattr(source, "read"):
        data = source.read()
        if isinstance(data, bytes):
            data = data.decode("utf-8", errors="replace")
    else:
        raise TypeError(f"cannot load model from {type(source).__name__}")
    try:
        payload = json.loads(data)
    except ValueError as exc:
        raise BadFormat(f"model file is not valid JSON: {exc}") from None
    if not isinstance(payload, dict):
        raise BadFormat("model file must contain a JSON object")
    return payload


def load_model(source) -> InaModel:
    """Parse and validate a model file.

    Raises ``BadFormat`` for a wrong or missing format tag or a
    structurally broken document, and ``InvariantViolation`` (naming the
    failed rule) when the document parses but its contents break a model
    invariant.
    """
    payload = _load_payload(source)
    if payload.get("format") != MODEL_FORMAT:
        raise BadFormat(
            f"expected format tag {MODEL_FORMAT!r}, got {payload.get('format')!r}"
        )
    for key in (
        "config",
        "class_list",
        "vocabulary",
        "weights",
        "representatives",
        "stats",
        "synonyms",
        "lemmas",
    ):
        if key not in payload:
            raise BadFormat(f"model file lacks required key {key!r}")

    cfg_raw = payload["config"]
    if not isinstance(cfg_raw, dict):
        raise BadFormat("config must be an object")
    _require(
        isinstance(cfg_raw.get("alpha_f"), (int, float)) and cfg_raw["alpha_f"] >= 0,
        "alpha_nonnegative",
        "config.alpha_f must be a number >= 0",
    )
    _require(
        isinstance(cfg_raw.get("window"), int) and cfg_raw["window"] >= 1,
        "window_min",
        "config.window must be an integer >= 1",
    )
    _require(
        isinstance(cfg_raw.get("threshold"), (int, float))
        and 0.0 <= cfg_raw["threshold"] <= 1.0,
        "threshold_range",
        "config.threshold must be in [0, 1]",
    )
    _require(
        isinstance(cfg_raw.get("ambiguity_band"), (int, float))
        and cfg_raw["ambiguity_band"] >= 0,
        "band_nonnegative",
        "config.ambiguity_band must be >= 0",
    )
    _require(
        isinstance(cfg_raw.get("max_candidates"), int) and cfg_raw["max_candidates"] >= 1,
        "max_candidates_min",
        "config.max_candidates must be an integer >= 1",
    )
    _require(
        cfg_raw.get("discount_stage") in (POST_ACTIVATION, PRE_ACTIVATION),
        "discount_stage",
        f"config.discount_stage must be {POST_ACTIVATION!r} or {PRE_ACTIVATION!r}",
    )
    _require(
        not (
            cfg_raw["discount_stage"] == PRE_ACTIVATION and cfg_raw["alpha_f"] > 1
        ),
        "pre_activation_alpha",
        "pre_activation discounting requires alpha_f <= 1",
    )
    config = ModelConfig(
        alpha_f=float(cfg_raw["alpha_f"]),
        window=cfg_raw["window"],
        threshold=float(cfg_raw["threshold"]),
        ambiguity_band=float(cfg_raw["ambiguity_band"]),
        max_candidates=cfg_raw["max_candidates"],
        discount_stage=cfg_raw["discount_stage"],
    )

    class_list = payload["class_list"]
    if not isinstance(class_list, list) or not all(
        isinstance(c, str) for c in class_list
    ):
        raise BadFormat("class_list must be a list of strings")
    _require(bool(class_list), "class_list_nonempty", "class_list is empty")
    _require(
        all(class_list[i] < class_list[i + 1] for i in range(len(class_list) - 1)),
        "class_list_sorted",
        "class_list must be strictly sorted",
    )
    classes = set(class_list)

    vocabulary = payload["vocabulary"]
    if not isinstance(vocabulary, list):
        raise BadFormat("vocabulary must be a list")
    for token in vocabulary:
        _require(
            _is_token(token),
            "vocabulary_token",
            f"vocabulary entry {token!r} is not a valid token",
        )

    weights_raw = payload["weights"]
    if not isinstance(weights_raw, dict):
        raise BadFormat("weights must be an object")
    weights: WeightMatrix = {}
    for feat, classes_raw in sorted(weights_raw.items()):
        if not isinstance(classes_raw, dict):
            raise BadFormat(f"weights[{feat!r}] must be an object")
        _require(
            isinstance(feat, str) and feat != "",
            "feature_nonempty",
            "weight features must be non-empty strings",
        )
        per_class: dict[str, float] = {}
        for label, value in sorted(classes_raw.items()):
            _require(
                label in classes,
                "weight_class_known",
                f"weight for feature {feat!r} names unknown class {label!r}",
            )
            _require(
                isinstance(value, (int, float)) and math.isfinite(value),
                "weight_finite",
                f"weight ({feat!r}, {label!r}) is not a finite number",
            )
            per_class[label] = float(value)
        weights[feat] = per_class

    representatives = payload["representatives"]
    if not isinstance(representatives, dict) or not all(
        isinstance(v, str) for v in representatives.values()
    ):
        raise BadFormat("representatives must map class -> string")
    _require(
        set(representatives) == classes,
        "representatives_complete",
        "representatives must cover exactly the classes in class_list",
    )

    stats_raw = payload["stats"]
    if not isinstance(stats_raw, dict):
        raise BadFormat("stats must be an object")
    w_max = stats_raw.get("w_max")
    _require(
        isinstance(w_max, (int, float)) and math.isfinite(w_max) and w_max > 0,
        "w_max_positive",
        "stats.w_max must be a finite number > 0",
    )
    actual_max = max(
        (w for per_class in weights.values() for w in per_class.values()),
        default=0.0,
    )
    _require(
        float(w_max) == actual_max,
        "w_max_consistent",
        f"stats.w_max={w_max!r} but the largest stored weight is {actual_max!r}",
    )
    _require(
        stats_raw.get("classes") == len(class_list),
        "stats_classes",
        "stats.classes must equal len(class_list)",
    )
    _require(
        stats_raw.get("vocab_size") == len(vocabulary),
        "stats_vocab_size",
        "stats.vocab_size must equal len(vocabulary)",
    )
    positive_raw = stats_raw.get("positive_features")
    if not isinstance(positive_raw, dict):
        raise BadFormat("stats.positive_features must be an object")
    recomputed = {label: 0 for label in class_list}
    for per_class in weights.values():
        for label, w in per_class.items():
            if w > 0:
                recomputed[label] += 1
    _require(
        positive_raw == recomputed,
        "stats_positive_features",
        "stats.positive_features disagrees with the stored weights",
    )
    stats = ModelStats(
        w_max=float(w_max),
        classes=stats_raw["classes"],
        vocab_size=stats_raw["vocab_size"],
        positive_features={k: int(v) for k, v in sorted(positive_raw.items())},
    )

    synonyms_raw = payload["synonyms"]
    if not isinstance(synonyms_raw, list):
        raise BadFormat("synonyms must be a list of [pattern, replacement] pairs")
    rules = []
    for entry in synonyms_raw:
        if (
            not isinstance(entry, list)
            or len(entry) != 2
            or not all(isinstance(side, list) for side in entry)
        ):
            raise BadFormat("each synonym rule must be [pattern, replacement]")
        rules.append((entry[0], entry[1]))
    patterns = [tuple(p) for p, _ in rules]
    _require(
        all(p for p in patterns),
        "synonym_pattern_nonempty",
        "synonym patterns must be non-empty",
    )
    _require(
        all(
            len(patterns[i]) >= len(patterns[i + 1])
            for i in range(len(patterns) - 1)
        ),
        "synonym_order",
        "synonym patterns must be sorted longest first",
    )
    _require(
        len(set(patterns)) == len(patterns),
        "synonym_unique",
        "synonym patterns must be unique",
    )
    try:
        synonyms = SynonymTable(rules)
    except Exception as exc:
        raise InvariantViolation("synonym_table", str(exc)) from None

    lemmas_raw = payload["lemmas"]
    if not isinstance(lemmas_raw, dict):
        raise BadFormat("lemmas must be an object")
    for token, lemma in lemmas_raw.items():
        _require(
            _is_token(token) and _is_token(lemma),
            "lemma_token",
            f"lemma entry {token!r} -> {lemma!r} is not a valid token pair",
        )
    lemmas = LemmaTable(lemmas_raw)

    return InaModel(
        config=config,
        weights=weights,
        vocabulary=frozenset(vocabulary),
        feature_index=frozenset(weights),
        class_list=tuple(class_list),
        representatives=dict(representatives),
        stats=stats,
        synonyms=synonyms,
        lemmas=lemmas,
    )
