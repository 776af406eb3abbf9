"""Metrics, unknown-token injection and the known/unknown experiment grid.

Evaluation scores a model against labeled test cases, where the
distinguished label ``__irrelevant__`` marks queries whose correct
outcome is rejection.  ``inject_unknown`` corrupts a chosen fraction of
each query's token positions with synthetic out-of-vocabulary tokens
(reserved ``zq`` prefix), which lets the harness compare a discounting
model against a non-discounting one on the same material:
``table2_experiment`` builds the 2x2 grid of (clean, injected) x
(basic, updated).

``theorem_suite`` stress-tests the core invariance: scores depend on
how many unknown tokens a query carries, never on which ones, and with
the known part fixed the confidence of every non-negatively activated
class can only fall as unknowns accumulate.
"""

from __future__ import annotations

import json
import math
import string
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyQuery, EmptyTestSet
from .inference import Ambiguous, Answered, Rejected, classify, discount_factor
from .model import POST_ACTIVATION, CorpusExample, InaModel
from .preprocess import normalize

__all__ = [
    "IRRELEVANT",
    "TestCase",
    "InjectionSpec",
    "MetricsReport",
    "ExperimentTable",
    "TheoremReport",
    "inject_unknown",
    "evaluate",
    "table2_experiment",
    "theorem_suite",
    "synthetic_corpus",
    "read_test_cases",
]

IRRELEVANT = "__irrelevant__"

# Injected tokens start with this prefix; corpora built by this module
# never put such tokens into the training vocabulary.
UNKNOWN_PREFIX = "zq"


@dataclass(frozen=True)
class TestCase:
    """A query with its expected class, or ``__irrelevant__``."""

    query: str
    expected: str


@dataclass(frozen=True)
class InjectionSpec:
    """How to corrupt test queries with out-of-vocabulary tokens."""

    fraction: float
    seed: int = 0
    token_length: int = 8

    def __post_init__(self):
        if not 0.0 <= self.fraction <= 1.0:
            raise ValueError("fraction must be in [0, 1]")


@dataclass(frozen=True)
class MetricsReport:
    """Rates plus confusion counts for one evaluation run."""

    accuracy: float
    precision: float
    recall: float
    rejection_rate: float
    confusion: dict[str, dict[str, int]]
    n_cases: int

    def as_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "rejection_rate": self.rejection_rate,
            "n_cases": self.n_cases,
            "confusion": self.confusion,
        }

    def render(self) -> str:
        return (
            f"accuracy={self.accuracy:.4f} precision={self.precision:.4f} "
            f"recall={self.recall:.4f} rejection_rate={self.rejection_rate:.4f} "
            f"n={self.n_cases}"
        )


@dataclass(frozen=True)
class ExperimentTable:
    """(condition, method) -> report grid; conditions clean/injected."""

    cells: dict[tuple[str, str], MetricsReport]

    def as_dict(self) -> dict:
        return {
            condition: {
                method: self.cells[(condition, method)].as_dict()
                for method in ("basic", "updated")
                if (condition, method) in self.cells
            }
            for condition in ("clean", "injected")
        }

    def render(self) -> str:
        header = f"{'condition':<10} {'method':<8} {'accuracy':>9} {'precision':>10} {'recall':>8} {'reject':>8}"
        lines = [header, "-" * len(header)]
        for condition in ("clean", "injected"):
            for method in ("basic", "updated"):
                report = self.cells[(condition, method)]
                lines.append(
                    f"{condition:<10} {method:<8} {report.accuracy:>9.4f} "
                    f"{report.precision:>10.4f} {report.recall:>8.4f} "
                    f"{report.rejection_rate:>8.4f}"
                )
        return "\n".join(lines)

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)


def _synthetic_token(rng: np.random.Generator, length: int) -> str:
    """A fresh lowercase token under the reserved prefix."""
    body = max(1, length - len(UNKNOWN_PREFIX))
    letters = rng.integers(0, 26, size=body)
    return UNKNOWN_PREFIX + "".join(string.ascii_lowercase[i] for i in letters)


def inject_unknown(case: TestCase, spec: InjectionSpec, index: int = 0) -> TestCase:
    """Replace ceil(fraction * n) token positions with synthetic tokens.

    Positions and replacements come from a dedicated random stream keyed
    by (seed, case index), so the result is reproducible no matter how
    the surrounding evaluation is scheduled.  The expected label is kept.
    """
    if spec.fraction <= 0.0:
        return case
    tokens = normalize(case.query)
    if not tokens:
        raise EmptyQuery("cannot inject unknown tokens into an empty query")
    rng = np.random.default_rng([spec.seed & 0xFFFFFFFFFFFFFFFF, index])
    n_replace = math.ceil(spec.fraction * len(tokens))
    positions = rng.choice(len(tokens), size=n_replace, replace=False)
    for pos in positions:
        tokens[pos] = _synthetic_token(rng, spec.token_length)
    return TestCase(" ".join(tokens), case.expected)


def evaluate(
    model: InaModel, cases: list[TestCase], mode: str = "lenient"
) -> MetricsReport:
    """Score the model on labeled cases.

    An answer is correct when it names the expected class; a rejection
    is correct when the expected label is ``__irrelevant__``.  An
    ambiguous outcome counts as its top candidate in lenient mode and is
    never correct in strict mode.  For the confusion matrix and the
    macro precision/recall (averaged over the model's classes, with
    empty denominators scored 0), the prediction is the answered class,
    the top candidate, or ``__irrelevant__`` for rejections.
    """
    if mode not in ("strict", "lenient"):
        raise ValueError(f"mode must be 'strict' or 'lenient', got {mode!r}")
    if not cases:
        raise EmptyTestSet("evaluation needs at least one test case")
    correct = 0
    rejected = 0
    confusion: dict[str, dict[str, int]] = {}
    pairs: list[tuple[str, str]] = []
    for case in cases:
        _, _, decision = classify(case.query, model)
        if isinstance(decision, Answered):
            predicted = decision.label
            ok = predicted == case.expected
        elif isinstance(decision, Rejected):
            predicted = IRRELEVANT
            rejected += 1
            ok = case.expected == IRRELEVANT
        else:
            assert isinstance(decision, Ambiguous)
            predicted = decision.candidates[0].label
            ok = mode == "lenient" and predicted == case.expected
        correct += ok
        pairs.append((case.expected, predicted))
        confusion.setdefault(case.expected, {})
        confusion[case.expected][predicted] = (
            confusion[case.expected].get(predicted, 0) + 1
        )

    precisions = []
    recalls = []
    for label in model.class_list:
        tp = sum(1 for exp, pred in pairs if exp == label and pred == label)
        fp = sum(1 for exp, pred in pairs if exp != label and pred == label)
        fn = sum(1 for exp, pred in pairs if exp == label and pred != label)
        precisions.append(tp / (tp + fp) if tp + fp else 0.0)
        recalls.append(tp / (tp + fn) if tp + fn else 0.0)

    n = len(cases)
    return MetricsReport(
        accuracy=correct / n,
        precision=sum(precisions) / len(precisions),
        recall=sum(recalls) / len(recalls),
        rejection_rate=rejected / n,
        confusion=confusion,
        n_cases=n,
    )


def table2_experiment(
    model_basic: InaModel,
    model_updated: InaModel,
    clean: list[TestCase],
    spec: InjectionSpec,
    irrelevant: list[TestCase] | None = None,
    mode: str = "lenient",
) -> ExperimentTable:
    """Evaluate both models on clean cases and on corrupted ones.

    The two models must share everything but the discount coefficient
    (``basic`` is the non-discounting one).  The injected condition
    corrupts every clean case per ``spec`` and appends the optional
    irrelevant cases unchanged.
    """
    if model_basic.weights != model_updated.weights:
        raise ValueError("basic and updated models must share their weights")
    injected = [inject_unknown(case, spec, index=i) for i, case in enumerate(clean)]
    injected.extend(irrelevant or [])
    return ExperimentTable(
        {
            ("clean", "basic"): evaluate(model_basic, clean, mode),
            ("clean", "updated"): evaluate(model_updated, clean, mode),
            ("injected", "basic"): evaluate(model_basic, injected, mode),
            ("injected", "updated"): evaluate(model_updated, injected, mode),
        }
    )


@dataclass
class TheoremReport:
    """Outcome of the unknown-token invariance suite."""

    trials: int
    identity_failures: int = 0
    monotonicity_failures: int = 0
    factor_sequence: list[float] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.identity_failures == 0 and self.monotonicity_failures == 0


def _fresh_tokens(
    rng: np.random.Generator, count: int, model: InaModel, taken: set[str]
) -> list[str]:
    tokens: list[str] = []
    while len(tokens) < count:
        tok = _synthetic_token(rng, 8)
        if tok in model.vocabulary or tok in taken:
            continue
        taken.add(tok)
        tokens.append(tok)
    return tokens


def theorem_suite(model: InaModel, trials: int = 1000, seed: int = 0) -> TheoremReport:
    """Check that unknown-token identity never matters, only the count.

    Each trial takes a stored training query, appends k unknown tokens
    twice with different spellings, and requires bit-identical score
    breakdowns and decisions.  For post-activation models it also walks
    u = 0..5 on the same base query and requires the confidence of every
    class with non-negative activation to be non-increasing in u; under
    pre-activation discounting the activation itself shifts with u (a
    trailing class's softmax share rises as scores flatten), so that
    corollary is not checked there.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    bases = [model.representatives[label] for label in model.class_list]
    check_monotonicity = model.config.discount_stage == POST_ACTIVATION
    report = TheoremReport(trials=trials)
    report.factor_sequence = [
        discount_factor(u, model.config.alpha_f) for u in range(6)
    ]
    for _ in range(trials):
        base = bases[int(rng.integers(0, len(bases)))]
        k = int(rng.integers(0, 5))
        taken: set[str] = set()
        first = _fresh_tokens(rng, k, model, taken)
        second = _fresh_tokens(rng, k, model, taken)
        query_a = " ".join([base, *first])
        query_b = " ".join([base, *second])
        _, breakdown_a, decision_a = classify(query_a, model)
        _, breakdown_b, decision_b = classify(query_b, model)
        if breakdown_a != breakdown_b or decision_a != decision_b:
            report.identity_failures += 1

        if not check_monotonicity:
            continue
        suffix: list[str] = []
        previous: dict[str, float] | None = None
        baseline_ai: dict[str, float] = {}
        monotone = True
        for u in range(6):
            query_u = " ".join([base, *suffix])
            _, breakdown_u, _ = classify(query_u, model)
            assert breakdown_u.confidence is not None
            if u == 0:
                baseline_ai = breakdown_u.ai
            else:
                assert previous is not None
                for label, ai_value in baseline_ai.items():
                    if ai_value >= 0 and breakdown_u.confidence[label] > previous[label]:
                        monotone = False
            previous = breakdown_u.confidence
            suffix.extend(_fresh_tokens(rng, 1, model, taken))
        if not monotone:
            report.monotonicity_failures += 1
    return report


def _ring_combos(pool: int, count: int) -> list[tuple[int, int]]:
    """``count`` distinct unordered index pairs over ``pool`` items.

    Pairs are taken at growing circular distance, so every item recurs
    in roughly ``2 * count / pool`` pairs.
    """
    combos: list[tuple[int, int]] = []
    seen: set[frozenset[int]] = set()
    distance = 1
    while len(combos) < count:
        if distance >= pool:
            raise ValueError(f"pool of {pool} cannot yield {count} distinct pairs")
        for k in range(pool):
            pair = (k, (k + distance) % pool)
            key = frozenset(pair)
            if key in seen:
                continue
            seen.add(key)
            combos.append(pair)
            if len(combos) == count:
                break
        distance += 1
    return combos


def synthetic_corpus(
    n_classes: int = 20,
    paraphrases_per_class: int = 10,
    n_irrelevant: int = 100,
    seed: int = 7,
    opener_pool: int = 7,
    irrelevant_oov: int = 2,
) -> tuple[list[CorpusExample], list[TestCase], list[TestCase]]:
    """Build a small corpus with shared function words and class content.

    Every class gets a unique two-word opener (words drawn from a shared
    pool, so single opener words recur across classes) and a pair of
    content words shared with one neighbouring class.  The function-word
    side of the vocabulary (openers plus two fillers) is roughly 30% of
    the total.  Paraphrases keep a filler between the opener and content
    blocks and flip block order and in-block word order, so the opener
    pair is the only single-class evidence; content pairs pin the query
    down to two classes and every cross-block word adjacency occurs in
    several.  Irrelevant queries reuse a class's opener -- common words
    the model knows -- followed by out-of-vocabulary tokens, half
    in-vocabulary overall.

    Returns (training examples, clean test cases, irrelevant test cases).
    """
    if n_classes < 3:
        raise ValueError("need at least 3 classes for distinct opener pairs")
    combos = _ring_combos(opener_pool, n_classes)
    rng = np.random.default_rng(seed)

    openers = [f"ask{i}" for i in range(opener_pool)]
    contents = [f"thing{i:02d}" for i in range(2 * ((n_classes + 1) // 2))]
    fillers = ["do", "it"]

    examples: list[CorpusExample] = []
    clean: list[TestCase] = []
    for cls in range(n_classes):
        label = f"class{cls:02d}"
        opener = [openers[combos[cls][0]], openers[combos[cls][1]]]
        # Adjacent classes share one content pair; only the opener pair
        # is unique evidence for a single class.
        pair = cls // 2
        content = [contents[2 * pair], contents[2 * pair + 1]]
        for p in range(paraphrases_per_class):
            o_block = list(reversed(opener)) if (p >> 1) & 1 else list(opener)
            c_block = list(reversed(content)) if (p >> 2) & 1 else list(content)
            filler = fillers[(p >> 3) % len(fillers)]
            if p & 1:
                tokens = c_block + [filler] + o_block
            else:
                tokens = o_block + [filler] + c_block
            query = " ".join(tokens)
            examples.append(CorpusExample(query, label))
            clean.append(TestCase(query, label))

    irrelevant: list[TestCase] = []
    vocabulary = set(openers) | set(contents) | set(fillers)
    taken: set[str] = set()
    for q in range(n_irrelevant):
        cls = q % n_classes
        opener = [openers[combos[cls][0]], openers[combos[cls][1]]]
        oov: list[str] = []
        while len(oov) < irrelevant_oov:
            tok = _synthetic_token(rng, 8)
            if tok in vocabulary or tok in taken:
                continue
            taken.add(tok)
            oov.append(tok)
        irrelevant.append(TestCase(" ".join(opener + oov), IRRELEVANT))
    return examples, clean, irrelevant


def read_test_cases(source) -> list[TestCase]:
    """Read test cases from the corpus CSV schema (query, class)."""
    from .model import ingest_corpus

    return [TestCase(ex.query, ex.class_label) for ex in ingest_corpus(source)]
