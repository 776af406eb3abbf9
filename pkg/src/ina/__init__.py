"""Interpretable intent classification with unknown-word discounting.

Feature weights are information quantities in bits estimated from corpus
counts, so every classification can be read off the model.  Confidence
lives in [-1, 1]; queries below the confidence threshold are rejected,
near-ties produce a short candidate list for an interactive pick, and
unknown words discount confidence in proportion to their count.
"""

from .errors import (
    BadFormat,
    DegenerateCorpus,
    EmptyCorpus,
    EmptyQuery,
    EmptyTestSet,
    InaError,
    InvalidModel,
    InvariantViolation,
    MalformedRow,
    MissingColumn,
    NoPositiveWeight,
    TableFormatError,
    UsageError,
)
from .preprocess import (
    FeatureSet,
    LemmaTable,
    PipelineConfig,
    SynonymTable,
    apply_synonyms,
    correct_spelling,
    dedupe,
    extract_features,
    lemmatize,
    normalize,
    preprocess,
)
from .model import (
    MODEL_FORMAT,
    CorpusExample,
    CountsTable,
    InaModel,
    ModelConfig,
    ModelStats,
    WeightMatrix,
    compute_counts,
    compute_weights,
    ingest_corpus,
    load_model,
    save_model,
    train,
)
from .inference import (
    Ambiguous,
    Answered,
    Candidate,
    Decision,
    QueryAnalysis,
    Rejected,
    ScoreBreakdown,
    analyze,
    activate,
    average_weight_tanh,
    classify,
    confidence,
    decide,
    discount_factor,
    positive_share,
    score_raw,
    softmax,
)
from .evaluation import (
    IRRELEVANT,
    ExperimentTable,
    InjectionSpec,
    MetricsReport,
    TestCase,
    TheoremReport,
    evaluate,
    inject_unknown,
    read_test_cases,
    synthetic_corpus,
    table2_experiment,
    theorem_suite,
)

__version__ = "0.1.0"
