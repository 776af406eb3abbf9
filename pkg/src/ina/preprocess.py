"""Deterministic text-to-features pipeline.

Turns a free-form query into the binary presence features the classifier
scores: lowercase, punctuation-free unigrams plus ordered skip-bigrams
within a bounded token-distance window.  The stages always run in the
same order

    normalize -> apply_synonyms -> lemmatize -> dedupe -> extract_features

and every stage is a pure function over read-only tables, so the same
input and configuration produce bit-identical features, from any number
of threads.

Synonym rewriting runs before lemmatization so that hand-written
multi-word patterns can match surface forms; deduplication runs last so
that inflected duplicates collapse once both rewrites are done.  Tokens
absent from every table pass through unchanged: downstream code counts
them as unknown words, so no stage may drop them.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import TableFormatError

__all__ = [
    "SynonymRule",
    "SynonymTable",
    "LemmaTable",
    "PipelineConfig",
    "FeatureSet",
    "normalize",
    "correct_spelling",
    "dedupe",
    "apply_synonyms",
    "lemmatize",
    "extract_features",
    "preprocess",
]

# Codepoint -> "is punctuation" cache; queries revisit the same chars.
_PUNCT: dict[str, bool] = {}


def _is_punctuation(ch: str) -> bool:
    flag = _PUNCT.get(ch)
    if flag is None:
        flag = unicodedata.category(ch).startswith("P")
        _PUNCT[ch] = flag
    return flag


def _check_token(token: str, origin: str, matchable: bool = False) -> str:
    """Validate a table-provided token.

    Tokens that must match normalized query text (synonym patterns,
    lemma table keys) additionally may not contain punctuation, since
    normalization strips it and they could never match.  Output tokens
    (replacements, lemmas) may carry joiners like ``_``.
    """
    if not token:
        raise TableFormatError(f"{origin}: empty token")
    if any(ch.isspace() for ch in token):
        raise TableFormatError(f"{origin}: token {token!r} contains whitespace")
    if matchable and any(_is_punctuation(ch) for ch in token):
        raise TableFormatError(
            f"{origin}: token {token!r} contains punctuation and can never match"
        )
    return token


def normalize(text: str) -> list[str]:
    """Split a raw query into lowercase, punctuation-free tokens.

    Every Unicode punctuation codepoint acts as a separator, so
    contractions split ("what's" -> what, s); language-specific handling
    belongs in the synonym table.  Runs of whitespace collapse and empty
    input yields an empty list.
    """
    lowered = text.lower()
    cleaned = "".join(" " if _is_punctuation(ch) else ch for ch in lowered)
    return cleaned.split()


def correct_spelling(tokens: Sequence[str]) -> list[str]:
    """Extension hook between normalization and synonym rewriting.

    Deliberately the identity: automatic spell correction tends to
    rewrite out-of-vocabulary words into known ones, which destroys the
    unknown-word signal the classifier discounts on.  Kept as a stage so
    a deployment with a trustworthy corrector has a place to put it.
    """
    return list(tokens)


def dedupe(tokens: Sequence[str]) -> list[str]:
    """Keep the first occurrence of each token, preserving order."""
    seen: set[str] = set()
    out: list[str] = []
    for tok in tokens:
        if tok not in seen:
            seen.add(tok)
            out.append(tok)
    return out


@dataclass(frozen=True)
class SynonymRule:
    pattern: tuple[str, ...]
    replacement: tuple[str, ...]


class SynonymTable:
    """Ordered token-sequence rewrite rules, longest pattern first.

    Rules are kept sorted by decreasing pattern length (stable within a
    length), which gives longest-match precedence during the scan.  Two
    rules may not share a pattern, and no pattern may be empty.
    """

    def __init__(self, rules: Iterable[tuple[Sequence[str], Sequence[str]]] = ()):
        normalized = []
        seen: set[tuple[str, ...]] = set()
        for pattern, replacement in rules:
            pat = tuple(pattern)
            rep = tuple(replacement)
            if not pat:
                raise TableFormatError("synonym rule with empty pattern")
            if pat in seen:
                raise TableFormatError(f"duplicate synonym pattern {' '.join(pat)!r}")
            seen.add(pat)
            normalized.append(SynonymRule(pat, rep))
        normalized.sort(key=lambda rule: -len(rule.pattern))
        self.rules: tuple[SynonymRule, ...] = tuple(normalized)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SynonymTable) and self.rules == other.rules

    def __len__(self) -> int:
        return len(self.rules)

    @classmethod
    def parse(cls, text: str) -> "SynonymTable":
        """Parse `pattern tokens => replacement tokens` lines.

        Blank lines and lines starting with `#` are ignored.  Tokens are
        lowercased so the table matches normalized queries.
        """
        rules = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=>" not in stripped:
                raise TableFormatError(f"line {lineno}: missing '=>' separator")
            left, right = stripped.split("=>", 1)
            pattern = [_check_token(t.lower(), f"line {lineno}", matchable=True) for t in left.split()]
            replacement = [_check_token(t.lower(), f"line {lineno}") for t in right.split()]
            if not pattern:
                raise TableFormatError(f"line {lineno}: empty pattern")
            rules.append((pattern, replacement))
        return cls(rules)

    @classmethod
    def load(cls, path) -> "SynonymTable":
        with open(path, "r", encoding="utf-8-sig") as handle:
            return cls.parse(handle.read())


class LemmaTable:
    """Single-pass token -> lemma lookup.

    A lemma is never re-looked-up, so chains or cycles written into the
    table have no effect beyond the first hop.
    """

    def __init__(self, entries: dict[str, str] | None = None):
        self.entries: dict[str, str] = dict(entries or {})

    def __eq__(self, other: object) -> bool:
        return isinstance(other, LemmaTable) and self.entries == other.entries

    def __len__(self) -> int:
        return len(self.entries)

    def get(self, token: str) -> str:
        return self.entries.get(token, token)

    @classmethod
    def parse(cls, text: str) -> "LemmaTable":
        """Parse `token<TAB>lemma` lines; `#` comments and blanks are ignored."""
        entries: dict[str, str] = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.split("\t")
            if len(parts) != 2:
                raise TableFormatError(f"line {lineno}: expected 'token<TAB>lemma'")
            token = _check_token(parts[0].strip().lower(), f"line {lineno}", matchable=True)
            lemma = _check_token(parts[1].strip().lower(), f"line {lineno}")
            entries[token] = lemma
        return cls(entries)

    @classmethod
    def load(cls, path) -> "LemmaTable":
        with open(path, "r", encoding="utf-8-sig") as handle:
            return cls.parse(handle.read())


@dataclass(frozen=True)
class PipelineConfig:
    """Preprocessing knobs: bigram window plus the two rewrite tables."""

    window: int = 2
    synonyms: SynonymTable = field(default_factory=SynonymTable)
    lemmas: LemmaTable = field(default_factory=LemmaTable)

    def __post_init__(self):
        if self.window < 1:
            raise ValueError(f"window must be >= 1, got {self.window}")


@dataclass(frozen=True)
class FeatureSet:
    """Binary presence features of one query.

    ``token_list`` is the deduplicated token sequence in first-occurrence
    order; ``unigrams`` is the same tokens as a set; ``bigrams`` holds
    "a+b" keys where a precedes b in the query within the window.
    """

    unigrams: frozenset[str]
    bigrams: frozenset[str]
    token_list: tuple[str, ...]


def apply_synonyms(tokens: Sequence[str], table: SynonymTable) -> list[str]:
    """Rewrite tokens in a single left-to-right pass.

    At each position the longest matching pattern wins; the scan resumes
    after its replacement, so replacements are never re-matched.
    """
    out: list[str] = []
    i = 0
    n = len(tokens)
    while i < n:
        for rule in table.rules:
            k = len(rule.pattern)
            if k <= n - i and tuple(tokens[i : i + k]) == rule.pattern:
                out.extend(rule.replacement)
                i += k
                break
        else:
            out.append(tokens[i])
            i += 1
    return out


def lemmatize(tokens: Sequence[str], table: LemmaTable) -> list[str]:
    """Replace each token by its lemma; tokens not in the table pass through."""
    return [table.get(tok) for tok in tokens]


def extract_features(tokens: Sequence[str], window: int = 2) -> FeatureSet:
    """Build unigram and skip-bigram features from deduplicated tokens.

    Bigram keys "t_i+t_j" are emitted for every ordered pair with
    i < j and j - i <= window.  A window of at least len(tokens) - 1
    yields all C(n, 2) pairs.
    """
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    toks = tuple(tokens)
    bigrams: set[str] = set()
    for i in range(len(toks)):
        for j in range(i + 1, min(i + window + 1, len(toks))):
            bigrams.add(f"{toks[i]}+{toks[j]}")
    return FeatureSet(frozenset(toks), frozenset(bigrams), toks)


def preprocess(text: str, config: PipelineConfig | None = None) -> FeatureSet:
    """Run the full pipeline on a raw query string."""
    cfg = config or PipelineConfig()
    tokens = normalize(text)
    tokens = correct_spelling(tokens)
    tokens = apply_synonyms(tokens, cfg.synonyms)
    tokens = lemmatize(tokens, cfg.lemmas)
    tokens = dedupe(tokens)
    return extract_features(tokens, cfg.window)
