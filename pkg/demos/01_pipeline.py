#!/usr/bin/env python3
"""Walk a raw query through every preprocessing stage.

The pipeline is fixed: normalize -> synonyms -> lemmas -> dedupe ->
features.  Each stage is a pure function, so you can run any prefix of
it and look at the intermediate token lists, which is exactly what this
script does.
"""

from ina import (
    LemmaTable,
    PipelineConfig,
    SynonymTable,
    apply_synonyms,
    dedupe,
    extract_features,
    lemmatize,
    normalize,
    preprocess,
)

query = "Can I, have several INTERNATIONAL passports for my trips?"
print("raw query:      ", repr(query))

# Stage 1: punctuation out, lowercase, split.
tokens = normalize(query)
print("normalized:     ", tokens)

# Stage 2: hand-written synonym rules; longest pattern wins, and a
# replacement is never re-matched.
synonyms = SynonymTable.parse(
    """
    international passports => in_passport
    trips => travel
    """
)
tokens = apply_synonyms(tokens, synonyms)
print("after synonyms: ", tokens)

# Stage 3: table-driven lemmatizer, single lookup per token.
lemmas = LemmaTable({"have": "have", "passports": "passport"})
tokens = lemmatize(tokens, lemmas)
print("after lemmas:   ", tokens)

# Stage 4: keep first occurrences only.
tokens = dedupe(tokens)
print("deduplicated:   ", tokens)

# Stage 5: unigrams plus skip-bigrams within the window.
features = extract_features(tokens, window=2)
print("unigrams:       ", sorted(features.unigrams))
print("bigrams (w=2):  ", sorted(features.bigrams))

# The one-call version produces the same thing.
config = PipelineConfig(window=2, synonyms=synonyms, lemmas=lemmas)
assert preprocess(query, config) == features
print("\npreprocess() reproduces the staged result bit for bit.")
