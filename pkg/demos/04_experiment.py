#!/usr/bin/env python3
"""The known/unknown-word experiment at desk scale.

Two models share every weight and differ only in the discount
coefficient: basic (alpha=0, no discounting) versus updated (alpha=2).
On clean queries they are exactly identical.  Once half of each query's
tokens are replaced with out-of-vocabulary noise and real junk queries
are mixed in, the basic model keeps confidently answering garbage while
the updated one rejects it, and the accuracy gap opens wide.
"""

from ina import (
    InjectionSpec,
    ModelConfig,
    evaluate,
    synthetic_corpus,
    table2_experiment,
    train,
)

examples, clean, irrelevant = synthetic_corpus(
    n_classes=20, paraphrases_per_class=10, n_irrelevant=100, seed=7
)
print(f"corpus: {len(examples)} queries, 20 classes, {len(irrelevant)} junk queries")

basic = train(examples, ModelConfig(alpha_f=0.0, window=1))
updated = basic.with_alpha(2.0)

clean_cases = clean[::2]  # 5 paraphrases per class
table = table2_experiment(
    basic, updated, clean_cases, InjectionSpec(fraction=0.5, seed=11), irrelevant
)
print()
print(table.render())

gap = (
    table.cells[("injected", "updated")].accuracy
    - table.cells[("injected", "basic")].accuracy
)
print(f"\naccuracy gap on the corrupted set: {gap:.4f}")
print(
    "junk rejection rate: basic "
    f"{evaluate(basic, irrelevant).rejection_rate:.2f} vs updated "
    f"{evaluate(updated, irrelevant).rejection_rate:.2f}"
)
