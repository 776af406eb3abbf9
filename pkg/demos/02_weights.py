#!/usr/bin/env python3
"""Train a tiny model and read its weights like a table.

Every weight is the number of bits a feature contributes toward a
class: P(class|feature) * log2(P(class|feature) / P(class)).  Positive
means the feature argues for the class, negative against it, and the
numbers are small enough here to check by hand.
"""

from ina import CorpusExample, classify, train

corpus = [
    CorpusExample("wheel steering", "car"),
    CorpusExample("wheel fast", "car"),
    CorpusExample("dipper bucket", "excavator"),
    CorpusExample("bucket arm", "excavator"),
]
model = train(corpus)

print(f"classes: {model.class_list}")
print(f"vocabulary ({len(model.vocabulary)}): {sorted(model.vocabulary)}")
print(f"strongest single weight: {model.stats.w_max:.4f} bits\n")

print(f"{'feature':<18} {'class':<10} {'bits':>8}")
for feature in sorted(model.weights):
    for label, bits in model.weights[feature].items():
        print(f"{feature:<18} {label:<10} {bits:>8.4f}")

# 'wheel' appears in both car documents and nowhere else, so seeing it
# doubles the probability of 'car': exactly 1 bit.
assert model.weights["wheel"]["car"] == 1.0

print("\n--- classifying 'wheel steering' ---")
analysis, breakdown, decision = classify("wheel steering", model)
print("known features:", analysis.known_features)
for label in model.class_list:
    print(
        f"  {label:<10} raw={breakdown.raw[label]:.3f} "
        f"sm={breakdown.sm[label]:.3f} pos_share={breakdown.relu_norm[label]:.3f} "
        f"tanh={breakdown.tanh_comp[label]:.3f} -> CL={breakdown.confidence[label]:.3f}"
    )
print("decision:", decision)
