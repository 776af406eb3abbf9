#!/usr/bin/env python3
"""How unknown words push a confident answer into rejection.

The discount factor 1 - alpha*u/(1+u) multiplies the activation, so a
query's confidence can only fall as out-of-vocabulary words accumulate;
with the default alpha=2 a single unknown word already zeroes it.  The
identity of the unknown words never matters, only their count.
"""

from ina import CorpusExample, Rejected, classify, discount_factor, train

corpus = [
    CorpusExample("wheel steering", "car"),
    CorpusExample("wheel fast", "car"),
    CorpusExample("dipper bucket", "excavator"),
    CorpusExample("bucket arm", "excavator"),
]
model = train(corpus)

print("confidence for 'wheel steering' plus u gibberish words (alpha=2):\n")
print(f"{'u':>2} {'factor':>9} {'CL(car)':>9}  decision")
suffix = []
for u in range(7):
    query = " ".join(["wheel steering", *suffix])
    _, breakdown, decision = classify(query, model)
    kind = "REJECTED" if isinstance(decision, Rejected) else f"answered {decision.label}"
    print(
        f"{u:>2} {discount_factor(u, 2.0):>9.4f} "
        f"{breakdown.confidence['car']:>9.4f}  {kind}"
    )
    suffix.append(f"gibberish{u}")

print("\nunknown-word identity is irrelevant:")
_, first, _ = classify("wheel steering zzz qqq", model)
_, second, _ = classify("wheel steering blorp wump", model)
assert first == second
print("  'zzz qqq' and 'blorp wump' give bit-identical score breakdowns.")

print("\na milder alpha keeps the answer but lowers confidence:")
mild = model.with_alpha(0.5)
for u in (0, 1, 3):
    query = " ".join(["wheel steering", *[f"g{i}" for i in range(u)]])
    _, breakdown, decision = classify(query, mild)
    print(f"  u={u}: CL(car)={breakdown.confidence['car']:.4f} -> {decision}")
