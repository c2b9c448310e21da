"""Writes tests/data/bleu_vectors.json from sacreBLEU (c:lc, tok:none, s:exp).

The C++ scorer is checked against these values; rerun only to extend them.
"""
import json
import random
import sys

from sacrebleu.metrics import BLEU

WORDS = "the a cat Cat dog sat on mat down The ran up hill big red".split()


def corpus(rng, n):
    hyps, refs = [], []
    for _ in range(n):
        ref = [rng.choice(WORDS) for _ in range(rng.randint(1, 9))]
        hyp = [w if rng.random() < 0.6 else rng.choice(WORDS) for w in ref]
        if rng.random() < 0.3:
            hyp = hyp[: rng.randint(1, len(hyp))]
        if rng.random() < 0.2:
            hyp += [rng.choice(WORDS) for _ in range(rng.randint(1, 3))]
        hyps.append(" ".join(hyp))
        refs.append(" ".join(ref))
    return hyps, refs


def main(path):
    rng = random.Random(20240601)
    cases = [(["the the the the"], ["the cat sat down"]), (["a b"], ["a b c d e"]),
             (["x y z w"], ["a b c d"]), (["The Cat"], ["the cat"])]
    for size in (1, 3, 20, 20, 20, 50):
        cases.append(corpus(rng, size))
    metric = BLEU(lowercase=True, tokenize="none", smooth_method="exp")
    out = []
    for hyps, refs in cases:
        out.append({"hypotheses": hyps, "references": refs, "bleu": metric.corpus_score(hyps, [refs]).score})
    with open(path, "w") as f:
        json.dump({"signature": str(metric.get_signature()), "cases": out}, f, indent=1)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/data/bleu_vectors.json")
