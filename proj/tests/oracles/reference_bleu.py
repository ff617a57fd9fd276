#!/usr/bin/env python3
"""Reference BLEU-4 used to freeze expected values in the C++ test suite.

Kept deliberately independent of the C++ code: plain counting, no shared
helpers. Definition:
  * modified (clipped) n-gram precisions p1..p4
  * orders with zero candidate n-grams are skipped from the geometric mean
  * smoothing for n >= 2 only: when the candidate has n-grams of order n but
    the raw match count is zero, numerator and denominator each get +1
  * p1 is never smoothed
  * brevity penalty exp(1 - r/c) when candidate is shorter than reference
"""

import math
import re
from collections import Counter


def tokenize(text):
    return re.findall(r"[0-9a-z-\U0010ffff]+", text.lower())


def ngrams(tokens, n):
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu(candidate, reference):
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand or not ref:
        return 0.0
    log_sum = 0.0
    orders = 0
    for n in range(1, 5):
        cand_ngrams = ngrams(cand, n)
        total = sum(cand_ngrams.values())
        if total == 0:
            continue
        ref_ngrams = ngrams(ref, n)
        match = sum(min(c, ref_ngrams.get(g, 0)) for g, c in cand_ngrams.items())
        if match == 0:
            if n == 1:
                return 0.0
            match, total = match + 1, total + 1
        log_sum += math.log(match / total)
        orders += 1
    score = math.exp(log_sum / orders)
    if len(cand) < len(ref):
        score *= math.exp(1.0 - len(ref) / len(cand))
    return score


def main():
    # 10-token pair: exercises clipping, a smoothed p4 = 1/(7+1), BP = 1.
    cand = "alpha bravo charlie delta echo foxtrot golf hotel india kilo"
    ref = "alpha bravo charlie kilo delta echo foxtrot india golf hotel"
    print(f"vector candidate: {cand!r}")
    print(f"vector reference: {ref!r}")
    print(f"vector bleu     : {bleu(cand, ref):.12f}")

    # Reconstruction toy: three-turn history, middle turn dropped.
    turns = [
        "the cat sat on the mat",
        "the dog ran in the park",
        "birds fly over the hills today",
    ]
    full = " ".join(turns)
    dropped_middle = " ".join([turns[0], turns[2]])
    print(f"reconstruction candidate: {dropped_middle!r}")
    print(f"reconstruction reference: {full!r}")
    print(f"reconstruction bleu     : {bleu(dropped_middle, full):.12f}")
    print(f"reconstruction loss     : {1.0 - bleu(dropped_middle, full):.12f}")

    # Sanity: identity and disjoint.
    print(f"identity bleu : {bleu(full, full):.12f}")
    print(f"disjoint bleu : {bleu('aa bb cc dd', 'ee ff gg hh'):.12f}")
    # Brevity penalty case: candidate shorter than reference.
    print(f"short bleu    : {bleu('the cat sat', 'the cat sat on the mat'):.12f}")


if __name__ == "__main__":
    main()
