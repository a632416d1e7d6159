#!/usr/bin/env python3
"""Records reference values for the lexical fixture corpus.

Uses third-party implementations (sacrebleu, nltk, rouge-score) plus
brute-force edit-distance code written here, never the C++ library.
Output is frozen into tests/fixtures/lexical_expected.json and read by
the C++ unit and acceptance tests.

    pip install sacrebleu nltk rouge-score
    python3 tests/oracles/lexical_oracle.py > tests/fixtures/lexical_expected.json
"""

import itertools
import json
import pathlib
import sys

import sacrebleu
from nltk.stem.porter import PorterStemmer
from nltk.translate.gleu_score import sentence_gleu
from nltk.translate.meteor_score import single_meteor_score
from rouge_score import rouge_scorer

HERE = pathlib.Path(__file__).resolve().parent
FIXTURE = HERE.parent / "fixtures" / "lexical_pairs.jsonl"


class NoSynonyms:
    """Stand-in lexical database: disables the synonym matching stage."""

    def synsets(self, *_args, **_kwargs):
        return []


class WhitespaceTokenizer:
    def tokenize(self, text):
        return text.split()


STEMMER = PorterStemmer(mode=PorterStemmer.ORIGINAL_ALGORITHM)
ROUGE = rouge_scorer.RougeScorer(["rouge1", "rouge2", "rougeL"], tokenizer=WhitespaceTokenizer())


def bleu(refs, hyps, smooth):
    if smooth == "none":
        scorer = sacrebleu.BLEU(tokenize="none", smooth_method="none", force=True)
    else:
        scorer = sacrebleu.BLEU(tokenize="none", smooth_method="floor", smooth_value=0.1, force=True)
    return scorer.corpus_score(list(hyps), [list(refs)]).score / 100.0


def meteor(ref, hyp):
    return single_meteor_score(ref.split(), hyp.split(), stemmer=STEMMER, wordnet=NoSynonyms())


def levenshtein(a, b):
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, 1):
        cur = [i]
        for j, y in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x != y)))
        prev = cur
    return prev[-1]


def all_shifts(hyp):
    n = len(hyp)
    for start in range(n):
        for length in range(1, n - start + 1):
            block = hyp[start:start + length]
            rest = hyp[:start] + hyp[start + length:]
            for dest in range(len(rest) + 1):
                if dest == start:
                    continue
                yield rest[:dest] + block + rest[dest:]


def ter_exhaustive_greedy(ref, hyp):
    """Greedy TER where each round considers every possible block move."""
    shifts = 0
    cost = levenshtein(ref, hyp)
    while True:
        best = None
        for cand in all_shifts(hyp):
            c = levenshtein(ref, cand)
            if c < cost and (best is None or c < best[0]):
                best = (c, cand)
        if best is None:
            break
        cost, hyp = best
        shifts += 1
    return (shifts + cost) / len(ref)


def main():
    pairs = [json.loads(line) for line in FIXTURE.read_text().splitlines() if line.strip()]
    rows = []
    for p in pairs:
        ref, hyp = p["source"], p["paraphrase"]
        rt, ht = ref.split(), hyp.split()
        rouge = ROUGE.score(ref, hyp)
        rows.append({
            "id": p["id"],
            "sentence_bleu": 1 - bleu([ref], [hyp], "none"),
            "sentence_bleu_method1": 1 - bleu([ref], [hyp], "method1"),
            "google_bleu": 1 - sentence_gleu([rt], ht),
            "meteor": 1 - meteor(ref, hyp),
            "rouge1": 1 - rouge["rouge1"].fmeasure,
            "rouge2": 1 - rouge["rouge2"].fmeasure,
            "rougeL": 1 - rouge["rougeL"].fmeasure,
            "wer": levenshtein(rt, ht) / len(rt),
            "ter": ter_exhaustive_greedy(rt, ht),
            "cer": levenshtein(list(ref), list(hyp)) / len(ref),
        })
    refs = [p["source"] for p in pairs]
    hyps = [p["paraphrase"] for p in pairs]
    corpus = {
        "first3_none": 1 - bleu(refs[:3], hyps[:3], "none"),
        "first3_method1": 1 - bleu(refs[:3], hyps[:3], "method1"),
        "all_none": 1 - bleu(refs, hyps, "none"),
        "all_method1": 1 - bleu(refs, hyps, "method1"),
    }
    # Stem-only METEOR matches.
    meteor_extra = [
        {"ref": r, "hyp": h, "meteor": 1 - meteor(r, h)}
        for r, h in [
            ("running", "runs"),
            ("he is running fast", "he runs fast"),
            ("the cats were jumping over fences", "a cat jumped over the fence"),
        ]
    ]
    json.dump({"pairs": rows, "corpus_bleu": corpus, "meteor_extra": meteor_extra},
              sys.stdout, indent=1)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
