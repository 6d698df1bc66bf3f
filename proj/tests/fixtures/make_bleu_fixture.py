"""Records corpus BLEU and 13a tokenization oracle values with sacrebleu.

Run: python3 make_bleu_fixture.py > bleu_oracle.json
"""
import json

import sacrebleu
from sacrebleu.tokenizers.tokenizer_13a import Tokenizer13a

CASES = [
    {
        "name": "news",
        "hyps": [
            "The cat sat on the mat.",
            "It is a guide to action which ensures that the military always obeys the commands of the party.",
            "He read the book because he was interested in world history.",
            "Prices rose 3.5% in 2019, the ministry said.",
        ],
        "refs": [
            "The cat is sitting on the mat.",
            "It is a guide to action that ensures that the military will forever heed Party commands.",
            "He was interested in world history because he read the book.",
            "Prices rose by 3.5% in 2019, according to the ministry.",
        ],
    },
    {
        "name": "punctuation_and_entities",
        "hyps": [
            "&quot;Hello,&quot; she said -- and left.",
            "Costs: $1,000.50 (approx.) for 2-3 days!",
            "A &amp; B &lt;tag&gt; are here; see x.y.z.",
            "no overlap at all here",
        ],
        "refs": [
            "\"Hello,\" she said - and then left.",
            "Costs: $1,000.50 (approx.) for 2-3 days.",
            "A & B <tag> are there; see x.y.z.",
            "completely different words in this reference sentence",
        ],
    },
    {
        "name": "brevity",
        "hyps": ["the quick brown fox", "jumps over the lazy dog"],
        "refs": [
            "the quick brown fox runs away from the hunter",
            "and then jumps over the very lazy dog again",
        ],
    },
    {
        "name": "longer_hypothesis",
        "hyps": [
            "bonjour le monde , comment allez vous aujourd'hui mes amis .",
            "le chat noir dort sur le canape rouge pres de la fenetre .",
        ],
        "refs": [
            "bonjour le monde , comment allez vous .",
            "le chat noir dort sur le canape .",
        ],
    },
    {
        "name": "synthetic_words",
        "hyps": ["kemo ra tisul vab .", "lopa kemo ra .", "vab tisul lopa kemo ra .", "ra ra ra ."],
        "refs": ["kemo ra tisul vab .", "lopa kemo ra vab .", "tisul vab lopa kemo ra .", "kemo tisul vab ."],
    },
    {
        "name": "zero_fourgram",
        "hyps": ["a b c x d e f"],
        "refs": ["a b c y d e f"],
    },
]

TOKENIZE = [
    "Hello, world!",
    "It costs $3.50, or 3,50 EUR.",
    "&quot;Quoted&quot; &amp; &lt;escaped&gt;",
    "Dates like 2019-2020 and well-known words.",
    "Mr. Smith went to Washington.",
    "<skipped>",
    "Tabs\tand   multiple spaces",
    "Ends with a period.",
    "x.y.z and 1.2.3 and a,b,c",
    "Don't stop: (yes) [no] {maybe}?",
]

tok = Tokenizer13a()
out = {"cases": [], "tokenize": []}
for case in CASES:
    bleu = sacrebleu.corpus_bleu(case["hyps"], [case["refs"]], smooth_method="none", tokenize="13a")
    out["cases"].append({
        "name": case["name"],
        "hyps": case["hyps"],
        "refs": case["refs"],
        "bleu": bleu.score,
        "counts": bleu.counts,
        "totals": bleu.totals,
        "sys_len": bleu.sys_len,
        "ref_len": bleu.ref_len,
    })
for line in TOKENIZE:
    out["tokenize"].append({"line": line, "tokens": tok(line).split()})
out["sacrebleu_version"] = sacrebleu.__version__
print(json.dumps(out, indent=2, ensure_ascii=False))
