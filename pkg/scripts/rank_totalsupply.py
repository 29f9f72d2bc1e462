"""Print the sentence ranking for the totalSupply() annotation corpus.

Shows TextRank keywords, the assembled key phrases, and for each sentence
the MinHash estimate next to the exact Jaccard index.

    python3 scripts/rank_totalsupply.py --num-hashes 256 --seed 0
"""

import argparse

from bytedoc.fixtures import TOTAL_SUPPLY_SENTENCES
from bytedoc.summarize import Corpus, SummarizeConfig, content_words, exact_jaccard, summarize


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--num-hashes", type=int, default=256)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    corpus = Corpus(TOTAL_SUPPLY_SENTENCES, "totalSupply()")
    result = summarize(corpus, SummarizeConfig(num_hashes=args.num_hashes, seed=args.seed))
    print("keywords:", ", ".join(f"{w} ({s:.3f})" for w, s in result.keywords))
    print("phrases: ", ", ".join(result.phrases))
    words = {w for p in result.phrases for w in p.split()}
    print(f"\n{'minhash':>8} {'exact':>6}  sentence")
    for sentence, score in result.ranking:
        exact = exact_jaccard(content_words(sentence), words)
        mark = "*" if sentence == result.sentence else " "
        print(f"{score:8.4f} {exact:6.4f} {mark}{sentence}")


if __name__ == "__main__":
    main()
