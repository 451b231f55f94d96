"""AER of Model 1 on a one-to-one dictionary corpus as training proceeds."""
import argparse
import random

from silverproj.align import score_corpus, symmetrize, train_lexicon, viterbi_align
from silverproj.synthetic import dictionary_corpus


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--pairs", type=int, default=50)
    ap.add_argument("--vocab", type=int, default=20)
    ap.add_argument("--max-iterations", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    pairs, gold = dictionary_corpus(random.Random(args.seed), args.pairs, args.vocab)
    print("iter  " + "  ".join(f"{h:>20}" for h in ("intersection", "grow-diag-final-and")))
    for k in range(1, args.max_iterations + 1):
        fwd = train_lexicon(pairs, iterations=k)
        bwd = train_lexicon(pairs, iterations=k, reverse=True)
        row = []
        for h in ("intersection", "grow-diag-final-and"):
            items = [(symmetrize(viterbi_align(fwd, s, t), viterbi_align(bwd, s, t), h), g, None)
                     for (s, t), g in zip(pairs, gold)]
            row.append(score_corpus(items).aer)
        print(f"{k:4d}  " + "  ".join(f"{a:20.4f}" for a in row))


if __name__ == "__main__":
    main()
