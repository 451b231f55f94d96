"""Random fixtures: trees, alignments, tag sequences and toy bitexts.

Everything here takes an explicit ``random.Random`` so callers control seeding.
"""
from __future__ import annotations

import random

from .align import Alignment
from .corpus import ROOT, AnnotatedSentence, Argument, EventStructure, Span, Token

UPOS = ("NOUN", "VERB", "ADJ", "DET", "ADP", "PRON", "PUNCT", "SYM")
DEPRELS = ("nsubj", "obj", "det", "amod", "case", "obl", "punct")
ENTITY_TYPES = ("PER", "LOC", "ORG")


def random_heads(rng: random.Random, n: int) -> list[int]:
    """A uniformly shaped random tree: each node attaches to an earlier node
    of a random visiting order."""
    if n == 0:
        return []
    order = list(range(n))
    rng.shuffle(order)
    heads = [ROOT] * n
    for k in range(1, n):
        heads[order[k]] = order[rng.randrange(k)]
    return heads


def random_alignment(rng: random.Random, src_len: int, tgt_len: int,
                     density: float | None = None) -> Alignment:
    if density is None:
        density = rng.random() * 0.5
    pairs = {(s, t) for s in range(src_len) for t in range(tgt_len) if rng.random() < density}
    return Alignment.from_pairs(pairs, src_len, tgt_len)


def random_tags(rng: random.Random, n: int, types=ENTITY_TYPES) -> list[str]:
    """Arbitrary O/B-X/I-X sequences, usually invalid BIO."""
    return [rng.choice(["O", f"B-{rng.choice(types)}", f"I-{rng.choice(types)}"])
            for _ in range(n)]


def random_spans(rng: random.Random, n: int, k: int, labels=ENTITY_TYPES,
                 max_len: int = 4) -> list[Span]:
    """Up to ``k`` non-overlapping spans over ``n`` tokens."""
    spans = []
    taken = set()
    for _ in range(k):
        if n == 0:
            break
        start = rng.randrange(n)
        end = min(n - 1, start + rng.randrange(max_len))
        if taken.isdisjoint(range(start, end + 1)):
            taken.update(range(start, end + 1))
            spans.append(Span(start, end, rng.choice(labels)))
    return sorted(spans)


def random_bio(rng: random.Random, n: int) -> list[str]:
    from .project import spans_to_bio
    return spans_to_bio(random_spans(rng, n, rng.randrange(4)), n)


def random_events(rng: random.Random, n: int) -> EventStructure:
    triggers = random_spans(rng, n, rng.randrange(3), labels=("Attack", "Move", "Meet"),
                            max_len=2)
    args = []
    for i in range(len(triggers)):
        for span in random_spans(rng, n, rng.randrange(3), labels=("agent", "patient")):
            args.append(Argument(span, span.label, i))
    return EventStructure(triggers, args)


def random_sentence(rng: random.Random, n: int, sent_id: str, vocab_size: int = 50
                    ) -> AnnotatedSentence:
    """Fully annotated sentence: UPOS, tree, BIO and events."""
    heads = random_heads(rng, n)
    tokens = [
        Token(i, f"w{rng.randrange(vocab_size)}", rng.choice(UPOS), h,
              "root" if h == ROOT else rng.choice(DEPRELS))
        for i, h in enumerate(heads)
    ]
    return AnnotatedSentence(tokens, random_bio(rng, n), random_events(rng, n), sent_id)


def annotated_fixture(rng: random.Random, n_sentences: int, min_len: int = 1,
                      max_len: int = 15) -> list[AnnotatedSentence]:
    return [random_sentence(rng, rng.randint(min_len, max_len), str(i + 1))
            for i in range(n_sentences)]


def dictionary_corpus(rng: random.Random, n_pairs: int, vocab_size: int = 20,
                      min_len: int = 3, max_len: int = 7):
    """Bitext from a one-to-one dictionary with target words shuffled.

    Returns ``(pairs, gold)``: token-list pairs and the true alignment of each.
    Words never repeat within a sentence, so the alignment is unambiguous.
    """
    src_words = [f"s{i}" for i in range(vocab_size)]
    lexicon = {w: f"t{i}" for i, w in enumerate(src_words)}
    pairs, gold = [], []
    for _ in range(n_pairs):
        n = rng.randint(min_len, max_len)
        src = rng.sample(src_words, n)
        perm = list(range(n))
        rng.shuffle(perm)
        tgt = [lexicon[src[perm[j]]] for j in range(n)]
        pairs.append((src, tgt))
        gold.append(Alignment.from_pairs(((perm[j], j) for j in range(n)), n, n))
    return pairs, gold


def noisy_translation(rng: random.Random, sentence: AnnotatedSentence,
                      lexicon: dict[str, str]) -> list[str]:
    """Word-by-word translation with local swaps, drops and insertions."""
    out = [lexicon.get(f, f"x{f}") for f in sentence.forms if rng.random() > 0.05]
    for i in range(len(out) - 1):
        if rng.random() < 0.15:
            out[i], out[i + 1] = out[i + 1], out[i]
    if rng.random() < 0.3:
        out.insert(rng.randrange(len(out) + 1), "filler")
    return out


def synthetic_bitext(rng: random.Random, n_pairs: int, vocab_size: int = 200):
    """Annotated source sentences and noisy translations for pipeline runs."""
    sources = [random_sentence(rng, rng.randint(3, 20), str(i + 1), vocab_size)
               for i in range(n_pairs)]
    lexicon = {f"w{i}": f"v{i}" for i in range(vocab_size)}
    targets = [noisy_translation(rng, s, lexicon) for s in sources]
    return sources, targets
