"""Word alignment: Pharaoh I/O, an IBM Model 1 EM aligner, symmetrization, AER.

Links are stored in (source, target) coordinates regardless of the direction
a model was trained in.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ParseError, ValidationError

LEXICON_FORMAT = "silverproj-lexicon"
LEXICON_VERSION = 1


class Strength(enum.Enum):
    SURE = "S"
    POSSIBLE = "P"


@dataclass(frozen=True, order=True)
class AlignmentLink:
    src: int
    tgt: int
    strength: Strength = field(default=Strength.SURE, compare=False)


@dataclass(frozen=True)
class Alignment:
    links: frozenset = frozenset()
    src_len: int | None = None
    tgt_len: int | None = None

    def __post_init__(self):
        links = frozenset(self.links)
        object.__setattr__(self, "links", links)
        if len({(l.src, l.tgt) for l in links}) != len(links):
            raise ValidationError("alignment has duplicate (src, tgt) links")
        if self.src_len is not None or self.tgt_len is not None:
            self._check_bounds()

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]], src_len=None, tgt_len=None,
                   strength: Strength = Strength.SURE) -> "Alignment":
        return cls(frozenset(AlignmentLink(s, t, strength) for s, t in set(pairs)),
                   src_len, tgt_len)

    @classmethod
    def identity(cls, n: int) -> "Alignment":
        return cls.from_pairs(((i, i) for i in range(n)), n, n)

    def _check_bounds(self):
        for l in self.links:
            if (l.src < 0 or l.tgt < 0
                    or (self.src_len is not None and l.src >= self.src_len)
                    or (self.tgt_len is not None and l.tgt >= self.tgt_len)):
                raise ValidationError(
                    f"link {l.src}-{l.tgt} out of bounds for a "
                    f"{self.src_len}x{self.tgt_len} sentence pair"
                )

    def bind(self, src_len: int, tgt_len: int) -> "Alignment":
        """Attach sentence lengths, checking every link against them."""
        return Alignment(self.links, src_len, tgt_len)

    def pairs(self) -> set[tuple[int, int]]:
        return {(l.src, l.tgt) for l in self.links}

    def sure(self) -> set[tuple[int, int]]:
        return {(l.src, l.tgt) for l in self.links if l.strength is Strength.SURE}

    def possible(self) -> set[tuple[int, int]]:
        """All links; possible links include sure ones."""
        return self.pairs()

    def transpose(self) -> "Alignment":
        return Alignment(frozenset(AlignmentLink(l.tgt, l.src, l.strength) for l in self.links),
                         self.tgt_len, self.src_len)

    def __len__(self):
        return len(self.links)


# -- Pharaoh -----------------------------------------------------------------


def parse_pharaoh(line: str, default: Strength = Strength.SURE) -> Alignment:
    """Parse ``i-j`` / ``i?j`` links. ``-`` takes ``default``, ``?`` is always possible."""
    links = []
    for item in line.split():
        if "-" in item:
            a, _, b = item.partition("-")
            strength = default
        elif "?" in item:
            a, _, b = item.partition("?")
            strength = Strength.POSSIBLE
        else:
            raise ParseError(f"bad alignment link {item!r}")
        if not (a.isdigit() and b.isdigit()):
            raise ParseError(f"bad alignment link {item!r}")
        links.append(AlignmentLink(int(a), int(b), strength))
    try:
        return Alignment(frozenset(links))
    except ValidationError as e:
        raise ParseError(str(e)) from None


def emit_pharaoh(alignment: Alignment) -> str:
    return " ".join(
        f"{l.src}{'-' if l.strength is Strength.SURE else '?'}{l.tgt}"
        for l in sorted(alignment.links)
    )


def read_pharaoh(text: str, default: Strength = Strength.SURE) -> list[Alignment]:
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        try:
            out.append(parse_pharaoh(line, default))
        except ParseError as e:
            raise ParseError(str(e), lineno) from None
    return out


def write_pharaoh(alignments: Iterable[Alignment]) -> str:
    return "".join(emit_pharaoh(a) + "\n" for a in alignments)


# -- IBM Model 1 -------------------------------------------------------------


@dataclass
class LexiconModel:
    """Translation table ``t(f | e)``.

    Row 0 of ``table`` is the NULL source word; row ``k + 1`` is
    ``src_vocab[k]``. Columns follow ``tgt_vocab``.
    """

    src_vocab: list[str]
    tgt_vocab: list[str]
    table: np.ndarray
    null_prob: float | None = None
    smoothing: float = 0.0
    iterations: int = 0
    log_likelihood: list[float] = field(default_factory=list)
    reverse: bool = False

    def __post_init__(self):
        self._src_index = {w: i + 1 for i, w in enumerate(self.src_vocab)}
        self._tgt_index = {w: i for i, w in enumerate(self.tgt_vocab)}

    def prob(self, f: str, e: str | None) -> float:
        """``t(f|e)``; ``e=None`` is NULL. Unseen words get ``1/|F|``."""
        row = 0 if e is None else self._src_index.get(e)
        col = self._tgt_index.get(f)
        if row is None or col is None:
            return self.unseen_prob
        return float(self.table[row, col])

    @property
    def unseen_prob(self) -> float:
        return 1.0 / max(len(self.tgt_vocab), 1)

    def to_json(self) -> dict:
        rows = []
        for r in self.table:
            nz = np.flatnonzero(r)
            rows.append([[int(j), float(r[j])] for j in nz])
        return {
            "format": LEXICON_FORMAT,
            "version": LEXICON_VERSION,
            "reverse": self.reverse,
            "null_prob": self.null_prob,
            "smoothing": self.smoothing,
            "iterations": self.iterations,
            "log_likelihood": self.log_likelihood,
            "src_vocab": self.src_vocab,
            "tgt_vocab": self.tgt_vocab,
            "rows": rows,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "LexiconModel":
        if obj.get("format") != LEXICON_FORMAT or obj.get("version") != LEXICON_VERSION:
            raise ValidationError(
                f"not a {LEXICON_FORMAT} v{LEXICON_VERSION} file "
                f"(format={obj.get('format')!r}, version={obj.get('version')!r})"
            )
        try:
            table = np.zeros((len(obj["src_vocab"]) + 1, len(obj["tgt_vocab"])))
            for i, row in enumerate(obj["rows"]):
                for j, p in row:
                    table[i, j] = p
            return cls(list(obj["src_vocab"]), list(obj["tgt_vocab"]), table,
                       obj["null_prob"], obj["smoothing"], obj["iterations"],
                       list(obj["log_likelihood"]), obj["reverse"])
        except (KeyError, IndexError, TypeError, ValueError) as e:
            raise ValidationError(f"malformed lexicon file: {e!r}") from None

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> "LexiconModel":
        try:
            return cls.from_json(json.loads(text))
        except json.JSONDecodeError as e:
            raise ParseError(f"lexicon file is not JSON: {e.msg}") from None


def _alignment_prior(l: int, null_prob: float | None) -> np.ndarray:
    """Prior over NULL (position 0) and the ``l`` source positions."""
    if l == 0:
        return np.ones(1)
    if null_prob is None:
        return np.full(l + 1, 1.0 / (l + 1))
    prior = np.full(l + 1, (1.0 - null_prob) / l)
    prior[0] = null_prob
    return prior


def _index_corpus(pairs, reverse):
    src_vocab: dict[str, int] = {}
    tgt_vocab: dict[str, int] = {}
    indexed = []
    for src, tgt in pairs:
        if reverse:
            src, tgt = tgt, src
        e = [0] + [src_vocab.setdefault(w, len(src_vocab)) + 1 for w in src]
        f = [tgt_vocab.setdefault(w, len(tgt_vocab)) for w in tgt]
        indexed.append((np.array(e, dtype=np.intp), np.array(f, dtype=np.intp)))
    return list(src_vocab), list(tgt_vocab), indexed


def _token_pairs(bitext) -> list[tuple[list[str], list[str]]]:
    pairs = []
    for p in bitext:
        if hasattr(p, "source"):
            pairs.append((p.source.forms, p.target.forms))
        else:
            src, tgt = p
            pairs.append((src.split() if isinstance(src, str) else list(src),
                          tgt.split() if isinstance(tgt, str) else list(tgt)))
    return pairs


def _log_likelihood(table, indexed, null_prob) -> float:
    total = 0.0
    for e, f in indexed:
        if len(f) == 0:
            continue
        prior = _alignment_prior(len(e) - 1, null_prob)
        if len(e) == 1:
            e = e[:1]
        sub = table[np.ix_(e, f)] * prior[:, None]
        total += float(np.log(sub.sum(axis=0)).sum())
    return total


def train_lexicon(bitext, iterations: int = 5, smoothing: float = 0.0,
                  null_prob: float | None = None, reverse: bool = False) -> LexiconModel:
    """Train ``t(target | source)`` with IBM Model 1 EM.

    ``bitext`` is a :class:`~silverproj.corpus.Bitext` or a sequence of
    (source, target) token lists or strings. ``reverse`` trains
    ``t(source | target)`` instead. ``null_prob=None`` gives NULL the same
    uniform alignment prior as every source position; a number fixes the NULL
    prior (0 disables NULL for non-empty sources). ``smoothing`` is added to
    every expected count before renormalizing.

    ``log_likelihood[k]`` is the corpus log-likelihood after the k-th M-step.
    """
    if iterations < 1:
        raise ValidationError("iterations must be >= 1")
    if smoothing < 0:
        raise ValidationError("smoothing must be >= 0")
    if null_prob is not None and not 0.0 <= null_prob < 1.0:
        raise ValidationError("null_prob must be in [0, 1)")
    pairs = _token_pairs(bitext)
    if not pairs:
        raise ValidationError("cannot train on an empty bitext")
    src_vocab, tgt_vocab, indexed = _index_corpus(pairs, reverse)
    n_e, n_f = len(src_vocab) + 1, len(tgt_vocab)
    table = np.full((n_e, n_f), 1.0 / max(n_f, 1))

    trace = []
    for it in range(iterations):
        counts = np.zeros_like(table)
        for e, f in indexed:
            if len(f) == 0:
                continue
            prior = _alignment_prior(len(e) - 1, null_prob)
            rows = e if len(e) > 1 else e[:1]
            post = table[np.ix_(rows, f)] * prior[:, None]
            post /= post.sum(axis=0)
            np.add.at(counts, np.ix_(rows, f), post)
        counts += smoothing
        totals = counts.sum(axis=1)
        seen = totals > 0
        # rows that never received mass keep their previous distribution
        table[seen] = counts[seen] / totals[seen, None]
        trace.append(_log_likelihood(table, indexed, null_prob))

    return LexiconModel(src_vocab, tgt_vocab, table, null_prob, smoothing, iterations,
                        trace, reverse)


def viterbi_align(model: LexiconModel, source: Sequence[str], target: Sequence[str]) -> Alignment:
    """Best source position for each target word; NULL leaves it unaligned.

    For a reverse model the roles swap, but links come back in
    (source, target) coordinates. Ties go to the lowest source index, and a
    source word beats NULL on a tie.
    """
    source, target = list(source), list(target)
    gen_side, cond_side = (source, target) if model.reverse else (target, source)
    prior = _alignment_prior(len(cond_side), model.null_prob)
    links = []
    for j, f in enumerate(gen_side):
        best, best_score = None, prior[0] * model.prob(f, None)
        for i, e in enumerate(cond_side):
            score = prior[i + 1] * model.prob(f, e)
            if score > best_score or (best is None and score == best_score):
                best, best_score = i, score
        if best is not None:
            links.append((j, best) if model.reverse else (best, j))
    return Alignment.from_pairs(links, len(source), len(target))


# -- symmetrization ----------------------------------------------------------

HEURISTICS = ("intersection", "union", "grow-diag-final-and")

_NEIGHBOURS = ((-1, 0), (0, -1), (1, 0), (0, 1), (-1, -1), (-1, 1), (1, -1), (1, 1))


def symmetrize(forward: Alignment, backward: Alignment,
               heuristic: str = "grow-diag-final-and") -> Alignment:
    """Combine two directional alignments, both given in (source, target) coordinates."""
    if heuristic not in HEURISTICS:
        raise ValidationError(f"unknown heuristic {heuristic!r}; choose from {HEURISTICS}")
    for a, b, what in ((forward.src_len, backward.src_len, "source"),
                       (forward.tgt_len, backward.tgt_len, "target")):
        if a is not None and b is not None and a != b:
            raise ValidationError(f"{what} lengths differ: {a} vs {b}")
    src_len = forward.src_len if forward.src_len is not None else backward.src_len
    tgt_len = forward.tgt_len if forward.tgt_len is not None else backward.tgt_len
    fwd, bwd = forward.pairs(), backward.pairs()
    inter, union = fwd & bwd, fwd | bwd
    if heuristic == "intersection":
        return Alignment.from_pairs(inter, src_len, tgt_len)
    if heuristic == "union":
        return Alignment.from_pairs(union, src_len, tgt_len)

    result = set(inter)
    src_cov = {s for s, _ in result}
    tgt_cov = {t for _, t in result}

    def add(s, t):
        result.add((s, t))
        src_cov.add(s)
        tgt_cov.add(t)

    grew = True
    while grew:
        grew = False
        for s, t in sorted(result):
            for ds, dt in _NEIGHBOURS:
                cand = (s + ds, t + dt)
                if cand in union and cand not in result and (
                        cand[0] not in src_cov or cand[1] not in tgt_cov):
                    add(*cand)
                    grew = True
    for directional in (fwd, bwd):
        for s, t in sorted(directional):
            if s not in src_cov and t not in tgt_cov:
                add(s, t)
    return Alignment.from_pairs(result, src_len, tgt_len)


# -- scoring -----------------------------------------------------------------


def f_measure(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class AlignScore:
    n_hyp: int
    n_sure: int
    n_hyp_sure: int
    n_hyp_possible: int
    aer: float
    precision: float
    recall: float
    f: float

    @classmethod
    def from_counts(cls, n_hyp, n_sure, n_hyp_sure, n_hyp_possible) -> "AlignScore":
        p = n_hyp_possible / n_hyp if n_hyp else 0.0
        r = n_hyp_sure / n_sure if n_sure else 0.0
        denom = n_hyp + n_sure
        aer = 1.0 - (n_hyp_sure + n_hyp_possible) / denom if denom else 0.0
        return cls(n_hyp, n_sure, n_hyp_sure, n_hyp_possible, aer, p, r, f_measure(p, r))


def _as_pairs(x) -> set[tuple[int, int]]:
    return x.pairs() if isinstance(x, Alignment) else set(x)


def _counts(hyp, sure, possible) -> tuple[int, int, int, int]:
    a, s, p = _as_pairs(hyp), _as_pairs(sure), _as_pairs(possible)
    if not s <= p:
        raise ValidationError("gold sure links are not a subset of possible links")
    return len(a), len(s), len(a & s), len(a & p)


def score_alignment(hypothesis, sure, possible=None) -> AlignScore:
    """AER, precision, recall and F for one sentence pair.

    ``possible`` defaults to ``sure`` (a sure-only gold standard).
    """
    if possible is None:
        possible = sure
    return AlignScore.from_counts(*_counts(hypothesis, sure, possible))


def gold_sets(gold: Alignment) -> tuple[set, set]:
    """Split a gold Pharaoh alignment into its (sure, possible) link sets."""
    return gold.sure(), gold.possible()


def score_corpus(items: Iterable[tuple], average: str = "micro") -> AlignScore:
    """Score (hypothesis, sure, possible) triples over a corpus.

    ``micro`` pools link counts before dividing; ``macro`` averages the
    per-pair scores and reports pooled counts alongside.
    """
    if average not in ("micro", "macro"):
        raise ValidationError(f"unknown averaging {average!r}")
    per_pair = []
    totals = [0, 0, 0, 0]
    for hyp, sure, possible in items:
        c = _counts(hyp, sure, sure if possible is None else possible)
        totals = [x + y for x, y in zip(totals, c)]
        per_pair.append(AlignScore.from_counts(*c))
    if average == "micro" or not per_pair:
        return AlignScore.from_counts(*totals)
    n = len(per_pair)
    return AlignScore(*totals,
                      aer=math.fsum(s.aer for s in per_pair) / n,
                      precision=math.fsum(s.precision for s in per_pair) / n,
                      recall=math.fsum(s.recall for s in per_pair) / n,
                      f=math.fsum(s.f for s in per_pair) / n)
