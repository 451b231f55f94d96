"""Task metrics: entity F1, POS accuracy, LAS/UAS, plus a report wrapper for AER."""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field

from .align import AlignScore
from .corpus import AnnotatedSentence
from .errors import ValidationError
from .project import bio_to_spans

EXCLUDED_UPOS = frozenset({"PUNCT", "SYM"})


@dataclass
class MetricReport:
    """A score backed by the counts it was computed from.

    ``per_label`` maps a label to its own ``(numerator, denominator)``.
    """

    name: str
    numerator: float
    denominator: float
    per_label: dict[str, tuple[float, float]] = field(default_factory=dict)
    details: dict[str, float] = field(default_factory=dict)

    @property
    def score(self) -> float:
        return self.numerator / self.denominator if self.denominator else 0.0

    @property
    def percent(self) -> str:
        return f"{100 * self.score:.1f}"

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "score": self.score,
            "percent": self.percent,
            "numerator": self.numerator,
            "denominator": self.denominator,
            "per_label": {k: list(v) for k, v in sorted(self.per_label.items())},
            "details": dict(sorted(self.details.items())),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_tsv(self) -> str:
        return f"{self.name}\t{self.percent}\t{self.numerator:g}\t{self.denominator:g}"


def _check_lengths(pred, gold):
    if len(pred) != len(gold):
        raise ValidationError(f"{len(pred)} predicted vs {len(gold)} gold sentences")
    for p, g in zip(pred, gold):
        if len(p) != len(g):
            raise ValidationError(
                f"sentence {g.sent_id!r}: {len(p)} predicted vs {len(g)} gold tokens"
            )


def _bio(sent: AnnotatedSentence) -> list[str]:
    if sent.bio is None:
        raise ValidationError(f"sentence {sent.sent_id!r}: missing bio")
    return sent.bio


def entity_f1(pred: list[AnnotatedSentence], gold: list[AnnotatedSentence]) -> MetricReport:
    """Exact span-and-type F1 over the corpus.

    Stored as ``2 * correct / (predicted + gold)``, which equals the harmonic
    mean of precision and recall.
    """
    _check_lengths(pred, gold)
    n_pred = n_gold = n_correct = 0
    by_label: dict[str, list[int]] = {}
    for p, g in zip(pred, gold):
        ps = {(s.label, s.start, s.end) for s in bio_to_spans(_bio(p))}
        gs = {(s.label, s.start, s.end) for s in bio_to_spans(_bio(g))}
        n_pred += len(ps)
        n_gold += len(gs)
        n_correct += len(ps & gs)
        for sp in ps | gs:
            c = by_label.setdefault(sp[0], [0, 0])
            c[0] += 2 * (sp in ps and sp in gs)
            c[1] += (sp in ps) + (sp in gs)
    return MetricReport(
        "entity_f1", 2 * n_correct, n_pred + n_gold,
        per_label={k: (v[0], v[1]) for k, v in by_label.items()},
        details={
            "correct": n_correct, "predicted": n_pred, "gold": n_gold,
            "precision": n_correct / n_pred if n_pred else 0.0,
            "recall": n_correct / n_gold if n_gold else 0.0,
        },
    )


def pos_accuracy(pred: list[AnnotatedSentence], gold: list[AnnotatedSentence]) -> MetricReport:
    _check_lengths(pred, gold)
    correct = total = 0
    by_label: Counter = Counter()
    by_label_total: Counter = Counter()
    for p, g in zip(pred, gold):
        for pt, gt in zip(p.tokens, g.tokens):
            if gt.upos is None:
                raise ValidationError(f"sentence {g.sent_id!r}: gold token {gt.index} lacks UPOS")
            total += 1
            by_label_total[gt.upos] += 1
            if pt.upos == gt.upos:
                correct += 1
                by_label[gt.upos] += 1
    if total == 0:
        raise ValidationError("cannot compute accuracy over zero tokens")
    return MetricReport("pos_accuracy", correct, total,
                        per_label={k: (by_label[k], n) for k, n in by_label_total.items()})


def las_uas(pred: list[AnnotatedSentence], gold: list[AnnotatedSentence],
            exclude: frozenset[str] = EXCLUDED_UPOS) -> tuple[MetricReport, MetricReport]:
    """Labeled and unlabeled attachment scores, skipping tokens whose gold UPOS is excluded."""
    _check_lengths(pred, gold)
    scored = head_ok = both_ok = 0
    skipped = 0
    for p, g in zip(pred, gold):
        for pt, gt in zip(p.tokens, g.tokens):
            if gt.head is None or pt.head is None:
                raise ValidationError(f"sentence {g.sent_id!r}: token {gt.index} lacks a head")
            if gt.upos in exclude:
                skipped += 1
                continue
            scored += 1
            if pt.head == gt.head:
                head_ok += 1
                both_ok += pt.deprel == gt.deprel
    if scored == 0:
        raise ValidationError("no tokens left to score")
    details = {"excluded": skipped}
    return (MetricReport("las", both_ok, scored, details=dict(details)),
            MetricReport("uas", head_ok, scored, details=dict(details)))


def alignment_report(score: AlignScore, average: str = "micro") -> MetricReport:
    """Wrap an AlignScore; the headline score is AER.

    Macro scores are not a ratio of pooled counts, so they are stored as
    ``aer / 1``.
    """
    n = score.n_hyp + score.n_sure
    num, den = n - score.n_hyp_sure - score.n_hyp_possible, n
    if average == "macro":
        num, den = score.aer, 1
    return MetricReport(
        "aer", num, den,
        details={
            "precision": score.precision, "recall": score.recall, "f": score.f,
            "hyp": score.n_hyp, "sure": score.n_sure,
            "hyp_and_sure": score.n_hyp_sure, "hyp_and_possible": score.n_hyp_possible,
        },
    )
