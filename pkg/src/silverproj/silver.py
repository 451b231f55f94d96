"""Silver corpus assembly (projection or self-training) and gold+silver mixing."""
from __future__ import annotations

import copy
import enum
import json
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Mapping, Sequence

from . import corpus as cio
from .align import Alignment
from .corpus import AnnotatedSentence, Bitext, Token, validate_tree
from .errors import ValidationError
from .project import (DEFAULT_POLICY, ProjectionPolicy, ProjectionReport, bio_to_spans,
                      is_valid_bio, project_bio, project_events, project_tags, project_tree,
                      repair_bio)

TASKS = ("pos", "ner", "parse", "events")

# Recorded in mix metadata; bump if the shuffle below ever changes.
SHUFFLE_ALGORITHM = "fisher-yates/python-mt19937-random/v1"


class LabelSource(str, enum.Enum):
    GOLD = "gold"
    PROJECTION = "projection"
    SELF_TRAINING = "self_training"


class DevPolicy(str, enum.Enum):
    SOURCE_ONLY = "source_only"
    SOURCE_PLUS_SILVER = "source_plus_silver"


class MixMode(str, enum.Enum):
    MULTILINGUAL = "multilingual"
    BILINGUAL = "bilingual"


def check_task(task: str) -> str:
    if task not in TASKS:
        raise ValidationError(f"unknown task {task!r}; choose from {TASKS}")
    return task


@dataclass
class Provenance:
    pair_id: str
    label_source: LabelSource
    links: int | None = None
    dropped: int = 0
    repaired: int = 0
    unaligned: int = 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["label_source"] = self.label_source.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Provenance":
        return cls(str(d["pair_id"]), LabelSource(d["label_source"]), d.get("links"),
                   d.get("dropped", 0), d.get("repaired", 0), d.get("unaligned", 0))


@dataclass
class Corpus:
    lang: str
    sentences: list[AnnotatedSentence]
    label_source: LabelSource = LabelSource.GOLD

    def __len__(self):
        return len(self.sentences)


@dataclass
class SilverCorpus(Corpus):
    label_source: LabelSource = LabelSource.PROJECTION
    provenance: list[Provenance] = field(default_factory=list)
    report: ProjectionReport = field(default_factory=ProjectionReport)

    def __post_init__(self):
        if self.label_source is LabelSource.GOLD:
            raise ValidationError("a silver corpus cannot have gold labels")
        if len(self.provenance) != len(self.sentences):
            raise ValidationError(
                f"{len(self.provenance)} provenance records for {len(self.sentences)} sentences"
            )
        for p in self.provenance:
            if p.label_source is not self.label_source:
                raise ValidationError(f"pair {p.pair_id}: mixed label sources in one corpus")

    def provenance_jsonl(self) -> str:
        return "".join(json.dumps(p.to_dict(), sort_keys=True) + "\n" for p in self.provenance)


# -- task-specific formats ----------------------------------------------------


def dump_sentences(sentences: Iterable[AnnotatedSentence], task: str) -> str:
    check_task(task)
    if task == "pos":
        return cio.write_conllu(sentences, require=("upos",))
    if task == "parse":
        return cio.write_conllu(sentences, require=("head", "deprel"))
    if task == "ner":
        return cio.write_bio(sentences, with_ids=True)
    return cio.write_events(sentences)


def load_sentences(text, task: str) -> list[AnnotatedSentence]:
    check_task(task)
    if task in ("pos", "parse"):
        return cio.read_conllu(text)
    if task == "ner":
        return cio.read_bio(text)
    return cio.read_events(text)


# -- projection ----------------------------------------------------------------


def _project_pair(args):
    pair_id, src, tgt, alignment, task, policy = args
    try:
        a = alignment.bind(len(src), len(tgt))
    except ValidationError as e:
        raise ValidationError(f"pair {pair_id}: {e}") from None
    report = ProjectionReport()
    out = AnnotatedSentence([Token(i, f) for i, f in enumerate(tgt.forms)], sent_id=pair_id)
    try:
        if task in ("pos", "parse"):
            upos = src.upos
            if task == "pos" and any(u is None for u in upos):
                raise ValidationError("source sentence lacks UPOS tags")
            if all(u is not None for u in upos):
                for tok, tag in zip(out.tokens, project_tags(upos, a, policy, report=report)):
                    tok.upos = tag
        if task == "parse":
            arcs = project_tree(src.tokens, a, policy, report=report)
            for tok, (h, d) in zip(out.tokens, arcs):
                tok.head, tok.deprel = h, d
        elif task == "ner":
            if src.bio is None:
                raise ValidationError("source sentence lacks BIO tags")
            out.bio = project_bio(src.bio, a, policy, report=report)
        elif task == "events":
            if src.events is None:
                raise ValidationError("source sentence lacks events")
            out.events = project_events(src.events, a, policy, report=report)
    except ValidationError as e:
        raise ValidationError(f"pair {pair_id}: {e}") from None
    prov = Provenance(pair_id, LabelSource.PROJECTION, len(a), report.dropped,
                      report.repaired, report.unaligned_tokens)
    return out, prov, report


def _alignment_list(bitext: Bitext, alignments) -> list[Alignment]:
    if isinstance(alignments, Mapping):
        out = []
        for p in bitext:
            if p.pair_id not in alignments:
                raise ValidationError(f"no alignment for pair {p.pair_id}")
            out.append(alignments[p.pair_id])
        return out
    alignments = list(alignments)
    if len(alignments) < len(bitext):
        raise ValidationError(
            f"no alignment for pair {bitext.pairs[len(alignments)].pair_id} "
            f"({len(alignments)} alignments for {len(bitext)} pairs)"
        )
    if len(alignments) > len(bitext):
        raise ValidationError(f"{len(alignments)} alignments for {len(bitext)} pairs")
    return alignments


def assemble_projection(bitext: Bitext, alignments, task: str,
                        policy: ProjectionPolicy = DEFAULT_POLICY, lang: str = "tgt",
                        workers: int = 1) -> SilverCorpus:
    """Project the source annotations of every pair onto its target side.

    No sentence is ever removed: a pair whose annotations all drop is kept
    with an empty annotation and its drops recorded in the provenance.
    """
    check_task(task)
    aligns = _alignment_list(bitext, alignments)
    jobs = [(p.pair_id, p.source, p.target, a, task, policy) for p, a in zip(bitext, aligns)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as ex:
            results = list(ex.map(_project_pair, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [_project_pair(j) for j in jobs]
    total = ProjectionReport()
    for _, _, rep in results:
        total.merge(rep)
    return SilverCorpus(lang, [r[0] for r in results], LabelSource.PROJECTION,
                        [r[1] for r in results], total)


# -- self-training -------------------------------------------------------------


def assemble_self_training(translations: Sequence[AnnotatedSentence],
                           predictions: Sequence[AnnotatedSentence], task: str,
                           lang: str = "tgt") -> SilverCorpus:
    """Attach a zero-shot model's predictions to the translated sentences."""
    check_task(task)
    if len(translations) != len(predictions):
        raise ValidationError(
            f"{len(translations)} translations but {len(predictions)} predictions"
        )
    sentences, prov = [], []
    total = ProjectionReport()
    for trans, pred in zip(translations, predictions):
        pid = trans.sent_id
        if len(trans) != len(pred):
            raise ValidationError(
                f"pair {pid}: translation has {len(trans)} tokens, prediction has {len(pred)}"
            )
        out = AnnotatedSentence([Token(i, f) for i, f in enumerate(trans.forms)], sent_id=pid)
        repaired = 0
        if task in ("pos", "parse"):
            for tok, p in zip(out.tokens, pred.tokens):
                tok.upos = p.upos
                if task == "parse":
                    tok.head, tok.deprel = p.head, p.deprel
            if task == "pos" and any(t.upos is None for t in out.tokens):
                raise ValidationError(f"pair {pid}: prediction lacks UPOS tags")
            if task == "parse":
                try:
                    validate_tree(out.heads, pid)
                except ValidationError as e:
                    raise ValidationError(f"pair {pid}: {e}") from None
        elif task == "ner":
            if pred.bio is None:
                raise ValidationError(f"pair {pid}: prediction lacks BIO tags")
            out.bio = repair_bio(pred.bio)
            repaired = int(out.bio != list(pred.bio))
        else:
            if pred.events is None:
                raise ValidationError(f"pair {pid}: prediction lacks events")
            out.events = copy.deepcopy(pred.events)
            out.events.validate(len(out), pid)
        total.repaired += repaired
        sentences.append(out)
        prov.append(Provenance(pid, LabelSource.SELF_TRAINING, repaired=repaired))
    return SilverCorpus(lang, sentences, LabelSource.SELF_TRAINING, prov, total)


# -- mixing --------------------------------------------------------------------


@dataclass(frozen=True)
class Example:
    sentence: AnnotatedSentence
    lang: str
    label_source: LabelSource

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.lang, self.label_source.value, self.sentence.sent_id)


@dataclass
class MixSpec:
    gold: list[Corpus]
    silver: list[SilverCorpus] = field(default_factory=list)
    seed: int = 0
    dev_policy: DevPolicy = DevPolicy.SOURCE_ONLY
    mode: MixMode = MixMode.MULTILINGUAL
    gold_dev: list[Corpus] = field(default_factory=list)
    silver_dev: list[SilverCorpus] = field(default_factory=list)


@dataclass
class MixResult:
    train: dict[str, list[Example]]
    dev: dict[str, list[Example]]
    metadata: dict


def shuffle(items: list, seed: int) -> list:
    """Fisher-Yates driven only by ``random.Random.random``, whose output is
    stable across Python releases for a given seed."""
    items = list(items)
    rng = random.Random(seed)
    for i in range(len(items) - 1, 0, -1):
        j = int(rng.random() * (i + 1))
        items[i], items[j] = items[j], items[i]
    return items


def _examples(corpora: Iterable[Corpus]) -> list[Example]:
    return [Example(s, c.lang, c.label_source) for c in corpora for s in c.sentences]


def mix(spec: MixSpec) -> MixResult:
    """Concatenate gold and silver training data and shuffle it with ``spec.seed``.

    Bilingual mode yields one training set per silver language (all gold plus
    that language's silver); multilingual mode yields a single set ``multi``.
    """
    if not spec.gold or not any(len(c) for c in spec.gold):
        raise ValidationError("mix needs at least one non-empty gold corpus")
    dev_policy, mode = DevPolicy(spec.dev_policy), MixMode(spec.mode)
    if mode is MixMode.MULTILINGUAL:
        groups = {"multi": (spec.silver, spec.silver_dev)}
    else:
        langs = sorted({c.lang for c in spec.silver})
        if not langs:
            raise ValidationError("bilingual mode needs at least one silver corpus")
        groups = {
            lang: ([c for c in spec.silver if c.lang == lang],
                   [c for c in spec.silver_dev if c.lang == lang])
            for lang in langs
        }
    train, dev = {}, {}
    for name, (silver, silver_dev) in groups.items():
        train[name] = shuffle(_examples(spec.gold) + _examples(silver), spec.seed)
        dev_sets = list(spec.gold_dev)
        if dev_policy is DevPolicy.SOURCE_PLUS_SILVER:
            dev_sets += silver_dev
        dev[name] = _examples(dev_sets)
    metadata = {
        "seed": spec.seed,
        "shuffle": SHUFFLE_ALGORITHM,
        "mode": mode.value,
        "dev_policy": dev_policy.value,
        "sizes": {name: {"train": len(train[name]), "dev": len(dev[name])} for name in train},
    }
    return MixResult(train, dev, metadata)


# -- statistics ----------------------------------------------------------------


def _annotation_counts(sent: AnnotatedSentence) -> dict[str, int]:
    entities = 0
    if sent.bio is not None:
        tags = sent.bio if is_valid_bio(sent.bio) else repair_bio(sent.bio)
        entities = len(bio_to_spans(tags))
    ev = sent.events
    return {
        "upos": sum(t.upos is not None for t in sent.tokens),
        "arcs": sum(t.head is not None for t in sent.tokens),
        "entities": entities,
        "triggers": len(ev.triggers) if ev else 0,
        "arguments": len(ev.arguments) if ev else 0,
    }


_ZERO = {"sentences": 0, "tokens": 0, "upos": 0, "arcs": 0, "entities": 0, "triggers": 0,
         "arguments": 0}


def corpus_stats(data) -> dict:
    """Counts per ``lang/label_source`` group plus a total.

    Accepts a list of :class:`Example`, a list of :class:`Corpus`, or a single
    :class:`Corpus`.
    """
    if isinstance(data, Corpus):
        data = [data]
    data = list(data)
    examples = data if not data or isinstance(data[0], Example) else _examples(data)
    total = dict(_ZERO)
    groups: dict[str, dict[str, int]] = {}
    for ex in examples:
        g = groups.setdefault(f"{ex.lang}/{ex.label_source.value}", dict(_ZERO))
        counts = _annotation_counts(ex.sentence)
        counts["sentences"] = 1
        counts["tokens"] = len(ex.sentence)
        for k, v in counts.items():
            g[k] += v
            total[k] += v
    return {"total": total, "groups": dict(sorted(groups.items()))}
