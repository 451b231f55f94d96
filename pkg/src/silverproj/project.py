"""Projection of tags, spans, BIO sequences, event trees and dependency trees
across a word alignment.

Every function takes an :class:`~silverproj.align.Alignment` bound to its
sentence lengths (see :meth:`Alignment.bind`).
"""
from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass, fields

from .align import Alignment
from .corpus import ROOT, Argument, EventStructure, Span, Token, tree_depths, validate_tree
from .errors import ValidationError

_BIO_TAG = re.compile(r"^(?:O|([BI])-(.+))$")


@dataclass(frozen=True)
class ProjectionPolicy:
    many_to_one: str = "majority_then_leftmost"
    pos_fill: str = "X"
    bio_fill: str = "O"
    ratio_limit: float = 5.0
    collision: str = "keep_earliest_source"
    # True: drop iff target length > limit * source length; False: drop on >=
    strict_ratio: bool = True
    unattached_deprel: str = "dep"

    def __post_init__(self):
        if not self.ratio_limit > 0:
            raise ValidationError("ratio_limit must be > 0")
        if self.many_to_one != "majority_then_leftmost":
            raise ValidationError(f"unknown many_to_one rule {self.many_to_one!r}")
        if self.collision != "keep_earliest_source":
            raise ValidationError(f"unknown collision rule {self.collision!r}")

    def too_long(self, target_len: int, source_len: int) -> bool:
        limit = self.ratio_limit * source_len
        return target_len > limit if self.strict_ratio else target_len >= limit


DEFAULT_POLICY = ProjectionPolicy()


@dataclass
class ProjectionReport:
    source_spans: int = 0
    projected: int = 0
    dropped_unaligned: int = 0
    dropped_ratio: int = 0
    dropped_collision: int = 0
    dropped_parent: int = 0
    unaligned_tokens: int = 0
    repaired: int = 0

    @property
    def dropped(self) -> int:
        return (self.dropped_unaligned + self.dropped_ratio + self.dropped_collision
                + self.dropped_parent)

    def merge(self, other: "ProjectionReport") -> "ProjectionReport":
        for f in fields(self):
            setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))
        return self

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["dropped"] = self.dropped
        return d


def _bound(alignment: Alignment) -> tuple[int, int]:
    if alignment.src_len is None or alignment.tgt_len is None:
        raise ValidationError("alignment must be bound to sentence lengths before projecting")
    return alignment.src_len, alignment.tgt_len


def _sources_by_target(alignment: Alignment) -> dict[int, list[int]]:
    by_tgt = defaultdict(list)
    for s, t in sorted(alignment.pairs()):
        by_tgt[t].append(s)
    return by_tgt


# -- token-based -------------------------------------------------------------


def project_tags(tags, alignment: Alignment, policy: ProjectionPolicy = DEFAULT_POLICY,
                 fill: str | None = None, report: ProjectionReport | None = None) -> list[str]:
    """Give each target token the majority tag of its aligned source tokens.

    Ties go to the tag of the leftmost source token; unaligned target tokens
    get ``fill`` (``policy.pos_fill`` by default).
    """
    src_len, tgt_len = _bound(alignment)
    if len(tags) != src_len:
        raise ValidationError(f"{len(tags)} tags for a source sentence of {src_len} tokens")
    fill = policy.pos_fill if fill is None else fill
    by_tgt = _sources_by_target(alignment)
    out = []
    for t in range(tgt_len):
        srcs = by_tgt.get(t)
        if not srcs:
            out.append(fill)
            if report is not None:
                report.unaligned_tokens += 1
            continue
        counts: dict[str, int] = {}
        for s in srcs:  # ascending, so dict order is leftmost-first
            counts[tags[s]] = counts.get(tags[s], 0) + 1
        out.append(max(counts, key=counts.__getitem__))
    return out


# -- span-based --------------------------------------------------------------


def _project_span_group(spans, alignment, policy, report, src_len, tgt_len):
    """Project spans that compete with each other; returns source index -> target span."""
    images = []
    for k, span in enumerate(spans):
        if not 0 <= span.start <= span.end < src_len:
            raise ValidationError(
                f"span [{span.start}, {span.end}] out of bounds for {src_len} source tokens"
            )
        report.source_spans += 1
        tgts = [t for s, t in alignment.pairs() if span.start <= s <= span.end]
        if not tgts:
            report.dropped_unaligned += 1
            continue
        cand = Span(min(tgts), max(tgts), span.label)
        if policy.too_long(len(cand), len(span)):
            report.dropped_ratio += 1
            continue
        images.append((span.start, span.end, k, cand))

    kept: dict[int, Span] = {}
    for _, _, k, cand in sorted(images, key=lambda x: x[:3]):
        if any(cand.overlaps(other) for other in kept.values()):
            report.dropped_collision += 1
            continue
        kept[k] = cand
    report.projected += len(kept)
    return kept


def project_spans(spans, alignment: Alignment, policy: ProjectionPolicy = DEFAULT_POLICY
                  ) -> tuple[list[Span], ProjectionReport]:
    """Map each source span to the smallest contiguous target range covering its image.

    Results keep the source order. Spans with no aligned tokens, spans longer
    than ``policy.ratio_limit`` times the source, and spans overlapping a span
    whose source starts earlier are dropped and counted in the report.
    """
    src_len, tgt_len = _bound(alignment)
    report = ProjectionReport()
    kept = _project_span_group(list(spans), alignment, policy, report, src_len, tgt_len)
    return [kept[k] for k in sorted(kept)], report


# -- BIO ---------------------------------------------------------------------


def _split_tag(tag: str) -> tuple[str, str | None]:
    m = _BIO_TAG.match(tag)
    if m is None:
        raise ValidationError(f"tag {tag!r} is not O, B-X or I-X")
    return (m.group(1) or "O"), m.group(2)


def repair_bio(tags) -> list[str]:
    """Make a tag sequence valid BIO.

    A run starts at any B tag or at an I tag that does not follow B/I; it
    continues over the following I tags whatever their type. Each run is
    retyped to the type of its last tag, so ``I-X`` alone becomes ``B-X`` and
    ``B-X I-Y I-Z`` becomes ``B-Z I-Z I-Z``.
    """
    parsed = [_split_tag(t) for t in tags]
    out = list(tags)
    i = 0
    while i < len(parsed):
        if parsed[i][0] == "O":
            out[i] = "O"
            i += 1
            continue
        j = i + 1
        while j < len(parsed) and parsed[j][0] == "I":
            j += 1
        label = parsed[j - 1][1]
        out[i] = f"B-{label}"
        for k in range(i + 1, j):
            out[k] = f"I-{label}"
        i = j
    return out


def is_valid_bio(tags) -> bool:
    prev = None
    for tag in tags:
        m = _BIO_TAG.match(tag)
        if m is None:
            return False
        if m.group(1) == "I" and prev != m.group(2):
            return False
        prev = m.group(2)
    return True


def bio_to_spans(tags) -> list[Span]:
    """Decode a valid BIO sequence into labelled spans."""
    spans = []
    start = label = None
    for i, tag in enumerate(list(tags) + ["O"]):
        kind, typ = _split_tag(tag)
        if kind == "I" and label == typ:
            continue
        if kind == "I":
            raise ValidationError(f"invalid BIO at position {i}: {tag!r} after {label!r}")
        if label is not None:
            spans.append(Span(start, i - 1, label))
            start = label = None
        if kind == "B":
            start, label = i, typ
    return spans


def spans_to_bio(spans, length: int, fill: str = "O") -> list[str]:
    tags = [fill] * length
    for span in spans:
        tags[span.start] = f"B-{span.label}"
        for k in range(span.start + 1, span.end + 1):
            tags[k] = f"I-{span.label}"
    return tags


def project_bio(tags, alignment: Alignment, policy: ProjectionPolicy = DEFAULT_POLICY,
                report: ProjectionReport | None = None) -> list[str]:
    src_len, tgt_len = _bound(alignment)
    if len(tags) != src_len:
        raise ValidationError(f"{len(tags)} tags for a source sentence of {src_len} tokens")
    fixed = repair_bio(tags)
    spans, rep = project_spans(bio_to_spans(fixed), alignment, policy)
    out = repair_bio(spans_to_bio(spans, tgt_len, policy.bio_fill))
    if report is not None:
        report.merge(rep)
        report.repaired += fixed != list(tags)
    return out


# -- events ------------------------------------------------------------------


def project_events(events: EventStructure, alignment: Alignment,
                   policy: ProjectionPolicy = DEFAULT_POLICY,
                   report: ProjectionReport | None = None) -> EventStructure:
    """Project triggers, then each surviving trigger's arguments.

    Collisions are resolved among siblings only, so two triggers may share an
    argument span. Arguments of a dropped trigger are dropped with it.
    """
    src_len, tgt_len = _bound(alignment)
    events.validate(src_len)
    rep = ProjectionReport()
    kept_triggers = _project_span_group(events.triggers, alignment, policy, rep,
                                        src_len, tgt_len)
    new_index = {k: n for n, k in enumerate(sorted(kept_triggers))}
    by_parent = defaultdict(list)
    for a, arg in enumerate(events.arguments):
        by_parent[arg.trigger].append(a)
    kept_args: dict[int, Argument] = {}
    for trig, arg_ids in sorted(by_parent.items()):
        if trig not in kept_triggers:
            rep.source_spans += len(arg_ids)
            rep.dropped_parent += len(arg_ids)
            continue
        group = [events.arguments[a].span for a in arg_ids]
        kept = _project_span_group(group, alignment, policy, rep, src_len, tgt_len)
        for k, span in kept.items():
            a = arg_ids[k]
            kept_args[a] = Argument(span, events.arguments[a].role, new_index[trig])
    if report is not None:
        report.merge(rep)
    return EventStructure([kept_triggers[k] for k in sorted(kept_triggers)],
                          [kept_args[a] for a in sorted(kept_args)])


# -- dependency trees ---------------------------------------------------------


def project_tree(source: list[Token], alignment: Alignment,
                 policy: ProjectionPolicy = DEFAULT_POLICY,
                 report: ProjectionReport | None = None) -> list[tuple[int, str]]:
    """Project a dependency tree; returns ``(head, deprel)`` per target token.

    Each target token is anchored to its highest aligned source node (ties to
    the leftmost). Target tokens sharing an anchor form a cluster headed by
    its leftmost member. A cluster head attaches to the cluster of the
    closest aligned ancestor of its anchor and copies the anchor's deprel.
    Clusters with no aligned ancestor, and unaligned tokens, attach to the
    root, which is the cluster anchored highest in the source tree.
    """
    src_len, tgt_len = _bound(alignment)
    if len(source) != src_len:
        raise ValidationError(f"{len(source)} tokens for a source sentence of {src_len}")
    heads = [t.head for t in source]
    validate_tree(heads)
    if tgt_len == 0:
        return []
    depth = tree_depths(heads) if heads else []
    root_deprel = next((t.deprel for t in source if t.head == ROOT), None) or "root"
    dep = policy.unattached_deprel

    by_tgt = _sources_by_target(alignment)
    anchor = {t: min(srcs, key=lambda s: (depth[s], s)) for t, srcs in by_tgt.items()}
    rep_of: dict[int, int] = {}
    for t in sorted(anchor):
        rep_of.setdefault(anchor[t], t)

    out: list[tuple[int, str] | None] = [None] * tgt_len
    root_candidates = []
    for s, r in rep_of.items():
        h = heads[s]
        while h != ROOT and h not in rep_of:
            h = heads[h]
        if h == ROOT:
            root_candidates.append(r)
        else:
            out[r] = (rep_of[h], source[s].deprel or dep)
    for t, s in anchor.items():
        if rep_of[s] != t:
            out[t] = (rep_of[s], dep)

    if root_candidates:
        root = min(root_candidates, key=lambda r: (depth[anchor[r]], anchor[r], r))
    else:
        root = 0
    out[root] = (ROOT, root_deprel)
    unaligned = 0
    for t in range(tgt_len):
        if t == root:
            continue
        if t in root_candidates:
            out[t] = (root, dep)
        elif out[t] is None:
            out[t] = (root, dep)
            unaligned += 1
    if report is not None:
        report.unaligned_tokens += unaligned

    return _break_cycles(out, root, dep)  # type: ignore[arg-type]


def _break_cycles(arcs: list[tuple[int, str]], root: int, dep: str) -> list[tuple[int, str]]:
    """Reattach the lowest-index member of any cycle to the root."""
    arcs = list(arcs)
    n = len(arcs)
    while True:
        state = [0] * n
        cycle = None
        for start in range(n):
            path = []
            i = start
            while i != ROOT and state[i] == 0:
                state[i] = 1
                path.append(i)
                i = arcs[i][0]
            if i != ROOT and state[i] == 1:
                cycle = path[path.index(i):]
            for j in path:
                state[j] = 2
            if cycle:
                break
        if not cycle:
            return arcs
        arcs[min(cycle)] = (root, dep)


def tree_to_tokens(forms, arcs, upos=None) -> list[Token]:
    return [
        Token(i, f, None if upos is None else upos[i], h, d)
        for i, (f, (h, d)) in enumerate(zip(forms, arcs))
    ]
