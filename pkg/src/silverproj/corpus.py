"""Data model and readers/writers for CoNLL-U, BIO TSV, event JSONL and bitext.

Indices are 0-based everywhere. CoNLL-U's 1-based HEAD column is converted at
the boundary, with HEAD=0 mapped to the ``ROOT`` sentinel.
"""
from __future__ import annotations

import io
import json
import logging
import re
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Union

from .errors import ParseError, ValidationError

log = logging.getLogger(__name__)

ROOT = -1

Source = Union[str, bytes, IO]

_SENT_ID = re.compile(r"^#\s*sent_id\s*=\s*(.*?)\s*$")


@dataclass
class Token:
    index: int
    form: str
    upos: str | None = None
    head: int | None = None
    deprel: str | None = None


@dataclass(frozen=True, order=True)
class Span:
    """Inclusive token range ``[start, end]`` carrying a label."""

    start: int
    end: int
    label: str

    def __len__(self):
        return self.end - self.start + 1

    def overlaps(self, other: "Span") -> bool:
        return self.start <= other.end and other.start <= self.end


@dataclass(frozen=True)
class Argument:
    span: Span
    role: str
    trigger: int


@dataclass
class EventStructure:
    """Two-level tree: triggers hang off a virtual root, arguments off triggers."""

    triggers: list[Span] = field(default_factory=list)
    arguments: list[Argument] = field(default_factory=list)

    def children(self, trigger: int) -> list[Argument]:
        return [a for a in self.arguments if a.trigger == trigger]

    def validate(self, length: int, sent_id: str = "") -> None:
        for span in self.triggers:
            _check_span(span, length, sent_id)
        for arg in self.arguments:
            _check_span(arg.span, length, sent_id)
            if not 0 <= arg.trigger < len(self.triggers):
                raise ValidationError(
                    f"sentence {sent_id!r}: argument refers to trigger "
                    f"{arg.trigger} but only {len(self.triggers)} exist"
                )


@dataclass
class AnnotatedSentence:
    tokens: list[Token]
    bio: list[str] | None = None
    events: EventStructure | None = None
    sent_id: str = ""

    def __len__(self):
        return len(self.tokens)

    @property
    def forms(self) -> list[str]:
        return [t.form for t in self.tokens]

    @property
    def upos(self) -> list[str | None]:
        return [t.upos for t in self.tokens]

    @property
    def heads(self) -> list[int | None]:
        return [t.head for t in self.tokens]

    @property
    def deprels(self) -> list[str | None]:
        return [t.deprel for t in self.tokens]

    @classmethod
    def from_forms(cls, forms: Iterable[str], sent_id: str = "") -> "AnnotatedSentence":
        return cls([Token(i, f) for i, f in enumerate(forms)], sent_id=sent_id)

    def validate(self) -> None:
        for i, tok in enumerate(self.tokens):
            if tok.index != i:
                raise ValidationError(
                    f"sentence {self.sent_id!r}: token at position {i} has index {tok.index}"
                )
        if self.bio is not None and len(self.bio) != len(self.tokens):
            raise ValidationError(
                f"sentence {self.sent_id!r}: {len(self.bio)} BIO tags for "
                f"{len(self.tokens)} tokens"
            )
        heads = self.heads
        if any(h is not None for h in heads):
            validate_tree(heads, self.sent_id)
        if self.events is not None:
            self.events.validate(len(self.tokens), self.sent_id)


@dataclass
class SentencePair:
    pair_id: str
    source: AnnotatedSentence
    target: AnnotatedSentence


@dataclass
class Bitext:
    pairs: list[SentencePair]
    empty_lines: int = 0

    def __post_init__(self):
        ids = [p.pair_id for p in self.pairs]
        if len(set(ids)) != len(ids):
            raise ValidationError("bitext pair ids are not unique")

    def __len__(self):
        return len(self.pairs)

    def __iter__(self) -> Iterator[SentencePair]:
        return iter(self.pairs)

    @property
    def sources(self) -> list[AnnotatedSentence]:
        return [p.source for p in self.pairs]

    @property
    def targets(self) -> list[AnnotatedSentence]:
        return [p.target for p in self.pairs]

    @classmethod
    def from_sentences(cls, sources, targets) -> "Bitext":
        sources, targets = list(sources), list(targets)
        if len(sources) != len(targets):
            raise ValidationError(
                f"line-count mismatch: source has {len(sources)}, target has {len(targets)}"
            )
        pairs = [
            SentencePair(str(i + 1), s, t) for i, (s, t) in enumerate(zip(sources, targets))
        ]
        empty = sum(1 for p in pairs if len(p.source) == 0 or len(p.target) == 0)
        return cls(pairs, empty_lines=empty)


def _check_span(span: Span, length: int, sent_id: str) -> None:
    if not 0 <= span.start <= span.end < length:
        raise ValidationError(
            f"sentence {sent_id!r}: span [{span.start}, {span.end}] out of bounds "
            f"for {length} tokens"
        )


def validate_tree(heads: list[int | None], sent_id: str = "") -> None:
    """Raise unless ``heads`` encodes a single-rooted acyclic tree."""
    n = len(heads)
    roots = []
    for i, h in enumerate(heads):
        if h is None:
            raise ValidationError(f"sentence {sent_id!r}: token {i} has no head")
        if h == ROOT:
            roots.append(i)
        elif not 0 <= h < n:
            raise ValidationError(
                f"sentence {sent_id!r}: token {i} head {h} out of range for {n} tokens"
            )
        elif h == i:
            raise ValidationError(f"sentence {sent_id!r}: token {i} is its own head")
    if n and len(roots) != 1:
        raise ValidationError(f"sentence {sent_id!r}: expected one root, found {len(roots)}")
    # every token must reach the root without revisiting a node
    state = [0] * n  # 0 unvisited, 1 on path, 2 reaches root
    for start in range(n):
        path = []
        i = start
        while i != ROOT and state[i] == 0:
            state[i] = 1
            path.append(i)
            i = heads[i]
        if i != ROOT and state[i] == 1:
            raise ValidationError(f"sentence {sent_id!r}: cycle through token {i}")
        for j in path:
            state[j] = 2


def tree_depths(heads: list[int]) -> list[int]:
    """Edge count from each token to the root of an already-valid tree."""
    depth: list[int | None] = [None] * len(heads)
    for start in range(len(heads)):
        path = []
        i = start
        while i != ROOT and depth[i] is None:
            path.append(i)
            i = heads[i]
        d = -1 if i == ROOT else depth[i]
        for j in reversed(path):
            d += 1
            depth[j] = d
    return depth  # type: ignore[return-value]


# -- stream helpers ----------------------------------------------------------


def _text(data: Source) -> str:
    if hasattr(data, "read"):
        data = data.read()
    if isinstance(data, bytes):
        try:
            return data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise ParseError(f"input is not valid UTF-8: {e}") from None
    return data


def _blocks(text: str) -> Iterator[list[tuple[int, str]]]:
    """Group numbered lines into blank-line separated blocks."""
    block: list[tuple[int, str]] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if line.strip() == "":
            if block:
                yield block
                block = []
        else:
            block.append((lineno, line))
    if block:
        yield block


# -- CoNLL-U -----------------------------------------------------------------


def _opt(value: str) -> str | None:
    return None if value == "_" else value


def read_conllu(data: Source) -> list[AnnotatedSentence]:
    sentences = []
    for block in _blocks(_text(data)):
        sent_id = None
        tokens: list[Token] = []
        raw_heads: list[tuple[int, str]] = []
        for lineno, line in block:
            if line.startswith("#"):
                m = _SENT_ID.match(line)
                if m:
                    sent_id = m.group(1)
                continue
            cols = line.split("\t")
            if len(cols) != 10:
                raise ParseError(f"expected 10 columns, found {len(cols)}", lineno)
            tok_id = cols[0]
            if "-" in tok_id or "." in tok_id:
                continue
            if not tok_id.isdigit():
                raise ParseError(f"bad token id {tok_id!r}", lineno)
            if int(tok_id) != len(tokens) + 1:
                raise ParseError(
                    f"token id {tok_id} out of sequence (expected {len(tokens) + 1})", lineno
                )
            head = cols[6]
            if head != "_" and not head.isdigit():
                raise ParseError(f"bad head {head!r}", lineno)
            raw_heads.append((lineno, head))
            tokens.append(Token(len(tokens), cols[1], _opt(cols[3]), None, _opt(cols[7])))
        sent = AnnotatedSentence(tokens, sent_id=sent_id or str(len(sentences) + 1))
        n = len(tokens)
        given = [h != "_" for _, h in raw_heads]
        if any(given) and not all(given):
            raise ValidationError(f"sentence {sent.sent_id!r}: some tokens lack a HEAD")
        for tok, (lineno, h) in zip(tokens, raw_heads):
            if h == "_":
                continue
            h = int(h)
            if h > n:
                raise ValidationError(
                    f"sentence {sent.sent_id!r} (line {lineno}): head {h} out of range "
                    f"for {n} tokens"
                )
            tok.head = ROOT if h == 0 else h - 1
        if any(given):
            validate_tree(sent.heads, sent.sent_id)
        sentences.append(sent)
    return sentences


def write_conllu(
    sentences: Iterable[AnnotatedSentence], require: Iterable[str] = ("upos", "head", "deprel")
) -> str:
    """Serialize to CoNLL-U.

    Fields named in ``require`` must be present on every token; other missing
    fields are written as ``_``.
    """
    require = tuple(require)
    out = io.StringIO()
    for sent in sentences:
        out.write(f"# sent_id = {sent.sent_id}\n")
        for tok in sent.tokens:
            for name in require:
                if getattr(tok, name) is None:
                    raise ValidationError(
                        f"sentence {sent.sent_id!r}: token {tok.index} missing {name}"
                    )
            if tok.head is None:
                head = "_"
            else:
                head = "0" if tok.head == ROOT else str(tok.head + 1)
            cols = [
                str(tok.index + 1), tok.form, "_", tok.upos or "_", "_", "_",
                head, tok.deprel or "_", "_", "_",
            ]
            out.write("\t".join(cols) + "\n")
        out.write("\n")
    return out.getvalue()


# -- BIO ---------------------------------------------------------------------


def read_bio(data: Source) -> list[AnnotatedSentence]:
    """Read two-column token/tag blocks. Tags are kept verbatim, even invalid ones."""
    sentences = []
    for block in _blocks(_text(data)):
        sent_id = None
        forms, tags = [], []
        for k, (lineno, line) in enumerate(block):
            if k == 0:
                m = _SENT_ID.match(line)
                if m and len(line.split()) != 2:
                    sent_id = m.group(1)
                    continue
            cols = line.split()
            if len(cols) != 2:
                raise ParseError(f"expected 2 columns, found {len(cols)}", lineno)
            forms.append(cols[0])
            tags.append(cols[1])
        sent = AnnotatedSentence.from_forms(forms, sent_id or str(len(sentences) + 1))
        sent.bio = tags
        sentences.append(sent)
    return sentences


def write_bio(sentences: Iterable[AnnotatedSentence], with_ids: bool = False) -> str:
    """Serialize to token TAB tag lines.

    With ``with_ids`` each block starts with a ``# sent_id`` comment, which is
    the only way a zero-token sentence survives a round trip.
    """
    out = io.StringIO()
    for sent in sentences:
        if sent.bio is None:
            raise ValidationError(f"sentence {sent.sent_id!r}: missing bio")
        if len(sent.bio) != len(sent.tokens):
            raise ValidationError(
                f"sentence {sent.sent_id!r}: {len(sent.bio)} tags for {len(sent.tokens)} tokens"
            )
        if with_ids:
            out.write(f"# sent_id = {sent.sent_id}\n")
        elif not sent.tokens:
            raise ValidationError(
                f"sentence {sent.sent_id!r}: empty sentence needs with_ids=True"
            )
        for tok, tag in zip(sent.tokens, sent.bio):
            out.write(f"{tok.form}\t{tag}\n")
        out.write("\n")
    return out.getvalue()


# -- events (JSON Lines) -----------------------------------------------------


def _event_record(obj, lineno):
    try:
        sent_id = str(obj["id"])
        tokens = obj["tokens"]
        if not isinstance(tokens, list) or not all(isinstance(t, str) for t in tokens):
            raise TypeError("tokens must be a list of strings")
        triggers = [
            Span(_int(t["start"]), _int(t["end"]), str(t["label"])) for t in obj["triggers"]
        ]
        arguments = [
            Argument(Span(_int(a["start"]), _int(a["end"]), str(a["role"])), str(a["role"]),
                     _int(a["trigger"]))
            for a in obj["arguments"]
        ]
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"bad event record: {e!r}", lineno) from None
    sent = AnnotatedSentence.from_forms(tokens, sent_id)
    sent.events = EventStructure(triggers, arguments)
    sent.events.validate(len(tokens), sent_id)
    return sent


def _int(v) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise TypeError(f"expected integer, got {v!r}")
    return v


def read_events(data: Source) -> list[AnnotatedSentence]:
    sentences = []
    for lineno, line in enumerate(_text(data).splitlines(), 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise ParseError(f"invalid JSON: {e.msg}", lineno) from None
        if not isinstance(obj, dict):
            raise ParseError("record is not a JSON object", lineno)
        sentences.append(_event_record(obj, lineno))
    return sentences


def write_events(sentences: Iterable[AnnotatedSentence]) -> str:
    lines = []
    for sent in sentences:
        if sent.events is None:
            raise ValidationError(f"sentence {sent.sent_id!r}: missing events")
        ev = sent.events
        ev.validate(len(sent), sent.sent_id)
        rec = {
            "id": sent.sent_id,
            "tokens": sent.forms,
            "triggers": [{"start": t.start, "end": t.end, "label": t.label} for t in ev.triggers],
            "arguments": [
                {"start": a.span.start, "end": a.span.end, "role": a.role, "trigger": a.trigger}
                for a in ev.arguments
            ],
        }
        lines.append(json.dumps(rec, ensure_ascii=False) + "\n")
    return "".join(lines)


# -- bitext ------------------------------------------------------------------


def read_lines(data: Source) -> list[AnnotatedSentence]:
    """One whitespace-tokenized sentence per line; ids are 1-based line numbers."""
    return [
        AnnotatedSentence.from_forms(line.split(), str(i))
        for i, line in enumerate(_text(data).splitlines(), 1)
    ]


def write_lines(sentences: Iterable[AnnotatedSentence]) -> str:
    return "".join(" ".join(s.forms) + "\n" for s in sentences)


def read_bitext(source: Source, target: Source) -> Bitext:
    src, tgt = read_lines(source), read_lines(target)
    if len(src) != len(tgt):
        raise ValidationError(
            f"line-count mismatch: source has {len(src)} lines, target has {len(tgt)}"
        )
    bitext = Bitext.from_sentences(src, tgt)
    if bitext.empty_lines:
        log.warning("bitext has %d pairs with an empty side", bitext.empty_lines)
    return bitext
