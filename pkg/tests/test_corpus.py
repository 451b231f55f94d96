import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from silverproj.corpus import (ROOT, AnnotatedSentence, Argument, EventStructure, Span, Token,
                               read_bio, read_bitext, read_conllu, read_events, validate_tree,
                               write_bio, write_conllu, write_events)
from silverproj.errors import ParseError, SilverError, ValidationError
from silverproj.synthetic import annotated_fixture, random_heads

from oracles import is_tree

CONLLU = """\
# sent_id = s1
# text = don't go
1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_
1\tdo\tdo\tAUX\t_\t_\t3\taux\t_\t_
2\tn't\tnot\tPART\t_\t_\t3\tadvmod\t_\t_
3\tgo\tgo\tVERB\t_\t_\t0\troot\t_\t_
3.1\tgone\t_\t_\t_\t_\t_\t_\t_\t_

1\thi\t_\tINTJ\t_\t_\t0\troot\t_\t_
"""


def conllu_line(i, form, upos, head, deprel):
    return f"{i}\t{form}\t_\t{upos}\t_\t_\t{head}\t{deprel}\t_\t_"


class TestReadConllu:
    def test_minimal_block(self):
        [s] = read_conllu(conllu_line(1, "hi", "INTJ", 0, "root") + "\n")
        assert len(s) == 1
        tok = s.tokens[0]
        assert (tok.form, tok.upos, tok.head, tok.deprel) == ("hi", "INTJ", ROOT, "root")

    def test_range_and_empty_nodes_skipped(self):
        s1, s2 = read_conllu(CONLLU)
        assert s1.sent_id == "s1"
        assert s1.forms == ["do", "n't", "go"]
        assert s1.heads == [2, 2, ROOT]
        assert s2.sent_id == "2"

    def test_range_line_two_tokens(self):
        text = "\n".join([
            "1-2\tau\t_\t_\t_\t_\t_\t_\t_\t_",
            conllu_line(1, "à", "ADP", 2, "case"),
            conllu_line(2, "le", "DET", 0, "root"),
        ]) + "\n"
        [s] = read_conllu(text)
        assert s.forms == ["à", "le"]

    def test_head_out_of_range(self):
        text = "\n".join([conllu_line(1, "a", "X", 2, "dep"), conllu_line(2, "b", "X", 5, "dep"),
                          conllu_line(3, "c", "X", 0, "root")]) + "\n"
        with pytest.raises(ValidationError):
            read_conllu(text)

    def test_wrong_column_count_reports_line(self):
        with pytest.raises(ParseError) as e:
            read_conllu("# c\n1\thi\tINTJ\n")
        assert e.value.line == 2

    def test_cycle_rejected(self):
        text = "\n".join([conllu_line(1, "a", "X", 2, "dep"), conllu_line(2, "b", "X", 1, "dep"),
                          conllu_line(3, "c", "X", 0, "root")]) + "\n"
        with pytest.raises(ValidationError):
            read_conllu(text)

    def test_bytes_input(self):
        [s] = read_conllu(conllu_line(1, "héllo", "X", 0, "root").encode() + b"\n")
        assert s.forms == ["héllo"]

    def test_missing_heads_allowed_when_all_absent(self):
        text = "\n".join([conllu_line(1, "a", "X", "_", "_"),
                          conllu_line(2, "b", "Y", "_", "_")]) + "\n"
        [s] = read_conllu(text)
        assert s.heads == [None, None]
        assert s.upos == ["X", "Y"]


class TestWriteConllu:
    def test_round_trip(self):
        sents = read_conllu(CONLLU)
        again = read_conllu(write_conllu(sents))
        for a, b in zip(sents, again):
            assert a.tokens == b.tokens
            assert a.sent_id == b.sent_id

    def test_root_is_zero(self):
        s = AnnotatedSentence([Token(0, "hi", "INTJ", ROOT, "root")], sent_id="x")
        assert "\t0\troot\t" in write_conllu([s])

    def test_missing_deprel(self):
        s = AnnotatedSentence([Token(0, "hi", "INTJ", ROOT, None)], sent_id="s7")
        with pytest.raises(ValidationError, match="s7.*deprel"):
            write_conllu([s])

    def test_random_fixture_round_trip(self):
        sents = annotated_fixture(random.Random(3), 50)
        again = read_conllu(write_conllu(sents))
        assert [s.tokens for s in sents] == [s.tokens for s in again]


class TestBio:
    def test_single(self):
        [s] = read_bio("John\tB-PER\n\n")
        assert s.bio == ["B-PER"] and s.forms == ["John"]

    def test_space_separated(self):
        [s] = read_bio("John B-PER\n")
        assert s.bio == ["B-PER"]

    def test_two_sentences(self):
        assert len(read_bio("a\tO\nb\tB-LOC\n\nc\tO\n")) == 2

    def test_invalid_tags_accepted(self):
        [s] = read_bio("x\tI-PER\n")
        assert s.bio == ["I-PER"]

    def test_bad_columns(self):
        with pytest.raises(ParseError) as e:
            read_bio("a\tO\nb c d\n")
        assert e.value.line == 2

    def test_round_trip(self):
        text = "John\tB-PER\nSmith\tI-PER\nsaid\tO\n\nParis\tB-LOC\n\n"
        assert write_bio(read_bio(text)) == text

    def test_empty(self):
        assert write_bio([]) == ""
        assert read_bio("") == []

    def test_length_mismatch(self):
        s = AnnotatedSentence.from_forms(["a", "b"])
        s.bio = ["O"]
        with pytest.raises(ValidationError):
            write_bio([s])

    def test_missing_bio(self):
        with pytest.raises(ValidationError):
            write_bio([AnnotatedSentence.from_forms(["a"])])

    def test_ids_keep_empty_sentences(self):
        a = AnnotatedSentence.from_forms([], "1")
        a.bio = []
        b = AnnotatedSentence.from_forms(["x"], "2")
        b.bio = ["B-PER"]
        again = read_bio(write_bio([a, b], with_ids=True))
        assert [(s.sent_id, s.forms, s.bio) for s in again] == [("1", [], []),
                                                                ("2", ["x"], ["B-PER"])]
        with pytest.raises(ValidationError):
            write_bio([a])


class TestEvents:
    def test_one_trigger(self):
        line = '{"id": "e1", "tokens": ["bombs", "fell"], "triggers": [{"start": 1, "end": 1, "label": "Attack"}], "arguments": []}\n'
        [s] = read_events(line)
        assert s.events.triggers == [Span(1, 1, "Attack")]
        assert s.events.children(0) == []

    def test_bad_trigger_reference(self):
        line = '{"id": "e1", "tokens": ["a", "b"], "triggers": [{"start": 0, "end": 0, "label": "T"}], "arguments": [{"start": 1, "end": 1, "role": "r", "trigger": 3}]}'
        with pytest.raises(ValidationError):
            read_events(line)

    def test_span_out_of_bounds(self):
        line = '{"id": "e1", "tokens": ["a"], "triggers": [{"start": 0, "end": 4, "label": "T"}], "arguments": []}'
        with pytest.raises(ValidationError):
            read_events(line)

    def test_shared_argument_span(self):
        ev = EventStructure([Span(0, 0, "Attack"), Span(3, 3, "Die")],
                            [Argument(Span(1, 2, "agent"), "agent", 0),
                             Argument(Span(1, 2, "victim"), "victim", 1)])
        s = AnnotatedSentence.from_forms(["hit", "the", "man", "died"], "e2")
        s.events = ev
        [again] = read_events(write_events([s]))
        assert [(a.span.start, a.span.end, a.role, a.trigger) for a in again.events.arguments] == [
            (1, 2, "agent", 0), (1, 2, "victim", 1)]

    def test_round_trip_fixture(self):
        sents = annotated_fixture(random.Random(5), 40)
        again = read_events(write_events(sents))
        assert [s.events for s in sents] == [s.events for s in again]
        assert [s.forms for s in sents] == [s.forms for s in again]

    def test_bad_json(self):
        with pytest.raises(ParseError) as e:
            read_events('\n{"id": 1,')
        assert e.value.line == 2


class TestBitext:
    def test_zip(self):
        b = read_bitext("a b\nc\n", "x\ny z\n")
        assert len(b) == 2
        assert [p.pair_id for p in b] == ["1", "2"]
        assert b.pairs[1].target.forms == ["y", "z"]

    def test_mismatch(self):
        with pytest.raises(ValidationError, match="3.*2"):
            read_bitext("a\nb\nc\n", "x\ny\n")

    def test_empty_line_counted(self):
        b = read_bitext("a\nb\n", "x\n\n")
        assert len(b.pairs[1].target) == 0
        assert b.empty_lines == 1


@settings(max_examples=300, deadline=None)
@given(st.lists(st.text(alphabet="0123456789\t_-. abcROOT#\n", max_size=40), max_size=6))
def test_conllu_fuzz_only_typed_errors(lines):
    text = "\n".join(lines)
    for reader in (read_conllu, read_bio, read_events):
        try:
            sents = reader(text)
        except SilverError:
            continue
        for s in sents:
            s.validate()


def test_fuzz_10k_malformed_lines():
    rng = random.Random(11)
    alphabet = "0123456789\t_-. ab#{}[]\":,"
    for _ in range(10_000):
        line = "".join(rng.choice(alphabet) for _ in range(rng.randrange(30)))
        for reader in (read_conllu, read_bio, read_events):
            try:
                for s in reader(line + "\n"):
                    s.validate()
            except SilverError:
                pass


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 30), st.integers(0, 10_000))
def test_validate_tree_matches_oracle(n, seed):
    rng = random.Random(seed)
    heads = random_heads(rng, n)
    if n and rng.random() < 0.5:  # corrupt one head
        i = rng.randrange(n)
        heads[i] = rng.choice([ROOT] + list(range(n)))
    try:
        validate_tree(heads)
        ok = True
    except ValidationError:
        ok = False
    assert ok == (is_tree(heads) and all(h != i for i, h in enumerate(heads)))
