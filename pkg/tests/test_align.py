import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from silverproj.align import (Alignment, AlignmentLink, LexiconModel, Strength, emit_pharaoh,
                              f_measure, parse_pharaoh, read_pharaoh, score_alignment,
                              score_corpus, symmetrize, train_lexicon, viterbi_align)
from silverproj.errors import ParseError, ValidationError
from silverproj.synthetic import random_alignment

from oracles import enumerate_em, enumerate_loglik

S, P = Strength.SURE, Strength.POSSIBLE
TOY = [("a b".split(), "x y".split()), (["a"], ["x"])]

# Produced by oracles.enumerate_em(TOY, 5), which enumerates every alignment
# vector in the E-step rather than factorizing it.
T_X_A = 0.8775979370264828
T_Y_A = 0.12240206297351727
T_Y_B = 0.8920070221416345


def links(*triples):
    return frozenset(AlignmentLink(s, t, k) for s, t, k in triples)


class TestPharaoh:
    def test_sure(self):
        assert parse_pharaoh("0-0 1-2").links == links((0, 0, S), (1, 2, S))

    def test_possible(self):
        assert parse_pharaoh("0-0 1?2").links == links((0, 0, S), (1, 2, P))

    @pytest.mark.parametrize("line", ["0-x", "-1-2", "0:1", "a-b", "1-"])
    def test_bad(self, line):
        with pytest.raises(ParseError):
            parse_pharaoh(line)

    def test_emit_sorted(self):
        assert emit_pharaoh(Alignment(links((1, 2, S), (0, 0, S)))) == "0-0 1-2"

    def test_emit_empty(self):
        assert emit_pharaoh(Alignment()) == ""

    def test_emit_possible(self):
        assert emit_pharaoh(Alignment(links((0, 1, P)))) == "0?1"

    def test_default_strength(self):
        assert parse_pharaoh("0-1", default=P).links == links((0, 1, P))

    def test_file_line_numbers(self):
        with pytest.raises(ParseError) as e:
            read_pharaoh("0-0\n1-1\nzz\n")
        assert e.value.line == 3

    def test_bounds_checked_on_bind(self):
        a = parse_pharaoh("0-0 3-1")
        with pytest.raises(ValidationError):
            a.bind(2, 2)
        assert a.bind(4, 2).src_len == 4

    @settings(max_examples=200)
    @given(st.sets(st.tuples(st.integers(0, 30), st.integers(0, 30), st.booleans())))
    def test_round_trip(self, raw):
        seen = {}
        for s, t, sure in raw:
            seen.setdefault((s, t), S if sure else P)
        a = Alignment(frozenset(AlignmentLink(s, t, k) for (s, t), k in seen.items()))
        assert parse_pharaoh(emit_pharaoh(a)).links == a.links


class TestTrainLexicon:
    def test_toy_matches_frozen_oracle(self):
        m = train_lexicon(TOY, iterations=5)
        assert m.prob("x", "a") == pytest.approx(T_X_A, abs=1e-12)
        assert m.prob("y", "a") == pytest.approx(T_Y_A, abs=1e-12)
        assert m.prob("y", "b") == pytest.approx(T_Y_B, abs=1e-12)
        assert m.prob("x", "a") > m.prob("y", "a")

    def test_single_cooccurrence(self):
        m = train_lexicon([(["a"], ["x"])], iterations=1, null_prob=0.0)
        assert m.prob("x", "a") == 1.0

    def test_empty(self):
        with pytest.raises(ValidationError):
            train_lexicon([], iterations=3)

    def test_bad_args(self):
        with pytest.raises(ValidationError):
            train_lexicon(TOY, iterations=0)
        with pytest.raises(ValidationError):
            train_lexicon(TOY, smoothing=-1)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10_000), st.sampled_from([None, 0.0, 0.2]))
    def test_matches_enumeration(self, seed, null_prob):
        rng = random.Random(seed)
        pairs = [([f"e{rng.randrange(4)}" for _ in range(rng.randint(0, 3))],
                  [f"f{rng.randrange(4)}" for _ in range(rng.randint(1, 3))])
                 for _ in range(rng.randint(1, 4))]
        if null_prob == 0.0:
            pairs = [(s or ["e0"], t) for s, t in pairs]
        iters = rng.randint(1, 4)
        m = train_lexicon(pairs, iterations=iters, null_prob=null_prob)
        t, trace = enumerate_em(pairs, iters, null_prob)
        for (f, e), p in t.items():
            assert m.prob(f, e) == pytest.approx(p, abs=1e-10)
        assert m.log_likelihood == pytest.approx(trace, abs=1e-9)

    def test_rows_stochastic_and_monotone(self):
        rng = random.Random(1)
        for _ in range(20):
            pairs = [([f"e{rng.randrange(8)}" for _ in range(rng.randint(1, 6))],
                      [f"f{rng.randrange(8)}" for _ in range(rng.randint(1, 6))])
                     for _ in range(rng.randint(1, 15))]
            for n in range(1, 6):
                m = train_lexicon(pairs, iterations=n)
                assert abs(m.table.sum(axis=1) - 1).max() < 1e-9
            assert all(b >= a - 1e-9 for a, b in zip(m.log_likelihood, m.log_likelihood[1:]))

    def test_trace_is_recomputed_likelihood(self):
        m = train_lexicon(TOY, iterations=3)
        t = {(f, e): m.prob(f, e) for f in m.tgt_vocab for e in m.src_vocab + [None]}
        assert m.log_likelihood[-1] == pytest.approx(enumerate_loglik(t, TOY), abs=1e-12)

    def test_smoothing_keeps_rows_normalized(self):
        m = train_lexicon(TOY, iterations=3, smoothing=0.5)
        assert abs(m.table.sum(axis=1) - 1).max() < 1e-12
        assert m.prob("y", "a") > T_Y_A

    def test_reverse(self):
        m = train_lexicon(TOY, iterations=5, reverse=True)
        assert m.src_vocab == ["x", "y"] and m.tgt_vocab == ["a", "b"]

    def test_json_round_trip(self):
        m = train_lexicon(TOY, iterations=4, smoothing=0.1)
        again = LexiconModel.loads(m.dumps())
        assert (again.table == m.table).all()
        assert again.log_likelihood == m.log_likelihood
        assert again.src_vocab == m.src_vocab

    def test_json_version_checked(self):
        obj = train_lexicon(TOY).to_json()
        obj["version"] = 99
        with pytest.raises(ValidationError):
            LexiconModel.from_json(obj)


def brute_viterbi(model, src, tgt):
    """Score every candidate; ties prefer the lowest source index, NULL last."""
    prior = 1.0 / (len(src) + 1)
    out = set()
    for j, f in enumerate(tgt):
        cands = [(prior * model.prob(f, e), -i, i) for i, e in enumerate(src)]
        cands.append((prior * model.prob(f, None), -len(src) - 1, None))
        best = max(cands)[2]
        if best is not None:
            out.add((best, j))
    return out


class TestViterbi:
    def test_toy(self):
        m = train_lexicon(TOY, iterations=5)
        assert viterbi_align(m, ["a", "b"], ["x", "y"]).pairs() == {(0, 0), (1, 1)}

    def test_empty_target(self):
        m = train_lexicon(TOY, iterations=5)
        assert len(viterbi_align(m, ["a", "b"], [])) == 0

    def test_unseen_target_goes_to_lowest_source(self):
        m = train_lexicon(TOY, iterations=5)
        a = viterbi_align(m, ["q", "r", "s"], ["zzz"])
        assert a.pairs() == {(0, 0)}
        # brute force: every candidate, NULL included, scores the same
        scores = {m.prob("zzz", e) for e in ["q", "r", "s", None]}
        assert len(scores) == 1

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 10_000))
    def test_matches_brute_force(self, seed):
        rng = random.Random(seed)
        pairs = [([f"e{rng.randrange(5)}" for _ in range(rng.randint(1, 5))],
                  [f"f{rng.randrange(5)}" for _ in range(rng.randint(1, 5))])
                 for _ in range(6)]
        m = train_lexicon(pairs, iterations=3)
        src = [f"e{rng.randrange(6)}" for _ in range(rng.randint(0, 5))]
        tgt = [f"f{rng.randrange(6)}" for _ in range(rng.randint(0, 5))]
        a = viterbi_align(m, src, tgt)
        assert a.pairs() == brute_viterbi(m, src, tgt)
        assert len({t for _, t in a.pairs()}) == len(a)

    def test_reverse_model_links_in_source_target_order(self):
        m = train_lexicon(TOY, iterations=5, reverse=True)
        assert viterbi_align(m, ["a", "b"], ["x", "y"]).pairs() == {(0, 0), (1, 1)}


class TestSymmetrize:
    def fb(self, fwd, bwd, n=3, m=3):
        return Alignment.from_pairs(fwd, n, m), Alignment.from_pairs(bwd, n, m)

    def test_intersection(self):
        assert symmetrize(*self.fb({(0, 0), (1, 1)}, {(0, 0), (1, 2)}),
                          "intersection").pairs() == {(0, 0)}

    def test_union(self):
        assert symmetrize(*self.fb({(0, 0), (1, 1)}, {(0, 0), (1, 2)}),
                          "union").pairs() == {(0, 0), (1, 1), (1, 2)}

    def test_gdfa_diagonal(self):
        assert symmetrize(*self.fb({(0, 0)}, {(1, 1)}, 2, 2)).pairs() == {(0, 0), (1, 1)}

    def test_gdfa_hand_trace(self):
        # intersection {(0,0)}; (0,1) neighbours it and target 1 is uncovered, so
        # grow-diag adds it; (2,2) has both ends uncovered, so final-and adds it
        fwd = {(0, 0), (0, 1), (2, 2)}
        bwd = {(0, 0)}
        assert symmetrize(*self.fb(fwd, bwd)).pairs() == {(0, 0), (0, 1), (2, 2)}

    def test_gdfa_skips_fully_covered(self):
        # (1,1) is diagonal to (0,0) but both its ends are already covered
        fwd = {(0, 0), (1, 1), (1, 2), (2, 1)}
        bwd = {(0, 0), (1, 2), (2, 1)}
        assert symmetrize(*self.fb(fwd, bwd)).pairs() == {(0, 0), (1, 2), (2, 1)}

    def test_length_mismatch(self):
        with pytest.raises(ValidationError):
            symmetrize(Alignment.from_pairs({(0, 0)}, 2, 2), Alignment.from_pairs({(0, 0)}, 3, 2))

    def test_unknown(self):
        with pytest.raises(ValidationError):
            symmetrize(Alignment(), Alignment(), "grow")

    @settings(max_examples=300)
    @given(st.integers(0, 10**6))
    def test_bounded_by_intersection_and_union(self, seed):
        rng = random.Random(seed)
        n, m = rng.randint(0, 8), rng.randint(0, 8)
        f, b = random_alignment(rng, n, m), random_alignment(rng, n, m)
        for h in ("intersection", "union", "grow-diag-final-and"):
            r = symmetrize(f, b, h).pairs()
            assert f.pairs() & b.pairs() <= r <= f.pairs() | b.pairs()


class TestScore:
    def test_perfect(self):
        g = {(0, 0), (1, 1)}
        s = score_alignment(g, g, g)
        assert (s.aer, s.precision, s.recall, s.f) == (0.0, 1.0, 1.0, 1.0)

    def test_hand_example(self):
        s = score_alignment({(0, 0), (1, 1), (2, 2)}, {(0, 0), (1, 1)},
                            {(0, 0), (1, 1), (2, 3)})
        assert s.precision == pytest.approx(2 / 3)
        assert s.recall == 1.0
        assert s.aer == pytest.approx(0.2)
        assert (s.n_hyp, s.n_sure, s.n_hyp_sure, s.n_hyp_possible) == (3, 2, 2, 2)

    def test_sure_not_subset(self):
        with pytest.raises(ValidationError):
            score_alignment({(0, 0)}, {(0, 0), (1, 1)}, {(0, 0)})

    def test_fast_align_row(self):
        f = f_measure(0.539, 0.514)
        assert round(100 * f, 1) == 52.6
        assert round(100 * (1 - f), 1) == 47.4

    @settings(max_examples=500)
    @given(st.sets(st.tuples(st.integers(0, 5), st.integers(0, 5))),
           st.sets(st.tuples(st.integers(0, 5), st.integers(0, 5)), min_size=1))
    def test_sure_only_aer_is_one_minus_f(self, hyp, gold):
        s = score_alignment(hyp, gold)
        assert s.aer == pytest.approx(1 - s.f, abs=1e-12)

    def test_micro_pools_counts(self):
        items = [({(0, 0)}, {(0, 0)}, {(0, 0)}),
                 ({(0, 0), (1, 1), (2, 2)}, {(0, 1)}, {(0, 1)})]
        micro = score_corpus(items)
        assert micro.precision == pytest.approx(1 / 4)
        assert micro.recall == pytest.approx(1 / 2)
        macro = score_corpus(items, "macro")
        assert macro.precision == pytest.approx(0.5)
        assert macro.aer == pytest.approx((0 + 1) / 2)

    def test_alignment_objects_split_sure_possible(self):
        gold = parse_pharaoh("0-0 1?1")
        s = score_alignment(parse_pharaoh("0-0 1-1"), gold.sure(), gold.possible())
        assert s.precision == 1.0 and s.recall == 1.0
        assert s.aer == 0.0
