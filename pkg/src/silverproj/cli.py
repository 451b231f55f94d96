"""Command-line entry point: align-train, align, project, selftrain, eval, mix, stats.

Exit codes: 0 success, 1 validation/parse error, 2 I/O error. Outputs are
written to temporary files and renamed into place only once every output of
the command has been computed.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from dataclasses import replace

from . import corpus as cio
from .align import (LexiconModel, gold_sets, read_pharaoh, score_corpus, symmetrize,
                    train_lexicon, viterbi_align, write_pharaoh)
from .config import PipelineConfig, build_config, load_config_file
from .errors import SilverError, ValidationError
from .evaluation import alignment_report, entity_f1, las_uas, pos_accuracy
from .project import is_valid_bio, repair_bio
from .silver import (Corpus, LabelSource, MixSpec, Provenance, SilverCorpus,
                     assemble_projection, assemble_self_training, corpus_stats,
                     dump_sentences, load_sentences, mix)

log = logging.getLogger("silverproj")

ALIGNER_FORMAT = "silverproj-aligner"
ALIGNER_VERSION = 1
EXTENSIONS = {"pos": "conllu", "parse": "conllu", "ner": "bio", "events": "jsonl"}


# -- file helpers --------------------------------------------------------------


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as f:
        return f.read()


def _json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def commit(outputs: dict[str, str]) -> None:
    """Write every output to a temp file first, then rename them all into place."""
    staged = []
    try:
        for path, content in outputs.items():
            d = os.path.dirname(os.path.abspath(path))
            os.makedirs(d, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
            staged.append((tmp, path))
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
                f.write(content)
        for tmp, path in staged:
            os.replace(tmp, path)
    finally:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.unlink(tmp)


def load_aligner(path: str) -> tuple[LexiconModel, LexiconModel]:
    try:
        obj = json.loads(_read(path))
    except json.JSONDecodeError as e:
        raise ValidationError(f"{path}: not JSON: {e.msg}") from None
    if obj.get("format") != ALIGNER_FORMAT or obj.get("version") != ALIGNER_VERSION:
        raise ValidationError(f"{path}: not a {ALIGNER_FORMAT} v{ALIGNER_VERSION} file")
    return LexiconModel.from_json(obj["forward"]), LexiconModel.from_json(obj["backward"])


def _train_pair(cfg: PipelineConfig, pairs):
    kw = dict(iterations=cfg.iterations, smoothing=cfg.smoothing, null_prob=cfg.null_prob)
    fwd = train_lexicon(pairs, reverse=False, **kw)
    bwd = train_lexicon(pairs, reverse=True, **kw)
    log.info("trained aligner pairs=%d iterations=%d fwd_ll=%.6f bwd_ll=%.6f",
             len(pairs), cfg.iterations, fwd.log_likelihood[-1], bwd.log_likelihood[-1])
    return fwd, bwd


def _token_pairs(bitext):
    return [(p.source.forms, p.target.forms) for p in bitext]


def load_silver(path: str, task: str, lang: str) -> SilverCorpus:
    """Load a directory written by ``project`` or ``selftrain``."""
    data = os.path.join(path, f"silver.{EXTENSIONS[task]}")
    sentences = load_sentences(_read(data), task)
    prov = [Provenance.from_dict(json.loads(line))
            for line in _read(os.path.join(path, "provenance.jsonl")).splitlines() if line]
    source = prov[0].label_source if prov else LabelSource.PROJECTION
    return SilverCorpus(lang, sentences, source, prov)


# -- commands ------------------------------------------------------------------


def cmd_align_train(cfg: PipelineConfig) -> dict[str, str]:
    bitext = cio.read_bitext(_read(cfg.src), _read(cfg.tgt))
    fwd, bwd = _train_pair(cfg, _token_pairs(bitext))
    bundle = {"format": ALIGNER_FORMAT, "version": ALIGNER_VERSION,
              "forward": fwd.to_json(), "backward": bwd.to_json()}
    return {cfg.out: json.dumps(bundle, sort_keys=True) + "\n"}


def cmd_align(cfg: PipelineConfig) -> dict[str, str]:
    bitext = cio.read_bitext(_read(cfg.src), _read(cfg.tgt))
    if cfg.model:
        fwd, bwd = load_aligner(cfg.model)
    else:
        # train from scratch on the extra bitext with the input appended
        pairs = []
        if cfg.extra_src:
            pairs = _token_pairs(cio.read_bitext(_read(cfg.extra_src), _read(cfg.extra_tgt)))
        fwd, bwd = _train_pair(cfg, pairs + _token_pairs(bitext))
    out = []
    for p in bitext:
        s, t = p.source.forms, p.target.forms
        out.append(symmetrize(viterbi_align(fwd, s, t), viterbi_align(bwd, s, t), cfg.heuristic))
    log.info("aligned pairs=%d links=%d heuristic=%s", len(out), sum(map(len, out)),
             cfg.heuristic)
    return {cfg.out: write_pharaoh(out)}


def _silver_outputs(cfg: PipelineConfig, silver: SilverCorpus) -> dict[str, str]:
    d = cfg.out_dir
    return {
        os.path.join(d, f"silver.{EXTENSIONS[cfg.task]}"): dump_sentences(silver.sentences,
                                                                         cfg.task),
        os.path.join(d, "provenance.jsonl"): silver.provenance_jsonl(),
        os.path.join(d, "report.json"): _json(
            {"lang": silver.lang, "label_source": silver.label_source.value,
             "sentences": len(silver), "report": silver.report.to_dict()}),
    }


def cmd_project(cfg: PipelineConfig) -> dict[str, str]:
    sources = load_sentences(_read(cfg.annotations), cfg.task)
    targets = cio.read_lines(_read(cfg.tgt))
    bitext = cio.Bitext.from_sentences(sources, targets)
    alignments = read_pharaoh(_read(cfg.alignments))
    silver = assemble_projection(bitext, alignments, cfg.task, cfg.policy(), cfg.lang,
                                 workers=cfg.workers)
    r = silver.report
    log.info("projected pairs=%d spans=%d kept=%d dropped_ratio=%d dropped_collision=%d "
             "dropped_unaligned=%d dropped_parent=%d unaligned_tokens=%d repaired=%d",
             len(silver), r.source_spans, r.projected, r.dropped_ratio, r.dropped_collision,
             r.dropped_unaligned, r.dropped_parent, r.unaligned_tokens, r.repaired)
    return _silver_outputs(cfg, silver)


def cmd_selftrain(cfg: PipelineConfig) -> dict[str, str]:
    translations = cio.read_lines(_read(cfg.tgt))
    predictions = load_sentences(_read(cfg.predictions), cfg.task)
    silver = assemble_self_training(translations, predictions, cfg.task, cfg.lang)
    log.info("self-training pairs=%d repaired=%d", len(silver), silver.report.repaired)
    return _silver_outputs(cfg, silver)


def _repair_all(sentences, what):
    n = 0
    for s in sentences:
        if s.bio is not None and not is_valid_bio(s.bio):
            s.bio = repair_bio(s.bio)
            n += 1
    if n:
        log.warning("repaired invalid BIO in %d %s sentences", n, what)
    return sentences


def evaluate(cfg: PipelineConfig) -> list:
    if cfg.task == "align":
        hyp = read_pharaoh(_read(cfg.pred))
        gold = read_pharaoh(_read(cfg.gold))
        if len(hyp) != len(gold):
            raise ValidationError(f"{len(hyp)} hypothesis vs {len(gold)} gold alignment lines")
        items = [(h, *gold_sets(g)) for h, g in zip(hyp, gold)]
        return [alignment_report(score_corpus(items, cfg.average), cfg.average)]
    pred = load_sentences(_read(cfg.pred), cfg.task)
    gold = load_sentences(_read(cfg.gold), cfg.task)
    if cfg.task == "ner":
        return [entity_f1(_repair_all(pred, "predicted"), _repair_all(gold, "gold"))]
    if cfg.task == "pos":
        return [pos_accuracy(pred, gold)]
    if cfg.task == "parse":
        return list(las_uas(pred, gold))
    raise ValidationError("no metric for task 'events'")


def cmd_eval(cfg: PipelineConfig) -> dict[str, str]:
    reports = evaluate(cfg)
    for r in reports:
        log.info("metric %s", r.to_tsv().replace("\t", " "))
    text = _json({"task": cfg.task, "metrics": [r.to_dict() for r in reports]})
    if cfg.out:
        return {cfg.out: text}
    sys.stdout.write(text)
    return {}


def _with_id(example) -> cio.AnnotatedSentence:
    return replace(example.sentence, sent_id="/".join(example.key))


def cmd_mix(cfg: PipelineConfig) -> dict[str, str]:
    def gold(paths):
        return [Corpus(lang, load_sentences(_read(p), cfg.task)) for lang, p in sorted(paths.items())]

    def silver(paths):
        return [load_silver(p, cfg.task, lang) for lang, p in sorted(paths.items())]

    spec = MixSpec(gold(cfg.gold_train), silver(cfg.silver_train), cfg.seed, cfg.dev_policy,
                   cfg.mode, gold(cfg.gold_dev), silver(cfg.silver_dev))
    n_gold = sum(map(len, spec.gold))
    for c in spec.silver:
        if len(c) != n_gold:
            log.warning("silver %s has %d sentences but gold has %d", c.lang, len(c), n_gold)
    result = mix(spec)
    ext = EXTENSIONS[cfg.task]
    outputs = {}
    for split, sets in (("train", result.train), ("dev", result.dev)):
        for name, examples in sets.items():
            stem = os.path.join(cfg.out_dir, f"{split}.{name}")
            outputs[f"{stem}.{ext}"] = dump_sentences([_with_id(e) for e in examples], cfg.task)
            outputs[f"{stem}.sources.jsonl"] = "".join(
                json.dumps({"lang": e.lang, "label_source": e.label_source.value,
                            "sent_id": e.sentence.sent_id}, sort_keys=True) + "\n"
                for e in examples)
    outputs[os.path.join(cfg.out_dir, "mix.json")] = _json(
        {**result.metadata, "stats": {n: corpus_stats(ex) for n, ex in result.train.items()}})
    log.info("mixed sets=%s", json.dumps(result.metadata["sizes"], sort_keys=True))
    return outputs


def cmd_stats(cfg: PipelineConfig) -> dict[str, str]:
    corpora = []
    for lang, path in sorted(cfg.input.items()):
        if os.path.isdir(path):
            corpora.append(load_silver(path, cfg.task, lang))
        else:
            corpora.append(Corpus(lang, load_sentences(_read(path), cfg.task)))
    text = _json(corpus_stats(corpora))
    if cfg.out:
        return {cfg.out: text}
    sys.stdout.write(text)
    return {}


COMMANDS = {
    "align-train": cmd_align_train,
    "align": cmd_align,
    "project": cmd_project,
    "selftrain": cmd_selftrain,
    "eval": cmd_eval,
    "mix": cmd_mix,
    "stats": cmd_stats,
}


# -- argument parsing ----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="silverproj",
                                     description="cross-lingual annotation projection toolkit")
    parser.add_argument("--log-level", default="INFO")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config; flags override its values")
        p.add_argument("--workers", type=int)
        p.add_argument("--out")

    def aligner(p):
        p.add_argument("--src", help="source text, one tokenized sentence per line")
        p.add_argument("--tgt", help="target text, one tokenized sentence per line")
        p.add_argument("--iterations", type=int)
        p.add_argument("--smoothing", type=float)
        p.add_argument("--null-prob", type=float)

    p = sub.add_parser("align-train", help="train forward and backward IBM Model 1")
    common(p)
    aligner(p)

    p = sub.add_parser("align", help="write symmetrized Pharaoh alignments")
    common(p)
    aligner(p)
    p.add_argument("--model", help="file from align-train; omitted = train on the input")
    p.add_argument("--heuristic")
    p.add_argument("--extra-src", help="extra training bitext (source) used without --model")
    p.add_argument("--extra-tgt")

    for name, what in (("project", "project gold annotations onto translations"),
                       ("selftrain", "attach model predictions to translations")):
        p = sub.add_parser(name, help=what)
        common(p)
        p.add_argument("--task")
        p.add_argument("--tgt")
        p.add_argument("--lang")
        p.add_argument("--out-dir")
        if name == "project":
            p.add_argument("--annotations", help="source-side gold annotations")
            p.add_argument("--alignments", help="Pharaoh file, one line per pair")
            p.add_argument("--ratio-limit", type=float)
            p.add_argument("--non-strict-ratio", dest="strict_ratio", action="store_const",
                           const=False)
            p.add_argument("--pos-fill")
        else:
            p.add_argument("--predictions")

    p = sub.add_parser("eval", help="score predictions against gold")
    common(p)
    p.add_argument("--task", help="align, ner, pos or parse")
    p.add_argument("--pred")
    p.add_argument("--gold")
    p.add_argument("--average")

    p = sub.add_parser("mix", help="combine gold and silver training data")
    common(p)
    p.add_argument("--task")
    p.add_argument("--gold-train", nargs="+", metavar="LANG=FILE")
    p.add_argument("--gold-dev", nargs="+", metavar="LANG=FILE")
    p.add_argument("--silver-train", nargs="+", metavar="LANG=DIR")
    p.add_argument("--silver-dev", nargs="+", metavar="LANG=DIR")
    p.add_argument("--seed", type=int)
    p.add_argument("--mode")
    p.add_argument("--dev-policy")
    p.add_argument("--out-dir")

    p = sub.add_parser("stats", help="count sentences, tokens and annotations")
    common(p)
    p.add_argument("--task")
    p.add_argument("--input", nargs="+", metavar="[LANG=]PATH")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(stream=sys.stderr, level=args.log_level.upper(),
                        format="%(levelname)s %(name)s %(message)s")
    overrides = {k: v for k, v in vars(args).items()
                 if k not in ("command", "config", "log_level")}
    try:
        file_values = load_config_file(args.config) if args.config else {}
        cfg = build_config(args.command, file_values, overrides)
        outputs = COMMANDS[args.command](cfg)
        commit(outputs)
    except SilverError as e:
        log.error("%s: %s", type(e).__name__, e)
        return 1
    except OSError as e:
        log.error("%s: %s", type(e).__name__, e)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
