"""Run align-train, align, project and mix on a synthetic bitext through the CLI.

Writes everything under --workdir and prints the wall time of each stage.
"""
import argparse
import os
import random
import time

from silverproj.cli import main as cli
from silverproj.corpus import write_lines
from silverproj.silver import dump_sentences
from silverproj.synthetic import synthetic_bitext


def run(argv):
    t0 = time.perf_counter()
    code = cli([str(a) for a in argv])
    if code:
        raise SystemExit(f"{argv[0]} failed with exit code {code}")
    print(f"{argv[0]:<12} {time.perf_counter() - t0:6.2f}s")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--workdir", default="synthetic_run")
    ap.add_argument("--pairs", type=int, default=1000)
    ap.add_argument("--task", default="parse", choices=["pos", "ner", "parse", "events"])
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    d = args.workdir
    os.makedirs(d, exist_ok=True)
    sources, targets = synthetic_bitext(random.Random(args.seed), args.pairs)
    ext = {"pos": "conllu", "parse": "conllu", "ner": "bio", "events": "jsonl"}[args.task]
    gold = os.path.join(d, f"src.{ext}")
    with open(gold, "w", encoding="utf-8") as fh:
        fh.write(dump_sentences(sources, args.task))
    with open(os.path.join(d, "src.txt"), "w", encoding="utf-8") as fh:
        fh.write(write_lines(sources))
    with open(os.path.join(d, "tgt.txt"), "w", encoding="utf-8") as fh:
        fh.write("".join(" ".join(t) + "\n" for t in targets))

    src, tgt = os.path.join(d, "src.txt"), os.path.join(d, "tgt.txt")
    model, align = os.path.join(d, "model.json"), os.path.join(d, "pred.align")
    silver, mixed = os.path.join(d, "silver"), os.path.join(d, "mix")
    t0 = time.perf_counter()
    run(["align-train", "--src", src, "--tgt", tgt, "--out", model])
    run(["align", "--src", src, "--tgt", tgt, "--model", model, "--out", align])
    run(["project", "--task", args.task, "--annotations", gold, "--tgt", tgt,
         "--alignments", align, "--out-dir", silver, "--lang", "xx",
         "--workers", args.workers])
    run(["mix", "--task", args.task, "--gold-train", f"en={gold}",
         "--silver-train", f"xx={silver}", "--seed", args.seed, "--out-dir", mixed])
    print(f"{'total':<12} {time.perf_counter() - t0:6.2f}s")
    print(f"outputs in {os.path.abspath(d)}")


if __name__ == "__main__":
    main()
