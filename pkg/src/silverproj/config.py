"""Pipeline configuration: a JSON file merged with command-line overrides."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields, replace

from .align import HEURISTICS
from .errors import ValidationError
from .project import ProjectionPolicy
from .silver import TASKS, DevPolicy, MixMode


@dataclass
class PipelineConfig:
    task: str | None = None
    lang: str = "tgt"
    # inputs
    src: str | None = None
    tgt: str | None = None
    model: str | None = None
    annotations: str | None = None
    alignments: str | None = None
    predictions: str | None = None
    pred: str | None = None
    gold: str | None = None
    extra_src: str | None = None
    extra_tgt: str | None = None
    input: dict[str, str] = field(default_factory=dict)
    gold_train: dict[str, str] = field(default_factory=dict)
    gold_dev: dict[str, str] = field(default_factory=dict)
    silver_train: dict[str, str] = field(default_factory=dict)
    silver_dev: dict[str, str] = field(default_factory=dict)
    # outputs
    out: str | None = None
    out_dir: str | None = None
    # aligner
    iterations: int = 5
    smoothing: float = 0.0
    null_prob: float | None = None
    heuristic: str = "grow-diag-final-and"
    average: str = "micro"
    # projection policy overrides
    ratio_limit: float = 5.0
    strict_ratio: bool = True
    pos_fill: str = "X"
    # mixing
    seed: int = 0
    mode: str = "multilingual"
    dev_policy: str = "source_only"
    workers: int = 1

    def policy(self) -> ProjectionPolicy:
        return ProjectionPolicy(ratio_limit=self.ratio_limit, strict_ratio=self.strict_ratio,
                                pos_fill=self.pos_fill)


PATH_KEYS = ("src", "tgt", "model", "annotations", "alignments", "predictions", "pred", "gold",
             "extra_src", "extra_tgt")
PATH_MAPS = ("input", "gold_train", "gold_dev", "silver_train", "silver_dev")

REQUIRED = {
    "align-train": ("src", "tgt", "out"),
    "align": ("src", "tgt", "out"),
    "project": ("task", "annotations", "tgt", "alignments", "out_dir"),
    "selftrain": ("task", "tgt", "predictions", "out_dir"),
    "eval": ("task", "pred", "gold"),
    "mix": ("task", "gold_train", "out_dir"),
    "stats": ("task", "input"),
}


def parse_lang_paths(items) -> dict[str, str]:
    """Accept ``{"ar": path}``, ``["ar=path", ...]`` or a bare path (language ``xx``)."""
    if isinstance(items, dict):
        return {str(k): str(v) for k, v in items.items()}
    if isinstance(items, str):
        items = [items]
    out = {}
    for item in items:
        lang, sep, path = str(item).partition("=")
        if not sep:
            lang, path = "xx", lang
        if lang in out:
            raise ValidationError(f"language {lang!r} given twice")
        out[lang] = path
    return out


def load_config_file(path: str) -> dict:
    with open(path, encoding="utf-8") as f:
        try:
            raw = json.load(f)
        except json.JSONDecodeError as e:
            raise ValidationError(f"config {path}: invalid JSON: {e.msg}") from None
    if not isinstance(raw, dict):
        raise ValidationError(f"config {path}: top level must be an object")
    known = {f.name for f in fields(PipelineConfig)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ValidationError(f"config {path}: unknown keys {unknown}")
    base = os.path.dirname(os.path.abspath(path))

    def rel(p):
        return p if p is None or os.path.isabs(p) else os.path.join(base, p)

    for key in PATH_KEYS + ("out", "out_dir"):
        if key in raw:
            raw[key] = rel(raw[key])
    for key in PATH_MAPS:
        if key in raw:
            raw[key] = {k: rel(v) for k, v in parse_lang_paths(raw[key]).items()}
    return raw


def build_config(command: str, file_values: dict, overrides: dict) -> PipelineConfig:
    """Merge config-file values with flag overrides (flags win) and validate."""
    values = dict(file_values)
    values.update({k: v for k, v in overrides.items() if v is not None})
    for key in PATH_MAPS:
        if key in values:
            values[key] = parse_lang_paths(values[key])
    try:
        cfg = replace(PipelineConfig(), **values)
    except TypeError as e:
        raise ValidationError(str(e)) from None
    validate(command, cfg)
    return cfg


def validate(command: str, cfg: PipelineConfig) -> None:
    for key in REQUIRED[command]:
        if not getattr(cfg, key):
            raise ValidationError(f"{command}: missing required setting {key!r}")
    if cfg.task is not None:
        allowed = TASKS + ("align",) if command == "eval" else TASKS
        if cfg.task not in allowed:
            raise ValidationError(f"unknown task {cfg.task!r}; choose from {allowed}")
    if cfg.heuristic not in HEURISTICS:
        raise ValidationError(f"unknown heuristic {cfg.heuristic!r}")
    if cfg.iterations < 1:
        raise ValidationError("iterations must be >= 1")
    if cfg.smoothing < 0:
        raise ValidationError("smoothing must be >= 0")
    if cfg.workers < 1:
        raise ValidationError("workers must be >= 1")
    if cfg.average not in ("micro", "macro"):
        raise ValidationError(f"unknown averaging {cfg.average!r}")
    if (cfg.extra_src is None) != (cfg.extra_tgt is None):
        raise ValidationError("extra_src and extra_tgt must be given together")
    try:
        MixMode(cfg.mode)
        DevPolicy(cfg.dev_policy)
    except ValueError as e:
        raise ValidationError(str(e)) from None
    cfg.policy()
    missing = [getattr(cfg, k) for k in PATH_KEYS if getattr(cfg, k) is not None]
    for key in PATH_MAPS:
        missing += list(getattr(cfg, key).values())
    for path in missing:
        if not os.path.exists(path):
            raise FileNotFoundError(f"input path does not exist: {path}")
