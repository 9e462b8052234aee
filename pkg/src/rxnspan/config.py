"""Flat ``section.key = value`` run configuration."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError


@dataclass
class PathsConfig:
    corpus_dir: str = ""
    test_dir: str = ""
    lexicon: str = ""
    word_embeddings: str = ""
    contextual_embeddings: str = ""
    output_dir: str = "run"


@dataclass
class RunSection:
    seed: int = 13


@dataclass
class CorpusConfig:
    # comma-separated BRAT label accept-set; empty accepts every label
    labels: str = ""
    validation_fraction: float = 0.2


@dataclass
class SegmentConfig:
    paragraph_mode: str = "newline"


@dataclass
class LabelingConfig:
    granularity: str = "paragraph"
    repair: str = "b"


@dataclass
class ChemmaskConfig:
    enabled: bool = False
    patterns_version: str = "1"


@dataclass
class EncodeConfig:
    word_dim: int = 32
    feature_dim: int = 4
    paragraph_mode: str = "max"
    rnn_cell: str = "tanh"
    hidden_dim: int = 32
    min_count: int = 1
    train_embeddings: bool = True


@dataclass
class DecodeConfig:
    kind: str = "crf"
    window: int = 16
    # auto: contextualise for the CRF decoder only
    contextualize: str = "auto"
    context_hidden_dim: int = 32
    learning_rate: float = 0.05
    clip_norm: float = 5.0
    batch_size: int = 1
    epochs: int = 200
    patience: int = 10


@dataclass
class EvalConfig:
    fuzzy_tolerance: int = 1


_CHOICES = {
    "segment.paragraph_mode": ("newline", "blankline"),
    "labeling.granularity": ("paragraph", "sentence"),
    "labeling.repair": ("b", "o"),
    "encode.paragraph_mode": ("mean", "max", "birnn"),
    "encode.rnn_cell": ("tanh", "lstm"),
    "decode.kind": ("linear", "trigram", "crf"),
    "decode.contextualize": ("auto", "true", "false"),
    "chemmask.patterns_version": ("1",),
}


@dataclass
class RunConfig:
    paths: PathsConfig = field(default_factory=PathsConfig)
    run: RunSection = field(default_factory=RunSection)
    corpus: CorpusConfig = field(default_factory=CorpusConfig)
    segment: SegmentConfig = field(default_factory=SegmentConfig)
    labeling: LabelingConfig = field(default_factory=LabelingConfig)
    chemmask: ChemmaskConfig = field(default_factory=ChemmaskConfig)
    encode: EncodeConfig = field(default_factory=EncodeConfig)
    decode: DecodeConfig = field(default_factory=DecodeConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)

    @property
    def seed(self) -> int:
        return self.run.seed

    @property
    def contextualize(self) -> bool:
        mode = self.decode.contextualize
        return self.decode.kind == "crf" if mode == "auto" else mode == "true"

    @property
    def label_set(self):
        labels = [x.strip() for x in self.corpus.labels.split(",") if x.strip()]
        return frozenset(labels) or None

    def set(self, key: str, value) -> None:
        section, _, name = key.partition(".")
        sec = getattr(self, section, None) if section in _section_names() else None
        if sec is None or not name or name not in {f.name for f in dataclasses.fields(sec)}:
            raise ConfigError(f"unknown config key {key!r}")
        ftype = {f.name: f.type for f in dataclasses.fields(sec)}[name]
        setattr(sec, name, _coerce(key, value, ftype))

    def validate(self) -> "RunConfig":
        for key, allowed in _CHOICES.items():
            if str(self.get(key)) not in allowed:
                raise ConfigError(f"{key} must be one of {', '.join(allowed)}; got {self.get(key)!r}")
        if not 0 <= self.corpus.validation_fraction < 1:
            raise ConfigError("corpus.validation_fraction must be in [0, 1)")
        for key in ("encode.word_dim", "encode.hidden_dim", "decode.window", "decode.batch_size",
                    "decode.context_hidden_dim", "decode.epochs"):
            if self.get(key) < 1:
                raise ConfigError(f"{key} must be positive")
        for key in ("encode.feature_dim", "decode.patience", "eval.fuzzy_tolerance", "encode.min_count"):
            if self.get(key) < 0:
                raise ConfigError(f"{key} must be non-negative")
        if self.decode.learning_rate <= 0 or self.decode.clip_norm <= 0:
            raise ConfigError("decode.learning_rate and decode.clip_norm must be positive")
        return self

    def get(self, key: str):
        section, _, name = key.partition(".")
        return getattr(getattr(self, section), name)

    def items(self):
        for sname in _section_names():
            sec = getattr(self, sname)
            for f in dataclasses.fields(sec):
                yield f"{sname}.{f.name}", getattr(sec, f.name)

    def to_text(self) -> str:
        lines = []
        for key, value in self.items():
            if isinstance(value, bool):
                value = str(value).lower()
            lines.append(f"{key} = {value}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return dict(self.items())

    @classmethod
    def from_dict(cls, values: dict) -> "RunConfig":
        cfg = cls()
        for key, value in values.items():
            cfg.set(key, value)
        return cfg.validate()


def _section_names():
    return [f.name for f in dataclasses.fields(RunConfig)]


def _coerce(key, value, ftype):
    if not isinstance(value, str):
        return value
    value = value.strip()
    try:
        if ftype in ("bool", bool):
            low = value.lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError(value)
        if ftype in ("int", int):
            return int(value)
        if ftype in ("float", float):
            return float(value)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {value!r} as {ftype}") from None
    return value


def parse_config(text: str, source=None) -> RunConfig:
    cfg = RunConfig()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            where = f"{source}:{lineno}" if source else f"line {lineno}"
            raise ConfigError(f"{where}: expected 'section.key = value'")
        cfg.set(key.strip(), value)
    return cfg.validate()


def load_config(path, overrides=None) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    cfg = parse_config(text, source=path.name)
    for key, value in (overrides or {}).items():
        cfg.set(key, value)
    return cfg.validate()
