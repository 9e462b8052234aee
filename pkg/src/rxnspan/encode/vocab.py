"""Vocabulary, embedding tables and precomputed contextual vectors."""

from __future__ import annotations

import hashlib
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ConfigError, InputError, ParseError
from ..segment import CHEM_TOKEN

PAD = "[PAD]"
UNK = "[UNK]"
RESERVED = (PAD, UNK, CHEM_TOKEN)
PAD_ID, UNK_ID, CHEM_ID = 0, 1, 2

_DIGIT = re.compile(r"\d")


def normalize_token(surface: str) -> str:
    if surface in RESERVED:
        return surface
    return _DIGIT.sub("0", surface.lower())


class Vocabulary:
    """Token to row mapping; reserved rows ``[PAD]``, ``[UNK]``, ``[CHEM]`` come first."""

    def __init__(self, tokens=()):
        self.itos = list(RESERVED)
        self.stoi = {t: i for i, t in enumerate(self.itos)}
        for t in tokens:
            t = normalize_token(t)
            if t not in self.stoi:
                self.stoi[t] = len(self.itos)
                self.itos.append(t)

    @classmethod
    def build(cls, surfaces, min_count: int = 1) -> "Vocabulary":
        counts = Counter(normalize_token(s) for s in surfaces)
        kept = sorted((t for t, c in counts.items() if c >= min_count), key=lambda t: (-counts[t], t))
        return cls(kept)

    def __len__(self):
        return len(self.itos)

    def __contains__(self, surface):
        return normalize_token(surface) in self.stoi

    def index(self, surface: str) -> int:
        return self.stoi.get(normalize_token(surface), UNK_ID)

    def indices(self, surfaces) -> np.ndarray:
        return np.fromiter((self.index(s) for s in surfaces), dtype=np.int64)

    def digest(self) -> str:
        return hashlib.sha256("\n".join(self.itos).encode("utf-8")).hexdigest()


@dataclass
class EmbeddingTable:
    """Rows of ``matrix`` are indexed by ``tokens`` (as read from a file).

    Tables loaded from disk hold exactly the file's rows; the model merges
    them into its own vocabulary, which always carries the reserved rows.
    """

    tokens: list[str]
    matrix: np.ndarray
    trainable: bool = True
    checksum: str = ""

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]


@dataclass
class ContextualStore:
    """Precomputed per-token vectors keyed by ``(doc_id, unit, token)``."""

    dim: int
    vectors: dict = field(default_factory=dict)
    checksum: str = ""
    misses: int = 0

    def lookup(self, doc_id: str, unit: int, token: int) -> np.ndarray:
        vec = self.vectors.get((doc_id, unit, token))
        if vec is None:
            self.misses += 1
            return np.zeros(self.dim)
        return vec

    def unit_matrix(self, doc_id: str, unit: int, n_tokens: int) -> np.ndarray:
        out = np.zeros((n_tokens, self.dim))
        for k in range(n_tokens):
            out[k] = self.lookup(doc_id, unit, k)
        return out


def load_embedding_file(path, kind: str = "word", expected_dim: int | None = None):
    """Read a text embedding file.

    First line is ``<rows> <dim>``; each following line is a key and ``dim``
    floats. For ``kind="contextual"`` the key is ``<doc_id>:<unit>:<tok>``.
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    checksum = hashlib.sha256(raw).hexdigest()
    try:
        lines = raw.decode("utf-8").splitlines()
    except UnicodeDecodeError as exc:
        raise InputError(f"{path} is not valid UTF-8") from exc
    if not lines:
        raise ParseError("missing header", line=1, source=path.name)
    header = lines[0].split()
    if len(header) != 2 or not all(h.isdigit() for h in header):
        raise ParseError("header must be '<rows> <dim>'", line=1, source=path.name)
    n_rows, dim = int(header[0]), int(header[1])
    if expected_dim is not None and dim != expected_dim:
        raise ConfigError(f"{path.name}: dimension {dim} does not match configured {expected_dim}")

    keys, rows = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.rstrip().split(" ")
        if len(fields) != dim + 1:
            raise ParseError(f"expected {dim} values, got {len(fields) - 1}", line=lineno, source=path.name)
        try:
            rows.append([float(x) for x in fields[1:]])
        except ValueError:
            raise ParseError("non-numeric value", line=lineno, source=path.name) from None
        keys.append(fields[0])
    if len(rows) != n_rows:
        raise ParseError(f"header declares {n_rows} rows, found {len(rows)}", source=path.name)
    matrix = np.array(rows, dtype=np.float64).reshape(n_rows, dim)

    if kind == "word":
        return EmbeddingTable(keys, matrix, trainable=True, checksum=checksum)
    if kind == "contextual":
        store = ContextualStore(dim, checksum=checksum)
        for lineno, (key, vec) in enumerate(zip(keys, matrix), start=2):
            parts = key.rsplit(":", 2)
            if len(parts) != 3 or not parts[1].isdigit() or not parts[2].isdigit():
                raise ParseError(f"bad contextual key {key!r}", line=lineno, source=path.name)
            store.vectors[(parts[0], int(parts[1]), int(parts[2]))] = vec
        return store
    raise ValueError(f"unknown embedding file kind {kind!r}")
