"""Self-describing, byte-deterministic model checkpoints.

Layout: magic line, 8-byte little-endian header length, a JSON header
(config, vocabulary, lexicon, tensor table, metadata), then raw
little-endian float64 tensor data in header order.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from ..config import RunConfig
from ..encode import Vocabulary
from ..encode.vocab import RESERVED
from ..errors import ConfigError, InputError
from .model import Model

MAGIC = b"RXNSPAN-CHECKPOINT v1\n"
FORMAT_VERSION = 1
# where a run writes its outputs says nothing about the model
RUN_LOCAL_KEYS = ("paths.output_dir", "paths.test_dir")


def checkpoint_bytes(model: Model) -> bytes:
    tensors, blobs, offset = [], [], 0
    for name in sorted(model.params):
        arr = np.ascontiguousarray(model.params[name], dtype="<f8")
        data = arr.tobytes()
        tensors.append({"name": name, "shape": list(arr.shape), "dtype": "<f8",
                        "offset": offset, "nbytes": len(data)})
        blobs.append(data)
        offset += len(data)
    header = {
        "format_version": FORMAT_VERSION,
        "fingerprint": model.fingerprint(),
        "config": {k: v for k, v in model.config.to_dict().items() if k not in RUN_LOCAL_KEYS},
        "vocabulary": model.vocab.itos[len(RESERVED):],
        "lexicon": sorted(model.lexicon.names),
        "context_dim": model.context_dim,
        "masked": model.masked,
        "embedding_checksums": dict(sorted(model.checksums.items())),
        "metadata": model.metadata,
        "tensors": tensors,
    }
    raw = json.dumps(header, sort_keys=True, separators=(",", ":"), allow_nan=False).encode("utf-8")
    return MAGIC + struct.pack("<Q", len(raw)) + raw + b"".join(blobs)


def save_checkpoint(model: Model, path) -> str:
    """Write ``model`` to ``path`` and return the SHA-256 of the file."""
    data = checkpoint_bytes(model)
    Path(path).write_bytes(data)
    return hashlib.sha256(data).hexdigest()


def load_checkpoint(path) -> Model:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read checkpoint {path}: {exc}") from exc
    if not data.startswith(MAGIC):
        raise ConfigError(f"{path.name} is not a checkpoint (bad magic header)")
    pos = len(MAGIC)
    (n,) = struct.unpack("<Q", data[pos:pos + 8])
    pos += 8
    header = json.loads(data[pos:pos + n].decode("utf-8"))
    pos += n
    if header.get("format_version") != FORMAT_VERSION:
        raise ConfigError(f"unsupported checkpoint version {header.get('format_version')}")
    params = {}
    for t in header["tensors"]:
        chunk = data[pos + t["offset"]:pos + t["offset"] + t["nbytes"]]
        params[t["name"]] = np.frombuffer(chunk, dtype=t["dtype"]).reshape(t["shape"]).astype(np.float64)
    config = RunConfig.from_dict(header["config"])
    vocab = Vocabulary(header["vocabulary"])
    model = Model(config, vocab, params, lexicon_names=header["lexicon"],
                  context_dim=header["context_dim"], masked=header["masked"],
                  checksums=header["embedding_checksums"], metadata=header["metadata"])
    if model.fingerprint() != header["fingerprint"]:
        raise ConfigError(f"{path.name}: fingerprint does not match its contents")
    return model
