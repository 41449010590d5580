"""Versioned binary checkpoints.

Layout: magic ``MTHD`` + 1-byte format version + u32-le length-prefixed
UTF-8 JSON header (model config, both vocabularies, ordered parameter
manifest) + raw little-endian float64 arrays in manifest order. Writes are
atomic (temp file + rename), so a crash never leaves a partial checkpoint
at the target path.
"""

import json
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from ..errors import CheckpointFormatError, UnsupportedVersionError
from ..seq2seq.model import ModelConfig, SeqModel, manifest
from ..numerics import Parameter
from ..textdata import Vocabulary

MAGIC = b"MTHD"
FORMAT_VERSION = 1


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a over raw bytes."""
    h = 0xCBF29CE484222325
    for b in data:
        h ^= b
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def checkpoint_bytes(model: SeqModel, src_vocab: Vocabulary, tgt_vocab: Vocabulary) -> bytes:
    header = {
        "config": model.config.to_dict(),
        "src_vocab": src_vocab.to_dict(),
        "tgt_vocab": tgt_vocab.to_dict(),
        "params": [
            {"id": pid, "shape": list(shape)} for pid, shape in manifest(model.config)
        ],
    }
    head = json.dumps(header, ensure_ascii=False).encode("utf-8")
    parts = [MAGIC, bytes([FORMAT_VERSION]), struct.pack("<I", len(head)), head]
    for pid, _ in manifest(model.config):
        arr = np.ascontiguousarray(model.params[pid].value.data, dtype="<f8")
        parts.append(arr.tobytes())
    return b"".join(parts)


def save_checkpoint(
    model: SeqModel, src_vocab: Vocabulary, tgt_vocab: Vocabulary, path
) -> None:
    path = Path(path)
    data = checkpoint_bytes(model, src_vocab, tgt_vocab)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except OSError as exc:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise CheckpointFormatError(f"cannot write checkpoint {path}: {exc}") from exc


def load_checkpoint(path):
    """(SeqModel, source Vocabulary, target Vocabulary) from a checkpoint."""
    path = Path(path)
    data = path.read_bytes()
    return load_checkpoint_bytes(data, origin=str(path))


def load_checkpoint_bytes(data: bytes, origin: str = "<bytes>"):
    if len(data) < 9 or data[:4] != MAGIC:
        raise CheckpointFormatError(f"{origin}: not a model checkpoint (bad magic)")
    version = data[4]
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(
            f"{origin}: checkpoint format version {version} unsupported "
            f"(expected {FORMAT_VERSION})"
        )
    (head_len,) = struct.unpack("<I", data[5:9])
    head_end = 9 + head_len
    if len(data) < head_end:
        raise CheckpointFormatError(f"{origin}: truncated header")
    try:
        header = json.loads(data[9:head_end].decode("utf-8"))
        config = ModelConfig.from_dict(header["config"])
        src_vocab = Vocabulary.from_dict(header["src_vocab"])
        tgt_vocab = Vocabulary.from_dict(header["tgt_vocab"])
        listed = [(e["id"], tuple(e["shape"])) for e in header["params"]]
    except (KeyError, ValueError, TypeError) as exc:
        raise CheckpointFormatError(f"{origin}: malformed header: {exc}") from exc
    if listed != manifest(config):
        raise CheckpointFormatError(f"{origin}: parameter manifest mismatch")

    params = {}
    offset = head_end
    for pid, shape in listed:
        size = 1
        for s in shape:
            size *= s
        end = offset + 8 * size
        if len(data) < end:
            raise CheckpointFormatError(f"{origin}: truncated parameter {pid}")
        arr = np.frombuffer(data[offset:end], dtype="<f8").reshape(shape).copy()
        params[pid] = Parameter(pid, arr)
        offset = end
    if offset != len(data):
        raise CheckpointFormatError(f"{origin}: trailing bytes after parameters")
    return SeqModel(config, params), src_vocab, tgt_vocab
