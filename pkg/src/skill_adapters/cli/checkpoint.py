"""Binary parameter checkpoints.

Layout (little-endian)::

    "ADHT" | u32 version | 32-byte config digest | u8 scope | u32 manifest length
    | UTF-8 JSON manifest [{name, shape, offset}] | float32 payload | u32 CRC-32

Adapter-scoped files carry no backbone weights; the digest binds them to
the backbone configuration they were trained on and to the adapter layout
(which slots hold which kind of adapter, and whether a head is attached)
of the model they were written from.
"""

import hashlib
import json
import logging
import os
import struct
import tempfile
import zlib
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from skill_adapters.adapters.attach import position_slot
from skill_adapters.adapters.modules import HierAdapter
from skill_adapters.config.config import config_digest
from skill_adapters.encoder.model import RetrievalModel
from skill_adapters.errors import (
    CheckpointIntegrityError,
    CheckpointMismatchError,
    ScopeError,
)
from skill_adapters.tensorcore.tensor import Parameter

logger = logging.getLogger(__name__)

MAGIC = b"ADHT"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sI32sBI")
_CRC = struct.Struct("<I")
_PAYLOAD_DTYPE = np.dtype("<f4")


class CheckpointScope(Enum):
    FULL = 0
    ADAPTERS_ONLY = 1
    SUB_ADAPTERS_ONLY = 2


@dataclass(frozen=True)
class ManifestEntry:
    name: str
    shape: tuple[int, ...]
    offset: int

    @property
    def nbytes(self) -> int:
        return int(np.prod(self.shape, dtype=np.int64)) * _PAYLOAD_DTYPE.itemsize


@dataclass(frozen=True)
class CheckpointHeader:
    version: int
    digest: bytes
    scope: CheckpointScope
    entries: list[ManifestEntry]


def adapter_layout(model: RetrievalModel) -> str:
    """One character per adapter position (`-` empty, `v` vanilla, `h` hierarchical)."""
    marks = []
    for position in range(model.n_positions()):
        block, kind = position_slot(model, position)
        slot = block.get_slot(kind)
        if slot is None:
            marks.append("-")
        else:
            marks.append("h" if isinstance(slot, HierAdapter) else "v")
    head = "+head" if model.head is not None else ""
    return "".join(marks) + head


def model_digest(model: RetrievalModel) -> bytes:
    layout = adapter_layout(model).encode("utf-8")
    return hashlib.sha256(config_digest(model.config) + layout).digest()


def scoped_parameters(model: RetrievalModel, scope: CheckpointScope) -> list[Parameter]:
    match scope:
        case CheckpointScope.FULL:
            return model.parameters()
        case CheckpointScope.ADAPTERS_ONLY:
            return model.adapter_parameters()
        case CheckpointScope.SUB_ADAPTERS_ONLY:
            return model.sub_adapter_parameters()


def encode_checkpoint(model: RetrievalModel, scope: CheckpointScope) -> bytes:
    params = scoped_parameters(model, scope)
    if not params:
        raise ScopeError(f"{model.name} has no parameters in scope {scope.name.lower()}")
    entries, chunks, offset = [], [], 0
    for p in params:
        chunk = np.ascontiguousarray(p.data, dtype=_PAYLOAD_DTYPE).tobytes()
        entries.append({"name": p.name, "shape": list(p.shape), "offset": offset})
        chunks.append(chunk)
        offset += len(chunk)
    manifest = json.dumps(entries, separators=(",", ":")).encode("utf-8")
    payload = b"".join(chunks)
    header = _HEADER.pack(
        MAGIC, FORMAT_VERSION, model_digest(model), scope.value, len(manifest)
    )
    return header + manifest + payload + _CRC.pack(zlib.crc32(payload))


def save_checkpoint(model: RetrievalModel, scope: CheckpointScope, path: Path) -> int:
    """Writes the scoped parameters atomically; returns the file size."""
    blob = encode_checkpoint(model, scope)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(blob)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    logger.info(f"Saved {scope.name.lower()} checkpoint {path} ({len(blob)} bytes)")
    return len(blob)


def decode_checkpoint(blob: bytes) -> tuple[CheckpointHeader, bytes]:
    if len(blob) < _HEADER.size + _CRC.size:
        raise CheckpointIntegrityError("checkpoint is truncated")
    magic, version, digest, scope_code, manifest_len = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise CheckpointIntegrityError(f"bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise CheckpointIntegrityError(f"unsupported checkpoint version {version}")
    try:
        scope = CheckpointScope(scope_code)
    except ValueError as e:
        raise CheckpointIntegrityError(f"unknown scope code {scope_code}") from e
    manifest_end = _HEADER.size + manifest_len
    if manifest_end > len(blob) - _CRC.size:
        raise CheckpointIntegrityError("manifest runs past the end of the file")
    payload = blob[manifest_end : len(blob) - _CRC.size]
    (crc,) = _CRC.unpack_from(blob, len(blob) - _CRC.size)
    if zlib.crc32(payload) != crc:
        raise CheckpointIntegrityError("payload checksum mismatch")
    try:
        raw = json.loads(blob[_HEADER.size : manifest_end].decode("utf-8"))
        entries = [
            ManifestEntry(name=e["name"], shape=tuple(e["shape"]), offset=e["offset"])
            for e in raw
        ]
    except (UnicodeDecodeError, json.JSONDecodeError, KeyError, TypeError) as e:
        raise CheckpointIntegrityError(f"unreadable manifest: {e}") from e
    for entry in entries:
        if entry.offset + entry.nbytes > len(payload):
            raise CheckpointIntegrityError(f"{entry.name} runs past the payload")
    return CheckpointHeader(version, digest, scope, entries), payload


def load_checkpoint(model: RetrievalModel, path: Path) -> CheckpointHeader:
    """Copies the stored parameters into `model`, which must already have their slots."""
    try:
        blob = path.read_bytes()
    except OSError as e:
        raise OSError(f"cannot read checkpoint {path}: {e}") from e
    header, payload = decode_checkpoint(blob)
    if header.digest != model_digest(model):
        raise CheckpointMismatchError(
            f"{path} was written for a different encoder configuration "
            f"or adapter layout (model layout {adapter_layout(model)})"
        )
    params = model.named_parameters()
    for entry in header.entries:
        p = params.get(entry.name)
        if p is None:
            raise CheckpointMismatchError(f"{path}: model has no parameter {entry.name}")
        if p.shape != entry.shape:
            raise CheckpointMismatchError(
                f"{path}: {entry.name} has shape {list(entry.shape)}, "
                f"model expects {list(p.shape)}"
            )
    for entry in header.entries:
        values = np.frombuffer(
            payload, dtype=_PAYLOAD_DTYPE, count=int(np.prod(entry.shape, dtype=np.int64)),
            offset=entry.offset,
        )
        params[entry.name].assign(values.reshape(entry.shape))
    logger.debug(f"Loaded {len(header.entries)} parameters from {path}")
    return header
