"""Tensor archive: the on-disk container for all model parameters.

File grammar (documented here; the save path always emits the canonical form,
so save(load(f)) is byte-identical):

    line 1:            ``tensor-archive v1\n``
    line 2:            ``ntensors <N>\n``
    next N lines:      ``<name> <d1>,<d2>,...,<dk> f32le\n``
    next line:         ``end\n``
    remainder:         concatenated raw little-endian float32 blobs, row-major,
                       in manifest order.

Names are unique, ASCII, no whitespace.  The only supported dtype is f32le.
"""

from __future__ import annotations

import io
from typing import Dict, List, Tuple

import numpy as np

from .errors import IntegrityError

MAGIC = "tensor-archive v1"
DTYPE = "f32le"


class TensorArchive:
    """An ordered, named collection of float32 tensors."""

    def __init__(self):
        self._tensors: Dict[str, np.ndarray] = {}

    def add(self, name: str, array) -> None:
        if name in self._tensors:
            raise IntegrityError(f"duplicate tensor name {name!r}")
        if not name or any(c.isspace() for c in name):
            raise IntegrityError(f"invalid tensor name {name!r}")
        arr = np.ascontiguousarray(np.asarray(array, dtype=np.float32))
        if arr.ndim == 0:
            arr = arr.reshape(1)
        self._tensors[name] = arr

    def get(self, name: str) -> np.ndarray:
        if name not in self._tensors:
            raise IntegrityError(f"tensor {name!r} not found in archive")
        return self._tensors[name]

    def __contains__(self, name: str) -> bool:
        return name in self._tensors

    def names(self) -> List[str]:
        return list(self._tensors)

    def manifest(self) -> List[Tuple[str, Tuple[int, ...], str]]:
        return [(n, t.shape, DTYPE) for n, t in self._tensors.items()]

    # -- serialization ------------------------------------------------------

    def save_bytes(self) -> bytes:
        out = io.BytesIO()
        header = [MAGIC, f"ntensors {len(self._tensors)}"]
        for name, tensor in self._tensors.items():
            shape = ",".join(str(d) for d in tensor.shape)
            header.append(f"{name} {shape} {DTYPE}")
        header.append("end")
        out.write(("\n".join(header) + "\n").encode("utf-8"))
        for tensor in self._tensors.values():
            out.write(tensor.astype("<f4").tobytes())
        return out.getvalue()

    def save(self, path) -> None:
        with open(path, "wb") as f:
            f.write(self.save_bytes())

    @classmethod
    def load_bytes(cls, data: bytes) -> "TensorArchive":
        archive = cls()
        stream = io.BytesIO(data)

        def read_line() -> str:
            raw = stream.readline()
            if not raw.endswith(b"\n"):
                raise IntegrityError("truncated archive header")
            return raw[:-1].decode("utf-8")

        if read_line() != MAGIC:
            raise IntegrityError("not a tensor archive (bad magic line)")
        count_line = read_line()
        if not count_line.startswith("ntensors "):
            raise IntegrityError("missing ntensors line")
        try:
            count = int(count_line.split(" ", 1)[1])
        except ValueError as exc:
            raise IntegrityError(f"bad tensor count: {count_line!r}") from exc
        entries: List[Tuple[str, Tuple[int, ...]]] = []
        for _ in range(count):
            parts = read_line().split(" ")
            if len(parts) != 3 or parts[2] != DTYPE:
                raise IntegrityError(f"malformed manifest line: {' '.join(parts)!r}")
            name, shape_str = parts[0], parts[1]
            try:
                shape = tuple(int(d) for d in shape_str.split(","))
            except ValueError as exc:
                raise IntegrityError(f"bad shape for tensor {name!r}") from exc
            if any(d < 0 for d in shape):
                raise IntegrityError(f"negative dimension for tensor {name!r}")
            entries.append((name, shape))
        if read_line() != "end":
            raise IntegrityError("missing end-of-manifest marker")
        for name, shape in entries:
            nbytes = 4 * int(np.prod(shape)) if shape else 4
            blob = stream.read(nbytes)
            if len(blob) != nbytes:
                raise IntegrityError(
                    f"tensor {name!r}: expected {nbytes} blob bytes, got {len(blob)}"
                )
            arr = np.frombuffer(blob, dtype="<f4").reshape(shape).copy()
            archive.add(name, arr)
        trailing = stream.read()
        if trailing:
            raise IntegrityError(f"{len(trailing)} trailing bytes after last tensor")
        return archive

    @classmethod
    def load(cls, path) -> "TensorArchive":
        with open(path, "rb") as f:
            return cls.load_bytes(f.read())


def load_tensor_archive(path) -> TensorArchive:
    return TensorArchive.load(path)
