"""On-disk cache for Gram factorizations.

File layout (little endian)::

    b"PBGRAM01"                magic
    uint64                     header length H
    H bytes                    UTF-8 JSON header (key, arrays, metadata)
    raw array bytes            row-major, arrays sorted by name

A file whose header key differs from the requested key is treated as a
miss and overwritten. Writers serialize through an advisory lock file and
publish with an atomic rename, so readers never see partial files.
"""

from __future__ import annotations

import json
import logging
import os
import struct
from pathlib import Path

import numpy as np
from filelock import FileLock

log = logging.getLogger(__name__)

MAGIC = b"PBGRAM01"
ENV_VAR = "POLYBERGMAN_CACHE_DIR"


def default_cache_dir() -> Path:
    env = os.environ.get(ENV_VAR)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "polybergman"


class GramCache:
    def __init__(self, directory: str | os.PathLike | None = None):
        self.directory = Path(directory) if directory is not None else default_cache_dir()
        self.hits = 0
        self.misses = 0

    def _path(self, key: str) -> Path:
        return self.directory / f"{key[:32]}.gram"

    @property
    def lock_path(self) -> Path:
        return self.directory / ".lock"

    def load(self, key: str):
        path = self._path(key)
        if not path.exists():
            self.misses += 1
            return None
        try:
            arrays, header = read_file(path)
        except (OSError, ValueError) as exc:
            log.warning("unreadable cache file %s (%s); rebuilding", path, exc)
            self.misses += 1
            return None
        if header.get("key") != key:
            log.info("cache key mismatch for %s; rebuilding", path.name)
            self.misses += 1
            return None
        self.hits += 1
        return arrays, header["meta"]

    def store(self, key: str, arrays: dict[str, np.ndarray], meta: dict):
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self._path(key)
        with FileLock(str(self.lock_path)):
            tmp = path.with_suffix(".tmp")
            write_file(tmp, key, arrays, meta)
            os.replace(tmp, path)

    def entries(self) -> list[dict]:
        out = []
        if not self.directory.exists():
            return out
        for p in sorted(self.directory.glob("*.gram")):
            try:
                _, header = read_file(p, header_only=True)
                out.append({"file": p.name, "bytes": p.stat().st_size, "key": header.get("key"),
                            "arrays": {k: v["shape"] for k, v in header["arrays"].items()}})
            except (OSError, ValueError) as exc:
                out.append({"file": p.name, "error": str(exc)})
        return out

    def clear(self) -> int:
        if not self.directory.exists():
            return 0
        n = 0
        with FileLock(str(self.lock_path)):
            for p in self.directory.glob("*.gram"):
                p.unlink()
                n += 1
        return n


def write_file(path: Path, key: str, arrays: dict[str, np.ndarray], meta: dict):
    spec = {}
    blobs = []
    # blobs follow the header's (sorted) array order
    for name in sorted(arrays):
        arr = np.ascontiguousarray(arrays[name])
        dt = arr.dtype.newbyteorder("<") if arr.dtype.byteorder == ">" else arr.dtype
        arr = arr.astype(dt, copy=False)
        spec[name] = {"dtype": arr.dtype.str, "shape": list(arr.shape)}
        blobs.append(arr.tobytes(order="C"))
    header = json.dumps({"key": key, "arrays": spec, "meta": meta}, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(header)))
        fh.write(header)
        for b in blobs:
            fh.write(b)


def read_file(path: Path, header_only: bool = False):
    with open(path, "rb") as fh:
        if fh.read(len(MAGIC)) != MAGIC:
            raise ValueError("bad magic")
        (hlen,) = struct.unpack("<Q", fh.read(8))
        header = json.loads(fh.read(hlen).decode())
        if header_only:
            return None, header
        arrays = {}
        for name, s in header["arrays"].items():
            dt = np.dtype(s["dtype"])
            count = int(np.prod(s["shape"])) if s["shape"] else 1
            buf = fh.read(count * dt.itemsize)
            if len(buf) != count * dt.itemsize:
                raise ValueError("truncated cache file")
            arrays[name] = np.frombuffer(buf, dtype=dt).reshape(s["shape"]).copy()
    return arrays, header
