"""Versioned binary container for trained parameters.

Layout (all integers little-endian):

    bytes 0-7   magic b"NCSAEBIN"
    u32         format version (currently 1)
    u32         number of named arrays
    per array:
        u16     name length, then that many UTF-8 bytes
        u8      ndim
        u32[]   one dimension size per axis
        f64[]   row-major payload
    u32         CRC32 of every preceding byte

Writers emit arrays in insertion order, so files are byte-deterministic
for identical contents.
"""

from __future__ import annotations

import struct
import zlib

import numpy as np

from .errors import DataFormatError
from .params import AeParams
from .training import StackedNetwork

MAGIC = b"NCSAEBIN"
VERSION = 1


def save_arrays(path, arrays: dict[str, np.ndarray]) -> None:
    parts = [MAGIC, struct.pack("<II", VERSION, len(arrays))]
    for name, arr in arrays.items():
        arr = np.asarray(arr, dtype=np.float64)
        encoded = name.encode("utf-8")
        parts.append(struct.pack("<H", len(encoded)))
        parts.append(encoded)
        parts.append(struct.pack("<B", arr.ndim))
        parts.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
        parts.append(arr.astype("<f8").tobytes(order="C"))
    body = b"".join(parts)
    with open(path, "wb") as f:
        f.write(body)
        f.write(struct.pack("<I", zlib.crc32(body)))


class _Reader:
    def __init__(self, data: bytes, path):
        self.data = data
        self.pos = 0
        self.path = path

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.data):
            raise DataFormatError(f"truncated parameter file {self.path}: reading {what}")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str, what: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))


def load_arrays(path) -> dict[str, np.ndarray]:
    with open(path, "rb") as f:
        data = f.read()
    if len(data) < len(MAGIC) + 12:
        raise DataFormatError(f"truncated parameter file {path}")
    body, stored_crc = data[:-4], struct.unpack("<I", data[-4:])[0]
    if zlib.crc32(body) != stored_crc:
        raise DataFormatError(f"checksum mismatch: {path} is corrupted")

    r = _Reader(body, path)
    if r.take(len(MAGIC), "magic") != MAGIC:
        raise DataFormatError(f"{path} is not a parameter file (bad magic)")
    version, n_arrays = r.unpack("<II", "header")
    if version != VERSION:
        raise DataFormatError(f"unsupported parameter file version {version}")
    arrays: dict[str, np.ndarray] = {}
    for _ in range(n_arrays):
        name_len, = r.unpack("<H", "name length")
        name = r.take(name_len, "name").decode("utf-8")
        ndim, = r.unpack("<B", "ndim")
        shape = r.unpack(f"<{ndim}I", "shape") if ndim else ()
        count = int(np.prod(shape, dtype=np.int64)) if ndim else 1
        payload = r.take(8 * count, f"array {name!r}")
        arrays[name] = np.frombuffer(payload, dtype="<f8").reshape(shape).copy()
    if r.pos != len(body):
        raise DataFormatError(f"trailing bytes in parameter file {path}")
    return arrays


def save_ae_params(path, params: AeParams) -> None:
    save_arrays(path, {"w1": params.w1, "bx": params.bx,
                       "w2": params.w2, "bh": params.bh})


def load_ae_params(path) -> AeParams:
    arrays = load_arrays(path)
    try:
        return AeParams(arrays["w1"], arrays["bx"], arrays["w2"], arrays["bh"])
    except KeyError as e:
        raise DataFormatError(f"{path} is missing array {e.args[0]!r}") from None
    except ValueError as e:
        raise DataFormatError(f"{path} holds inconsistent shapes: {e}") from None


def save_network(path, net: StackedNetwork) -> None:
    arrays: dict[str, np.ndarray] = {}
    for i, p in enumerate(net.encoders):
        arrays[f"enc{i}.w1"] = p.w1
        arrays[f"enc{i}.bx"] = p.bx
        arrays[f"enc{i}.w2"] = p.w2
        arrays[f"enc{i}.bh"] = p.bh
    if net.softmax_w is not None:
        arrays["softmax.w"] = net.softmax_w
        arrays["softmax.b"] = net.softmax_b
    save_arrays(path, arrays)


def load_network(path) -> StackedNetwork:
    arrays = load_arrays(path)
    encoders = []
    i = 0
    while f"enc{i}.w1" in arrays:
        try:
            encoders.append(AeParams(arrays[f"enc{i}.w1"], arrays[f"enc{i}.bx"],
                                     arrays[f"enc{i}.w2"], arrays[f"enc{i}.bh"]))
        except (KeyError, ValueError) as e:
            raise DataFormatError(f"{path}: bad encoder {i}: {e}") from None
        i += 1
    if not encoders:
        raise DataFormatError(f"{path} holds no encoder layers")
    try:
        return StackedNetwork(encoders=encoders,
                              softmax_w=arrays.get("softmax.w"),
                              softmax_b=arrays.get("softmax.b"))
    except ValueError as e:
        raise DataFormatError(f"{path} holds inconsistent shapes: {e}") from None
