"""Minimal PFM / PGM / PPM readers and writers.

PFM is written little-endian (scale -1.0) with rows bottom-to-top per the
format convention; grayscale uses the ``Pf`` header, 3-channel ``PF``.
PFM has no NaN/Inf contract, so non-finite values must be encoded by the
caller (the render module writes 0.0 plus a sibling validity mask).

PGM (P5) and PPM (P6) are binary 8-bit with maxval 255, rows top-to-bottom.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import IoError


def write_pfm(path, data: np.ndarray) -> None:
    data = np.asarray(data, dtype=np.float32)
    if data.ndim == 2:
        header = b"Pf"
    elif data.ndim == 3 and data.shape[2] == 3:
        header = b"PF"
    else:
        raise IoError(f"PFM supports HxW or HxWx3, got {data.shape}")
    if not np.all(np.isfinite(data)):
        raise IoError("PFM payload must be finite; encode sentinels first")
    h, w = data.shape[:2]
    try:
        with open(path, "wb") as f:
            f.write(header + b"\n")
            f.write(f"{w} {h}\n".encode("ascii"))
            f.write(b"-1.0\n")
            f.write(np.ascontiguousarray(data[::-1], dtype="<f4").tobytes())
    except OSError as e:
        raise IoError(str(e)) from e


def read_pfm(path) -> np.ndarray:
    try:
        raw = Path(path).read_bytes()
    except OSError as e:
        raise IoError(str(e)) from e
    try:
        magic, rest = raw.split(b"\n", 1)
        dims, rest = rest.split(b"\n", 1)
        scale_s, payload = rest.split(b"\n", 1)
        w, h = (int(x) for x in dims.split())
        scale = float(scale_s)
    except ValueError as e:
        raise IoError(f"malformed PFM header in {path}") from e
    channels = 3 if magic == b"PF" else 1
    endian = "<" if scale < 0 else ">"
    count = w * h * channels
    data = np.frombuffer(payload[: 4 * count], dtype=f"{endian}f4")
    if data.size != count:
        raise IoError(f"truncated PFM payload in {path}")
    shape = (h, w) if channels == 1 else (h, w, 3)
    return np.ascontiguousarray(data.reshape(shape)[::-1]).astype(np.float32)


def _write_pnm(path, data: np.ndarray, magic: bytes) -> None:
    data = np.asarray(data)
    if data.dtype != np.uint8:
        if data.min() < 0 or data.max() > 255:
            raise IoError(f"values outside [0, 255] cannot be stored in {magic.decode()}")
        data = data.astype(np.uint8)
    h, w = data.shape[:2]
    try:
        with open(path, "wb") as f:
            f.write(magic + b"\n" + f"{w} {h}\n255\n".encode("ascii"))
            f.write(np.ascontiguousarray(data).tobytes())
    except OSError as e:
        raise IoError(str(e)) from e


def write_pgm(path, data: np.ndarray) -> None:
    if np.asarray(data).ndim != 2:
        raise IoError("PGM stores a single channel")
    _write_pnm(path, data, b"P5")


def write_ppm(path, data: np.ndarray) -> None:
    d = np.asarray(data)
    if d.ndim != 3 or d.shape[2] != 3:
        raise IoError("PPM stores HxWx3")
    _write_pnm(path, data, b"P6")


def _read_pnm(path, magic: bytes):
    try:
        raw = Path(path).read_bytes()
    except OSError as e:
        raise IoError(str(e)) from e
    # header tokens may be separated by any whitespace; comments start with '#'
    tokens: list[bytes] = []
    i = 0
    while len(tokens) < 4 and i < len(raw):
        while i < len(raw) and raw[i : i + 1].isspace():
            i += 1
        if raw[i : i + 1] == b"#":
            while i < len(raw) and raw[i : i + 1] != b"\n":
                i += 1
            continue
        j = i
        while j < len(raw) and not raw[j : j + 1].isspace():
            j += 1
        tokens.append(raw[i:j])
        i = j
    if len(tokens) < 4 or tokens[0] != magic:
        raise IoError(f"not a {magic.decode()} file: {path}")
    w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    if maxval != 255:
        raise IoError("only maxval 255 supported")
    payload = raw[i + 1 :]
    return w, h, payload


def read_pgm(path) -> np.ndarray:
    w, h, payload = _read_pnm(path, b"P5")
    data = np.frombuffer(payload[: w * h], dtype=np.uint8)
    if data.size != w * h:
        raise IoError(f"truncated PGM payload in {path}")
    return data.reshape(h, w).copy()


def read_ppm(path) -> np.ndarray:
    w, h, payload = _read_pnm(path, b"P6")
    data = np.frombuffer(payload[: 3 * w * h], dtype=np.uint8)
    if data.size != 3 * w * h:
        raise IoError(f"truncated PPM payload in {path}")
    return data.reshape(h, w, 3).copy()
