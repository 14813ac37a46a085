"""Density images (PGM) and convergence logs (CSV)."""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

IMAGE_FORMATS = ("pgm", "pgm-ascii")
HISTORY_HEADER = ("iter", "obj", "mean_density", "change")


def density_to_gray(rho_filt) -> np.ndarray:
    """8-bit gray levels with solid (1) black and void (0) white."""
    rho = np.asarray(rho_filt, dtype=float)
    if rho.ndim != 2:
        raise ValueError(f"density field must be 2-D (nely, nelx), got shape {rho.shape}")
    return np.clip(np.rint(255.0 * (1.0 - rho)), 0, 255).astype(np.uint8)


def write_density_image(rho_filt, path, format: str = "pgm") -> None:
    """Write one pixel per element; ``pgm`` is binary (P5), ``pgm-ascii`` plain (P2)."""
    gray = density_to_gray(rho_filt)
    h, w = gray.shape
    if format == "pgm":
        Path(path).write_bytes(f"P5\n{w} {h}\n255\n".encode("ascii") + gray.tobytes())
    elif format == "pgm-ascii":
        lines = [f"P2\n{w} {h}\n255"] + [" ".join(map(str, row)) for row in gray]
        Path(path).write_text("\n".join(lines) + "\n")
    else:
        raise ValueError(f"unknown image format {format!r}; expected one of {IMAGE_FORMATS}")


def read_pgm(path) -> np.ndarray:
    """Read a P2 or P5 graymap with maxval 255 into a ``uint8`` array."""
    data = Path(path).read_bytes()
    tokens: list[bytes] = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.index(b"\n", pos)
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    magic, w, h, maxval = tokens[0], int(tokens[1]), int(tokens[2]), int(tokens[3])
    if maxval != 255:
        raise ValueError(f"unsupported PGM maxval {maxval}")
    if magic == b"P5":
        pixels = np.frombuffer(data[pos + 1: pos + 1 + w * h], dtype=np.uint8)
    elif magic == b"P2":
        pixels = np.array(data[pos:].split(), dtype=np.int64).astype(np.uint8)
    else:
        raise ValueError(f"not a PGM file (magic {magic!r})")
    if pixels.size != w * h:
        raise ValueError("truncated PGM data")
    return pixels.reshape(h, w)


def write_history_csv(result, path) -> None:
    """One row per iteration; floats are written with ``repr`` so they parse back exactly."""
    history = result.history if hasattr(result, "history") else result
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(HISTORY_HEADER)
        for row in history:
            it, obj, mean, change = row
            writer.writerow([int(it), repr(float(obj)), repr(float(mean)), repr(float(change))])


def read_history_csv(path) -> list[tuple[int, float, float, float]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != HISTORY_HEADER:
            raise ValueError(f"unexpected history header {header}")
        return [(int(r[0]), float(r[1]), float(r[2]), float(r[3])) for r in reader]
