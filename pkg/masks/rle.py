"""Uncompressed column-major run-length encoding for binary masks.

Text form, one mask per file::

    <width> <height>
    <count> <count> ...

Counts alternate background/foreground runs and always start with a (possibly
zero-length) background run; pixels are read column by column.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from errors import ContractError

from .paste import MaskArray


@dataclass(kw_only=True, frozen=True)
class RunLengthMask:
    width: int
    height: int
    counts: tuple[int, ...]


def encode_rle(mask: MaskArray) -> RunLengthMask:
    bits = np.asarray(mask, dtype=bool)
    height, width = bits.shape
    pixels = bits.flatten(order="F").astype(np.int8)
    changes = np.flatnonzero(pixels[1:] != pixels[:-1]) + 1
    bounds = np.concatenate([[0], changes, [pixels.size]])
    counts = np.diff(bounds).tolist()
    if pixels.size and pixels[0]:
        counts.insert(0, 0)
    if not pixels.size:
        counts = [0]
    return RunLengthMask(width=width, height=height, counts=tuple(int(c) for c in counts))


def decode_rle(rle: RunLengthMask) -> MaskArray:
    total = rle.width * rle.height
    if sum(rle.counts) != total:
        raise ContractError(f"RLE counts sum to {sum(rle.counts)}, expected {total}")
    if any(c < 0 for c in rle.counts):
        raise ContractError("RLE counts must be non-negative")
    values = np.arange(len(rle.counts)) % 2
    flat = np.repeat(values.astype(bool), rle.counts)
    return flat.reshape((rle.height, rle.width), order="F")


def dumps_rle(rle: RunLengthMask) -> str:
    return f"{rle.width} {rle.height}\n{' '.join(str(c) for c in rle.counts)}\n"


def loads_rle(text: str) -> RunLengthMask:
    lines = text.splitlines()
    if len(lines) < 2:
        raise ContractError("RLE text needs a header line and a counts line")
    try:
        width, height = (int(v) for v in lines[0].split())
        counts = tuple(int(v) for v in lines[1].split())
    except ValueError as exc:
        raise ContractError(f"Malformed RLE text: {exc}") from exc
    rle = RunLengthMask(width=width, height=height, counts=counts)
    decode_rle(rle)
    return rle


def write_rle(path: str | Path, mask: MaskArray) -> None:
    Path(path).write_text(dumps_rle(encode_rle(mask)), encoding="utf-8")


def read_rle(path: str | Path) -> MaskArray:
    return decode_rle(loads_rle(Path(path).read_text(encoding="utf-8")))
