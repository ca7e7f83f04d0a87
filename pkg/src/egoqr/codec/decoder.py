"""Module-matrix decoding: format recovery, unmasking, RS repair, segments."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import layout, tables
from .rs import UncorrectableBlockError, rs_decode_block


class QrDecodeError(ValueError):
    """Base class for matrix-level decode failures."""


class FormatInfoError(QrDecodeError):
    """Neither format-info copy decodes within the BCH error budget."""


class SegmentError(QrDecodeError):
    """Bitstream does not parse as a valid segment sequence."""


class UnsupportedFeatureError(SegmentError):
    """Recognized but unsupported segment kind (ECI, Kanji, structured append, FNC1)."""


@dataclass(frozen=True)
class BitMatrix:
    """Square boolean module grid, True = dark."""

    side: int
    bits: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.bits, dtype=bool).reshape(self.side, self.side)
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "bits", arr)

    @classmethod
    def from_grid(cls, grid: np.ndarray) -> "BitMatrix":
        grid = np.asarray(grid, dtype=bool)
        if grid.ndim != 2 or grid.shape[0] != grid.shape[1]:
            raise ValueError("module grid must be square")
        return cls(side=int(grid.shape[0]), bits=grid)


@dataclass(frozen=True)
class DecodedPayload:
    data: bytes
    mode: str
    version: int
    ec_level: str
    mask_id: int
    corrected_errors: int


def _read_format(grid: np.ndarray) -> tuple[str, int]:
    """Best (ec_level, mask_id) across both format copies by BCH distance."""
    side = grid.shape[0]
    best: tuple[int, str, int] | None = None
    for positions in (layout.format_positions_copy1(side), layout.format_positions_copy2(side)):
        word = 0
        for bit, (x, y) in enumerate(positions):
            if grid[y, x]:
                word |= 1 << bit
        for (level, mask_id), codeword in tables.FORMAT_CODEWORDS.items():
            dist = int(word ^ codeword).bit_count()
            if best is None or dist < best[0]:
                best = (dist, level, mask_id)
    assert best is not None
    if best[0] > 3:
        raise FormatInfoError(f"format info beyond repair (best distance {best[0]})")
    return best[1], best[2]


def _deinterleave(stream: np.ndarray, version: int, ec_level: str) -> list[np.ndarray]:
    """Undo block interleaving; returns per-block full codewords (data + parity)."""
    structure = tables.block_structure(version, ec_level)
    data_lens = [d for d, _ in structure]
    parity_len = structure[0][1]
    blocks: list[list[int]] = [[] for _ in structure]
    pos = 0
    for i in range(max(data_lens)):
        for b, dlen in enumerate(data_lens):
            if i < dlen:
                blocks[b].append(int(stream[pos]))
                pos += 1
    for _ in range(parity_len):
        for b in range(len(structure)):
            blocks[b].append(int(stream[pos]))
            pos += 1
    return [np.array(b, dtype=np.int64) for b in blocks]


class _BitReader:
    def __init__(self, data: bytes):
        self._bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
        self._pos = 0

    @property
    def remaining(self) -> int:
        return self._bits.size - self._pos

    def take(self, width: int) -> int:
        if width > self.remaining:
            raise SegmentError("bitstream ended inside a field")
        value = 0
        for bit in self._bits[self._pos : self._pos + width]:
            value = (value << 1) | int(bit)
        self._pos += width
        return value


def _parse_numeric(reader: _BitReader, count: int) -> bytes:
    digits = []
    while count >= 3:
        v = reader.take(10)
        if v > 999:
            raise SegmentError(f"numeric triple out of range: {v}")
        digits.append(f"{v:03d}")
        count -= 3
    if count == 2:
        v = reader.take(7)
        if v > 99:
            raise SegmentError(f"numeric pair out of range: {v}")
        digits.append(f"{v:02d}")
    elif count == 1:
        v = reader.take(4)
        if v > 9:
            raise SegmentError(f"numeric digit out of range: {v}")
        digits.append(str(v))
    return "".join(digits).encode("ascii")


def _parse_alphanumeric(reader: _BitReader, count: int) -> bytes:
    chars = []
    charset = tables.ALPHANUMERIC_CHARSET
    while count >= 2:
        v = reader.take(11)
        if v >= 45 * 45:
            raise SegmentError(f"alphanumeric pair out of range: {v}")
        chars.append(charset[v // 45])
        chars.append(charset[v % 45])
        count -= 2
    if count == 1:
        v = reader.take(6)
        if v >= 45:
            raise SegmentError(f"alphanumeric char out of range: {v}")
        chars.append(charset[v])
    return "".join(chars).encode("ascii")


def _parse_segments(data: bytes, version: int) -> tuple[bytes, str]:
    reader = _BitReader(data)
    payload = bytearray()
    modes: list[str] = []
    while reader.remaining >= 4:
        mode = reader.take(4)
        if mode == tables.MODE_TERMINATOR:
            break
        if mode == tables.MODE_ECI:
            raise UnsupportedFeatureError("ECI segments are not supported")
        if mode == tables.MODE_KANJI:
            raise UnsupportedFeatureError("Kanji segments are not supported")
        if mode == tables.MODE_STRUCTURED_APPEND:
            raise UnsupportedFeatureError("structured append is not supported")
        if mode in (tables.MODE_FNC1_FIRST, tables.MODE_FNC1_SECOND):
            raise UnsupportedFeatureError("FNC1 segments are not supported")
        if mode not in (tables.MODE_NUMERIC, tables.MODE_ALPHANUMERIC, tables.MODE_BYTE):
            raise SegmentError(f"unknown segment mode {mode:04b}")
        count = reader.take(tables.char_count_bits(mode, version))
        if mode == tables.MODE_NUMERIC:
            payload += _parse_numeric(reader, count)
            modes.append("numeric")
        elif mode == tables.MODE_ALPHANUMERIC:
            payload += _parse_alphanumeric(reader, count)
            modes.append("alphanumeric")
        else:
            if count * 8 > reader.remaining:
                raise SegmentError("byte segment longer than remaining bitstream")
            payload += bytes(reader.take(8) for _ in range(count))
            modes.append("byte")
    if not modes:
        modes = ["byte"]
    mode = modes[0] if all(m == modes[0] for m in modes) else "byte"
    return bytes(payload), mode


def decode_matrix(matrix: BitMatrix) -> DecodedPayload:
    """Decode a sampled module matrix into its payload.

    Reads the better of the two format copies, unmasks, de-interleaves and
    RS-corrects every block, then parses the segment stream. Dark modules
    are True; polarity handling is the caller's concern.
    """
    version = tables.version_for_side(matrix.side)
    grid = matrix.bits
    ec_level, mask_id = _read_format(grid)
    unmasked = grid ^ layout.mask_grid(version, mask_id)
    path = layout.data_path(version)
    bits = unmasked[path[:, 0], path[:, 1]]
    stream = np.packbits(bits)
    corrected_total = 0
    message = bytearray()
    for block in _deinterleave(stream, version, ec_level):
        parity_len = tables.ECC_PER_BLOCK[ec_level][version]
        data, corrected = rs_decode_block(block, parity_len)
        corrected_total += corrected
        message += data
    payload, mode = _parse_segments(bytes(message), version)
    return DecodedPayload(
        data=payload,
        mode=mode,
        version=version,
        ec_level=ec_level,
        mask_id=mask_id,
        corrected_errors=corrected_total,
    )


__all__ = [
    "BitMatrix",
    "DecodedPayload",
    "FormatInfoError",
    "QrDecodeError",
    "SegmentError",
    "UncorrectableBlockError",
    "UnsupportedFeatureError",
    "decode_matrix",
]
