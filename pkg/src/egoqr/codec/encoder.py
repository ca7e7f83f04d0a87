"""Byte-mode QR symbol construction for versions 1..10.

Produces ISO/IEC 18004 model 2 symbols: mode/length header, terminator,
0xEC/0x11 pad bytes, per-block Reed-Solomon parity, block interleaving,
masking (automatic choice by penalty score unless pinned) and the masked
BCH-protected format field.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import layout, tables
from .rs import rs_encode_block


class DataCapacityError(ValueError):
    """Payload does not fit the requested (or any supported) version."""


@dataclass(frozen=True)
class QrSymbol:
    """A finished symbol: module grid plus the parameters baked into it."""

    version: int
    ec_level: str
    mask_id: int
    modules: np.ndarray  # (side, side) bool, True = dark

    def __post_init__(self) -> None:
        side = tables.side_for_version(self.version)
        mods = np.asarray(self.modules, dtype=bool)
        if mods.shape != (side, side):
            raise ValueError(f"module grid must be {side}x{side} for version {self.version}")
        mods = mods.copy()
        mods.setflags(write=False)
        object.__setattr__(self, "modules", mods)

    @property
    def side(self) -> int:
        return int(self.modules.shape[0])


def _build_codewords(data: bytes, version: int, ec_level: str) -> np.ndarray:
    """Data bits -> padded codewords -> per-block parity -> interleaved stream."""
    n_data = tables.data_codewords(version, ec_level)
    count_bits = tables.char_count_bits(tables.MODE_BYTE, version)
    bits: list[int] = []

    def push(value: int, width: int) -> None:
        bits.extend((value >> (width - 1 - i)) & 1 for i in range(width))

    push(tables.MODE_BYTE, 4)
    push(len(data), count_bits)
    for byte in data:
        push(byte, 8)
    capacity_bits = n_data * 8
    push(0, min(4, capacity_bits - len(bits)))
    if len(bits) % 8:
        push(0, 8 - len(bits) % 8)
    codewords = bytearray(np.packbits(np.array(bits, dtype=np.uint8)))
    for pad in _pad_cycle(n_data - len(codewords)):
        codewords.append(pad)

    blocks = []
    offset = 0
    for block_len, parity_len in tables.block_structure(version, ec_level):
        block = bytes(codewords[offset : offset + block_len])
        offset += block_len
        blocks.append((block, rs_encode_block(block, parity_len)))

    stream = bytearray()
    max_data = max(len(b) for b, _ in blocks)
    for i in range(max_data):
        for block, _ in blocks:
            if i < len(block):
                stream.append(block[i])
    parity_len = len(blocks[0][1])
    for i in range(parity_len):
        for _, parity in blocks:
            stream.append(parity[i])
    return np.frombuffer(bytes(stream), dtype=np.uint8)


def _pad_cycle(count: int):
    for i in range(count):
        yield 0xEC if i % 2 == 0 else 0x11


def _place_data(version: int, codewords: np.ndarray) -> np.ndarray:
    modules, _ = layout.function_layout(version)
    grid = modules.copy()
    bits = np.unpackbits(codewords)
    path = layout.data_path(version)
    grid[path[: bits.size, 0], path[: bits.size, 1]] = bits.astype(bool)
    return grid


def _draw_format(grid: np.ndarray, ec_level: str, mask_id: int) -> None:
    side = grid.shape[0]
    word = tables.bch_format_codeword(tables.EC_FORMAT_BITS[ec_level], mask_id)
    for positions in (layout.format_positions_copy1(side), layout.format_positions_copy2(side)):
        for bit, (x, y) in enumerate(positions):
            grid[y, x] = (word >> bit) & 1 == 1


def penalty_score(grid: np.ndarray) -> int:
    """ISO mask-evaluation penalty: runs, 2x2 blocks, finder lookalikes, balance."""
    side = grid.shape[0]
    score = 0
    for mat in (grid.astype(np.int8), grid.T.astype(np.int8)):
        for row in mat:
            # N1: runs of 5 same-colored modules score 3, +1 per extra module.
            changes = np.flatnonzero(np.diff(row))
            run_lengths = np.diff(np.concatenate(([0], changes + 1, [side])))
            long_runs = run_lengths[run_lengths >= 5]
            score += int(tables.PENALTY_N1 * long_runs.size + (long_runs - 5).sum())
    blocks = grid[:-1, :-1]
    same = (blocks == grid[:-1, 1:]) & (blocks == grid[1:, :-1]) & (blocks == grid[1:, 1:])
    score += tables.PENALTY_N2 * int(same.sum())
    score += tables.PENALTY_N3 * _finder_lookalikes(grid)
    score += tables.PENALTY_N3 * _finder_lookalikes(grid.T)
    dark = int(grid.sum())
    total = side * side
    k = 0
    while not (9 - k) * total <= dark * 20 <= (11 + k) * total:
        k += 1
    score += tables.PENALTY_N4 * k
    return score


_FINDER_SEQS = (
    np.array([True, False, True, True, True, False, True, False, False, False, False]),
)
_FINDER_PATTERNS = (_FINDER_SEQS[0], _FINDER_SEQS[0][::-1])


def _finder_lookalikes(grid: np.ndarray) -> int:
    side = grid.shape[0]
    if side < 11:
        return 0
    count = 0
    windows = np.lib.stride_tricks.sliding_window_view(grid, 11, axis=1)
    for pat in _FINDER_PATTERNS:
        count += int((windows == pat).all(axis=2).sum())
    return count


def encode(
    data: bytes,
    ec_level: str = "M",
    version: int | None = None,
    mask_id: int | None = None,
) -> QrSymbol:
    """Encode a byte payload into a symbol.

    The smallest version that fits is chosen when version is None; the mask
    with the lowest penalty score is chosen when mask_id is None.
    """
    if ec_level not in tables.EC_LEVELS:
        raise ValueError(f"unknown EC level {ec_level!r}")
    if mask_id is not None and not 0 <= mask_id <= 7:
        raise ValueError("mask_id must be in 0..7")
    if version is None:
        for candidate in range(tables.MIN_VERSION, tables.MAX_VERSION + 1):
            if len(data) <= tables.byte_mode_capacity(candidate, ec_level):
                version = candidate
                break
        else:
            raise DataCapacityError(
                f"{len(data)} bytes exceed version-{tables.MAX_VERSION} capacity "
                f"({tables.byte_mode_capacity(tables.MAX_VERSION, ec_level)}) at level {ec_level}"
            )
    elif not tables.MIN_VERSION <= version <= tables.MAX_VERSION:
        raise ValueError(f"version must be in {tables.MIN_VERSION}..{tables.MAX_VERSION}")
    elif len(data) > tables.byte_mode_capacity(version, ec_level):
        raise DataCapacityError(
            f"{len(data)} bytes exceed version-{version} capacity at level {ec_level}"
        )

    base = _place_data(version, _build_codewords(data, version, ec_level))
    if mask_id is None:
        best_mask, best_grid, best_score = 0, None, None
        for candidate in range(8):
            grid = base ^ layout.mask_grid(version, candidate)
            _draw_format(grid, ec_level, candidate)
            score = penalty_score(grid)
            if best_score is None or score < best_score:
                best_mask, best_grid, best_score = candidate, grid, score
        mask_id, grid = best_mask, best_grid
    else:
        grid = base ^ layout.mask_grid(version, mask_id)
        _draw_format(grid, ec_level, mask_id)
    return QrSymbol(version=version, ec_level=ec_level, mask_id=mask_id, modules=grid)
