"""Per-version module layout: function patterns, data path and mask grids.

Everything here is deterministic per (version) or (version, mask) and cached,
since both the encoder and the decoder walk the same geometry.
"""

from __future__ import annotations

import functools

import numpy as np

from . import tables


@functools.lru_cache(maxsize=None)
def function_layout(version: int) -> tuple[np.ndarray, np.ndarray]:
    """(base_modules, is_function) boolean grids for a version.

    base_modules holds finder, separator, timing, alignment and the dark
    module; format/version areas are marked as function but left light.
    """
    side = tables.side_for_version(version)
    modules = np.zeros((side, side), dtype=bool)
    is_function = np.zeros((side, side), dtype=bool)

    def set_function(x: int, y: int, dark: bool) -> None:
        if 0 <= x < side and 0 <= y < side:
            modules[y, x] = dark
            is_function[y, x] = True

    for i in range(side):
        set_function(6, i, i % 2 == 0)
        set_function(i, 6, i % 2 == 0)

    for cx, cy in ((3, 3), (side - 4, 3), (3, side - 4)):
        for dy in range(-4, 5):
            for dx in range(-4, 5):
                set_function(cx + dx, cy + dy, max(abs(dx), abs(dy)) not in (2, 4))

    positions = tables.ALIGNMENT_POSITIONS[version]
    n = len(positions)
    skips = {(0, 0), (0, n - 1), (n - 1, 0)}
    for i in range(n):
        for j in range(n):
            if (i, j) in skips:
                continue
            for dy in range(-2, 3):
                for dx in range(-2, 3):
                    set_function(positions[j] + dx, positions[i] + dy,
                                 max(abs(dx), abs(dy)) != 1)

    for x, y in format_positions_copy1(side) + format_positions_copy2(side):
        is_function[y, x] = True
    set_function(8, side - 8, True)  # dark module

    if version >= 7:
        word = tables.bch_version_codeword(version)
        for i in range(18):
            dark = (word >> i) & 1 == 1
            a, b = side - 11 + i % 3, i // 3
            set_function(a, b, dark)
            set_function(b, a, dark)

    modules.setflags(write=False)
    is_function.setflags(write=False)
    return modules, is_function


def format_positions_copy1(side: int) -> list[tuple[int, int]]:
    """(x, y) of format bits 0..14, first copy (around the top-left finder)."""
    pos = [(8, i) for i in range(6)] + [(8, 7), (8, 8), (7, 8)]
    pos += [(14 - i, 8) for i in range(9, 15)]
    return pos


def format_positions_copy2(side: int) -> list[tuple[int, int]]:
    """(x, y) of format bits 0..14, second copy (split along right/bottom edges)."""
    pos = [(side - 1 - i, 8) for i in range(8)]
    pos += [(8, side - 15 + i) for i in range(8, 15)]
    return pos


def version_positions(side: int) -> list[tuple[int, int]]:
    """(x, y) of version bits 0..17 for the bottom-left copy; transpose for the other."""
    return [(i // 3, side - 11 + i % 3) for i in range(18)]


@functools.lru_cache(maxsize=None)
def data_path(version: int) -> np.ndarray:
    """(N, 2) array of (y, x) coordinates in codeword bit order (zigzag scan)."""
    side = tables.side_for_version(version)
    _, is_function = function_layout(version)
    coords: list[tuple[int, int]] = []
    right = side - 1
    while right >= 1:
        if right == 6:
            right -= 1
        upward = ((right + 1) & 2) == 0
        for vert in range(side):
            y = side - 1 - vert if upward else vert
            for x in (right, right - 1):
                if not is_function[y, x]:
                    coords.append((y, x))
        right -= 2
    path = np.array(coords, dtype=np.int64)
    usable = (tables.raw_codewords(version) * 8)
    path = path[:usable]  # remainder bits stay light and are never read
    path.setflags(write=False)
    return path


@functools.lru_cache(maxsize=None)
def mask_grid(version: int, mask_id: int) -> np.ndarray:
    """Boolean grid of modules flipped by the mask (data area only)."""
    side = tables.side_for_version(version)
    y, x = np.mgrid[0:side, 0:side]
    conditions = (
        (x + y) % 2,
        y % 2,
        x % 3,
        (x + y) % 3,
        (x // 3 + y // 2) % 2,
        (x * y) % 2 + (x * y) % 3,
        ((x * y) % 2 + (x * y) % 3) % 2,
        ((x + y) % 2 + (x * y) % 3) % 2,
    )
    _, is_function = function_layout(version)
    grid = (conditions[mask_id] == 0) & ~is_function
    grid.setflags(write=False)
    return grid
