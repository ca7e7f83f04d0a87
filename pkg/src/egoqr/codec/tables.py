"""Symbol layout constants for versions 1..10.

Block structure and alignment positions follow ISO/IEC 18004 model 2; only
the version range this stack supports is tabulated.
"""

from __future__ import annotations

MIN_VERSION = 1
MAX_VERSION = 10

EC_LEVELS = ("L", "M", "Q", "H")

# Format-info field uses 2-bit level codes that are not the table order.
EC_FORMAT_BITS = {"L": 0b01, "M": 0b00, "Q": 0b11, "H": 0b10}
EC_FROM_FORMAT_BITS = {v: k for k, v in EC_FORMAT_BITS.items()}

# Parity codewords per block, indexed [level][version]; index 0 unused.
ECC_PER_BLOCK = {
    "L": (None, 7, 10, 15, 20, 26, 18, 20, 24, 30, 18),
    "M": (None, 10, 16, 26, 18, 24, 16, 18, 22, 22, 26),
    "Q": (None, 13, 22, 18, 26, 18, 24, 18, 22, 20, 24),
    "H": (None, 17, 28, 22, 16, 22, 28, 26, 26, 24, 28),
}

NUM_BLOCKS = {
    "L": (None, 1, 1, 1, 1, 1, 2, 2, 2, 2, 4),
    "M": (None, 1, 1, 1, 2, 2, 4, 4, 4, 5, 5),
    "Q": (None, 1, 1, 2, 2, 4, 4, 6, 6, 8, 8),
    "H": (None, 1, 1, 2, 4, 4, 4, 5, 6, 8, 8),
}

ALIGNMENT_POSITIONS = {
    1: (),
    2: (6, 18),
    3: (6, 22),
    4: (6, 26),
    5: (6, 30),
    6: (6, 34),
    7: (6, 22, 38),
    8: (6, 24, 42),
    9: (6, 26, 46),
    10: (6, 28, 50),
}

FORMAT_MASK = 0x5412
FORMAT_GENERATOR = 0x537  # BCH(15,5) generator 0b10100110111
VERSION_GENERATOR = 0x1F25  # BCH(18,6)

MODE_NUMERIC = 0b0001
MODE_ALPHANUMERIC = 0b0010
MODE_BYTE = 0b0100
MODE_KANJI = 0b1000
MODE_ECI = 0b0111
MODE_STRUCTURED_APPEND = 0b0011
MODE_FNC1_FIRST = 0b0101
MODE_FNC1_SECOND = 0b1001
MODE_TERMINATOR = 0b0000

ALPHANUMERIC_CHARSET = "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ $%*+-./:"

PENALTY_N1 = 3
PENALTY_N2 = 3
PENALTY_N3 = 40
PENALTY_N4 = 10


def side_for_version(version: int) -> int:
    return 17 + 4 * version


def version_for_side(side: int) -> int:
    version, rem = divmod(side - 17, 4)
    if rem != 0 or not MIN_VERSION <= version <= MAX_VERSION:
        raise ValueError(f"side {side} is not a supported symbol size")
    return version


def raw_codewords(version: int) -> int:
    """Total codewords in the symbol (data + parity), remainder bits dropped."""
    bits = (16 * version + 128) * version + 64
    if version >= 2:
        n_align = version // 7 + 2
        bits -= (25 * n_align - 10) * n_align - 55
        if version >= 7:
            bits -= 36
    return bits // 8


def data_codewords(version: int, ec_level: str) -> int:
    return raw_codewords(version) - ECC_PER_BLOCK[ec_level][version] * NUM_BLOCKS[ec_level][version]


def char_count_bits(mode: int, version: int) -> int:
    if version <= 9:
        return {MODE_NUMERIC: 10, MODE_ALPHANUMERIC: 9, MODE_BYTE: 8, MODE_KANJI: 8}[mode]
    return {MODE_NUMERIC: 12, MODE_ALPHANUMERIC: 11, MODE_BYTE: 16, MODE_KANJI: 10}[mode]


def byte_mode_capacity(version: int, ec_level: str) -> int:
    """Maximum byte-mode payload length for the version and EC level."""
    bits = data_codewords(version, ec_level) * 8
    return (bits - 4 - char_count_bits(MODE_BYTE, version)) // 8


def block_structure(version: int, ec_level: str) -> list[tuple[int, int]]:
    """Per-block (data_len, parity_len) in transmission order."""
    n_blocks = NUM_BLOCKS[ec_level][version]
    parity = ECC_PER_BLOCK[ec_level][version]
    total_data = data_codewords(version, ec_level)
    short_len = total_data // n_blocks
    n_long = total_data % n_blocks
    return [(short_len + (1 if i >= n_blocks - n_long else 0), parity) for i in range(n_blocks)]


def bch_format_codeword(level_bits: int, mask_id: int) -> int:
    """15-bit masked format-info word for a 2-bit level and 3-bit mask id."""
    data = (level_bits << 3) | mask_id
    rem = data
    for _ in range(10):
        rem = (rem << 1) ^ ((rem >> 9) * FORMAT_GENERATOR)
    return ((data << 10) | rem) ^ FORMAT_MASK


def bch_version_codeword(version: int) -> int:
    """18-bit version-info word (only meaningful for version >= 7)."""
    rem = version
    for _ in range(12):
        rem = (rem << 1) ^ ((rem >> 11) * VERSION_GENERATOR)
    return (version << 12) | rem


# All 32 format codewords, used for minimum-distance decoding.
FORMAT_CODEWORDS = {
    (lvl, mask): bch_format_codeword(bits, mask)
    for lvl, bits in EC_FORMAT_BITS.items()
    for mask in range(8)
}
