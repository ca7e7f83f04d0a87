"""Reed-Solomon coding over GF(256) as used for QR block protection.

Codewords are polynomials with the first byte as the highest power; parity
roots start at alpha^0. Decoding runs Berlekamp-Massey, a Chien search and
Forney magnitudes, then re-derives the parity from the corrected message as
a consistency check before returning.
"""

from __future__ import annotations

import functools

import numpy as np

from .gf256 import EXP, LOG, gf_inv, gf_mul, gf_scale_vec, poly_eval, poly_mul


class UncorrectableBlockError(ValueError):
    """The block holds more errors than the parity can correct."""


@functools.lru_cache(maxsize=None)
def _generator(n_parity: int) -> tuple[int, ...]:
    g = [1]
    for i in range(n_parity):
        g = poly_mul(g, [1, int(EXP[i])])
    return tuple(g)


def rs_encode_block(message: bytes | bytearray | np.ndarray, n_parity: int) -> bytes:
    """Parity bytes for the message (append to form the codeword)."""
    gen = np.array(_generator(n_parity)[1:], dtype=np.int64)
    rem = np.zeros(n_parity, dtype=np.int64)
    for byte in np.asarray(bytearray(message) if not isinstance(message, np.ndarray) else message):
        factor = int(byte) ^ int(rem[0])
        rem[:-1] = rem[1:]
        rem[-1] = 0
        if factor:
            rem ^= gf_scale_vec(gen, factor)
    return bytes(int(v) for v in rem)


def _syndromes(codeword: np.ndarray, n_parity: int) -> np.ndarray:
    n = codeword.size
    nz = np.flatnonzero(codeword)
    if nz.size == 0:
        return np.zeros(n_parity, dtype=np.int64)
    logs = LOG[codeword[nz]]
    powers = n - 1 - nz  # power of x carried by each byte
    synd = np.empty(n_parity, dtype=np.int64)
    for i in range(n_parity):
        terms = EXP[(logs + powers * i) % 255]
        synd[i] = np.bitwise_xor.reduce(terms)
    return synd


def _berlekamp_massey(synd: np.ndarray) -> list[int]:
    """Error locator polynomial, ascending powers (locator[0] == 1)."""
    c = [1]
    b = [1]
    l = 0
    m = 1
    bb = 1
    for n in range(synd.size):
        d = int(synd[n])
        for i in range(1, l + 1):
            if i < len(c):
                d ^= gf_mul(c[i], int(synd[n - i]))
        if d == 0:
            m += 1
            continue
        coef = gf_mul(d, gf_inv(bb))
        if 2 * l <= n:
            t = c.copy()
            c = c + [0] * (len(b) + m - len(c)) if len(b) + m > len(c) else c
            for i, bv in enumerate(b):
                c[i + m] ^= gf_mul(coef, bv)
            l = n + 1 - l
            b = t
            bb = d
            m = 1
        else:
            if len(b) + m > len(c):
                c = c + [0] * (len(b) + m - len(c))
            for i, bv in enumerate(b):
                c[i + m] ^= gf_mul(coef, bv)
            m += 1
    return c[: l + 1]


def _find_error_positions(locator: list[int], n: int) -> list[int]:
    """Array indices whose codeword byte is in error (Chien search)."""
    degree = len(locator) - 1
    positions = []
    for power in range(n):
        # Byte at array index i carries x^(n-1-i); its locator root is alpha^-power.
        if poly_eval(locator[::-1], int(EXP[(255 - power) % 255])) == 0:
            positions.append(n - 1 - power)
    if len(positions) != degree:
        raise UncorrectableBlockError("error locator degree does not match its roots")
    return positions


def rs_decode_block(codewords: bytes | bytearray | np.ndarray, n_parity: int) -> tuple[bytes, int]:
    """Correct a full RS block and return (message bytes, corrected count)."""
    cw = np.asarray(bytearray(codewords) if not isinstance(codewords, np.ndarray) else codewords,
                    dtype=np.int64)
    if cw.size < n_parity + 1:
        raise ValueError("block shorter than parity + 1")
    n = cw.size
    synd = _syndromes(cw, n_parity)
    if not synd.any():
        return bytes(int(v) for v in cw[: n - n_parity]), 0

    locator = _berlekamp_massey(synd)
    n_errors = len(locator) - 1
    if n_errors == 0 or n_errors > n_parity // 2:
        raise UncorrectableBlockError(f"{n_errors} errors exceed capacity {n_parity // 2}")
    positions = _find_error_positions(locator, n)

    # Forney: omega = S(x) * locator(x) mod x^n_parity, all descending order.
    synd_desc = [int(s) for s in synd[::-1]]
    omega = poly_mul(synd_desc, locator[::-1])[-n_parity:]
    loc_desc = locator[::-1]
    deg = len(loc_desc) - 1
    # Formal derivative in characteristic 2: odd-power terms survive, degree drops by 1.
    deriv_desc = [loc_desc[i] if (deg - i) % 2 == 1 else 0 for i in range(deg)] or [0]

    corrected = cw.copy()
    for pos in positions:
        x_i = int(EXP[n - 1 - pos])
        x_inv = gf_inv(x_i)
        denom = poly_eval(deriv_desc, x_inv)
        if denom == 0:
            raise UncorrectableBlockError("Forney denominator vanished")
        magnitude = gf_mul(x_i, gf_mul(poly_eval(omega, x_inv), gf_inv(denom)))
        corrected[pos] ^= magnitude

    if _syndromes(corrected, n_parity).any():
        raise UncorrectableBlockError("correction left nonzero syndromes")
    message = bytes(int(v) for v in corrected[: n - n_parity])
    if rs_encode_block(message, n_parity) != bytes(int(v) for v in corrected[n - n_parity :]):
        raise UncorrectableBlockError("re-encoded parity mismatch")
    return message, len(positions)
