"""GF(256) arithmetic over the primitive polynomial 0x11D.

Log/antilog tables are built once at import; all helpers are pure.
"""

from __future__ import annotations

import numpy as np

PRIMITIVE_POLY = 0x11D

EXP = np.zeros(512, dtype=np.int64)
LOG = np.zeros(256, dtype=np.int64)
_x = 1
for _i in range(255):
    EXP[_i] = _x
    LOG[_x] = _i
    _x <<= 1
    if _x & 0x100:
        _x ^= PRIMITIVE_POLY
EXP[255:510] = EXP[0:255]
EXP.setflags(write=False)
LOG.setflags(write=False)


def gf_mul(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return int(EXP[LOG[a] + LOG[b]])


def gf_div(a: int, b: int) -> int:
    if b == 0:
        raise ZeroDivisionError("GF(256) division by zero")
    if a == 0:
        return 0
    return int(EXP[(LOG[a] - LOG[b]) % 255])


def gf_inv(a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("GF(256) inverse of zero")
    return int(EXP[255 - LOG[a]])


def gf_pow(a: int, n: int) -> int:
    if a == 0:
        return 0
    return int(EXP[(LOG[a] * n) % 255])


def gf_scale_vec(vec: np.ndarray, factor: int) -> np.ndarray:
    """Multiply every element of an integer vector by a scalar."""
    if factor == 0:
        return np.zeros_like(vec)
    out = np.zeros_like(vec)
    nz = vec != 0
    out[nz] = EXP[LOG[vec[nz]] + LOG[factor]]
    return out


def poly_mul(p: list[int], q: list[int]) -> list[int]:
    """Product of polynomials with descending-power coefficient lists."""
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        la = LOG[a]
        for j, b in enumerate(q):
            if b != 0:
                out[i + j] ^= int(EXP[la + LOG[b]])
    return out


def poly_eval(p: list[int] | np.ndarray, x: int) -> int:
    """Horner evaluation of a descending-power polynomial at x."""
    acc = 0
    for c in p:
        acc = gf_mul(acc, x) ^ int(c)
    return acc
