"""QR symbol codec: encoder, renderer, grid sampler and matrix decoder."""

from .decoder import (
    BitMatrix,
    DecodedPayload,
    FormatInfoError,
    QrDecodeError,
    SegmentError,
    UnsupportedFeatureError,
    decode_matrix,
)
from .encoder import DataCapacityError, QrSymbol, encode, penalty_score
from .raster import (
    Binarizer,
    DegenerateGeometryError,
    identity_binarizer,
    render,
    sample_grid,
    symbol_corners,
)
from .rs import UncorrectableBlockError, rs_decode_block, rs_encode_block
from . import tables

__all__ = [
    "Binarizer",
    "BitMatrix",
    "DataCapacityError",
    "DecodedPayload",
    "DegenerateGeometryError",
    "FormatInfoError",
    "QrDecodeError",
    "QrSymbol",
    "SegmentError",
    "UncorrectableBlockError",
    "UnsupportedFeatureError",
    "decode_matrix",
    "encode",
    "identity_binarizer",
    "penalty_score",
    "render",
    "rs_decode_block",
    "rs_encode_block",
    "sample_grid",
    "symbol_corners",
    "tables",
]
