"""QR code reading stack for egocentric single-shot imagery."""

from .imaging import BoundingBox, GrayImage, Ray, StructuringElement, load_pgm, save_pgm

__version__ = "0.1.0"

__all__ = [
    "BoundingBox",
    "GrayImage",
    "Ray",
    "StructuringElement",
    "load_pgm",
    "save_pgm",
    "__version__",
]
