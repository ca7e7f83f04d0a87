"""Plane projective transforms shared by grid sampling, decoding and synthesis."""

from __future__ import annotations

import math

import numpy as np


class DegenerateGeometryError(ValueError):
    """Raised when point correspondences cannot define a projective map."""


def fit_homography(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """3x3 homography H with dst ~ H @ src from four point correspondences."""
    src = np.asarray(src, dtype=np.float64)
    dst = np.asarray(dst, dtype=np.float64)
    if src.shape != (4, 2) or dst.shape != (4, 2):
        raise ValueError("expected four 2-D points on each side")
    a = np.zeros((8, 8))
    b = np.zeros(8)
    for i, ((x, y), (u, v)) in enumerate(zip(src, dst)):
        a[2 * i] = [x, y, 1, 0, 0, 0, -x * u, -y * u]
        a[2 * i + 1] = [0, 0, 0, x, y, 1, -x * v, -y * v]
        b[2 * i] = u
        b[2 * i + 1] = v
    try:
        h = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise DegenerateGeometryError("collinear or coincident correspondences") from exc
    if not np.all(np.isfinite(h)):
        raise DegenerateGeometryError("non-finite homography solution")
    return np.array([[h[0], h[1], h[2]], [h[3], h[4], h[5]], [h[6], h[7], 1.0]])


def fit_homography_lsq(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Least-squares homography from N >= 4 correspondences (normalized DLT)."""
    src = np.asarray(src, dtype=np.float64)
    dst = np.asarray(dst, dtype=np.float64)
    if src.shape != dst.shape or src.ndim != 2 or src.shape[0] < 4 or src.shape[1] != 2:
        raise ValueError("need matching (N, 2) arrays with N >= 4")

    def _normalizer(pts: np.ndarray) -> np.ndarray:
        centroid = pts.mean(axis=0)
        spread = np.mean(np.linalg.norm(pts - centroid, axis=1))
        if spread < 1e-9:
            raise DegenerateGeometryError("coincident points")
        s = math.sqrt(2.0) / spread
        return np.array([[s, 0, -s * centroid[0]], [0, s, -s * centroid[1]], [0, 0, 1]])

    t_src = _normalizer(src)
    t_dst = _normalizer(dst)
    sp = (np.hstack([src, np.ones((src.shape[0], 1))]) @ t_src.T)[:, :2]
    dp = (np.hstack([dst, np.ones((dst.shape[0], 1))]) @ t_dst.T)[:, :2]
    rows = []
    for (x, y), (u, v) in zip(sp, dp):
        rows.append([-x, -y, -1, 0, 0, 0, u * x, u * y, u])
        rows.append([0, 0, 0, -x, -y, -1, v * x, v * y, v])
    _, _, vt = np.linalg.svd(np.array(rows))
    h = np.linalg.inv(t_dst) @ vt[-1].reshape(3, 3) @ t_src
    if abs(h[2, 2]) < 1e-12:
        raise DegenerateGeometryError("degenerate least-squares homography")
    return h / h[2, 2]


def unit_square_to_quad(corners: np.ndarray) -> np.ndarray:
    """Homography mapping (0,0),(1,0),(1,1),(0,1) to TL,TR,BR,BL corners."""
    unit = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    quad = np.asarray(corners, dtype=np.float64)
    if quad.shape != (4, 2):
        raise ValueError("expected four corner points")
    # Reject near-zero-area quads before solving.
    area2 = 0.0
    for i in range(4):
        x0, y0 = quad[i]
        x1, y1 = quad[(i + 1) % 4]
        area2 += x0 * y1 - x1 * y0
    span = max(np.ptp(quad[:, 0]), np.ptp(quad[:, 1]), 1.0)
    if abs(area2) < 1e-9 * span * span:
        raise DegenerateGeometryError("corner set has zero area")
    return fit_homography(unit, quad)


def apply_homography(h: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Map an (N, 2) point array through h, returning (N, 2) image points."""
    pts = np.asarray(points, dtype=np.float64)
    ones = np.ones((pts.shape[0], 1))
    proj = np.hstack([pts, ones]) @ h.T
    w = proj[:, 2]
    if np.any(np.abs(w) < 1e-12):
        raise DegenerateGeometryError("point maps to infinity")
    return proj[:, :2] / w[:, None]


def invert_homography(h: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.inv(h)
    except np.linalg.LinAlgError as exc:
        raise DegenerateGeometryError("homography is singular") from exc
