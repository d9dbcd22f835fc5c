"""2-D binary-image geometry kernels used by the planners.

Pixel coordinates are (u, v) = (column, row) throughout; masks are indexed
``mask[v, u]``. Contours are traced with Moore boundary following on the
largest 8-connected component and returned counter-clockwise in the (u, v)
plane (positive shoelace area), each boundary pixel exactly once, starting
at the component's first row-major pixel.

The ellipse fit is the direct least-squares conic fit constrained to
ellipses, in the numerically stabilized form that splits the 6x6
generalized eigenproblem into a 3x3 one (quadratic vs. linear monomials).
It is non-iterative and recovers exact-ellipse inputs to round-off.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import DegenerateInput, EmptyMask

# Moore neighborhood in clockwise screen order, offsets as (dv, du)
_OFFS = [(0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1)]
_EIGHT = np.ones((3, 3), dtype=int)


@dataclass(frozen=True)
class Ellipse:
    """Geometric ellipse: center, semi-axes (a >= b), major-axis angle."""

    centroid: tuple[float, float]   # (u, v)
    semi_major: float
    semi_minor: float
    rotation_angle: float           # radians in [0, pi), from the +u axis

    def __post_init__(self):
        if not (self.semi_major >= self.semi_minor > 0):
            raise DegenerateInput("ellipse axes must satisfy a >= b > 0")
        angle = float(self.rotation_angle) % np.pi
        object.__setattr__(self, "rotation_angle", angle)


def largest_component(mask: np.ndarray) -> np.ndarray:
    """Largest 8-connected component; ties broken by first label (row-major)."""
    labels, n = ndimage.label(mask, structure=_EIGHT)
    if n == 0:
        raise EmptyMask("mask has no positive pixels")
    if n == 1:
        return labels == 1
    counts = np.bincount(labels.ravel())[1:]
    return labels == (int(np.argmax(counts)) + 1)


def _trace_boundary(mask: np.ndarray) -> list[tuple[int, int]]:
    """Moore boundary following with Jacob's stopping criterion.

    ``mask`` must be a single 8-connected component. Returns (v, u) pixels
    in trace order, first occurrence only.
    """
    h, w = mask.shape
    vs, us = np.nonzero(mask)
    s = (int(vs[0]), int(us[0]))

    def fg(p):
        return 0 <= p[0] < h and 0 <= p[1] < w and mask[p[0], p[1]]

    b0 = (s[0], s[1] - 1)  # west of the row-major first pixel: background
    p, b = s, b0
    ordered = [s]
    seen = {s}
    for _ in range(4 * (len(vs) + 8)):
        b_idx = _OFFS.index((b[0] - p[0], b[1] - p[1]))
        nxt = None
        for i in range(1, 9):
            d = (b_idx + i) % 8
            cand = (p[0] + _OFFS[d][0], p[1] + _OFFS[d][1])
            if fg(cand):
                prev_d = (b_idx + i - 1) % 8
                new_b = (p[0] + _OFFS[prev_d][0], p[1] + _OFFS[prev_d][1])
                nxt = cand
                break
        if nxt is None:
            break  # isolated pixel
        if nxt == s and new_b == b0:
            break
        p, b = nxt, new_b
        if p not in seen:
            seen.add(p)
            ordered.append(p)
    return ordered


def _shoelace(points_uv: np.ndarray) -> float:
    u = points_uv[:, 0]
    v = points_uv[:, 1]
    return 0.5 * float(np.sum(u * np.roll(v, -1) - np.roll(u, -1) * v))


def find_external_contour(mask: np.ndarray) -> np.ndarray:
    """Outer boundary of the largest component as (N, 2) integer (u, v).

    Raises EmptyMask when the mask has no positive pixel.
    """
    mask = np.asarray(mask, dtype=bool)
    comp = largest_component(mask)
    pts = _trace_boundary(comp)
    uv = np.array([[u, v] for v, u in pts], dtype=np.int64)
    if len(uv) >= 3 and _shoelace(uv.astype(np.float64)) < 0.0:
        uv = np.concatenate([uv[:1], uv[1:][::-1]], axis=0)
    return uv


def nearest_positive(mask: np.ndarray, q) -> tuple[int, int]:
    """Positive pixel closest to q = (u, v); ties go to the smallest
    row-major index."""
    mask = np.asarray(mask, dtype=bool)
    vs, us = np.nonzero(mask)
    if len(vs) == 0:
        raise EmptyMask("mask has no positive pixels")
    qu, qv = float(q[0]), float(q[1])
    d2 = (us - qu) ** 2 + (vs - qv) ** 2
    i = int(np.argmin(d2))  # first minimum in row-major order
    return int(us[i]), int(vs[i])


def fit_ellipse(points) -> Ellipse:
    """Direct least-squares ellipse fit of >= 5 (u, v) points."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise DegenerateInput(f"expected (N, 2) points, got {pts.shape}")
    if pts.shape[0] < 5:
        raise DegenerateInput("ellipse fit needs at least 5 points")
    mean = pts.mean(axis=0)
    x = pts[:, 0] - mean[0]
    y = pts[:, 1] - mean[1]
    d1 = np.column_stack([x * x, x * y, y * y])
    d2 = np.column_stack([x, y, np.ones_like(x)])
    s1 = d1.T @ d1
    s2 = d1.T @ d2
    s3 = d2.T @ d2
    try:
        t = -np.linalg.solve(s3, s2.T)
    except np.linalg.LinAlgError as e:
        raise DegenerateInput("collinear or degenerate points") from e
    m = s1 + s2 @ t
    m = np.array([m[2] / 2.0, -m[1], m[0] / 2.0])
    try:
        evals, evecs = np.linalg.eig(m)
    except np.linalg.LinAlgError as e:
        raise DegenerateInput("eigen decomposition failed") from e
    best = None
    for k in range(3):
        if abs(evals[k].imag) > 1e-8 * (abs(evals[k].real) + 1.0):
            continue
        a1 = evecs[:, k].real
        cond = 4.0 * a1[0] * a1[2] - a1[1] ** 2
        if cond > 0.0:
            best = a1
            break
    if best is None:
        raise DegenerateInput("no elliptical solution (points may be degenerate)")
    conic = np.concatenate([best, t @ best])
    return _conic_to_ellipse(conic, mean)


def _conic_to_ellipse(conic: np.ndarray, mean: np.ndarray) -> Ellipse:
    a, b, c, d, e, f = conic
    den = b * b - 4.0 * a * c
    if den >= 0.0:
        raise DegenerateInput("conic is not an ellipse")
    x0 = (2.0 * c * d - b * e) / den
    y0 = (2.0 * a * e - b * d) / den
    f0 = a * x0 * x0 + b * x0 * y0 + c * y0 * y0 + d * x0 + e * y0 + f
    scale = -f0
    if scale < 0.0:
        a, b, c, scale = -a, -b, -c, -scale
    half = (a + c) / 2.0
    spread = np.hypot((a - c) / 2.0, b / 2.0)
    lam_min = half - spread
    lam_max = half + spread
    if lam_min <= 0.0 or scale <= 0.0:
        raise DegenerateInput("conic is not a real ellipse")
    semi_major = float(np.sqrt(scale / lam_min))
    semi_minor = float(np.sqrt(scale / lam_max))
    # major axis = eigenvector of the smaller eigenvalue of [[a, b/2], [b/2, c]]
    vx, vy = b / 2.0, lam_min - a
    if abs(vx) < 1e-300 and abs(vy) < 1e-300:
        vx, vy = lam_min - c, b / 2.0
    if abs(vx) < 1e-300 and abs(vy) < 1e-300:
        angle = 0.0
    else:
        angle = float(np.arctan2(vy, vx)) % np.pi
    return Ellipse(centroid=(float(x0 + mean[0]), float(y0 + mean[1])),
                   semi_major=semi_major, semi_minor=semi_minor,
                   rotation_angle=angle)
