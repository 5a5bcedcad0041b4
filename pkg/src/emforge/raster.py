"""Integer raster primitives for deterministic, text-free plots."""

from __future__ import annotations

import numpy as np

WHITE = (255, 255, 255)


def blank_canvas(width: int, height: int, color=WHITE) -> np.ndarray:
    img = np.empty((height, width, 3), dtype=np.uint8)
    img[:, :] = color
    return img


def draw_dot(img: np.ndarray, x: int, y: int, color, radius: int = 2) -> None:
    """Filled square dot of side 2*radius+1, clipped to the canvas."""
    h, w = img.shape[:2]
    x0, x1 = max(x - radius, 0), min(x + radius + 1, w)
    y0, y1 = max(y - radius, 0), min(y + radius + 1, h)
    if x0 < x1 and y0 < y1:
        img[y0:y1, x0:x1] = color


def draw_line(img: np.ndarray, x0: int, y0: int, x1: int, y1: int, color) -> None:
    """Bresenham line segment, clipped to the canvas."""
    h, w = img.shape[:2]
    dx = abs(x1 - x0)
    dy = -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    x, y = x0, y0
    while True:
        if 0 <= x < w and 0 <= y < h:
            img[y, x] = color
        if x == x1 and y == y1:
            break
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x += sx
        if e2 <= dx:
            err += dx
            y += sy


def draw_polyline(img: np.ndarray, xs, ys, color) -> None:
    for i in range(len(xs) - 1):
        draw_line(img, xs[i], ys[i], xs[i + 1], ys[i + 1], color)


def spectrogram_colormap() -> np.ndarray:
    """256-entry monotone-luminance table, white (low) to deep blue (high)."""
    t = np.arange(256) / 255.0
    r = np.round(255.0 * (1.0 - t))
    g = np.round(255.0 * (1.0 - t))
    b = np.round(255.0 - 127.0 * t)
    return np.stack([r, g, b], axis=1).astype(np.uint8)


def nn_resize(matrix: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Nearest-neighbor resize of a 2-D array."""
    in_h, in_w = matrix.shape
    rows = (np.arange(out_h) * in_h) // out_h
    cols = (np.arange(out_w) * in_w) // out_w
    return matrix[rows][:, cols]


def bucket_minmax(values: np.ndarray, n_buckets: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-bucket min and max; buckets are nearest-neighbor when upsampling."""
    n = values.size
    if n >= n_buckets:
        edges = (np.arange(n_buckets + 1) * n) // n_buckets
        mins = np.empty(n_buckets)
        maxs = np.empty(n_buckets)
        for b in range(n_buckets):
            chunk = values[edges[b] : max(edges[b + 1], edges[b] + 1)]
            mins[b] = chunk.min()
            maxs[b] = chunk.max()
        return mins, maxs
    idx = (np.arange(n_buckets) * n) // n_buckets
    v = values[idx]
    return v.copy(), v.copy()
