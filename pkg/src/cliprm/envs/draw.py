"""Small drawing layer over the rasterisation kernels.

Shapes are given in a y-up "world canvas" of nominal size (600, 400), the
classic-control screen size; ``Painter`` scales to the target resolution and
flips to image rows.
"""
from __future__ import annotations

import numpy as np

from cliprm import kernels

NOMINAL = (600.0, 400.0)


class Painter:
    def __init__(self, width, height, background=(255, 255, 255), ss=4):
        self.w, self.h = int(width), int(height)
        self.sx = self.w / NOMINAL[0]
        self.sy = self.h / NOMINAL[1]
        self.ss = int(ss)
        self.canvas = np.empty((self.h, self.w, 3), dtype=np.float32)
        self.canvas[:] = np.asarray(background, dtype=np.float32)

    def _px(self, x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        return x * self.sx, self.h - y * self.sy

    def polygon(self, pts, color):
        pts = np.asarray(pts, dtype=np.float64)
        xs, ys = self._px(pts[:, 0], pts[:, 1])
        kernels.fill_polygon(self.canvas, np.ascontiguousarray(xs), np.ascontiguousarray(ys),
                             np.asarray(color, dtype=np.float32), self.ss)

    def disc(self, x, y, r, color):
        px, py = self._px(x, y)
        kernels.fill_disc(self.canvas, float(px), float(py), float(r * 0.5 * (self.sx + self.sy)),
                          np.asarray(color, dtype=np.float32), self.ss)

    def segment(self, p, q, width, color):
        p = np.asarray(p, dtype=np.float64)
        q = np.asarray(q, dtype=np.float64)
        d = q - p
        n = np.hypot(*d)
        if n == 0:
            return
        off = np.array([-d[1], d[0]]) / n * (0.5 * width)
        self.polygon([p + off, q + off, q - off, p - off], color)

    def polyline(self, pts, width, color):
        for a, b in zip(pts[:-1], pts[1:]):
            self.segment(a, b, width, color)

    def fill_below(self, curve, texture):
        """``curve(x_nominal) -> y_nominal``; fill beneath it with a tiled texture."""
        xs = (np.arange(self.w * self.ss) + 0.5) / self.ss / self.sx
        ys = self.h - curve(xs) * self.sy
        kernels.fill_under_curve(self.canvas, np.ascontiguousarray(ys), texture, self.ss)

    def sprite(self, sprite, x, y, angle, scale):
        px, py = self._px(x, y)
        kernels.blit_sprite(self.canvas, sprite, float(px), float(py), float(angle),
                            float(scale * 0.5 * (self.sx + self.sy)), self.ss)

    def image(self) -> np.ndarray:
        return np.clip(np.rint(self.canvas), 0, 255).astype(np.uint8)


def rotate(points, angle):
    """Rotate (N, 2) points counter-clockwise by ``angle`` radians (y-up)."""
    c, s = np.cos(angle), np.sin(angle)
    pts = np.asarray(points, dtype=np.float64)
    return np.stack([pts[:, 0] * c - pts[:, 1] * s, pts[:, 0] * s + pts[:, 1] * c], axis=1)
