"""Vectorised numpy implementations of the hot kernels.

Every function here has a loop-based twin in ``_numba`` with the same
signature. Canvases are float32 (H, W, 3) arrays holding 0..255 values and are
modified in place.
"""
from __future__ import annotations

import numpy as np

N_STATS = 12


def _subsample_grid(x0, x1, y0, y1, ss):
    offs = (np.arange(ss) + 0.5) / ss
    xs = (np.arange(x0, x1)[:, None] + offs[None, :]).reshape(-1)
    ys = (np.arange(y0, y1)[:, None] + offs[None, :]).reshape(-1)
    return xs, ys


def _bbox(xmin, xmax, ymin, ymax, h, w):
    x0 = max(int(np.floor(xmin)), 0)
    x1 = min(int(np.ceil(xmax)), w)
    y0 = max(int(np.floor(ymin)), 0)
    y1 = min(int(np.ceil(ymax)), h)
    return x0, x1, y0, y1


def _blend(canvas, x0, x1, y0, y1, cov, color):
    region = canvas[y0:y1, x0:x1, :]
    c = cov[:, :, None].astype(np.float32)
    region *= 1.0 - c
    region += c * color[None, None, :]


def _coverage(mask, ny, nx, ss):
    return mask.reshape(ny, ss, nx, ss).mean(axis=(1, 3))


def fill_polygon(canvas, xs, ys, color, ss):
    """Anti-aliased fill of a convex polygon given in pixel coordinates."""
    h, w, _ = canvas.shape
    x0, x1, y0, y1 = _bbox(xs.min(), xs.max(), ys.min(), ys.max(), h, w)
    if x1 <= x0 or y1 <= y0:
        return
    px, py = _subsample_grid(x0, x1, y0, y1, ss)
    gx, gy = np.meshgrid(px, py)
    n = len(xs)
    pos = np.ones(gx.shape, dtype=bool)
    neg = np.ones(gx.shape, dtype=bool)
    for i in range(n):
        ax, ay = xs[i], ys[i]
        bx, by = xs[(i + 1) % n], ys[(i + 1) % n]
        cr = (bx - ax) * (gy - ay) - (by - ay) * (gx - ax)
        pos &= cr >= 0.0
        neg &= cr <= 0.0
    cov = _coverage(pos | neg, y1 - y0, x1 - x0, ss)
    _blend(canvas, x0, x1, y0, y1, cov, color)


def fill_disc(canvas, cx, cy, radius, color, ss):
    h, w, _ = canvas.shape
    x0, x1, y0, y1 = _bbox(cx - radius, cx + radius, cy - radius, cy + radius, h, w)
    if x1 <= x0 or y1 <= y0:
        return
    px, py = _subsample_grid(x0, x1, y0, y1, ss)
    gx, gy = np.meshgrid(px, py)
    inside = (gx - cx) ** 2 + (gy - cy) ** 2 <= radius * radius
    cov = _coverage(inside, y1 - y0, x1 - x0, ss)
    _blend(canvas, x0, x1, y0, y1, cov, color)


def fill_under_curve(canvas, curve_y, texture, ss):
    """Fill everything below a curve with a tiled texture.

    ``curve_y`` holds the curve's pixel row at each of the W*ss sub-columns.
    """
    h, w, _ = canvas.shape
    offs = (np.arange(ss) + 0.5) / ss
    py = (np.arange(h)[:, None] + offs[None, :]).reshape(-1)
    below = py[:, None] >= curve_y[None, :]
    cov = _coverage(below, h, w, ss)
    th, tw, _ = texture.shape
    tex = texture[np.arange(h) % th][:, np.arange(w) % tw]
    c = cov[:, :, None].astype(np.float32)
    canvas *= 1.0 - c
    canvas += c * tex


def blit_sprite(canvas, sprite, cx, cy, angle, scale, ss):
    """Alpha-blend an RGBA sprite centred at (cx, cy), rotated by ``angle``
    (radians, counter-clockwise on screen) and scaled by ``scale``."""
    h, w, _ = canvas.shape
    sh, sw, _ = sprite.shape
    half = 0.5 * scale * np.hypot(sh, sw)
    x0, x1, y0, y1 = _bbox(cx - half, cx + half, cy - half, cy + half, h, w)
    if x1 <= x0 or y1 <= y0:
        return
    px, py = _subsample_grid(x0, x1, y0, y1, ss)
    gx, gy = np.meshgrid(px, py)
    ca, sa = np.cos(angle), np.sin(angle)
    dx, dy = gx - cx, gy - cy
    # inverse rotation; screen y points down so ccw rotation flips the sign
    u = (ca * dx - sa * dy) / scale + 0.5 * sw
    v = (sa * dx + ca * dy) / scale + 0.5 * sh
    iu = np.floor(u).astype(np.int64)
    iv = np.floor(v).astype(np.int64)
    ok = (iu >= 0) & (iu < sw) & (iv >= 0) & (iv < sh)
    iu = np.clip(iu, 0, sw - 1)
    iv = np.clip(iv, 0, sh - 1)
    texel = sprite[iv, iu]
    a = np.where(ok, texel[..., 3] / 255.0, 0.0)
    ny, nx = y1 - y0, x1 - x0
    acc_a = a.reshape(ny, ss, nx, ss).sum(axis=(1, 3))
    acc_c = (texel[..., :3] * a[..., None]).reshape(ny, ss, nx, ss, 3).sum(axis=(1, 3))
    n = ss * ss
    cov = (acc_a / n).astype(np.float32)
    region = canvas[y0:y1, x0:x1, :]
    region *= 1.0 - cov[:, :, None]
    region += (acc_c / n).astype(np.float32)


def image_stats(frames):
    """Pixel statistics used by the mock image encoder; see ``_numba.image_stats``."""
    frames = np.asarray(frames)
    n, h, w, _ = frames.shape
    f = frames.astype(np.float64) / 255.0
    out = np.zeros((n, N_STATS))
    out[:, 0] = 1.0
    out[:, 1:4] = f.mean(axis=(1, 2))
    xs = 2.0 * (np.arange(w) + 0.5) / w - 1.0
    ys = 1.0 - (np.arange(h) + 0.5) / h
    warm = np.maximum(f[..., 0] - f[..., 2], 0.0)
    dark = 1.0 - f.max(axis=3)
    for base, wt in ((4, warm), (9, dark)):
        mass = wt.sum(axis=(1, 2))
        out[:, base] = mass / (h * w)
        safe = np.where(mass > 1e-9, mass, 1.0)
        cy = (wt.sum(axis=2) * ys[None, :]).sum(axis=1) / safe
        cx = (wt.sum(axis=1) * xs[None, :]).sum(axis=1) / safe
        cy = np.where(mass > 1e-9, cy, 0.0)
        cx = np.where(mass > 1e-9, cx, 0.0)
        out[:, base + 1] = cy
        out[:, base + 2] = cx
        if base == 4:
            ddx = xs[None, None, :] - cx[:, None, None]
            ddy = ys[None, :, None] - cy[:, None, None]
            vxx = (wt * ddx * ddx).sum(axis=(1, 2)) / safe
            vyy = (wt * ddy * ddy).sum(axis=(1, 2)) / safe
            vxy = (wt * ddx * ddy).sum(axis=(1, 2)) / safe
            tr = vxx + vyy
            live = (mass > 1e-9) & (tr > 1e-12)
            tr = np.where(live, tr, 1.0)
            out[:, 7] = np.where(live, (vyy - vxx) / tr, 0.0)
            out[:, 8] = np.where(live, 2.0 * vxy / tr, 0.0)
    return out


def resize_bilinear(img, out_h, out_w):
    """Bilinear resample with half-pixel centres (edge-clamped), no antialias."""
    h, w, _ = img.shape
    sy = (np.arange(out_h) + 0.5) * (h / out_h) - 0.5
    sx = (np.arange(out_w) + 0.5) * (w / out_w) - 0.5
    sy = np.clip(sy, 0.0, h - 1)
    sx = np.clip(sx, 0.0, w - 1)
    y0 = np.floor(sy).astype(np.int64)
    x0 = np.floor(sx).astype(np.int64)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    wy = (sy - y0).astype(np.float32)[:, None, None]
    wx = (sx - x0).astype(np.float32)[None, :, None]
    top = img[y0][:, x0] * (1 - wx) + img[y0][:, x1] * wx
    bot = img[y1][:, x0] * (1 - wx) + img[y1][:, x1] * wx
    return (top * (1 - wy) + bot * wy).astype(np.float32)


def regularized_rewards(states, goal, baseline, direction, alpha):
    """1 - 0.5*||alpha*proj(s) + (1-alpha)*s - g||^2 for each row of ``states``.

    ``direction`` may be all zeros when ``alpha == 0``.
    """
    s = np.asarray(states, dtype=np.float64)
    if alpha != 0.0:
        t = (s - baseline) @ direction
        proj = baseline[None, :] + t[:, None] * direction[None, :]
        mix = alpha * proj + (1.0 - alpha) * s
    else:
        mix = s
    r = mix - goal[None, :]
    return 1.0 - 0.5 * np.einsum("ij,ij->i", r, r)
