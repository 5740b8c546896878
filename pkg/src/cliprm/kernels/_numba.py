"""Loop kernels compiled with numba. Signatures mirror ``_numpy``."""
from __future__ import annotations

import math

import numba
import numpy as np

N_STATS = 12

jit = numba.njit(cache=True, nogil=True)


@jit
def _clampi(v, lo, hi):
    return max(lo, min(v, hi))


@jit
def fill_polygon(canvas, xs, ys, color, ss):
    h, w, _ = canvas.shape
    n = xs.shape[0]
    x0 = _clampi(int(math.floor(xs.min())), 0, w)
    x1 = _clampi(int(math.ceil(xs.max())), 0, w)
    y0 = _clampi(int(math.floor(ys.min())), 0, h)
    y1 = _clampi(int(math.ceil(ys.max())), 0, h)
    inv = 1.0 / (ss * ss)
    for r in range(y0, y1):
        for c in range(x0, x1):
            hits = 0
            for i in range(ss):
                py = r + (i + 0.5) / ss
                for j in range(ss):
                    px = c + (j + 0.5) / ss
                    pos = True
                    neg = True
                    for e in range(n):
                        ax = xs[e]
                        ay = ys[e]
                        bx = xs[(e + 1) % n]
                        by = ys[(e + 1) % n]
                        cr = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
                        if cr < 0.0:
                            pos = False
                        if cr > 0.0:
                            neg = False
                    if pos or neg:
                        hits += 1
            if hits:
                cov = np.float32(hits * inv)
                for k in range(3):
                    canvas[r, c, k] = canvas[r, c, k] * (1 - cov) + cov * color[k]


@jit
def fill_disc(canvas, cx, cy, radius, color, ss):
    h, w, _ = canvas.shape
    x0 = _clampi(int(math.floor(cx - radius)), 0, w)
    x1 = _clampi(int(math.ceil(cx + radius)), 0, w)
    y0 = _clampi(int(math.floor(cy - radius)), 0, h)
    y1 = _clampi(int(math.ceil(cy + radius)), 0, h)
    r2 = radius * radius
    inv = 1.0 / (ss * ss)
    for r in range(y0, y1):
        for c in range(x0, x1):
            hits = 0
            for i in range(ss):
                dy = r + (i + 0.5) / ss - cy
                for j in range(ss):
                    dx = c + (j + 0.5) / ss - cx
                    if dx * dx + dy * dy <= r2:
                        hits += 1
            if hits:
                cov = np.float32(hits * inv)
                for k in range(3):
                    canvas[r, c, k] = canvas[r, c, k] * (1 - cov) + cov * color[k]


@jit
def fill_under_curve(canvas, curve_y, texture, ss):
    h, w, _ = canvas.shape
    th, tw, _ = texture.shape
    inv = 1.0 / (ss * ss)
    for r in range(h):
        for c in range(w):
            hits = 0
            for i in range(ss):
                py = r + (i + 0.5) / ss
                for j in range(ss):
                    if py >= curve_y[c * ss + j]:
                        hits += 1
            if hits:
                cov = np.float32(hits * inv)
                for k in range(3):
                    canvas[r, c, k] = canvas[r, c, k] * (1 - cov) + cov * texture[r % th, c % tw, k]


@jit
def blit_sprite(canvas, sprite, cx, cy, angle, scale, ss):
    h, w, _ = canvas.shape
    sh, sw, _ = sprite.shape
    half = 0.5 * scale * math.hypot(sh, sw)
    x0 = _clampi(int(math.floor(cx - half)), 0, w)
    x1 = _clampi(int(math.ceil(cx + half)), 0, w)
    y0 = _clampi(int(math.floor(cy - half)), 0, h)
    y1 = _clampi(int(math.ceil(cy + half)), 0, h)
    ca = math.cos(angle)
    sa = math.sin(angle)
    n = ss * ss
    for r in range(y0, y1):
        for c in range(x0, x1):
            acc_a = 0.0
            acc0 = 0.0
            acc1 = 0.0
            acc2 = 0.0
            for i in range(ss):
                dy = r + (i + 0.5) / ss - cy
                for j in range(ss):
                    dx = c + (j + 0.5) / ss - cx
                    u = (ca * dx - sa * dy) / scale + 0.5 * sw
                    v = (sa * dx + ca * dy) / scale + 0.5 * sh
                    iu = int(math.floor(u))
                    iv = int(math.floor(v))
                    if iu < 0 or iu >= sw or iv < 0 or iv >= sh:
                        continue
                    a = sprite[iv, iu, 3] / 255.0
                    acc_a += a
                    acc0 += sprite[iv, iu, 0] * a
                    acc1 += sprite[iv, iu, 1] * a
                    acc2 += sprite[iv, iu, 2] * a
            if acc_a > 0.0:
                cov = np.float32(acc_a / n)
                canvas[r, c, 0] = canvas[r, c, 0] * (1 - cov) + np.float32(acc0 / n)
                canvas[r, c, 1] = canvas[r, c, 1] * (1 - cov) + np.float32(acc1 / n)
                canvas[r, c, 2] = canvas[r, c, 2] * (1 - cov) + np.float32(acc2 / n)


@jit
def _stats_one(img, out):
    h, w, _ = img.shape
    s0 = 0.0
    s1 = 0.0
    s2 = 0.0
    wm = 0.0
    wx = 0.0
    wy = 0.0
    wxx = 0.0
    wyy = 0.0
    wxy = 0.0
    dm = 0.0
    dx = 0.0
    dy = 0.0
    for r in range(h):
        y = 1.0 - (r + 0.5) / h
        for c in range(w):
            x = 2.0 * (c + 0.5) / w - 1.0
            red = img[r, c, 0] / 255.0
            grn = img[r, c, 1] / 255.0
            blu = img[r, c, 2] / 255.0
            s0 += red
            s1 += grn
            s2 += blu
            warm = max(red - blu, 0.0)
            wm += warm
            wx += warm * x
            wy += warm * y
            wxx += warm * x * x
            wyy += warm * y * y
            wxy += warm * x * y
            dk = 1.0 - max(red, max(grn, blu))
            dm += dk
            dx += dk * x
            dy += dk * y
    npx = h * w
    out[0] = 1.0
    out[1] = s0 / npx
    out[2] = s1 / npx
    out[3] = s2 / npx
    out[4] = wm / npx
    if wm > 1e-9:
        cx = wx / wm
        cy = wy / wm
        out[5] = cy
        out[6] = cx
        vxx = wxx / wm - cx * cx
        vyy = wyy / wm - cy * cy
        vxy = wxy / wm - cx * cy
        tr = vxx + vyy
        if tr > 1e-12:
            out[7] = (vyy - vxx) / tr
            out[8] = 2.0 * vxy / tr
    out[9] = dm / npx
    if dm > 1e-9:
        out[10] = dy / dm
        out[11] = dx / dm


@numba.njit(cache=True, nogil=True, parallel=False)
def image_stats(frames):
    """Per-frame pixel statistics for the mock image encoder.

    Columns: bias, mean R/G/B, then for the "warm" weight max(R-B, 0): mass,
    centroid height, centroid x, elongation (vyy-vxx)/tr, skew 2vxy/tr, then
    for the "dark" weight 1-max(R,G,B): mass, centroid height, centroid x.
    Heights run from 0 (bottom edge) to 1 (top edge); x runs from -1 (left)
    to 1 (right). Statistics of an empty weight map are 0.
    """
    n = frames.shape[0]
    out = np.zeros((n, N_STATS))
    for i in range(n):
        _stats_one(frames[i], out[i])
    return out


@jit
def resize_bilinear(img, out_h, out_w):
    h, w, ch = img.shape
    out = np.empty((out_h, out_w, ch), dtype=np.float32)
    fy = h / out_h
    fx = w / out_w
    for r in range(out_h):
        sy = min(max((r + 0.5) * fy - 0.5, 0.0), h - 1.0)
        y0 = int(math.floor(sy))
        y1 = min(y0 + 1, h - 1)
        wy = np.float32(sy - y0)
        for c in range(out_w):
            sx = min(max((c + 0.5) * fx - 0.5, 0.0), w - 1.0)
            x0 = int(math.floor(sx))
            x1 = min(x0 + 1, w - 1)
            wx = np.float32(sx - x0)
            for k in range(ch):
                top = img[y0, x0, k] * (1 - wx) + img[y0, x1, k] * wx
                bot = img[y1, x0, k] * (1 - wx) + img[y1, x1, k] * wx
                out[r, c, k] = top * (1 - wy) + bot * wy
    return out


@jit
def regularized_rewards(states, goal, baseline, direction, alpha):
    n, k = states.shape
    out = np.empty(n)
    for i in range(n):
        t = 0.0
        if alpha != 0.0:
            for j in range(k):
                t += (states[i, j] - baseline[j]) * direction[j]
        acc = 0.0
        for j in range(k):
            s = states[i, j]
            if alpha != 0.0:
                m = alpha * (baseline[j] + t * direction[j]) + (1.0 - alpha) * s
            else:
                m = s
            d = m - goal[j]
            acc += d * d
        out[i] = 1.0 - 0.5 * acc
    return out
