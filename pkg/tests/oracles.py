"""Independent reference computations used to check the package.

Everything here is written in plain Python (lists and ``math``), without
reusing any package code, so that agreement is evidence rather than tautology.
"""
import math


def dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def norm(a):
    return math.sqrt(dot(a, a))


def unit(a):
    n = norm(a)
    return [x / n for x in a]


def cosine(s, g):
    return dot(s, g) / (norm(s) * norm(g))


def regularized(s, b, g, alpha):
    """1 - 0.5 |alpha * P(s) + (1 - alpha) * s - g|^2 with P onto line(b, g)."""
    d = [gi - bi for gi, bi in zip(g, b)]
    dd = dot(d, d)
    t = dot([si - bi for si, bi in zip(s, b)], d) / dd
    proj = [bi + t * di for bi, di in zip(b, d)]
    mix = [alpha * p + (1 - alpha) * si for p, si in zip(proj, s)]
    r = [m - gi for m, gi in zip(mix, g)]
    return 1 - 0.5 * dot(r, r)


def pearson(x, y):
    n = len(x)
    mx, my = sum(x) / n, sum(y) / n
    cov = sum((a - mx) * (b - my) for a, b in zip(x, y)) / n
    vx = sum((a - mx) ** 2 for a in x) / n
    vy = sum((b - my) ** 2 for b in y) / n
    return cov / math.sqrt(vx * vy)


def epic(x, y):
    return math.sqrt(1 - pearson(x, y)) / math.sqrt(2)


def pixel_stats(img):
    """Mock-encoder statistics of an H x W x 3 nested list of 0..255 values."""
    h, w = len(img), len(img[0])
    cols = [0.0] * 12
    cols[0] = 1.0
    px = [(r, c, [v / 255 for v in img[r][c]]) for r in range(h) for c in range(w)]
    for k in range(3):
        cols[1 + k] = sum(p[2][k] for p in px) / (h * w)

    def ycoord(r):
        return 1 - (r + 0.5) / h

    def xcoord(c):
        return 2 * (c + 0.5) / w - 1

    warm = [(r, c, max(v[0] - v[2], 0.0)) for r, c, v in px]
    dark = [(r, c, 1 - max(v)) for r, c, v in px]
    m = sum(wt for _, _, wt in warm)
    cols[4] = m / (h * w)
    if m > 1e-9:
        cy = sum(wt * ycoord(r) for r, _, wt in warm) / m
        cx = sum(wt * xcoord(c) for _, c, wt in warm) / m
        vyy = sum(wt * (ycoord(r) - cy) ** 2 for r, _, wt in warm) / m
        vxx = sum(wt * (xcoord(c) - cx) ** 2 for _, c, wt in warm) / m
        vxy = sum(wt * (xcoord(c) - cx) * (ycoord(r) - cy) for r, c, wt in warm) / m
        cols[5], cols[6] = cy, cx
        if vxx + vyy > 1e-12:
            cols[7] = (vyy - vxx) / (vxx + vyy)
            cols[8] = 2 * vxy / (vxx + vyy)
    m = sum(wt for _, _, wt in dark)
    cols[9] = m / (h * w)
    if m > 1e-9:
        cols[10] = sum(wt * ycoord(r) for r, _, wt in dark) / m
        cols[11] = sum(wt * xcoord(c) for _, c, wt in dark) / m
    return cols
