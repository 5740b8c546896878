"""Time the numba kernels against their numpy twins.

    python3 benchmarks/bench_kernels.py [--repeat 20] [--json out.json]

Both implementations are imported directly, so the CLIPRM_NUMBA flag does not
matter here. The first numba call (compilation or cache load) is excluded.
"""
import argparse
import json
import math
import time

import numpy as np

from cliprm.envs import make_env
from cliprm.kernels import _numba as nbk
from cliprm.kernels import _numpy as npk


def _time(fn, repeat):
    fn()
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases():
    rng = np.random.default_rng(0)
    canvas = np.full((200, 300, 3), 255.0, np.float32)
    xs = np.array([120.0, 180.0, 170.0, 130.0])
    ys = np.array([40.0, 50.0, 160.0, 150.0])
    color = np.array([202.0, 152.0, 101.0], np.float32)
    tex = rng.uniform(0, 255, (16, 16, 3)).astype(np.float32)
    curve = 120 + 30 * np.sin(np.linspace(0, 6, 300 * 4))
    sprite = rng.uniform(0, 255, (24, 48, 4)).astype(np.float32)
    frames = rng.integers(0, 256, (256, 80, 120, 3), dtype=np.uint8)
    img = rng.uniform(0, 255, (400, 600, 3)).astype(np.float32)
    states = rng.standard_normal((3200, 768))
    states /= np.linalg.norm(states, axis=1, keepdims=True)
    g, b = states[0].copy(), states[1].copy()
    d = (g - b) / np.linalg.norm(g - b)

    return {
        "fill_polygon 300x200 ss4": lambda k: k.fill_polygon(canvas.copy(), xs, ys, color, 4),
        "fill_disc r=20 ss4": lambda k: k.fill_disc(canvas.copy(), 150.0, 100.0, 20.0, color, 4),
        "fill_under_curve 300x200 ss4": lambda k: k.fill_under_curve(canvas.copy(), curve, tex, 4),
        "blit_sprite x2 ss4": lambda k: k.blit_sprite(canvas.copy(), sprite, 150.0, 100.0, 0.3, 2.0, 4),
        "image_stats 256x80x120": lambda k: k.image_stats(frames),
        "resize 600x400->224x336": lambda k: k.resize_bilinear(img, 224, 336),
        "regularized_rewards 3200x768": lambda k: k.regularized_rewards(states, g, b, d, 0.5),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--json", help="also write results to this file")
    args = ap.parse_args(argv)

    rows = []
    for name, fn in cases().items():
        t_np = _time(lambda: fn(npk), args.repeat)
        t_nb = _time(lambda: fn(nbk), args.repeat)
        rows.append({"kernel": name, "numpy_ms": t_np * 1e3, "numba_ms": t_nb * 1e3, "speedup": t_np / t_nb})

    # end-to-end: one rendered CartPole frame, whichever backend the env picked up
    env = make_env("cartpole-nt", render_size=(120, 80))
    s = np.array([0.1, 0.0, 0.2, 0.0])
    t_render = _time(lambda: env.render(s), args.repeat)

    w = max(len(r["kernel"]) for r in rows)
    print(f"{'kernel':<{w}}  {'numpy ms':>9}  {'numba ms':>9}  {'speedup':>7}")
    for r in rows:
        print(f"{r['kernel']:<{w}}  {r['numpy_ms']:9.3f}  {r['numba_ms']:9.3f}  {r['speedup']:7.1f}")
    print(f"cartpole render 120x80 (active backend): {t_render * 1e6:.0f} us")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"kernels": rows, "cartpole_render_us": t_render * 1e6}, fh, indent=2)


if __name__ == "__main__":
    main()
