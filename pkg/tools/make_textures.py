"""Regenerate the bundled MountainCar texture PNGs (deterministic)."""
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

OUT = Path(__file__).resolve().parents[1] / "src" / "cliprm" / "envs" / "assets"


def sky():
    t = np.linspace(0, 1, 128)[:, None]
    top, horizon = np.array([70, 130, 200]), np.array([200, 225, 245])
    col = top * (1 - t) + horizon * t
    return Image.fromarray(np.repeat(col[:, None, :], 8, axis=1).astype(np.uint8))


def mountain():
    rng = np.random.default_rng(7)
    base = np.array([96, 110, 70], dtype=np.float64)  # mossy rock
    noise = rng.normal(0, 1, (16, 16))
    noise = np.kron(noise, np.ones((4, 4)))
    fine = rng.normal(0, 1, (64, 64))
    img = base[None, None, :] + 18 * noise[..., None] + 8 * fine[..., None]
    img[..., 2] -= 10
    return Image.fromarray(np.clip(img, 0, 255).astype(np.uint8))


def car():
    im = Image.new("RGBA", (96, 48), (0, 0, 0, 0))
    d = ImageDraw.Draw(im)
    d.rounded_rectangle((4, 18, 92, 38), radius=6, fill=(200, 30, 30, 255))
    d.polygon([(24, 18), (34, 4), (66, 4), (78, 18)], fill=(180, 25, 25, 255))
    d.polygon([(30, 17), (37, 7), (49, 7), (49, 17)], fill=(170, 210, 235, 255))
    d.polygon([(53, 17), (53, 7), (64, 7), (72, 17)], fill=(170, 210, 235, 255))
    for cx in (24, 72):
        d.ellipse((cx - 10, 28, cx + 10, 48), fill=(25, 25, 25, 255))
        d.ellipse((cx - 4, 34, cx + 4, 42), fill=(160, 160, 160, 255))
    return im


if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    sky().save(OUT / "sky.png")
    mountain().save(OUT / "mountain.png")
    car().save(OUT / "car.png")
    print("wrote", sorted(p.name for p in OUT.glob("*.png")))
