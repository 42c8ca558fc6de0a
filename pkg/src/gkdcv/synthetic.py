"""Deterministic synthetic "face-like" image sets for smoke tests and demos.

Each class is an elliptical head with a class-specific arrangement of dark
blobs (eyes, nose, mouth, plus a few identity marks). Images within a class
jitter blob positions and contrast slightly and add pixel noise.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .image_io import save_pgm


def _blob(yy, xx, cy, cx, sy, sx):
    return np.exp(-(((yy - cy) / sy) ** 2 + ((xx - cx) / sx) ** 2) / 2)


def class_layout(rng: np.random.Generator) -> list[tuple[float, float, float, float, float]]:
    """(row, col, row sigma, col sigma, depth) per blob, in unit coordinates."""
    eye_y = rng.uniform(0.33, 0.42)
    eye_dx = rng.uniform(0.13, 0.2)
    blobs = [
        (eye_y, 0.5 - eye_dx, 0.04, rng.uniform(0.04, 0.07), rng.uniform(0.4, 0.6)),
        (eye_y, 0.5 + eye_dx, 0.04, rng.uniform(0.04, 0.07), rng.uniform(0.4, 0.6)),
        (rng.uniform(0.5, 0.58), 0.5, rng.uniform(0.05, 0.09), 0.03, rng.uniform(0.2, 0.35)),
        (rng.uniform(0.68, 0.76), 0.5, 0.03, rng.uniform(0.08, 0.14), rng.uniform(0.35, 0.55)),
    ]
    for _ in range(3):
        blobs.append((rng.uniform(0.2, 0.85), rng.uniform(0.25, 0.75),
                      rng.uniform(0.02, 0.05), rng.uniform(0.02, 0.05), rng.uniform(0.2, 0.45)))
    return blobs


def render(layout, height: int, width: int, rng: np.random.Generator, jitter: float = 0.012,
           noise: float = 0.02) -> np.ndarray:
    yy, xx = np.mgrid[0:height, 0:width] / np.array([height, width])[:, None, None]
    head = _blob(yy, xx, 0.5, 0.5, 0.32, 0.26)
    img = 0.15 + 0.65 * np.clip(head * 1.6, 0, 1)
    for cy, cx, sy, sx, depth in layout:
        dy, dx = rng.normal(0.0, jitter, size=2)
        img = img - depth * rng.uniform(0.85, 1.15) * _blob(yy, xx, cy + dy, cx + dx, sy, sx)
    img = img * rng.uniform(0.9, 1.1) + rng.normal(0.0, noise, size=img.shape)
    return np.clip(img, 0.0, 1.0)


def make_dataset(root, num_classes: int = 8, per_class: int = 5, height: int = 92, width: int = 112,
                 seed: int = 0) -> list[Path]:
    """Write ``root/class_XX/img_YY.pgm`` and return the written paths."""
    root = Path(root)
    rng = np.random.default_rng(seed)
    layouts = [class_layout(rng) for _ in range(num_classes)]
    written = []
    for c, layout in enumerate(layouts):
        d = root / f"class_{c:02d}"
        d.mkdir(parents=True, exist_ok=True)
        for i in range(per_class):
            path = d / f"img_{i:02d}.pgm"
            save_pgm(path, render(layout, height, width, rng))
            written.append(path)
    return written
