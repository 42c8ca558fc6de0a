"""Image-to-feature pipeline and batch helpers."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .blocks import FeatureVector, extract, fuse
from .config import PipelineConfig
from .errors import DimensionError, GkdcvError
from .gabor import kernel_bank, respond, thread_limit
from .image_io import GrayImage, load_image, resize


class Pipeline:
    """Load, rescale, filter, fuse and extract block features."""

    def __init__(self, config: PipelineConfig = PipelineConfig()):
        self.config = config
        self.bank = kernel_bank(config.gabor, config.support)

    def prepare(self, img: GrayImage, origin="image") -> GrayImage:
        cfg = self.config
        if img.shape == (cfg.height, cfg.width):
            return img
        if cfg.resize:
            return resize(img, cfg.height, cfg.width)
        raise DimensionError(
            f"{origin}: image is {img.height}x{img.width}, model input is {cfg.height}x{cfg.width} "
            "(enable image.resize to rescale)"
        )

    def features(self, img: GrayImage, workers: int | None = None) -> FeatureVector:
        stack = respond(img, self.config.gabor, self.config.support, bank=self.bank, workers=workers)
        return extract(fuse(stack), self.config.block)

    def features_from_path(self, path, workers: int | None = None) -> np.ndarray:
        try:
            img = self.prepare(load_image(path), origin=str(path))
            return self.features(img, workers=workers).values
        except GkdcvError as exc:
            msg = str(exc)
            if str(path) not in msg:
                msg = f"{path}: {msg}"
            raise type(exc)(msg) from exc

    def batch(self, paths) -> np.ndarray:
        """Feature rows for ``paths`` in order; files are processed in parallel."""
        paths = [Path(p) for p in paths]
        if not paths:
            return np.empty((0, self.config.feature_length))
        workers = min(thread_limit(), len(paths))
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                rows = list(pool.map(lambda p: self.features_from_path(p, workers=1), paths))
        else:
            rows = [self.features_from_path(p, workers=1) for p in paths]
        return np.vstack(rows)
