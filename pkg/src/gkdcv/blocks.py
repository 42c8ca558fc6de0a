"""Low-energy block features from a fused Gabor magnitude image."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DimensionError
from .gabor import ResponseStack

# how each window's block was produced
INTERIOR, BORDER, PSEUDO = "interior", "border", "pseudo"


@dataclass(frozen=True)
class BlockConfig:
    omega: int = 7
    c: int = 3

    def __post_init__(self):
        if self.omega < 1:
            raise ConfigError(f"window side must be >= 1, got {self.omega}")
        if self.c < 1 or self.c % 2 == 0:
            raise ConfigError(f"block side must be a positive odd integer, got {self.c}")
        if not 2 * self.c < self.omega:
            raise ConfigError(f"block side {self.c} must be less than half the window side {self.omega}")


@dataclass(frozen=True)
class FusedImage:
    grid: np.ndarray
    global_mean: float

    @property
    def shape(self) -> tuple[int, int]:
        return self.grid.shape

    @classmethod
    def from_grid(cls, grid) -> "FusedImage":
        g = np.array(grid, dtype=np.float64)
        g.setflags(write=False)
        return cls(g, float(g.mean()))


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    num_windows: int
    block_side: int
    cases: tuple[str, ...] = ()

    def __len__(self):
        return self.values.shape[0]


def fuse(stack: ResponseStack | np.ndarray) -> FusedImage:
    """Pointwise sum of all magnitude planes and its global mean."""
    planes = stack.planes if isinstance(stack, ResponseStack) else np.asarray(stack, dtype=np.float64)
    if planes.ndim != 3 or planes.shape[0] == 0:
        raise DimensionError(f"expected a non-empty (k, m, n) plane stack, got shape {planes.shape}")
    return FusedImage.from_grid(planes.sum(axis=0))


def window_count(m: int, n: int, cfg: BlockConfig) -> tuple[int, int]:
    return m // cfg.omega, n // cfg.omega


def extract(fused: FusedImage, cfg: BlockConfig = BlockConfig()) -> FeatureVector:
    """Collect one c x c block per omega x omega window, windows row-major.

    A window whose minimum does not exceed the global mean contributes the
    block of the fused image centred on that minimum (first minimum in
    row-major order); block pixels falling outside the image take the global
    mean. Windows whose minimum exceeds the global mean contribute a block
    filled with the global mean.
    """
    grid = fused.grid
    gbar = fused.global_mean
    m, n = grid.shape
    rows, cols = window_count(m, n, cfg)
    if rows < 1 or cols < 1:
        raise DimensionError(f"image {m}x{n} is smaller than one {cfg.omega}x{cfg.omega} window")

    w, c = cfg.omega, cfg.c
    h = c // 2
    padded = np.full((m + 2 * h, n + 2 * h), gbar)
    padded[h : h + m, h : h + n] = grid

    out = np.empty((rows * cols, c * c))
    cases = []
    for wr in range(rows):
        for wc in range(cols):
            idx = wr * cols + wc
            win = grid[wr * w : (wr + 1) * w, wc * w : (wc + 1) * w]
            flat = int(np.argmin(win))
            if win.flat[flat] > gbar:
                out[idx] = gbar
                cases.append(PSEUDO)
                continue
            r = wr * w + flat // w
            q = wc * w + flat % w
            # padded offset +h cancels the -h of the block's top-left corner
            out[idx] = padded[r : r + c, q : q + c].ravel()
            inside = h <= r < m - h and h <= q < n - h
            cases.append(INTERIOR if inside else BORDER)
    values = out.ravel()
    values.setflags(write=False)
    return FeatureVector(values, rows * cols, c, tuple(cases))


def features_from_stack(stack: ResponseStack, cfg: BlockConfig = BlockConfig()) -> FeatureVector:
    return extract(fuse(stack), cfg)
