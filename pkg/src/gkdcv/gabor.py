"""Gabor wavelet family and FFT-based magnitude responses."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DimensionError
from .image_io import GrayImage

DEFAULT_SUPPORT = 33


@dataclass(frozen=True)
class GaborParams:
    k_max: float = math.pi / 2
    f: float = math.sqrt(2.0)
    sigma: float = 2 * math.pi
    num_scales: int = 5
    num_orientations: int = 8

    def __post_init__(self):
        if not self.k_max > 0:
            raise ConfigError(f"k_max must be positive, got {self.k_max}")
        if not self.f > 1:
            raise ConfigError(f"spacing factor f must exceed 1, got {self.f}")
        if not self.sigma > 0:
            raise ConfigError(f"sigma must be positive, got {self.sigma}")
        if self.num_scales < 1 or self.num_orientations < 1:
            raise ConfigError("scale and orientation counts must be >= 1")

    def frequency(self, nu: int) -> float:
        return self.k_max / self.f**nu

    def orientation(self, mu: int) -> float:
        return math.pi * mu / 8

    @property
    def num_kernels(self) -> int:
        return self.num_scales * self.num_orientations


@dataclass(frozen=True)
class GaborKernel:
    mu: int
    nu: int
    grid: np.ndarray  # complex (s, s); row index is y, column index is x
    frequency: float
    angle: float

    @property
    def support(self) -> int:
        return self.grid.shape[0]


def make_kernel(mu: int, nu: int, params: GaborParams = GaborParams(), support: int = DEFAULT_SUPPORT) -> GaborKernel:
    """Sample the Gabor wavelet of orientation ``mu`` and scale ``nu``.

    The wave vector is ``k_nu * (cos phi_mu, sin phi_mu)`` with
    ``k_nu = k_max / f**nu`` and ``phi_mu = pi * mu / 8``. The grid is a
    Gaussian-enveloped complex carrier minus a constant times the envelope.
    The constant is the envelope-weighted mean of the carrier over the
    sampled support, so the sampled grid sums to zero; on an untruncated
    continuous plane this constant equals ``exp(-sigma**2 / 2)``.
    """
    if support < 1 or support % 2 == 0:
        raise ConfigError(f"kernel support must be a positive odd integer, got {support}")
    if not 0 <= mu < params.num_orientations:
        raise ConfigError(f"orientation index {mu} outside 0..{params.num_orientations - 1}")
    if not 0 <= nu < params.num_scales:
        raise ConfigError(f"scale index {nu} outside 0..{params.num_scales - 1}")

    k = params.frequency(nu)
    phi = params.orientation(mu)
    sigma2 = params.sigma**2
    half = support // 2
    y, x = np.mgrid[-half : half + 1, -half : half + 1].astype(np.float64)

    envelope = (k * k / sigma2) * np.exp(-(k * k) * (x * x + y * y) / (2 * sigma2))
    carrier = np.exp(1j * k * (x * math.cos(phi) + y * math.sin(phi)))
    dc = np.sum(envelope * carrier) / np.sum(envelope)
    grid = envelope * (carrier - dc)
    grid.setflags(write=False)
    return GaborKernel(mu=mu, nu=nu, grid=grid, frequency=k, angle=phi)


def kernel_bank(params: GaborParams = GaborParams(), support: int = DEFAULT_SUPPORT) -> list[GaborKernel]:
    """All kernels, scale-major: (nu=0, mu=0..), (nu=1, mu=0..), ..."""
    return [
        make_kernel(mu, nu, params, support)
        for nu in range(params.num_scales)
        for mu in range(params.num_orientations)
    ]


def _fft_shape(m: int, n: int, s: int) -> tuple[int, int]:
    # large enough that the circular product equals the linear convolution
    return m + s - 1, n + s - 1


def _as_array(img) -> np.ndarray:
    return img.pixels if isinstance(img, GrayImage) else np.asarray(img, dtype=np.float64)


def convolve(img, kernel: GaborKernel) -> np.ndarray:
    """Linear convolution of ``img`` with ``kernel`` via zero-padded FFTs.

    Returns the complex m x n plane aligned so that the kernel centre sits
    on each output pixel.
    """
    data = _as_array(img)
    m, n = data.shape
    s = kernel.support
    if s > min(m, n):
        raise DimensionError(f"kernel support {s} exceeds image size {m}x{n}")
    shape = _fft_shape(m, n, s)
    spec = np.fft.fft2(data, shape) * np.fft.fft2(kernel.grid, shape)
    full = np.fft.ifft2(spec)
    h = s // 2
    return full[h : h + m, h : h + n]


@dataclass(frozen=True)
class ResponseStack:
    planes: np.ndarray  # (num_kernels, m, n) float64, scale-major
    num_scales: int
    num_orientations: int

    @property
    def shape(self) -> tuple[int, int]:
        return self.planes.shape[1:]

    def plane(self, mu: int, nu: int) -> np.ndarray:
        return self.planes[nu * self.num_orientations + mu]


def thread_limit() -> int:
    """Worker cap from ``GKDCV_THREADS``, else the CPU count."""
    env = os.environ.get("GKDCV_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"GKDCV_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def respond(img, params: GaborParams = GaborParams(), support: int = DEFAULT_SUPPORT,
            bank: list[GaborKernel] | None = None, workers: int | None = None) -> ResponseStack:
    """Magnitude of the image convolved with every kernel of the bank."""
    data = _as_array(img)
    if bank is None:
        bank = kernel_bank(params, support)
    m, n = data.shape
    s = bank[0].support
    if s > min(m, n):
        raise DimensionError(f"kernel support {s} exceeds image size {m}x{n}")
    shape = _fft_shape(m, n, s)
    img_spec = np.fft.fft2(data, shape)
    h = s // 2

    def one(kernel):
        full = np.fft.ifft2(img_spec * np.fft.fft2(kernel.grid, shape))
        return np.abs(full[h : h + m, h : h + n])

    planes = np.empty((len(bank), m, n))
    workers = min(thread_limit() if workers is None else max(1, workers), len(bank))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for i, p in enumerate(pool.map(one, bank)):
                planes[i] = p
    else:
        for i, k in enumerate(bank):
            planes[i] = one(k)
    planes.setflags(write=False)
    return ResponseStack(planes, params.num_scales, params.num_orientations)
