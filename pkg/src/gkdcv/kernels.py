"""Kernel evaluations, Gram matrices and feature-space centering."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, DimensionError, FitError

KINDS = ("cosine", "rbf", "polynomial")
COSINE_ARGUMENTS = ("distance", "inner")

# fit-time bounds: scale * max pairwise distance (distance argument) and
# scale * max <x, x> (inner-product argument)
COSINE_DISTANCE_BOUND = 0.5
COSINE_INNER_BOUND = 0.9


@dataclass(frozen=True)
class KernelSpec:
    """Kernel choice and parameters.

    ``cosine``: (pi/4) cos(pi * u / 2). With ``argument="distance"`` (the
    default) ``u = min(scale * |x - y|, 1)``, a compactly supported radial
    profile; :meth:`fitted` sets scale * (max pairwise training distance) to
    0.5. With ``argument="inner"``, ``u = scale * <x, y>`` and the fitted
    scale makes scale * max_i <x_i, x_i> = 0.9.
    ``rbf``: exp(-|x - y|^2 / sigma^2).
    ``polynomial``: (<x, y> + offset)^degree.
    With ``normalize`` the kernel becomes k(x, y) / sqrt(k(x, x) k(y, y)).
    """

    kind: str = "cosine"
    scale: float | None = None
    argument: str = "distance"
    sigma: float = 1.0
    degree: int = 1
    offset: float = 0.0
    normalize: bool = True

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown kernel type {self.kind!r}; choose from {', '.join(KINDS)}")
        if self.argument not in COSINE_ARGUMENTS:
            raise ConfigError(f"unknown cosine argument {self.argument!r}; choose distance or inner")
        if self.scale is not None and not self.scale > 0:
            raise ConfigError(f"cosine scale must be positive, got {self.scale}")
        if not self.sigma > 0:
            raise ConfigError(f"rbf sigma must be positive, got {self.sigma}")
        if int(self.degree) != self.degree or self.degree < 1:
            raise ConfigError(f"polynomial degree must be a positive integer, got {self.degree}")
        if self.offset < 0:
            raise ConfigError(f"polynomial offset must be non-negative, got {self.offset}")

    @classmethod
    def cosine(cls, scale=None, normalize=True, argument="distance"):
        return cls("cosine", scale=scale, argument=argument, normalize=normalize)

    @classmethod
    def rbf(cls, sigma, normalize=False):
        return cls("rbf", sigma=sigma, normalize=normalize)

    @classmethod
    def polynomial(cls, degree=1, offset=0.0, normalize=False):
        return cls("polynomial", degree=int(degree), offset=offset, normalize=normalize)

    @classmethod
    def linear(cls):
        return cls.polynomial(1, 0.0)

    def fitted(self, X) -> "KernelSpec":
        """Return a spec whose cosine scale is fixed from training data ``X``."""
        if self.kind != "cosine" or self.scale is not None:
            return self
        X = np.asarray(X, dtype=np.float64)
        if self.argument == "inner":
            peak = float(np.max(np.einsum("ij,ij->i", X, X)))
            if not peak > 0:
                raise FitError("cosine kernel scale undefined: every training vector is zero")
            return replace(self, scale=COSINE_INNER_BOUND / peak)
        peak = float(np.sqrt(np.max(_sq_dist(X, X))))
        if not peak > 0:
            raise FitError("cosine kernel scale undefined: all training vectors coincide")
        return replace(self, scale=COSINE_DISTANCE_BOUND / peak)


def _sq_dist(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    # shift to A's mean first; distances are translation invariant and this
    # limits cancellation in the norm expansion
    shift = A.mean(axis=0)
    A = A - shift
    B = B - shift
    sq = (
        np.einsum("ij,ij->i", A, A)[:, None]
        + np.einsum("ij,ij->i", B, B)[None, :]
        - 2.0 * (A @ B.T)
    )
    return np.maximum(sq, 0.0)


def _raw(spec: KernelSpec, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    if spec.kind == "rbf":
        return np.exp(-_sq_dist(A, B) / spec.sigma**2)
    if spec.kind == "polynomial":
        return (A @ B.T + spec.offset) ** spec.degree
    if spec.scale is None:
        raise ConfigError("cosine kernel used before its scale was fitted")
    if spec.argument == "inner":
        u = spec.scale * (A @ B.T)
    else:
        u = np.minimum(spec.scale * np.sqrt(_sq_dist(A, B)), 1.0)
    return (math.pi / 4) * np.cos(math.pi * u / 2)


def _self(spec: KernelSpec, A: np.ndarray) -> np.ndarray:
    if spec.kind == "rbf":
        return np.ones(A.shape[0])
    if spec.kind == "cosine" and spec.argument == "distance":
        return np.full(A.shape[0], math.pi / 4)
    sq = np.einsum("ij,ij->i", A, A)
    if spec.kind == "polynomial":
        return (sq + spec.offset) ** spec.degree
    if spec.scale is None:
        raise ConfigError("cosine kernel used before its scale was fitted")
    return (math.pi / 4) * np.cos(math.pi * spec.scale * sq / 2)


def _check_self(spec: KernelSpec, diag: np.ndarray) -> None:
    if np.any(diag <= 0):
        hint = " (probe norm exceeds the fitted cosine scale bound)" if spec.kind == "cosine" else ""
        raise FitError(f"{spec.kind} kernel self-similarity is not positive; cannot normalize{hint}")


def eval_kernel(spec: KernelSpec, x, y) -> float:
    """Scalar kernel value k(x, y)."""
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise DimensionError(f"kernel arguments differ in length: {x.size} vs {y.size}")

    def raw(a, b):
        if spec.kind == "rbf":
            d = a - b
            return math.exp(-float(d @ d) / spec.sigma**2)
        if spec.kind == "polynomial":
            return (float(a @ b) + spec.offset) ** spec.degree
        ip = float(a @ b)
        if spec.scale is None:
            raise ConfigError("cosine kernel used before its scale was fitted")
        if spec.argument == "inner":
            u = spec.scale * ip
        else:
            d = a - b
            u = min(spec.scale * math.sqrt(float(d @ d)), 1.0)
        return (math.pi / 4) * math.cos(math.pi * u / 2)

    value = raw(x, y)
    if spec.normalize:
        kxx, kyy = raw(x, x), raw(y, y)
        _check_self(spec, np.array([kxx, kyy]))
        value = value / math.sqrt(kxx * kyy)
    return value


def cross_kernel(spec: KernelSpec, A, B) -> np.ndarray:
    """Kernel matrix with entries k(A[i], B[j])."""
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    if A.shape[1] != B.shape[1]:
        raise DimensionError(f"feature length mismatch: {A.shape[1]} vs {B.shape[1]}")
    K = _raw(spec, A, B)
    if spec.normalize:
        da, db = _self(spec, A), _self(spec, B)
        _check_self(spec, da)
        _check_self(spec, db)
        K = K / np.sqrt(np.outer(da, db))
    return K


@dataclass(frozen=True)
class GramMatrix:
    entries: np.ndarray
    centered: bool = False

    @property
    def size(self) -> int:
        return self.entries.shape[0]


def gram(spec: KernelSpec, X) -> GramMatrix:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise DimensionError(f"need at least two feature vectors, got shape {X.shape}")
    K = cross_kernel(spec, X, X)
    upper = np.triu(K)
    K = upper + np.triu(K, 1).T
    if spec.normalize:
        np.fill_diagonal(K, 1.0)
    K.setflags(write=False)
    return GramMatrix(K)


def center(g: GramMatrix) -> GramMatrix:
    """Double-center: (I - 1_M) K (I - 1_M) with 1_M filled with 1/M."""
    if g.centered:
        raise ValueError("Gram matrix is already centered")
    K = g.entries
    row = K.mean(axis=1)
    col = K.mean(axis=0)
    Kc = K - row[:, None] - col[None, :] + K.mean()
    Kc = (Kc + Kc.T) / 2
    Kc.setflags(write=False)
    return GramMatrix(Kc, centered=True)


def center_cross(Kx: np.ndarray, train_row_means: np.ndarray, train_mean: float) -> np.ndarray:
    """Center probe kernel columns ``Kx`` (M x P) against the training set."""
    return Kx - Kx.mean(axis=0)[None, :] - train_row_means[:, None] + train_mean


def kernel_vector(spec: KernelSpec, X_train, x, train_gram: GramMatrix | None = None) -> np.ndarray:
    """Centered kernel vector <phi(x_i) - mean, phi(x) - mean> over training samples."""
    X_train = np.asarray(X_train, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != X_train.shape[1]:
        raise DimensionError(f"probe length {x.size} does not match training length {X_train.shape[1]}")
    if train_gram is None:
        train_gram = gram(spec, X_train)
    if train_gram.centered:
        raise ValueError("kernel_vector needs the uncentered training Gram")
    K = train_gram.entries
    kx = cross_kernel(spec, X_train, x[None, :])
    return center_cross(kx, K.mean(axis=1), float(K.mean()))[:, 0]
