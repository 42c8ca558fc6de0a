"""Kernel discriminative common vectors.

Training samples are mapped to the range of the feature-space total scatter
via kernel PCA, the null space of the within-class scatter is found there,
and directions carrying no between-class spread are discarded. Every
training sample of a class then projects onto the same point: the class
common vector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, FitError
from .kernels import KernelSpec, center, center_cross, cross_kernel, gram

DEFAULT_RANK_TOL = 1e-10


@dataclass(frozen=True)
class KdcvModel:
    train_features: np.ndarray  # (M, d)
    labels: np.ndarray  # (M,) ints in 0..C-1
    kernel: KernelSpec  # cosine scale already fitted
    eig_values: np.ndarray  # (r,) descending, strictly positive
    eig_vectors: np.ndarray  # (M, r)
    null_basis: np.ndarray  # (r, p)
    coeff: np.ndarray  # (M, p): projection is coeff.T @ centered kernel vector
    common_vectors: np.ndarray  # (C, p)
    gram_row_means: np.ndarray  # (M,) row means of the uncentered training Gram
    gram_mean: float
    rank_tol: float = DEFAULT_RANK_TOL

    @property
    def num_samples(self) -> int:
        return self.train_features.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.train_features.shape[1]

    @property
    def rank(self) -> int:
        return self.eig_values.shape[0]

    @property
    def dim(self) -> int:
        return self.coeff.shape[1]

    @property
    def num_classes(self) -> int:
        return self.common_vectors.shape[0]

    def project(self, x) -> np.ndarray:
        return project(self, x)


def _sym_eig_desc(S: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w, v = np.linalg.eigh((S + S.T) / 2)
    order = np.argsort(w, kind="stable")[::-1]
    return w[order], v[:, order]


def _fix_signs(V: np.ndarray) -> np.ndarray:
    if V.size == 0:
        return V
    pivots = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[pivots, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def _class_means(Z: np.ndarray, labels: np.ndarray, C: int) -> np.ndarray:
    return np.stack([Z[:, labels == i].mean(axis=1) for i in range(C)], axis=1)


def fit(X, labels, kernel: KernelSpec = KernelSpec(), rank_tol: float = DEFAULT_RANK_TOL) -> KdcvModel:
    X = np.array(X, dtype=np.float64)
    labels = np.asarray(labels)
    if X.ndim != 2:
        raise DimensionError(f"training features must be a 2-D array, got shape {X.shape}")
    M = X.shape[0]
    if labels.shape != (M,):
        raise DimensionError(f"{labels.size} labels for {M} training samples")
    if not np.all(np.isfinite(X)):
        raise FitError("training features contain non-finite values")
    labels = labels.astype(np.int64)
    classes = np.unique(labels)
    C = classes.size
    if C < 2:
        raise FitError("at least two classes are required")
    if not np.array_equal(classes, np.arange(C)):
        raise FitError(f"labels must be contiguous 0..C-1, got {classes.tolist()}")
    counts = np.bincount(labels, minlength=C)
    if counts.min() < 2:
        raise FitError(f"every class needs at least 2 samples; class {int(np.argmin(counts))} has {counts.min()}")

    kernel = kernel.fitted(X)
    K = gram(kernel, X)
    Kc = center(K).entries

    # kernel PCA onto the range of the total scatter; positive spectrum only
    lam, U = _sym_eig_desc(Kc)
    # relative to the largest magnitude: an indefinite kernel may have only
    # round-off among its positive eigenvalues
    spread = float(np.max(np.abs(lam))) if lam.size else 0.0
    keep = lam > rank_tol * spread
    if not keep.any():
        raise FitError("centered Gram matrix has no positive eigenvalues")
    lam, U = lam[keep], _fix_signs(U[:, keep])
    r = lam.size
    Z = (U / np.sqrt(lam)).T @ Kc  # (r, M)

    # null space of the reduced within-class scatter
    means = _class_means(Z, labels, C)
    D = Z - means[:, labels]
    Sw = D @ D.T
    w_eig, w_vec = _sym_eig_desc(Sw)
    thresh = rank_tol * max(float(np.trace(Sw)), 0.0) / r
    V = w_vec[:, w_eig <= thresh]
    if V.shape[1] == 0:
        raise FitError(
            "within-class scatter has an empty null space; use a larger feature "
            "dimension or fewer training samples per class"
        )

    # drop null directions of the projected between-class scatter, cap at C-1
    centred_means = means - Z.mean(axis=1, keepdims=True)
    Sb = (centred_means * counts) @ centred_means.T
    b_eig, b_vec = _sym_eig_desc(V.T @ Sb @ V)
    total = float(lam.sum())
    good = b_eig > rank_tol * total
    p = min(int(good.sum()), C - 1)
    if p == 0:
        raise FitError(
            "no discriminative directions: class means coincide in the within-class null space"
        )
    V = _fix_signs(V @ b_vec[:, :p])

    coeff = (U / np.sqrt(lam)) @ V
    projected = V.T @ Z  # (p, M)
    common = _class_means(projected, labels, C).T

    Kraw = K.entries
    for arr in (X, labels, lam, U, V, coeff, common):
        arr.setflags(write=False)
    return KdcvModel(
        train_features=X,
        labels=labels,
        kernel=kernel,
        eig_values=lam,
        eig_vectors=U,
        null_basis=V,
        coeff=coeff,
        common_vectors=common,
        gram_row_means=Kraw.mean(axis=1),
        gram_mean=float(Kraw.mean()),
        rank_tol=rank_tol,
    )


def centered_kernel(model: KdcvModel, X) -> np.ndarray:
    """Centered kernel columns (M x P) for probe rows ``X``."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.feature_dim:
        raise DimensionError(
            f"feature length {X.shape[1]} does not match the model's training length {model.feature_dim}"
        )
    Kx = cross_kernel(model.kernel, model.train_features, X)
    return center_cross(Kx, model.gram_row_means, model.gram_mean)


def project_many(model: KdcvModel, X) -> np.ndarray:
    """Discriminant vectors (P x p) for probe rows ``X``."""
    return (model.coeff.T @ centered_kernel(model, X)).T


def project(model: KdcvModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionError(f"expected a single feature vector, got shape {x.shape}")
    return project_many(model, x[None, :])[0]


def common_vectors(model: KdcvModel) -> np.ndarray:
    return model.common_vectors
