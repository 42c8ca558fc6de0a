import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gkdcv.classifier import Measure, classify_many
from gkdcv.errors import DimensionError, FitError
from gkdcv.kdcv import common_vectors, fit, project, project_many
from gkdcv.kernels import KernelSpec, center, gram
from oracles import align_signs, explicit_dcv, gaussian_clusters

KERNELS = [
    KernelSpec.linear(),
    KernelSpec(),
    KernelSpec.cosine(normalize=False),
    KernelSpec.rbf(40.0),
    KernelSpec.polynomial(2, 1.0),
]


def _decisions(model, P, measure):
    return [r.predicted for r in classify_many(model, project_many(model, P), measure)]


def _pairwise(Y):
    return np.linalg.norm(Y[:, None, :] - Y[None, :, :], axis=2)


def test_two_class_toy(rng):
    X = np.vstack([rng.normal(size=(2, 10)), rng.normal(size=(2, 10)) + 5])
    y = np.array([0, 0, 1, 1])
    model = fit(X, y, KernelSpec.linear())
    assert model.dim == 1
    P = project_many(model, X)
    assert abs(P[0, 0] - P[1, 0]) < 1e-8
    assert abs(P[2, 0] - P[3, 0]) < 1e-8
    cv = common_vectors(model)
    assert cv.shape == (2, 1) and abs(cv[0, 0] - cv[1, 0]) > 1e-3


@pytest.mark.parametrize("kernel", KERNELS)
def test_model_invariants(kernel, rng):
    X, y = gaussian_clusters(rng)
    model = fit(X, y, kernel)
    assert model.dim == 4  # C - 1
    assert model.rank >= 1 and np.all(model.eig_values > 0)
    assert np.all(model.eig_values > model.rank_tol * model.eig_values.max())
    U, V = model.eig_vectors, model.null_basis
    assert np.abs(U.T @ U - np.eye(model.rank)).max() < 1e-10
    assert np.abs(V.T @ V - np.eye(model.dim)).max() < 1e-10
    # projection directions are orthonormal in feature space
    Kc = center(gram(model.kernel, X)).entries
    A = model.coeff
    assert np.abs(A.T @ Kc @ A - np.eye(model.dim)).max() < 1e-8

    P = project_many(model, X)
    cv = model.common_vectors
    scale = np.linalg.norm(cv, axis=1).max()
    assert np.abs(P - cv[y]).max() < 1e-6 * scale
    assert _pairwise(cv)[np.triu_indices(5, 1)].min() > 0


def test_project_single_matches_batch(rng):
    X, y = gaussian_clusters(rng)
    model = fit(X, y)
    np.testing.assert_array_equal(project(model, X[3]), project_many(model, X[3:4])[0])
    assert np.array_equal(model.project(X[3]), project(model, X[3]))


def test_project_length_mismatch(rng):
    X, y = gaussian_clusters(rng)
    model = fit(X, y)
    with pytest.raises(DimensionError):
        project(model, np.zeros(49))
    with pytest.raises(DimensionError):
        project(model, np.zeros((2, 50)))


def test_midpoint_projects_to_common_vector(rng):
    X, y = gaussian_clusters(rng)
    model = fit(X, y, KernelSpec.linear())
    mid = (X[0] + X[1]) / 2
    cv = model.common_vectors
    assert np.abs(project(model, mid) - cv[0]).max() < 1e-6 * np.abs(cv).max()


def test_duplicate_sample_keeps_geometry(rng):
    X, y, P, py = gaussian_clusters(rng, extra=3)
    for kernel in (KernelSpec.linear(), KernelSpec()):
        a = fit(X, y, kernel)
        b = fit(np.vstack([X, X[:1]]), np.r_[y, 0], kernel)
        da, db = _pairwise(a.common_vectors), _pairwise(b.common_vectors)
        assert np.abs(da - db).max() < 1e-6 * da.max()
        for m in Measure:
            assert _decisions(a, P, m) == _decisions(b, P, m)


def test_label_permutation_swaps_rows(rng):
    X, y = gaussian_clusters(rng, num_classes=2, per_class=3, dim=12)
    a = fit(X, y, KernelSpec.linear())
    b = fit(X, 1 - y, KernelSpec.linear())
    ca = a.common_vectors
    cb = align_signs(ca[[1, 0]], b.common_vectors)
    assert np.abs(cb - ca[[1, 0]]).max() < 1e-10 * max(1.0, np.abs(ca).max())


def test_scaling_keeps_decisions(rng):
    X, y, P, py = gaussian_clusters(rng, extra=4)
    a = fit(X, y, KernelSpec.linear())
    b = fit(2 * X, y, KernelSpec.linear())
    assert not np.allclose(a.common_vectors, b.common_vectors)
    for m in Measure:
        assert _decisions(a, P, m) == _decisions(b, 2 * P, m)


@given(seed=st.integers(0, 2**16), C=st.integers(2, 5), n=st.integers(2, 5), d=st.integers(12, 20))
@settings(max_examples=30, deadline=None)
def test_matches_explicit_dcv(seed, C, n, d):
    if C * n > 30 or C * n >= d:
        return
    rng = np.random.default_rng(seed)
    X, y, P, _ = gaussian_clusters(rng, num_classes=C, per_class=n, dim=d, extra=2)
    model = fit(X, y, KernelSpec.linear())
    W, mu = explicit_dcv(X, y)
    assert W.shape[1] == model.dim
    probes = np.vstack([X, P])
    ref = (probes - mu) @ W
    got = project_many(model, probes)
    # both bases span the same space; compare through an orthogonal alignment
    R, *_ = np.linalg.lstsq(got, ref, rcond=None)
    assert np.abs(R.T @ R - np.eye(model.dim)).max() < 1e-6
    assert np.abs(got @ R - ref).max() < 1e-6 * np.abs(ref).max()


def test_deterministic(rng):
    X, y = gaussian_clusters(rng)
    a, b = fit(X, y), fit(X, y)
    assert np.array_equal(a.coeff, b.coeff)
    assert np.array_equal(a.common_vectors, b.common_vectors)


def test_fit_errors(rng):
    X, y = gaussian_clusters(rng, num_classes=3, per_class=2, dim=10)
    with pytest.raises(FitError, match="two classes"):
        fit(X, np.zeros(6, dtype=int))
    with pytest.raises(FitError, match="contiguous"):
        fit(X, np.array([0, 0, 2, 2, 3, 3]))
    with pytest.raises(FitError, match="at least 2 samples"):
        fit(X, np.array([0, 0, 0, 1, 1, 2]))
    with pytest.raises(DimensionError):
        fit(X, y[:5])
    bad = X.copy()
    bad[0, 0] = np.nan
    with pytest.raises(FitError, match="non-finite"):
        fit(bad, y)


def test_duplicated_class_is_degenerate(rng):
    # the same samples under two labels: class means coincide
    A = rng.normal(size=(3, 10))
    X = np.vstack([A, A])
    with pytest.raises(FitError):
        fit(X, np.repeat([0, 1], 3), KernelSpec.linear())


def test_empty_null_space(rng):
    X, y = gaussian_clusters(rng, num_classes=2, per_class=6, dim=3)
    with pytest.raises(FitError, match="null space"):
        fit(X, y, KernelSpec.linear())
