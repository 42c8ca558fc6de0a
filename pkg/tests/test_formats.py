import struct
from dataclasses import replace

import numpy as np
import pytest

from gkdcv.errors import FormatError
from gkdcv.formats import (
    MODEL_MAGIC,
    load_model,
    model_bytes,
    model_from_bytes,
    read_features,
    read_plane,
    save_model,
    sidecar_path,
    write_features,
    write_plane,
)
from gkdcv.kdcv import fit, project_many
from gkdcv.kernels import KernelSpec
from oracles import gaussian_clusters


def test_plane_roundtrip(tmp_path, rng):
    a = rng.random((5, 9))
    p = tmp_path / "p.bin"
    write_plane(p, a)
    raw = p.read_bytes()
    assert raw[:8] == b"GWTPLANE" and struct.unpack_from("<II", raw, 8) == (5, 9)
    assert np.array_equal(read_plane(p), a)


def test_features_roundtrip(tmp_path, rng):
    X = rng.random((3, 4))
    p = tmp_path / "f.bin"
    write_features(p, X, [("a/x.pgm", 0), ("a,b/y.pgm", 1), ("z.pgm", 1)])
    Y, side = read_features(p)
    assert np.array_equal(X, Y)
    assert side == [("a/x.pgm", 0), ("a,b/y.pgm", 1), ("z.pgm", 1)]
    assert sidecar_path(p).name == "f.bin.csv"
    assert sidecar_path(p).read_text().splitlines()[0] == "row,path,class_id"


def test_features_without_sidecar(tmp_path):
    p = tmp_path / "f.bin"
    write_features(p, np.ones((2, 2)))
    assert read_features(p)[1] is None
    with pytest.raises(FormatError):
        write_features(p, np.ones((2, 2)), [("a", 0)])


def test_bad_matrix_files(tmp_path):
    p = tmp_path / "x.bin"
    p.write_bytes(b"GWTPLANE" + struct.pack("<II", 2, 2) + b"\0" * 8)
    with pytest.raises(FormatError, match="payload"):
        read_plane(p)
    with pytest.raises(FormatError, match="FEATMAT1"):
        read_features(p)
    with pytest.raises(FormatError, match="cannot read"):
        read_plane(tmp_path / "missing.bin")


@pytest.mark.parametrize(
    "kernel",
    [KernelSpec(), KernelSpec.cosine(normalize=False), KernelSpec.rbf(40.0), KernelSpec.polynomial(2, 1.5)],
)
def test_model_roundtrip_bit_exact(tmp_path, rng, kernel):
    X, y, P, _ = gaussian_clusters(rng, extra=20)
    model = fit(X, y, kernel)
    path = tmp_path / "m.kdcv"
    save_model(model, path)
    loaded = load_model(path)
    assert loaded.kernel == model.kernel
    assert np.array_equal(loaded.labels, model.labels)
    assert loaded.rank_tol == model.rank_tol and loaded.gram_mean == model.gram_mean
    assert np.array_equal(project_many(loaded, P), project_many(model, P))
    assert model_bytes(loaded) == model_bytes(model)


def test_inner_cosine_tag_roundtrip(rng):
    X, y = gaussian_clusters(rng)
    spec = KernelSpec.cosine(scale=1e-3, argument="inner", normalize=False)
    model = replace(fit(X, y), kernel=spec)
    assert model_from_bytes(model_bytes(model)).kernel == spec


def test_model_header(rng):
    X, y = gaussian_clusters(rng)
    raw = model_bytes(fit(X, y))
    assert raw[:6] == MODEL_MAGIC == b"KDCV1\x00"
    assert struct.unpack_from("<H", raw, 6) == (1,)


def test_model_corruption(rng, tmp_path):
    X, y = gaussian_clusters(rng)
    raw = model_bytes(fit(X, y))
    with pytest.raises(FormatError, match="not a KDCV"):
        model_from_bytes(b"XXXXXX" + raw[6:])
    with pytest.raises(FormatError, match="version"):
        model_from_bytes(raw[:6] + struct.pack("<H", 9) + raw[8:])
    with pytest.raises(FormatError, match="truncated"):
        model_from_bytes(raw[:-5])
    with pytest.raises(FormatError, match="cannot read"):
        load_model(tmp_path / "none.kdcv")
