"""Little-endian binary file formats.

``GWTPLANE``  magic(8) u32 height u32 width, then f64 plane (row-major).
``FEATMAT1``  magic(8) u32 rows u32 cols, then f64 matrix (row-major);
              a sidecar CSV ``<file>.csv`` maps rows to sources.
``KDCV1\\0``   magic(6) u16 version, then u32-length-prefixed sections:
              kernel, dims (u32 M d r p C), training features, labels (u32),
              eigenvalues, projection coefficients, common vectors,
              eigenvectors, null-space basis, Gram row means + grand mean,
              rank tolerance.
"""

from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .errors import FormatError
from .kdcv import KdcvModel
from .kernels import KernelSpec

PLANE_MAGIC = b"GWTPLANE"
FEAT_MAGIC = b"FEATMAT1"
MODEL_MAGIC = b"KDCV1\x00"
MODEL_VERSION = 1

_KIND_TAGS = {"cosine": 0, "rbf": 1, "polynomial": 2}
_ARG_TAGS = {"distance": 0, "inner": 1}


def _f64(a) -> bytes:
    return np.ascontiguousarray(a, dtype="<f8").tobytes()


def _matrix_bytes(magic: bytes, a: np.ndarray) -> bytes:
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    rows, cols = a.shape
    return magic + struct.pack("<II", rows, cols) + _f64(a)


def _read_matrix(path, magic: bytes) -> np.ndarray:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise FormatError(f"{path}: cannot read ({exc})") from exc
    if raw[:8] != magic or len(raw) < 16:
        raise FormatError(f"{path}: not a {magic.decode()} file")
    rows, cols = struct.unpack_from("<II", raw, 8)
    body = raw[16:]
    if len(body) != rows * cols * 8:
        raise FormatError(f"{path}: expected {rows}x{cols} f64 payload, found {len(body)} bytes")
    return np.frombuffer(body, dtype="<f8").reshape(rows, cols).astype(np.float64)


def write_plane(path, plane: np.ndarray) -> None:
    Path(path).write_bytes(_matrix_bytes(PLANE_MAGIC, plane))


def read_plane(path) -> np.ndarray:
    return _read_matrix(path, PLANE_MAGIC)


def write_features(path, X: np.ndarray, sources: list[tuple[str, int]] | None = None) -> None:
    """Write a feature matrix and, if given, its ``row,path,class_id`` sidecar."""
    path = Path(path)
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    path.write_bytes(_matrix_bytes(FEAT_MAGIC, X))
    if sources is not None:
        if len(sources) != X.shape[0]:
            raise FormatError(f"{len(sources)} sidecar rows for {X.shape[0]} feature rows")
        with open(sidecar_path(path), "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["row", "path", "class_id"])
            for i, (src, cid) in enumerate(sources):
                w.writerow([i, src, cid])


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".csv")


def read_features(path) -> tuple[np.ndarray, list[tuple[str, int]] | None]:
    X = _read_matrix(path, FEAT_MAGIC)
    side = sidecar_path(path)
    if not side.exists():
        return X, None
    with open(side, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if len(rows) != X.shape[0]:
        raise FormatError(f"{side}: {len(rows)} rows for {X.shape[0]} feature rows")
    return X, [(r["path"], int(r["class_id"])) for r in rows]


# -- model files -------------------------------------------------------------


def _kernel_section(spec: KernelSpec) -> bytes:
    head = struct.pack("<BBB", _KIND_TAGS[spec.kind], int(spec.normalize), _ARG_TAGS[spec.argument])
    if spec.kind == "cosine":
        params = [spec.scale]
    elif spec.kind == "rbf":
        params = [spec.sigma]
    else:
        params = [float(spec.degree), spec.offset]
    return head + _f64(params)


def _parse_kernel(buf: bytes) -> KernelSpec:
    kind_tag, normalize, arg_tag = struct.unpack_from("<BBB", buf, 0)
    params = np.frombuffer(buf[3:], dtype="<f8")
    kinds = {v: k for k, v in _KIND_TAGS.items()}
    args = {v: k for k, v in _ARG_TAGS.items()}
    if kind_tag not in kinds or arg_tag not in args:
        raise FormatError("model file has an unknown kernel tag")
    kind = kinds[kind_tag]
    if kind == "cosine":
        return KernelSpec("cosine", scale=float(params[0]), argument=args[arg_tag], normalize=bool(normalize))
    if kind == "rbf":
        return KernelSpec("rbf", sigma=float(params[0]), normalize=bool(normalize))
    return KernelSpec("polynomial", degree=int(params[0]), offset=float(params[1]), normalize=bool(normalize))


def model_bytes(model: KdcvModel) -> bytes:
    M, d = model.train_features.shape
    sections = [
        _kernel_section(model.kernel),
        struct.pack("<5I", M, d, model.rank, model.dim, model.num_classes),
        _f64(model.train_features),
        np.ascontiguousarray(model.labels, dtype="<u4").tobytes(),
        _f64(model.eig_values),
        _f64(model.coeff),
        _f64(model.common_vectors),
        _f64(model.eig_vectors),
        _f64(model.null_basis),
        _f64(np.append(model.gram_row_means, model.gram_mean)),
        _f64([model.rank_tol]),
    ]
    out = [MODEL_MAGIC, struct.pack("<H", MODEL_VERSION)]
    for s in sections:
        out.append(struct.pack("<I", len(s)))
        out.append(s)
    return b"".join(out)


def save_model(model: KdcvModel, path) -> None:
    Path(path).write_bytes(model_bytes(model))


def model_from_bytes(raw: bytes, origin="<bytes>") -> KdcvModel:
    if raw[:6] != MODEL_MAGIC:
        raise FormatError(f"{origin}: not a KDCV model file")
    (version,) = struct.unpack_from("<H", raw, 6)
    if version != MODEL_VERSION:
        raise FormatError(f"{origin}: unsupported model version {version}")
    pos = 8
    sections = []
    while pos < len(raw):
        if pos + 4 > len(raw):
            raise FormatError(f"{origin}: truncated section header")
        (n,) = struct.unpack_from("<I", raw, pos)
        pos += 4
        if pos + n > len(raw):
            raise FormatError(f"{origin}: truncated section")
        sections.append(raw[pos : pos + n])
        pos += n
    if len(sections) != 11:
        raise FormatError(f"{origin}: expected 11 sections, found {len(sections)}")

    def arr(buf, shape):
        a = np.frombuffer(buf, dtype="<f8").astype(np.float64)
        if a.size != int(np.prod(shape)):
            raise FormatError(f"{origin}: section size does not match dimensions {shape}")
        a = a.reshape(shape)
        a.setflags(write=False)
        return a

    kernel = _parse_kernel(sections[0])
    M, d, r, p, C = struct.unpack("<5I", sections[1])
    labels = np.frombuffer(sections[3], dtype="<u4").astype(np.int64)
    if labels.size != M:
        raise FormatError(f"{origin}: label count does not match M={M}")
    labels.setflags(write=False)
    means = arr(sections[9], (M + 1,))
    return KdcvModel(
        train_features=arr(sections[2], (M, d)),
        labels=labels,
        kernel=kernel,
        eig_values=arr(sections[4], (r,)),
        coeff=arr(sections[5], (M, p)),
        common_vectors=arr(sections[6], (C, p)),
        eig_vectors=arr(sections[7], (M, r)),
        null_basis=arr(sections[8], (r, p)),
        gram_row_means=means[:M],
        gram_mean=float(means[M]),
        rank_tol=float(arr(sections[10], (1,))[0]),
    )


def load_model(path) -> KdcvModel:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise FormatError(f"{path}: cannot read model ({exc})") from exc
    return model_from_bytes(raw, origin=str(path))
