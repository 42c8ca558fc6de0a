"""Grayscale image loading, resizing and dataset manifests."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import ImageError, ManifestError

LUMA_WEIGHTS = (0.299, 0.587, 0.114)
ROLES = ("train", "probe-genuine", "probe-impostor")
IMAGE_SUFFIXES = (".pgm", ".png")


@dataclass(frozen=True)
class GrayImage:
    """Real-valued raster in [0, 1], stored as a (height, width) float64 array."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.array(self.pixels, dtype=np.float64, copy=True)
        if px.ndim != 2 or px.size == 0:
            raise ImageError(f"image must be a non-empty 2-D grid, got shape {px.shape}")
        if not np.all(np.isfinite(px)) or px.min() < 0.0 or px.max() > 1.0:
            raise ImageError("pixel values must be finite and within [0, 1]")
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape


def load_image(path) -> GrayImage:
    """Read an 8-bit PGM (P2/P5) or PNG (gray or RGB) file.

    RGB input is reduced to gray with BT.601 luma weights; values are
    divided by 255.
    """
    path = Path(path)
    try:
        with Image.open(path) as im:
            fmt = im.format
            mode = im.mode
            if fmt not in ("PPM", "PNG"):
                raise ImageError(f"{path}: unsupported image format {fmt!r} (expected PGM or PNG)")
            if mode == "P":
                im = im.convert("RGB")
                mode = "RGB"
            if mode not in ("L", "RGB"):
                raise ImageError(
                    f"{path}: unsupported pixel mode {mode!r}; only 8-bit gray or 8-bit RGB is accepted"
                )
            data = np.asarray(im, dtype=np.float64)
    except FileNotFoundError as exc:
        raise ImageError(f"{path}: file not found") from exc
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise ImageError(f"{path}: unreadable image ({exc})") from exc

    if data.ndim == 3:
        w = np.asarray(LUMA_WEIGHTS)
        data = data[..., 0] * w[0] + data[..., 1] * w[1] + data[..., 2] * w[2]
    return GrayImage(np.clip(data / 255.0, 0.0, 1.0))


def save_pgm(path, pixels: np.ndarray) -> None:
    """Write a 2-D array in [0, 1] as a binary P5 PGM (maxval 255)."""
    u8 = np.clip(np.rint(np.asarray(pixels, dtype=np.float64) * 255.0), 0, 255).astype(np.uint8)
    h, w = u8.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(u8.tobytes())


def resize(img: GrayImage, m: int, n: int) -> GrayImage:
    """Bilinear resize to ``m`` rows by ``n`` columns.

    Corner pixels map onto corner pixels. Same-size input is returned
    unchanged.
    """
    if m < 1 or n < 1:
        raise ValueError(f"target size must be positive, got {m}x{n}")
    src = img.pixels
    h, w = src.shape
    if (h, w) == (m, n):
        return img

    def coords(out_len, in_len):
        if out_len == 1 or in_len == 1:
            pos = np.zeros(out_len)
        else:
            pos = np.arange(out_len) * ((in_len - 1) / (out_len - 1))
        lo = np.minimum(np.floor(pos).astype(int), in_len - 1)
        hi = np.minimum(lo + 1, in_len - 1)
        return lo, hi, pos - lo

    r0, r1, fr = coords(m, h)
    c0, c1, fc = coords(n, w)
    fr = fr[:, None]
    fc = fc[None, :]
    top = src[np.ix_(r0, c0)] * (1 - fc) + src[np.ix_(r0, c1)] * fc
    bot = src[np.ix_(r1, c0)] * (1 - fc) + src[np.ix_(r1, c1)] * fc
    out = top * (1 - fr) + bot * fr
    return GrayImage(np.clip(out, 0.0, 1.0))


# -- manifests ---------------------------------------------------------------


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    class_id: int
    role: str


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple[ManifestEntry, ...]
    base_dir: Path = field(default=Path("."), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        validate_manifest(self.entries)

    @property
    def num_classes(self) -> int:
        return len({e.class_id for e in self.entries})

    def by_role(self, role: str) -> list[ManifestEntry]:
        return [e for e in self.entries if e.role == role]

    def train_counts(self) -> dict[int, int]:
        counts: dict[int, int] = {}
        for e in self.by_role("train"):
            counts[e.class_id] = counts.get(e.class_id, 0) + 1
        return counts

    def resolve(self, entry: ManifestEntry) -> Path:
        p = Path(entry.path)
        return p if p.is_absolute() else self.base_dir / p


def validate_manifest(entries: Sequence[ManifestEntry]) -> None:
    ids = sorted({e.class_id for e in entries})
    if ids and ids != list(range(len(ids))):
        raise ManifestError(f"class ids must be contiguous 0..C-1, got {ids}")
    counts: dict[int, int] = {}
    for e in entries:
        if e.role not in ROLES:
            raise ManifestError(f"unknown role {e.role!r} for {e.path}")
        if e.role == "train":
            counts[e.class_id] = counts.get(e.class_id, 0) + 1
    few = sorted(c for c, n in counts.items() if n < 2)
    if few:
        raise ManifestError(f"classes with fewer than 2 training images: {few}")


def parse_manifest(text: str, base_dir=Path(".")) -> DatasetManifest:
    entries = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = next(csv.reader([stripped]))
        if len(fields) != 3:
            raise ManifestError(f"line {lineno}: expected '<path>,<class_id>,<role>', got {len(fields)} field(s)")
        path, cid, role = (f.strip() for f in fields)
        try:
            class_id = int(cid)
        except ValueError:
            raise ManifestError(f"line {lineno}: class id {cid!r} is not an integer") from None
        if class_id < 0:
            raise ManifestError(f"line {lineno}: negative class id {class_id}")
        if role not in ROLES:
            raise ManifestError(f"line {lineno}: unknown role {role!r}")
        entries.append(ManifestEntry(path, class_id, role))
    return DatasetManifest(tuple(entries), Path(base_dir))


def load_manifest(path) -> DatasetManifest:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ManifestError(f"{path}: cannot read manifest ({exc})") from exc
    return parse_manifest(text, base_dir=path.parent)


def format_manifest(entries: Iterable[ManifestEntry]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for e in entries:
        writer.writerow([e.path, e.class_id, e.role])
    return buf.getvalue()


def write_manifest(manifest: DatasetManifest, path) -> None:
    Path(path).write_text(format_manifest(manifest.entries), encoding="utf-8")


def first_k_split(root, k: int) -> DatasetManifest:
    """Build a manifest from a directory-per-class tree.

    Class directories and the images inside them are ordered
    lexicographically; the first ``k`` images of each class become training
    entries and the rest genuine probes. Paths are stored relative to
    ``root``.
    """
    root = Path(root)
    if k < 1:
        raise ManifestError(f"k must be >= 1, got {k}")
    class_dirs = sorted((d for d in root.iterdir() if d.is_dir()), key=lambda d: d.name)
    if not class_dirs:
        raise ManifestError(f"{root}: no class directories found")
    entries = []
    for cid, d in enumerate(class_dirs):
        files = sorted(
            (f.name for f in d.iterdir() if f.is_file() and f.suffix.lower() in IMAGE_SUFFIXES)
        )
        if len(files) <= k:
            raise ManifestError(
                f"{d}: class has {len(files)} image(s); need more than k={k} to leave probes"
            )
        for i, name in enumerate(files):
            role = "train" if i < k else "probe-genuine"
            entries.append(ManifestEntry(f"{d.name}/{name}", cid, role))
    return DatasetManifest(tuple(entries), root)
