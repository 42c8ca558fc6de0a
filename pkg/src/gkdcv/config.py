"""Flat ``key=value`` pipeline configuration with dotted keys.

Example::

    # defaults
    image.height=92
    image.width=112
    gabor.sigma=6.283185307179586
    block.omega=7
    kernel.type=cosine
    measure=cos
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

from .blocks import BlockConfig
from .classifier import Measure
from .errors import ConfigError, GkdcvError
from .gabor import DEFAULT_SUPPORT, GaborParams
from .kdcv import DEFAULT_RANK_TOL
from .kernels import KernelSpec


@dataclass(frozen=True)
class PipelineConfig:
    gabor: GaborParams = field(default_factory=GaborParams)
    support: int = DEFAULT_SUPPORT
    block: BlockConfig = field(default_factory=BlockConfig)
    kernel: KernelSpec = field(default_factory=KernelSpec)
    measure: Measure = Measure.COS
    rank_tol: float = DEFAULT_RANK_TOL
    height: int = 92
    width: int = 112
    resize: bool = True

    def __post_init__(self):
        if self.height < 1 or self.width < 1:
            raise ConfigError(f"image size must be positive, got {self.height}x{self.width}")
        if self.support < 1 or self.support % 2 == 0:
            raise ConfigError(f"gabor.support must be a positive odd integer, got {self.support}")
        if self.support > min(self.height, self.width):
            raise ConfigError(f"gabor.support {self.support} exceeds image size {self.height}x{self.width}")
        if self.height < self.block.omega or self.width < self.block.omega:
            raise ConfigError("image is smaller than one block window")
        if not self.rank_tol > 0:
            raise ConfigError(f"rank_tol must be positive, got {self.rank_tol}")

    @property
    def feature_length(self) -> int:
        o, c = self.block.omega, self.block.c
        return (self.height // o) * (self.width // o) * c * c


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _num(v):
    return repr(float(v)) if isinstance(v, float) else str(v)


# key -> (section, attribute, parser)
_KEYS = {
    "image.height": ("top", "height", int),
    "image.width": ("top", "width", int),
    "image.resize": ("top", "resize", _bool),
    "gabor.k_max": ("gabor", "k_max", float),
    "gabor.f": ("gabor", "f", float),
    "gabor.sigma": ("gabor", "sigma", float),
    "gabor.num_scales": ("gabor", "num_scales", int),
    "gabor.num_orientations": ("gabor", "num_orientations", int),
    "gabor.support": ("top", "support", int),
    "block.omega": ("block", "omega", int),
    "block.c": ("block", "c", int),
    "kernel.type": ("kernel", "kind", str),
    "kernel.argument": ("kernel", "argument", str),
    "kernel.scale": ("kernel", "scale", lambda t: None if t.strip() in ("", "auto") else float(t)),
    "kernel.sigma": ("kernel", "sigma", float),
    "kernel.degree": ("kernel", "degree", int),
    "kernel.offset": ("kernel", "offset", float),
    "kernel.normalize": ("kernel", "normalize", _bool),
    "measure": ("top", "measure", Measure.parse),
    "rank_tol": ("top", "rank_tol", float),
}


def parse_config(text: str, base: PipelineConfig | None = None) -> PipelineConfig:
    updates: dict[str, dict] = {"top": {}, "gabor": {}, "block": {}, "kernel": {}}
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        if "=" not in s:
            raise ConfigError(f"config line {lineno}: expected key=value")
        key, value = (part.strip() for part in s.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"config line {lineno}: unknown key {key!r}")
        section, attr, conv = _KEYS[key]
        try:
            updates[section][attr] = conv(value)
        except (ValueError, GkdcvError) as exc:
            raise ConfigError(f"config line {lineno}: bad value for {key}: {exc}") from None

    cfg = base or PipelineConfig()
    try:
        return replace(
            cfg,
            gabor=replace(cfg.gabor, **updates["gabor"]),
            block=replace(cfg.block, **updates["block"]),
            kernel=replace(cfg.kernel, **updates["kernel"]),
            **updates["top"],
        )
    except GkdcvError as exc:
        raise ConfigError(str(exc)) from None


def format_config(cfg: PipelineConfig) -> str:
    sections = {"top": cfg, "gabor": cfg.gabor, "block": cfg.block, "kernel": cfg.kernel}
    lines = []
    for key, (section, attr, _) in _KEYS.items():
        v = getattr(sections[section], attr)
        if v is None:
            text = "auto"
        elif isinstance(v, Measure):
            text = v.value
        elif isinstance(v, bool):
            text = "true" if v else "false"
        else:
            text = _num(v)
        lines.append(f"{key}={text}")
    return "\n".join(lines) + "\n"


def load_config(path) -> PipelineConfig:
    path = Path(path)
    try:
        return parse_config(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc})") from exc


def save_config(cfg: PipelineConfig, path) -> None:
    Path(path).write_text(format_config(cfg), encoding="utf-8")
