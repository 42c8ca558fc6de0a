import math

import pytest

from gkdcv.classifier import Measure
from gkdcv.config import PipelineConfig, format_config, load_config, parse_config, save_config
from gkdcv.errors import ConfigError


def test_defaults():
    cfg = PipelineConfig()
    assert cfg.gabor.sigma == pytest.approx(2 * math.pi)
    assert cfg.support == 33
    assert (cfg.block.omega, cfg.block.c) == (7, 3)
    assert cfg.measure is Measure.COS
    assert cfg.feature_length == 1872


def test_roundtrip_fixed_point(tmp_path):
    text = "kernel.type=rbf\nkernel.sigma=12.5\nmeasure=l1\nblock.omega=9\nimage.resize=false\n"
    cfg = parse_config(text)
    assert cfg.kernel.kind == "rbf" and cfg.kernel.sigma == 12.5
    assert cfg.measure is Measure.L1 and cfg.block.omega == 9 and not cfg.resize
    once = format_config(cfg)
    assert parse_config(once) == cfg
    assert format_config(parse_config(once)) == once
    p = tmp_path / "c.cfg"
    save_config(cfg, p)
    assert load_config(p) == cfg


def test_float_repr_exact():
    cfg = parse_config(f"gabor.k_max={math.pi / 3!r}\nkernel.scale=0.1\n")
    again = parse_config(format_config(cfg))
    assert again.gabor.k_max == math.pi / 3
    assert again.kernel.scale == 0.1
    assert "kernel.scale=auto" in format_config(PipelineConfig())


@pytest.mark.parametrize(
    "text,match",
    [
        ("foo=1", "unknown key"),
        ("image.height", "key=value"),
        ("image.height=abc", "bad value"),
        ("block.c=4", "odd"),
        ("measure=l3", "measure"),
        ("gabor.support=32", "odd"),
        ("image.resize=maybe", "boolean"),
        ("image.height=20\nimage.width=20", "exceeds"),
    ],
)
def test_errors(text, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(text)


def test_comments_and_blank_lines():
    assert parse_config("# hi\n\n  measure = l2  \n").measure is Measure.L2


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "none.cfg")
