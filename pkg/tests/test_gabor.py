import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gkdcv.errors import ConfigError, DimensionError
from gkdcv.gabor import GaborParams, convolve, kernel_bank, make_kernel, respond
from gkdcv.image_io import GrayImage
from oracles import direct_convolve

P = GaborParams()


def test_defaults():
    assert P.k_max == pytest.approx(math.pi / 2)
    assert P.f == pytest.approx(math.sqrt(2))
    assert P.sigma == pytest.approx(2 * math.pi)
    assert P.num_kernels == 40


def test_carrier_frequency_and_angle():
    assert make_kernel(0, 0, P).frequency == pytest.approx(math.pi / 2)
    assert make_kernel(2, 0, P).angle == pytest.approx(math.pi / 4)
    assert make_kernel(0, 3, P).frequency == pytest.approx(math.pi / 2 / math.sqrt(2) ** 3)


def test_kernel_formula_envelope_and_carrier():
    # away from the DC term, the grid is the enveloped complex carrier
    k = make_kernel(3, 1, P, support=33)
    kv, phi = k.frequency, k.angle
    y, x = 2, -5
    env = (kv**2 / P.sigma**2) * math.exp(-(kv**2) * (x * x + y * y) / (2 * P.sigma**2))
    dc = k.grid.sum()  # zero by construction
    assert abs(dc) < 1e-15
    carrier = complex(math.cos(kv * (x * math.cos(phi) + y * math.sin(phi))),
                      math.sin(kv * (x * math.cos(phi) + y * math.sin(phi))))
    val = k.grid[16 + y, 16 + x]
    # the DC constant is tiny for nu=1; the value is within that of env*carrier
    assert abs(val - env * carrier) < env * 2e-3


def test_dc_constant_matches_analytic_when_untruncated():
    # with a support much wider than the envelope the constant -> exp(-sigma^2/2)
    k = make_kernel(0, 0, P, support=129)
    kv = k.frequency
    half = 64
    y, x = np.mgrid[-half : half + 1, -half : half + 1]
    env = (kv**2 / P.sigma**2) * np.exp(-(kv**2) * (x * x + y * y) / (2 * P.sigma**2))
    carrier = np.exp(1j * kv * x)
    c = np.sum(env * carrier - k.grid) / np.sum(env)
    assert abs(c - math.exp(-P.sigma**2 / 2)) < 1e-12


@pytest.mark.parametrize("support", [9, 33])
def test_dc_free(support):
    for k in kernel_bank(P, support):
        assert abs(k.grid.sum()) / np.abs(k.grid).sum() < 1e-6
        assert k.support % 2 == 1


def test_energy_orientation_independent():
    # holds once the envelope is not clipped by the square support
    for nu in range(5):
        energies = [np.sum(np.abs(make_kernel(mu, nu, P, 129).grid) ** 2) for mu in range(8)]
        assert (max(energies) - min(energies)) / max(energies) < 1e-6


def test_energy_clipping_at_default_support():
    for nu in range(5):
        energies = [np.sum(np.abs(make_kernel(mu, nu, P, 33).grid) ** 2) for mu in range(8)]
        assert (max(energies) - min(energies)) / max(energies) < 1e-3


def test_orientation_angles():
    assert [make_kernel(mu, 0, P).angle for mu in range(8)] == pytest.approx([math.pi * m / 8 for m in range(8)])


def test_bad_kernel_args():
    with pytest.raises(ConfigError):
        make_kernel(0, 0, P, support=32)
    with pytest.raises(ConfigError):
        make_kernel(8, 0, P)
    with pytest.raises(ConfigError):
        make_kernel(0, 5, P)
    with pytest.raises(ConfigError):
        GaborParams(f=1.0)


def test_impulse_response_is_kernel():
    img = np.zeros((33, 33))
    img[16, 16] = 1.0
    k = make_kernel(5, 2, P, support=9)
    out = convolve(img, k)
    expected = np.zeros((33, 33), dtype=complex)
    expected[12:21, 12:21] = k.grid
    assert np.abs(out - expected).max() < 1e-10


def test_constant_image_annihilated():
    k = make_kernel(1, 0, P, support=9)
    out = convolve(np.full((40, 40), 0.5), k)
    # interior pixels see the whole kernel; edges see a truncated one
    inner = np.abs(out[4:-4, 4:-4])
    assert inner.max() < 1e-6 * 0.5 * np.abs(k.grid).sum()


@pytest.mark.parametrize("shape,support", [((16, 16), 5), ((12, 20), 9), ((9, 9), 9), ((7, 11), 3)])
def test_fft_matches_direct(rng, shape, support):
    img = rng.random(shape)
    k = make_kernel(int(rng.integers(8)), int(rng.integers(5)), P, support)
    fast = convolve(img, k)
    slow = direct_convolve(img, k.grid)
    assert np.abs(fast - slow).max() / np.abs(slow).max() < 1e-8


def test_kernel_larger_than_image():
    with pytest.raises(DimensionError):
        convolve(np.zeros((8, 40)), make_kernel(0, 0, P, 9))


def test_respond_planes_and_ordering(rng):
    img = GrayImage(rng.random((40, 36)))
    stack = respond(img, P, 9)
    assert stack.planes.shape == (40, 40, 36)
    assert np.all(stack.planes >= 0) and np.all(np.isfinite(stack.planes))
    # scale-major: plane index = nu * 8 + mu
    k = make_kernel(3, 2, P, 9)
    np.testing.assert_allclose(stack.planes[2 * 8 + 3], np.abs(convolve(img, k)), rtol=0, atol=1e-13)
    np.testing.assert_array_equal(stack.plane(3, 2), stack.planes[19])


def test_respond_zero_image():
    stack = respond(np.zeros((20, 20)), P, 9)
    assert np.all(stack.planes == 0)


def test_respond_scaling(rng):
    img = rng.random((24, 24)) * 0.5
    a = respond(img, P, 9).planes
    b = respond(2 * img, P, 9).planes
    mask = a > 1e-12
    assert np.max(np.abs(b[mask] / a[mask] - 2)) < 1e-12


def test_respond_threaded_matches_serial(rng, monkeypatch):
    img = rng.random((30, 30))
    serial = respond(img, P, 9, workers=1).planes
    monkeypatch.setenv("GKDCV_THREADS", "4")
    assert np.array_equal(respond(img, P, 9).planes, serial)


@given(a=st.floats(-3, 3), b=st.floats(-3, 3), seed=st.integers(0, 2**16))
@settings(max_examples=25, deadline=None)
def test_complex_linearity(a, b, seed):
    r = np.random.default_rng(seed)
    i1, i2 = r.random((12, 12)), r.random((12, 12))
    k = make_kernel(int(r.integers(8)), int(r.integers(5)), P, 5)
    lhs = convolve(a * i1 + b * i2, k)
    rhs = a * convolve(i1, k) + b * convolve(i2, k)
    assert np.abs(lhs - rhs).max() < 1e-12 * (1 + abs(a) + abs(b)) * np.abs(k.grid).sum() * 10
