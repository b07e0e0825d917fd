import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hmcolor import DimensionMismatch, ImageIOError
from hmcolor.imageio import (
    PhasedImage,
    find_plane,
    load_phased,
    load_stem,
    quantize,
    read_pfm,
    read_png,
    save_phased,
    save_stem,
    to_display,
    wrap_phase,
    write_pfm,
    write_png,
)


def test_missing_phase_is_zero():
    img = PhasedImage(np.ones((2, 3)))
    assert img.shape == (2, 3, 1)
    assert not img.has_phase() and not np.any(img.phase)


def test_invalid_planes():
    with pytest.raises(ValueError):
        PhasedImage(-np.ones((2, 2)))
    with pytest.raises(DimensionMismatch):
        PhasedImage(np.ones((2, 2, 3)), np.zeros((2, 2, 1)))


def test_from_complex():
    img = PhasedImage.from_complex(np.array([[1j, -2.0]]))
    assert img.amplitude[0, :, 0].tolist() == [1.0, 2.0]
    assert img.phase[0, :, 0] == pytest.approx([math.pi / 2, math.pi])


class TestPFM:
    def test_roundtrip_exact(self, tmp_path):
        rng = np.random.default_rng(1)
        for k in (1, 3):
            data = rng.normal(size=(5, 7, k)).astype(np.float32)
            write_pfm(tmp_path / "x.pfm", data)
            assert np.array_equal(read_pfm(tmp_path / "x.pfm"), data)

    def test_big_endian(self, tmp_path):
        data = np.arange(6, dtype=np.float32).reshape(2, 3)
        path = tmp_path / "be.pfm"
        path.write_bytes(b"Pf\n3 2\n1.0\n" + np.flipud(data).astype(">f4").tobytes())
        assert np.array_equal(read_pfm(path)[:, :, 0], data)

    def test_bad_files(self, tmp_path):
        (tmp_path / "bad.pfm").write_bytes(b"P6\n1 1\n255\n\0\0\0")
        with pytest.raises(ImageIOError):
            read_pfm(tmp_path / "bad.pfm")
        (tmp_path / "short.pfm").write_bytes(b"PF\n2 2\n-1.0\n\0\0\0\0")
        with pytest.raises(ImageIOError):
            read_pfm(tmp_path / "short.pfm")
        with pytest.raises(ImageIOError):
            read_pfm(tmp_path / "missing.pfm")


class TestPNG:
    @pytest.mark.parametrize("depth", [8, 16])
    def test_roundtrip(self, tmp_path, depth):
        data = np.random.default_rng(2).integers(0, 1 << depth, (4, 6, 3))
        write_png(tmp_path / "x.png", data, depth)
        back, levels = read_png(tmp_path / "x.png")
        assert levels == (1 << depth) - 1
        assert np.array_equal(back, data)

    def test_rejects_two_channels(self, tmp_path):
        with pytest.raises(ImageIOError):
            write_png(tmp_path / "x.png", np.zeros((2, 2, 2), int))


class TestPhasedFiles:
    def test_white_phase_is_two_pi(self, tmp_path):
        write_png(tmp_path / "a.png", np.full((2, 2, 3), 255), 8)
        write_png(tmp_path / "p.png", np.full((2, 2, 3), 255), 8)
        img = load_phased(tmp_path / "a.png", tmp_path / "p.png")
        assert np.all(img.amplitude == 1.0)
        assert np.allclose(img.phase, 2 * math.pi)

    def test_no_phase_file(self, tmp_path):
        write_png(tmp_path / "a.png", np.full((2, 2, 1), 128), 8)
        assert not np.any(load_phased(tmp_path / "a.png").phase)

    def test_phase_encoding(self, tmp_path):
        img = PhasedImage(np.full((1, 2), 0.25), np.array([[math.pi, 2 * math.pi]]))
        save_phased(img, tmp_path / "a.png", tmp_path / "p.png")
        data, _ = read_png(tmp_path / "p.png")
        assert data[0, :, 0].tolist() == [128, 0]  # rint(127.5) is even
        back = load_phased(tmp_path / "a.png")
        assert abs(back.amplitude[0, 0, 0] - 0.25) <= 1 / 255

    def test_mismatched_phase(self, tmp_path):
        write_png(tmp_path / "a.png", np.zeros((2, 2, 3), int), 8)
        write_png(tmp_path / "p.png", np.zeros((3, 2, 3), int), 8)
        with pytest.raises(DimensionMismatch):
            load_phased(tmp_path / "a.png", tmp_path / "p.png")

    @pytest.mark.parametrize("fmt,depth", [("png", 8), ("png", 16), ("pfm", 8)])
    def test_random_roundtrip(self, tmp_path, fmt, depth):
        rng = np.random.default_rng(3)
        img = PhasedImage(rng.uniform(0, 1, (8, 9, 3)), rng.uniform(-10, 10, (8, 9, 3)))
        save_stem(img, tmp_path / "s", fmt, depth)
        back, weights = load_stem(tmp_path / "s")
        assert weights is None
        levels = (1 << depth) - 1
        if fmt == "pfm":
            assert np.array_equal(back.amplitude, img.amplitude.astype(np.float32))
        else:
            assert np.abs(back.amplitude - img.amplitude).max() <= 1 / levels
        diff = np.abs(np.angle(np.exp(1j * (back.phase - img.phase))))
        assert diff.max() <= 2 * math.pi / levels

    def test_stem_lookup(self, tmp_path):
        assert find_plane(tmp_path / "none", "amp") is None
        with pytest.raises(ImageIOError):
            load_stem(tmp_path / "none")


class TestDisplay:
    def test_clamp(self):
        assert np.all(to_display(PhasedImage(np.full((2, 2), 2.0))) == 255)

    def test_normalize(self):
        out = to_display(PhasedImage(np.array([[0.0, 0.5, 1.0]])), "normalize")
        assert out[0, :, 0].tolist() == [0, 128, 255]
        assert not np.any(to_display(PhasedImage(np.zeros((2, 2))), "normalize"))

    def test_magnitude_is_clamp(self):
        img = PhasedImage(np.array([[0.3, 1.7]]), np.array([[1.0, 2.0]]))
        assert np.array_equal(to_display(img, "magnitude"), to_display(img, "clamp"))

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            to_display(PhasedImage(np.zeros((1, 1))), "gamma")

    @given(st.lists(st.floats(0, 1e6), min_size=1, max_size=20), st.sampled_from(["clamp", "normalize"]))
    def test_range(self, values, mode):
        out = to_display(PhasedImage(np.array([values])), mode)
        assert out.dtype == np.uint8


def test_quantize_half_even():
    assert quantize(np.array([0.5]), 8).tolist() == [128]
    assert quantize(np.array([-1.0, 2.0]), 8).tolist() == [0, 255]


@given(st.floats(-1e3, 1e3))
def test_wrap_phase_range(theta):
    w = float(wrap_phase(np.array(theta)))
    assert 0 <= w < 2 * math.pi
    assert math.isclose(math.cos(w), math.cos(theta), abs_tol=1e-9)
