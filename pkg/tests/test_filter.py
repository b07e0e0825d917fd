import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from hmcolor import DomainError, UnsupportedExponent
from hmcolor.filter import (
    Kernel,
    apply_stage,
    box_kernel,
    dilate,
    disk_image,
    erode,
    format_kernel,
    hm_filter,
    load_kernel,
    parse_kernel,
    pipeline,
)
from hmcolor.imageio import PhasedImage
from hmcolor.verify import brute_morph

P_GRID = [-4, -2, -1, -0.5, 0.5, 1, 2, 3, 4]

images = arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 6), st.just(1)),
                elements=st.floats(0.05, 1.0))


def spike():
    amp = np.zeros((3, 3))
    amp[1, 1] = 9.0
    return PhasedImage(amp)


class TestKernel:
    def test_box(self):
        assert box_kernel(7).weights.shape == (15, 15)
        assert box_kernel(0).weights.tolist() == [[1.0]]
        assert np.all(box_kernel(1).weights == 1)

    def test_invalid(self):
        with pytest.raises(ValueError):
            Kernel(np.ones((2, 3)))
        with pytest.raises(ValueError):
            Kernel(-np.ones((3, 3)))
        with pytest.raises(ValueError):
            Kernel(np.zeros((3, 3)))

    def test_text_roundtrip(self, tmp_path):
        k = Kernel(np.array([[0, 1, 0], [1, 3, 1], [0, 1, 0.5]]))
        path = tmp_path / "k.txt"
        path.write_text(format_kernel(k))
        assert np.array_equal(load_kernel(str(path)).weights, k.weights)
        assert load_kernel("box:2").weights.shape == (5, 5)

    def test_parse_errors(self):
        with pytest.raises(ValueError):
            parse_kernel("1 1\n1 1 1\n")
        with pytest.raises(ValueError):
            parse_kernel("")

    def test_taps_row_major_positive(self):
        k = Kernel(np.array([[0, 2, 0]]))
        assert list(k.taps()) == [(0, 0, 2.0)]


class TestHMFilter:
    def test_spike_examples(self):
        k = box_kernel(1)
        assert hm_filter(spike(), k, 1).amplitude[1, 1, 0] == pytest.approx(1.0)
        assert hm_filter(spike(), k, 2).amplitude[1, 1, 0] == pytest.approx(3.0)

    @given(st.floats(0.01, 5), st.sampled_from(P_GRID), st.integers(0, 3))
    def test_constant_preserved(self, c, p, n):
        img = PhasedImage(np.full((5, 6, 2), c))
        out = hm_filter(img, box_kernel(n, 1), p)
        assert np.abs(out.amplitude - c).max() <= 1e-10 * c

    @given(images)
    def test_p1_is_normalised_convolution(self, amp):
        k = Kernel(np.array([[1.0, 2.0, 0.0], [0.5, 4.0, 1.0], [0.0, 1.0, 3.0]]))
        got = hm_filter(PhasedImage(amp), k, 1).amplitude
        h, w = amp.shape[:2]
        padded = np.pad(amp, ((1, 1), (1, 1), (0, 0)), mode="edge")
        want = sum(k.weights[i, j] * padded[i:i + h, j:j + w] for i in range(3) for j in range(3))
        assert np.abs(got - want / k.weights.sum()).max() <= 1e-12

    @given(images)
    def test_monotone_in_p(self, amp):
        img = PhasedImage(amp)
        outs = [hm_filter(img, box_kernel(1), p).amplitude for p in P_GRID]
        for lo, hi in zip(outs, outs[1:]):
            assert np.all(hi >= lo * (1 - 1e-12))

    @given(images, st.sampled_from(P_GRID))
    def test_within_neighbourhood_range(self, amp, p):
        img = PhasedImage(amp)
        k = box_kernel(1)
        out = hm_filter(img, k, p).amplitude
        lo, hi = erode(img, k).amplitude, dilate(img, k).amplitude
        assert np.all(out >= lo * (1 - 1e-12)) and np.all(out <= hi * (1 + 1e-12))

    def test_identity_kernel(self):
        img = PhasedImage(np.random.default_rng(0).uniform(0.1, 1, (4, 4, 3)))
        for p in (-1, 2, 0.5):
            assert np.allclose(hm_filter(img, box_kernel(0), p).amplitude, img.amplitude, rtol=1e-14)

    def test_negative_p_lifts_zero(self):
        out = hm_filter(spike(), box_kernel(1), -1)
        assert np.all(np.isfinite(out.amplitude))
        with pytest.raises(DomainError):
            hm_filter(spike(), box_kernel(1), -1, eps=None)

    def test_zero_weight_taps_skipped(self):
        img = PhasedImage(np.array([[0.5, 2.0, 8.0]]))
        out = hm_filter(img, Kernel(np.array([[0.0, 1.0, 1.0]])), -2, eps=None)
        # the left tap has 0**-2 = inf weight if it is not skipped
        want = ((0.5**-2 + 2.0**-2) / 2) ** -0.5
        assert out.amplitude[0, 0, 0] == pytest.approx(want, rel=1e-14)

    def test_phase_interference(self):
        # opposite phases cancel under p = 1
        amp = np.ones((1, 2))
        phase = np.array([[0.0, math.pi]])
        out = hm_filter(PhasedImage(amp, phase), Kernel(np.array([[0.0, 1.0, 1.0]])), 1)
        assert out.amplitude[0, 0, 0] <= 1e-15

    def test_rejects_zero_and_limits(self):
        with pytest.raises(UnsupportedExponent):
            hm_filter(spike(), box_kernel(1), 0)
        with pytest.raises(UnsupportedExponent, match="geometric"):
            apply_stage(spike(), box_kernel(1), "geo")


class TestMorphology:
    def test_disk_grows_by_one(self):
        size = 32
        img = disk_image(size, radius=8, fg=(1.0,), bg=(0.0,))
        grown = dilate(img, box_kernel(1)).amplitude[:, :, 0]
        assert np.array_equal(grown, brute_morph(img.amplitude, np.ones((3, 3)), np.max)[:, :, 0])
        inside = img.amplitude[:, :, 0] > 0
        assert grown.sum() > inside.sum() and np.all(grown[inside] == 1)

    def test_weight_normalisation(self):
        w = np.ones((3, 3))
        w[1, 1] = 3
        out = dilate(PhasedImage(np.ones((4, 4))), Kernel(w))
        assert np.all(out.amplitude == 1.0)

    def test_erode_dilate_constant(self):
        img = PhasedImage(np.full((5, 5), 0.3))
        out = erode(dilate(img, box_kernel(2)), box_kernel(2))
        assert np.array_equal(out.amplitude, img.amplitude)

    @given(images)
    def test_matches_brute_force(self, amp):
        w = np.array([[0.5, 1.0, 0.0], [0.2, 0.9, 1.0], [1.0, 0.0, 0.3]])
        img = PhasedImage(amp)
        assert np.array_equal(dilate(img, Kernel(w)).amplitude, brute_morph(amp, w, np.max))
        assert np.array_equal(erode(img, Kernel(w)).amplitude, brute_morph(amp, w, np.min))

    def test_tie_takes_first_tap_phase(self):
        amp = np.ones((1, 3))
        phase = np.array([[0.1, 0.2, 0.3]])
        out = dilate(PhasedImage(amp, phase), Kernel(np.ones((1, 3))))
        # centre pixel's taps in row-major order start at the left neighbour
        assert out.phase[0, 1, 0] == 0.1

    def test_symbolic_stages(self):
        img = PhasedImage(np.random.default_rng(5).uniform(0.1, 1, (6, 6)))
        k = box_kernel(1)
        assert np.array_equal(apply_stage(img, k, "inf").amplitude, dilate(img, k).amplitude)
        assert np.array_equal(apply_stage(img, k, "-inf").amplitude, erode(img, k).amplitude)


class TestPipeline:
    def test_empty_and_identity(self):
        img = disk_image(16)
        assert pipeline(img, []) is img
        assert np.allclose(pipeline(img, [(box_kernel(0), 3.0)]).amplitude, img.amplitude)

    def test_blur_then_harmonic(self):
        img = disk_image(48, radius=14)
        k = box_kernel(3)
        twice = pipeline(img, [(k, 1.0), (k, 1.0)])
        recipe = pipeline(img, [(k, 1.0), (k, -1.0)])
        # the harmonic second pass never exceeds a second arithmetic pass
        assert np.all(recipe.amplitude <= twice.amplitude * (1 + 1e-12))
        assert np.any(recipe.amplitude < twice.amplitude * (1 - 1e-6))
        lo, hi = img.amplitude.min(axis=(0, 1)), img.amplitude.max(axis=(0, 1))
        assert np.all(recipe.amplitude >= lo - 1e-12) and np.all(recipe.amplitude <= hi + 1e-12)
