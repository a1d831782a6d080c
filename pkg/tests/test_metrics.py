import json
import math

import numpy as np
import pytest

from magniglyph import (Raster, Rect, SsimConfig, SynthSpec, evaluate, mssim,
                        regional_ssim, ssim_map, synth_scene, to_luma)
from magniglyph.metrics import expand_region

from conftest import random_raster
from oracles import ssim_map_oracle


class TestSsimMap:
    def test_identical_planes_exactly_one(self, rng):
        a = rng.random((20, 24)) * 255
        m = ssim_map(a, a)
        assert (m == 1.0).all()

    def test_constant_vs_constant_scalar_formula(self):
        a = np.full((16, 16), 100.0)
        b = np.full((16, 16), 150.0)
        c1 = (0.01 * 255) ** 2
        # luminance term only: contrast/structure cancel for constants
        expected = (2 * 100 * 150 + c1) / (100 ** 2 + 150 ** 2 + c1)
        m = ssim_map(a, b)
        assert np.allclose(m, expected, atol=1e-6)

    def test_matches_naive_oracle(self, rng):
        for _ in range(5):
            a = rng.random((16, 16)) * 255
            b = rng.random((16, 16)) * 255
            assert np.abs(ssim_map(a, b) - ssim_map_oracle(a, b)).max() < 1e-9

    def test_map_shape_valid_windows_only(self, rng):
        a = rng.random((15, 30)) * 255
        assert ssim_map(a, a).shape == (5, 20)

    def test_values_in_range(self, rng):
        for _ in range(5):
            a = rng.random((14, 14)) * 255
            b = rng.random((14, 14)) * 255
            m = ssim_map(a, b)
            assert (m >= -1.0 - 1e-12).all() and (m <= 1.0 + 1e-12).all()

    def test_too_small_image(self, rng):
        a = rng.random((8, 8))
        with pytest.raises(ValueError, match="smaller than"):
            ssim_map(a, a)

    def test_dimension_mismatch(self, rng):
        with pytest.raises(ValueError):
            ssim_map(rng.random((12, 12)), rng.random((12, 13)))

    def test_window_normalized(self):
        win = SsimConfig().window()
        assert (win > 0).all()
        assert abs(win.sum() - 1.0) < 1e-12


class TestMssim:
    def test_self_similarity(self, rng):
        img = random_raster(rng, 16, 16)
        assert mssim(img, img) == 1.0

    def test_symmetry(self, rng):
        a = random_raster(rng, 18, 14)
        b = random_raster(rng, 18, 14)
        assert mssim(a, b) == pytest.approx(mssim(b, a), abs=1e-12)

    def test_inverted_image_scores_low(self):
        img, _, _ = synth_scene(SynthSpec(seed=4, distractor_count=2))
        inverted = Raster(255 - img.pixels)
        assert mssim(img, inverted) < 0.3

    def test_shared_constant_shift_keeps_identity(self, rng):
        img = random_raster(rng, 16, 16)
        shifted = Raster(np.clip(img.pixels.astype(int) + 30, 0, 255).astype(np.uint8))
        assert mssim(shifted, shifted) == 1.0


class TestRegionalSsim:
    def test_identical_images_any_region(self, rng):
        img = random_raster(rng, 30, 20)
        assert regional_ssim(img, img, Rect(3, 3, 9, 9)) == 1.0

    def test_difference_outside_region_ignored(self, rng):
        a = random_raster(rng, 40, 30)
        px = a.pixels.copy()
        px[0:5, 30:40] = 255 - px[0:5, 30:40]
        b = Raster(px)
        # region far from the change; window expansion stays clear of it
        assert regional_ssim(a, b, Rect(2, 15, 14, 28)) == 1.0

    def test_difference_inside_region_detected(self, rng):
        a = random_raster(rng, 30, 20)
        px = a.pixels.copy()
        px[8:12, 8:12] = 255 - px[8:12, 8:12]
        b = Raster(px)
        assert regional_ssim(a, b, Rect(5, 5, 16, 16)) < 1.0

    def test_small_region_expanded_to_window(self):
        r = expand_region(Rect(5, 5, 8, 8), (30, 30))
        assert r.width >= 11 and r.height >= 11
        assert 0 <= r.x0 and r.x1 <= 30

    def test_expansion_shifts_inward_at_border(self):
        r = expand_region(Rect(0, 0, 3, 3), (30, 30))
        assert (r.x0, r.y0) == (0, 0)
        assert r.width == 11 and r.height == 11

    def test_unreachable_window_errors(self, rng):
        a = random_raster(rng, 8, 8)
        with pytest.raises(ValueError):
            regional_ssim(a, a, Rect(0, 0, 8, 8))


class TestEvaluate:
    def _pairs(self, rng, n_images=3, n_regions=2):
        pairs = []
        for i in range(n_images):
            gt = random_raster(rng, 32, 24)
            regions = [Rect(2 + 9 * k, 3, 14 + 9 * k, 15) for k in range(n_regions)]
            pairs.append((f"img{i}", gt, gt, regions))
        return pairs

    def test_perfect_prediction(self, rng):
        report = evaluate(self._pairs(rng))
        assert report.grand_mean == 1.0
        assert all(m == 1.0 for m in report.mean_per_image)

    def test_single_region_grand_mean(self, rng):
        gt = random_raster(rng, 32, 24)
        px = gt.pixels.copy()
        px[5:15, 5:15] ^= 0xFF
        pred = Raster(px)
        region = Rect(4, 4, 16, 16)
        report = evaluate([("one", pred, gt, [region])])
        assert report.grand_mean == pytest.approx(
            regional_ssim(pred, gt, region), abs=1e-15)

    def test_pooled_vs_per_image(self, rng):
        gt1 = random_raster(rng, 32, 24)
        gt2 = random_raster(rng, 32, 24)
        noisy = Raster((gt2.pixels // 2).astype(np.uint8))
        pairs = [("a", gt1, gt1, [Rect(0, 0, 12, 12)]),
                 ("b", noisy, gt2, [Rect(0, 0, 12, 12), Rect(12, 12, 24, 24),
                                    Rect(4, 4, 20, 20)])]
        pooled = evaluate(pairs, pooling="pooled")
        per_image = evaluate(pairs, pooling="per-image")
        scores = [s.ssim for _, ss in pooled.per_image for s in ss]
        assert pooled.grand_mean == pytest.approx(np.mean(scores))
        assert per_image.grand_mean == pytest.approx(
            np.mean(per_image.mean_per_image))
        assert pooled.grand_mean != pytest.approx(per_image.grand_mean)

    def test_dimension_mismatch_names_image(self, rng):
        pairs = [("culprit", random_raster(rng, 10, 10),
                  random_raster(rng, 12, 12), [])]
        with pytest.raises(ValueError, match="culprit"):
            evaluate(pairs)

    def test_report_serialization(self, rng):
        report = evaluate(self._pairs(rng, n_images=2))
        doc = json.loads(report.to_json())
        assert doc["grand_mean"] == 1.0
        assert len(doc["per_image"]) == 2
        lines = report.to_csv().strip().splitlines()
        assert lines[0] == "image_id,char_index,x0,y0,x1,y1,ssim"
        assert len(lines) == 1 + 4

    def test_scores_within_bounds(self, rng):
        gt = random_raster(rng, 24, 24)
        pred = random_raster(rng, 24, 24)
        report = evaluate([("x", pred, gt, [Rect(0, 0, 24, 24)])])
        for _, scores in report.per_image:
            for s in scores:
                assert -1.0 <= s.ssim <= 1.0
