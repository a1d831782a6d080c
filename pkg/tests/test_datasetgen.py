import hashlib
import json
from pathlib import Path

import numpy as np
import pytest

from magniglyph import SynthSpec, generate_dataset, generate_sample, mssim, synth_scene, validate_pack
from magniglyph.datasetgen import load_manifest, pack_id, read_pack, write_pack
from magniglyph import fonts

from oracles import nearest_scale_oracle


def tree_digest(root: Path) -> str:
    h = hashlib.sha256()
    for path in sorted(root.rglob("*")):
        if path.is_file():
            h.update(str(path.relative_to(root)).encode())
            h.update(path.read_bytes())
    return h.hexdigest()


class TestSynthScene:
    def test_same_seed_bit_identical(self):
        spec = SynthSpec(seed=42, distractor_count=2)
        a_img, a_ann, a_plate = synth_scene(spec)
        b_img, b_ann, b_plate = synth_scene(spec)
        assert a_img.same_pixels(b_img)
        assert a_plate.same_pixels(b_plate)
        assert len(a_ann.characters) == len(b_ann.characters)
        for ca, cb in zip(a_ann.characters, b_ann.characters):
            assert ca.bbox == cb.bbox and ca.label == cb.label
            assert ca.mask.same_bits(cb.mask)

    def test_different_seeds_differ(self):
        a, _, _ = synth_scene(SynthSpec(seed=1))
        b, _, _ = synth_scene(SynthSpec(seed=2))
        assert not a.same_pixels(b)

    def test_zero_characters_is_plate(self):
        img, ann, plate = synth_scene(SynthSpec(seed=3, char_count=(0, 0),
                                                distractor_count=1))
        assert img.same_pixels(plate)
        assert ann.characters == ()

    def test_mask_popcount_matches_font_recount(self):
        img, ann, _ = synth_scene(SynthSpec(seed=8, char_count=(3, 3)))
        for ch in ann.characters:
            glyph = fonts.glyph_mask(ch.label)
            expect = nearest_scale_oracle(glyph.bits, ch.bbox.width,
                                          ch.bbox.height)
            assert ch.mask.popcount() == int(expect.sum())

    def test_glyph_pixels_are_exactly_the_annotation(self):
        img, ann, plate = synth_scene(SynthSpec(seed=12))
        union = ann.union_mask().bits
        diff = (img.pixels != plate.pixels).any(axis=2)
        assert not (diff & ~union).any()

    def test_layout_overflow(self):
        with pytest.raises(ValueError, match="layout overflow"):
            synth_scene(SynthSpec(seed=0, image_size=(32, 32),
                                  char_count=(8, 8), glyph_height=(18, 20)))

    def test_grid_layout(self):
        img, ann, _ = synth_scene(SynthSpec(seed=5, layout="grid",
                                            image_size=(96, 96),
                                            char_count=(6, 6),
                                            glyph_height=(12, 14)))
        assert len(ann.characters) == 6
        boxes = [c.bbox for c in ann.characters]
        for i, a in enumerate(boxes):
            for b in boxes[i + 1:]:
                overlap = not (a.x1 <= b.x0 or b.x1 <= a.x0
                               or a.y1 <= b.y0 or b.y1 <= a.y0)
                assert not overlap


class TestGenerateSample:
    def test_rate_one_reproduces_original(self):
        img, ann, _ = synth_scene(SynthSpec(seed=21, distractor_count=1))
        pack = generate_sample(img, ann, 1.0)
        assert pack.magnified_scene.same_pixels(img)

    def test_internal_consistency(self):
        img, ann, plate = synth_scene(SynthSpec(seed=22))
        for rate in (1.0, 1.2, 1.5):
            pack = generate_sample(img, ann, rate, background_plate=plate)
            validate_pack(pack)

    def test_area_growth_for_rate_above_one(self):
        img, ann, _ = synth_scene(SynthSpec(seed=23, char_count=(2, 2),
                                            glyph_height=(14, 16)))
        for rate in (1.2, 1.5):
            pack = generate_sample(img, ann, rate)
            assert (pack.magnified_mask.popcount()
                    >= pack.component_mask.popcount())

    def test_eraser_gate_against_plate(self):
        img, ann, plate = synth_scene(SynthSpec(seed=24, distractor_count=1))
        pack = generate_sample(img, ann, 1.2, background_plate=plate)
        assert mssim(pack.erased, plate) >= 0.95

    def test_pack_roundtrip_on_disk(self, tmp_path):
        img, ann, plate = synth_scene(SynthSpec(seed=25))
        pack = generate_sample(img, ann, 1.5, background_plate=plate)
        d = write_pack(pack, tmp_path)
        back = read_pack(d)
        validate_pack(back)
        assert back.image_id == pack.image_id
        assert back.rate == pack.rate
        assert back.magnified_scene.same_pixels(pack.magnified_scene)
        assert back.original_bboxes == pack.original_bboxes
        assert back.magnified_bboxes == pack.magnified_bboxes
        assert back.background_plate.same_pixels(plate)
        assert back.annotation is not None


class TestGenerateDataset:
    def _corpus(self, n):
        return [synth_scene(SynthSpec(seed=100 + i)) for i in range(n)]

    def test_pack_count_and_split(self, tmp_path):
        manifest = generate_dataset(self._corpus(10), [1.2, 1.5], 0.8,
                                    tmp_path, seed=0)
        packs = manifest["packs"]
        assert len(packs) == 20
        assert sum(1 for p in packs if p["split"] == "train") == 16
        assert sum(1 for p in packs if p["split"] == "test") == 4

    def test_manifest_roundtrip_revalidates(self, tmp_path):
        manifest = generate_dataset(self._corpus(3), [1.2], 1.0, tmp_path,
                                    seed=1)
        loaded = load_manifest(tmp_path)
        assert loaded == manifest
        for entry in loaded["packs"]:
            pack = read_pack(tmp_path / entry["dir"])
            validate_pack(pack)
            assert entry["rate"] == pack.rate

    def test_regeneration_is_byte_identical(self, tmp_path):
        a_dir = tmp_path / "a"
        b_dir = tmp_path / "b"
        generate_dataset(self._corpus(3), [1.2, 1.5], 0.7, a_dir, seed=5)
        generate_dataset(self._corpus(3), [1.2, 1.5], 0.7, b_dir, seed=5)
        assert tree_digest(a_dir) == tree_digest(b_dir)

    def test_jobs_do_not_change_output(self, tmp_path):
        a_dir = tmp_path / "a"
        b_dir = tmp_path / "b"
        generate_dataset(self._corpus(3), [1.2], 0.5, a_dir, seed=2, jobs=1)
        generate_dataset(self._corpus(3), [1.2], 0.5, b_dir, seed=2, jobs=4)
        assert tree_digest(a_dir) == tree_digest(b_dir)

    def test_empty_corpus_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="empty"):
            generate_dataset([], [1.2], 0.5, tmp_path)
