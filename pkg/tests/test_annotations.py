import json

import numpy as np
import pytest

from magniglyph import (AnnotationError, CharAnnotation, Mask, Rect,
                        SceneAnnotation, extract_components, load_annotations,
                        order_components, parse_annotations,
                        serialize_annotations)
from magniglyph.raster import save_mask

from conftest import random_mask, random_raster


def make_char(x0, y0, x1, y1, label="A", bits=None):
    w, h = x1 - x0, y1 - y0
    if bits is None:
        bits = np.ones((h, w), dtype=bool)
    return CharAnnotation(label=label, bbox=Rect(x0, y0, x1, y1),
                          mask=Mask(bits))


def write_doc(tmp_path, records):
    doc = tmp_path / "annotations.json"
    doc.write_text(json.dumps(records), encoding="utf-8")
    return doc


class TestParsing:
    def test_empty_char_list(self, tmp_path):
        doc = write_doc(tmp_path, [{"image_id": "a", "image": "a.png",
                                    "size": [8, 8], "chars": []}])
        scenes = load_annotations(doc)
        assert len(scenes) == 1
        assert scenes[0].characters == ()

    def test_single_char_mapping(self, tmp_path, rng):
        mask = random_mask(rng, 4, 6, density=0.8)
        save_mask(mask, tmp_path / "m.png")
        doc = write_doc(tmp_path, [{
            "image_id": "a", "image": "a.png", "size": [10, 10],
            "chars": [{"label": "X", "bbox": [2, 2, 6, 8], "mask": "m.png"}]}])
        scene = load_annotations(doc)[0]
        ch = scene.characters[0]
        assert ch.label == "X"
        assert ch.bbox == Rect(2, 2, 6, 8)
        assert (ch.mask.width, ch.mask.height) == (4, 6)

    def test_out_of_bounds_bbox_names_offender(self, tmp_path):
        save_mask(Mask(np.ones((4, 5), bool)), tmp_path / "m.png")
        doc = write_doc(tmp_path, [{
            "image_id": "bad", "image": "bad.png", "size": [4, 4],
            "chars": [{"label": None, "bbox": [-1, 0, 4, 4], "mask": "m.png"}]}])
        with pytest.raises(AnnotationError, match=r"'bad' char 0"):
            load_annotations(doc)

    def test_missing_mask_file(self, tmp_path):
        doc = write_doc(tmp_path, [{
            "image_id": "a", "image": "a.png", "size": [4, 4],
            "chars": [{"label": None, "bbox": [0, 0, 2, 2], "mask": "gone.png"}]}])
        with pytest.raises(AnnotationError, match="mask file not found"):
            load_annotations(doc)

    def test_empty_mask_rejected(self, tmp_path):
        save_mask(Mask(np.zeros((2, 2), bool)), tmp_path / "m.png")
        doc = write_doc(tmp_path, [{
            "image_id": "a", "image": "a.png", "size": [4, 4],
            "chars": [{"label": None, "bbox": [0, 0, 2, 2], "mask": "m.png"}]}])
        with pytest.raises(AnnotationError, match="empty character mask"):
            load_annotations(doc)

    def test_invalid_json(self, tmp_path):
        with pytest.raises(AnnotationError, match="invalid JSON"):
            parse_annotations("{not json", tmp_path)

    def test_roundtrip_identity(self, tmp_path, rng):
        chars = (make_char(1, 1, 4, 5, "B",
                           random_mask(rng, 3, 4, 0.7).bits | np.eye(4, 3, dtype=bool)),
                 make_char(5, 2, 9, 6, None))
        scene = SceneAnnotation(image_id="img7", image_size=(12, 9),
                                characters=chars, image_path="img7.png")
        doc = serialize_annotations([scene], tmp_path)
        back = load_annotations(doc)[0]
        assert back.image_id == scene.image_id
        assert back.image_size == scene.image_size
        assert back.image_path == scene.image_path
        for a, b in zip(back.characters, scene.characters):
            assert a.label == b.label
            assert a.bbox == b.bbox
            assert a.mask.same_bits(b.mask)


class TestExtractComponents:
    def test_no_characters(self, rng):
        img = random_raster(rng, 8, 6)
        scene = SceneAnnotation(image_id="x", image_size=(8, 6))
        comp, union = extract_components(img, scene)
        assert (comp.pixels == 0).all()
        assert union.popcount() == 0

    def test_full_bbox_character(self, rng):
        img = random_raster(rng, 8, 6)
        scene = SceneAnnotation(image_id="x", image_size=(8, 6),
                                characters=(make_char(2, 1, 5, 4),))
        comp, union = extract_components(img, scene)
        assert np.array_equal(comp.pixels[1:4, 2:5], img.pixels[1:4, 2:5])
        outside = ~union.bits
        assert (comp.pixels[outside] == 0).all()

    def test_union_of_overlapping_characters(self, rng):
        img = random_raster(rng, 10, 8)
        a = make_char(1, 1, 5, 5)
        b = make_char(3, 2, 7, 6)
        scene = SceneAnnotation(image_id="x", image_size=(10, 8),
                                characters=(a, b))
        _, union = extract_components(img, scene)
        # brute-force OR
        expect = np.zeros((8, 10), bool)
        expect[1:5, 1:5] = True
        expect[2:6, 3:7] = True
        assert np.array_equal(union.bits, expect)
        assert union.popcount() <= a.mask.popcount() + b.mask.popcount()

    def test_partition_property(self, rng):
        img = random_raster(rng, 12, 9)
        chars = (make_char(0, 0, 4, 4, bits=random_mask(rng, 4, 4, 0.6).bits | np.eye(4, dtype=bool)),
                 make_char(6, 3, 11, 8))
        scene = SceneAnnotation(image_id="x", image_size=(12, 9), characters=chars)
        comp, union = extract_components(img, scene)
        assert np.array_equal(comp.pixels[union.bits], img.pixels[union.bits])
        assert (comp.pixels[~union.bits] == 0).all()

    def test_size_mismatch(self, rng):
        img = random_raster(rng, 5, 5)
        scene = SceneAnnotation(image_id="x", image_size=(6, 6))
        with pytest.raises(AnnotationError):
            extract_components(img, scene)


class TestOrderComponents:
    def test_single_character(self):
        scene = SceneAnnotation(image_id="x", image_size=(10, 10),
                                characters=(make_char(1, 1, 3, 3),))
        assert order_components(scene) == [0]

    def test_left_first_on_one_line(self):
        scene = SceneAnnotation(image_id="x", image_size=(20, 10),
                                characters=(make_char(10, 2, 13, 8),
                                            make_char(3, 2, 6, 8)))
        assert order_components(scene) == [1, 0]

    def test_grid_row_major(self):
        chars = []
        expected_keys = []
        for r in range(3):
            for c in range(3):
                x0, y0 = 2 + 6 * c, 2 + 8 * r
                chars.append(make_char(x0, y0, x0 + 4, y0 + 6))
                expected_keys.append((r, c))
        # scramble the list, keeping track of the reading-order rank
        perm = [4, 0, 8, 2, 6, 1, 5, 3, 7]
        scene = SceneAnnotation(image_id="x", image_size=(30, 30),
                                characters=tuple(chars[i] for i in perm))
        order = order_components(scene)
        ranks = [expected_keys[perm[i]] for i in order]
        assert ranks == sorted(expected_keys)

    def test_output_is_permutation(self, rng):
        chars = tuple(make_char(int(x), int(y), int(x) + 3, int(y) + 4)
                      for x, y in rng.integers(0, 20, size=(7, 2)))
        scene = SceneAnnotation(image_id="x", image_size=(25, 26),
                                characters=chars)
        order = order_components(scene)
        assert sorted(order) == list(range(7))

    def test_stable_under_permutation(self, rng):
        boxes = [(1, 1, 4, 7), (6, 2, 9, 8), (11, 1, 14, 7), (2, 12, 5, 18)]
        chars = [make_char(*b) for b in boxes]
        scene_a = SceneAnnotation(image_id="x", image_size=(20, 20),
                                  characters=tuple(chars))
        perm = [2, 0, 3, 1]
        scene_b = SceneAnnotation(image_id="x", image_size=(20, 20),
                                  characters=tuple(chars[i] for i in perm))
        order_a = order_components(scene_a)
        order_b = order_components(scene_b)
        assert [boxes[i] for i in order_a] == \
               [[boxes[j] for j in perm][i] for i in order_b]

    def test_empty(self):
        scene = SceneAnnotation(image_id="x", image_size=(5, 5))
        assert order_components(scene) == []
