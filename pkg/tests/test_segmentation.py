import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from oracles import iou_by_sets, mean_iou_by_sets
from posidonia_inspect.imaging import HsvRaster, Raster, hsv_to_rgb
from posidonia_inspect.segmentation import (
    DEBRIS,
    POSIDONIA,
    ROCKS,
    SAND,
    BaselineConfig,
    BaselineSegmenter,
    HsvRange,
    LabelMask,
    iou,
    majority_smooth,
    mean_iou,
    meadow_boundary,
    read_mask,
    summarize,
    write_mask,
)


def hsv_image(h, s, v, shape=(8, 8)) -> Raster:
    hue = np.full(shape, float(h))
    sat = np.full(shape, float(s))
    val = np.full(shape, float(v))
    return hsv_to_rgb(HsvRaster(hue=hue, saturation=sat, value=val))


class TestLabelMask:
    def test_accepts_valid_codes(self):
        m = LabelMask(np.array([[0, 1], [2, 3]]))
        assert m.width == 2 and m.height == 2
        assert m.data.dtype == np.uint8

    def test_rejects_float_data(self):
        with pytest.raises(ValueError):
            LabelMask(np.zeros((2, 2)))

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            LabelMask(np.array([[0, 4]]))
        with pytest.raises(ValueError):
            LabelMask(np.array([[-1, 0]]))

    def test_readonly(self):
        m = LabelMask(np.zeros((2, 2), dtype=np.uint8))
        with pytest.raises(ValueError):
            m.data[0, 0] = 1

    def test_fraction(self):
        m = LabelMask(np.array([[POSIDONIA, POSIDONIA], [SAND, ROCKS]]))
        assert m.fraction(POSIDONIA) == 0.5
        assert m.fraction(ROCKS) == 0.25
        assert m.fraction(DEBRIS) == 0.0


class TestMaskIO:
    def test_roundtrip_exact(self, tmp_path):
        rng = np.random.default_rng(3)
        m = LabelMask(rng.integers(0, 4, size=(13, 9), dtype=np.uint8))
        p = tmp_path / "m.pgm"
        write_mask(m, p)
        back = read_mask(p)
        assert np.array_equal(back.data, m.data)

    def test_rejects_high_codes(self, tmp_path):
        p = tmp_path / "bad.pgm"
        p.write_bytes(b"P5\n2 1\n255\n" + bytes([1, 9]))
        with pytest.raises(ValueError):
            read_mask(p)

    def test_rejects_color_magic(self, tmp_path):
        p = tmp_path / "bad.ppm"
        p.write_bytes(b"P6\n1 1\n255\n\x00\x00\x00")
        with pytest.raises(ValueError):
            read_mask(p)

    def test_rejects_truncated(self, tmp_path):
        p = tmp_path / "short.pgm"
        p.write_bytes(b"P5\n4 4\n3\n\x00\x01")
        with pytest.raises(ValueError):
            read_mask(p)


class TestHsvRange:
    def test_rejects_bad_bounds(self):
        with pytest.raises(ValueError):
            HsvRange(hue_lo=-5.0)
        with pytest.raises(ValueError):
            HsvRange(sat_lo=0.8, sat_hi=0.2)
        with pytest.raises(ValueError):
            HsvRange(val_hi=1.5)

    def test_wraparound_hue(self):
        r = HsvRange(hue_lo=350.0, hue_hi=10.0)
        hue = np.array([355.0, 5.0, 180.0])
        ones = np.ones(3)
        got = r.select(hue, ones * 0.5, ones * 0.5)
        assert list(got) == [True, True, False]


class TestBaselineSegmenter:
    def test_classifies_range_centers(self):
        seg = BaselineSegmenter(BaselineConfig(smooth=False))
        cases = [
            (hsv_image(120.0, 0.7, 0.15), POSIDONIA),
            (hsv_image(200.0, 0.1, 0.12), ROCKS),
            (hsv_image(30.0, 0.4, 0.3), DEBRIS),
            (hsv_image(45.0, 0.3, 0.8), SAND),
        ]
        for img, want in cases:
            got = seg.segment(img)
            assert (got.data == want).all(), f"expected uniform class {want}"

    def test_priority_breaks_overlap(self):
        # hue 30, sat 0.2, val 0.2 sits inside both the rocks and debris boxes
        img = hsv_image(30.0, 0.2, 0.2)
        first_rocks = BaselineConfig(priority=(POSIDONIA, ROCKS, DEBRIS), smooth=False)
        first_debris = BaselineConfig(priority=(DEBRIS, ROCKS, POSIDONIA), smooth=False)
        assert (BaselineSegmenter(first_rocks).segment(img).data == ROCKS).all()
        assert (BaselineSegmenter(first_debris).segment(img).data == DEBRIS).all()

    def test_rejects_gray_input(self):
        seg = BaselineSegmenter()
        with pytest.raises(ValueError):
            seg.segment(Raster(np.zeros((4, 4, 1))))

    def test_rejects_bad_priority(self):
        with pytest.raises(ValueError):
            BaselineConfig(priority=(POSIDONIA, POSIDONIA, DEBRIS))

    def test_smoothing_removes_salt(self):
        labels = np.full((7, 7), POSIDONIA, dtype=np.uint8)
        labels[3, 3] = DEBRIS
        out = majority_smooth(labels)
        assert (out == POSIDONIA).all()

    def test_smoothing_tie_prefers_lowest_code(self):
        labels = np.array([[0, 0], [1, 1]], dtype=np.uint8)
        # every pixel sees two of each class
        assert (majority_smooth(labels) == 0).all()


class TestSummarize:
    def test_fractions_and_presence(self):
        data = np.zeros((10, 10), dtype=np.uint8)
        data[:2, :] = POSIDONIA  # 20%
        data[9, :3] = ROCKS  # 3%
        s = summarize(LabelMask(data), min_fraction=0.05)
        assert s.fractions[POSIDONIA] == pytest.approx(0.2)
        assert abs(sum(s.fractions) - 1.0) < 1e-12
        assert s.has_posidonia and not s.has_rocks and not s.has_debris
        assert s.dominant_class == SAND

    def test_dominant_tie_prefers_lowest(self):
        data = np.array([[0, 1], [1, 0]], dtype=np.uint8)
        assert summarize(LabelMask(data)).dominant_class == SAND

    def test_rejects_bad_min_fraction(self):
        with pytest.raises(ValueError):
            summarize(LabelMask(np.zeros((2, 2), dtype=np.uint8)), min_fraction=1.5)


class TestMeadowBoundary:
    def test_largest_component_first(self):
        data = np.zeros((12, 12), dtype=np.uint8)
        data[1:3, 1:3] = POSIDONIA  # 4 px
        data[5:10, 5:10] = POSIDONIA  # 25 px
        polys = meadow_boundary(LabelMask(data))
        assert len(polys) == 2
        assert polys[0].vertices[:, 0].min() >= 5.0
        assert polys[1].vertices[:, 0].max() <= 2.0

    def test_no_meadow(self):
        data = np.full((5, 5), ROCKS, dtype=np.uint8)
        assert meadow_boundary(LabelMask(data)) == []

    def test_ignores_other_classes(self):
        data = np.zeros((6, 6), dtype=np.uint8)
        data[0:2, 0:2] = DEBRIS
        data[3:5, 3:5] = POSIDONIA
        polys = meadow_boundary(LabelMask(data))
        assert len(polys) == 1
        assert polys[0].vertices[:, 0].min() >= 3.0


class TestIoU:
    def test_identical_masks(self):
        m = LabelMask(np.array([[0, 1], [2, 3]]))
        for code in range(4):
            assert iou(m, m, code) == 1.0

    def test_disjoint(self):
        a = LabelMask(np.array([[1, 1], [0, 0]]))
        b = LabelMask(np.array([[0, 0], [1, 1]]))
        assert iou(a, b, POSIDONIA) == 0.0

    def test_known_overlap(self):
        a = LabelMask(np.array([[1, 1, 1, 0]]))
        b = LabelMask(np.array([[0, 1, 1, 1]]))
        assert iou(a, b, POSIDONIA) == pytest.approx(0.5)

    def test_absent_class_scores_one(self):
        a = LabelMask(np.zeros((3, 3), dtype=np.uint8))
        assert iou(a, a, DEBRIS) == 1.0

    def test_shape_mismatch(self):
        a = LabelMask(np.zeros((2, 2), dtype=np.uint8))
        b = LabelMask(np.zeros((3, 3), dtype=np.uint8))
        with pytest.raises(ValueError):
            iou(a, b, SAND)

    @settings(max_examples=80, deadline=None)
    @given(
        a=hnp.arrays(np.uint8, (6, 6), elements=st.integers(0, 3)),
        b=hnp.arrays(np.uint8, (6, 6), elements=st.integers(0, 3)),
    )
    def test_matches_set_oracle(self, a, b):
        for code in range(4):
            assert iou(a, b, code) == pytest.approx(iou_by_sets(a, b, code), abs=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(
        masks=st.lists(
            st.tuples(
                hnp.arrays(np.uint8, (4, 4), elements=st.integers(0, 3)),
                hnp.arrays(np.uint8, (4, 4), elements=st.integers(0, 3)),
            ),
            min_size=0,
            max_size=4,
        )
    )
    def test_mean_matches_set_oracle(self, masks):
        got = mean_iou(masks)
        want = mean_iou_by_sets(masks, range(4))
        assert got == pytest.approx(want, abs=1e-12)

    def test_mean_empty_pool(self):
        assert mean_iou([]) == 1.0
