import math

import pytest
from hypothesis import given, strategies as st

from emoship.core import (EmotionLabel, EmotionshipRecord, EyeSample, Region,
                          SceneFrame, NON_NEUTRAL_EMOTIONS, POSITIVE_EMOTIONS,
                          NEGATIVE_EMOTIONS, region_from_pixels,
                          region_to_pixels)
from emoship.errors import DataError


class TestEmotionLabel:
    def test_exactly_seven_values_and_codes(self):
        assert len(EmotionLabel) == 7
        assert sorted(int(e) for e in EmotionLabel) == list(range(7))

    def test_neutral_is_unique_zero(self):
        neutrals = [e for e in EmotionLabel if e.is_neutral]
        assert neutrals == [EmotionLabel.NEUTRALITY]
        assert int(EmotionLabel.NEUTRALITY) == 0

    def test_positive_negative_partition(self):
        assert POSITIVE_EMOTIONS == {EmotionLabel.HAPPINESS, EmotionLabel.SURPRISE}
        assert NEGATIVE_EMOTIONS == {EmotionLabel.ANGER, EmotionLabel.FEAR,
                                     EmotionLabel.DISGUST, EmotionLabel.SADNESS}
        assert POSITIVE_EMOTIONS | NEGATIVE_EMOTIONS == set(NON_NEUTRAL_EMOTIONS)

    def test_round_trip_through_code(self):
        for e in EmotionLabel:
            assert EmotionLabel(int(e)) is e

    def test_non_neutral_order_is_code_order(self):
        assert [int(e) for e in NON_NEUTRAL_EMOTIONS] == [1, 2, 3, 4, 5, 6]


class TestEyeSample:
    def test_gaze_clamped_to_unit_square(self):
        s = EyeSample(t=0, pupil=(0.1, 0.1), gaze=(-0.5, 1.5))
        assert s.gaze == (0.0, 1.0)

    def test_non_finite_gaze_rejected(self):
        with pytest.raises(DataError):
            EyeSample(t=0, pupil=(0.1, 0.1), gaze=(math.nan, 0.5))
        with pytest.raises(DataError):
            EyeSample(t=0, pupil=(0.1, 0.1), gaze=(math.inf, 0.5))

    def test_negative_pupil_rejected(self):
        with pytest.raises(DataError):
            EyeSample(t=0, pupil=(-0.1, 0.1), gaze=(0.5, 0.5))

    @given(st.floats(allow_nan=False, allow_infinity=False, width=32),
           st.floats(allow_nan=False, allow_infinity=False, width=32))
    def test_gaze_always_in_unit_square(self, gx, gy):
        s = EyeSample(t=0, pupil=(0.0, 0.0), gaze=(gx, gy))
        assert 0.0 <= s.gaze[0] <= 1.0 and 0.0 <= s.gaze[1] <= 1.0


class TestSceneFrame:
    def test_default_size(self):
        assert SceneFrame(t=0, frame_id="x").frame_size == (960, 1280)

    def test_nonpositive_size_rejected(self):
        with pytest.raises(DataError):
            SceneFrame(t=0, frame_id="x", frame_size=(0, 100))


class TestRegion:
    def test_nonpositive_extent_rejected(self):
        with pytest.raises(DataError):
            Region(rect=(0.5, 0.5, 0.0, 0.1), feature=(1.0,), tag="a")

    def test_disjoint_from_unit_square_rejected(self):
        with pytest.raises(DataError):
            Region(rect=(2.0, 0.5, 0.1, 0.1), feature=(1.0,), tag="a")

    def test_validate_feature_dim(self):
        r = Region(rect=(0.5, 0.5, 0.1, 0.1), feature=(1.0, 2.0), tag="a")
        r.validate_feature_dim(2)
        with pytest.raises(DataError):
            r.validate_feature_dim(3)

    def test_pixel_round_trip_within_half_pixel(self):
        # 0.5 px tolerance on a 960x1280 frame
        frame = (960, 1280)
        rect_px = (640.0, 480.0, 100.0, 50.0)
        region = region_from_pixels(rect_px, frame, feature=(0.0,), tag="a")
        back = region_to_pixels(region, frame)
        assert all(abs(a - b) <= 0.5 for a, b in zip(rect_px, back))

    @given(st.floats(10, 1270), st.floats(10, 950),
           st.floats(1, 200), st.floats(1, 200))
    def test_pixel_round_trip_property(self, cx, cy, w, h):
        frame = (960, 1280)
        region = region_from_pixels((cx, cy, w, h), frame, feature=(), tag="a")
        back = region_to_pixels(region, frame)
        assert all(abs(a - b) <= 0.5 for a, b in zip((cx, cy, w, h), back))


class TestEmotionshipRecord:
    def region(self):
        return Region(rect=(0.5, 0.5, 0.1, 0.1), feature=(1.0,), tag="dog")

    def test_neutral_emotion_rejected(self):
        with pytest.raises(DataError):
            EmotionshipRecord(t_start=0, t_end=1, emotion=EmotionLabel.NEUTRALITY,
                              region=self.region(), summary_tag="x",
                              influential_score=0.5, is_series=(0.5,))

    def test_score_must_equal_series_mean(self):
        with pytest.raises(DataError):
            EmotionshipRecord(t_start=0, t_end=1, emotion=EmotionLabel.FEAR,
                              region=self.region(), summary_tag="x",
                              influential_score=0.9, is_series=(0.5, 0.5))

    def test_series_values_must_be_open_interval(self):
        for bad in (0.0, 1.0, -0.1, 1.5):
            with pytest.raises(DataError):
                EmotionshipRecord.from_series(
                    t_start=0, t_end=1, emotion=EmotionLabel.FEAR,
                    region=self.region(), summary_tag="x", is_series=(bad,))

    def test_time_order_enforced(self):
        with pytest.raises(DataError):
            EmotionshipRecord.from_series(
                t_start=5, t_end=1, emotion=EmotionLabel.FEAR,
                region=self.region(), summary_tag="x", is_series=(0.5,))

    def test_from_series_computes_mean(self):
        rec = EmotionshipRecord.from_series(
            t_start=0, t_end=10, emotion=EmotionLabel.HAPPINESS,
            region=self.region(), summary_tag="x", is_series=(0.2, 0.4, 0.6))
        assert abs(rec.influential_score - 0.4) < 1e-12
