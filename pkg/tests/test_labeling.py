"""Outlier/suspect labeling rules."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conformal_wm.conformal import WatermarkScore
from conformal_wm.labeling import (
    EditRecord,
    ViolationLabel,
    bleu_quantile_threshold,
    classify,
)

unit = st.floats(min_value=0.0, max_value=1.0, allow_nan=False, allow_infinity=False)


def record(bleu_null, bleu_alt, essay_id="e"):
    return EditRecord(essay_id=essay_id, bleu_null=bleu_null, bleu_alt=bleu_alt,
                      score_alt=WatermarkScore(essay_id, 0.01))


class TestThreshold:
    def test_interpolates_between_order_statistics(self):
        xs = [i / 100 for i in range(1, 101)]
        t = bleu_quantile_threshold(xs, 0.05)
        assert xs[4] < t < xs[5]
        assert t == pytest.approx(np.quantile(xs, 0.05, method="hazen"), abs=1e-12)

    def test_constant_population(self):
        assert bleu_quantile_threshold([0.42] * 9, 0.05) == 0.42

    def test_tiny_alpha_approaches_minimum(self):
        assert bleu_quantile_threshold([0.9, 0.2, 0.7], 1e-12) == 0.2

    def test_rejects_empty_and_bad_alpha(self):
        with pytest.raises(ValueError, match="empty_bleu_values"):
            bleu_quantile_threshold([], 0.05)
        with pytest.raises(ValueError, match="alpha_out_of_range"):
            bleu_quantile_threshold([0.5], 0.0)


class TestClassify:
    def test_substantial_edit_below_threshold_is_outlier(self):
        assert classify(record(0.9, 0.3), 0.5) is ViolationLabel.OUTLIER

    def test_violating_edit_more_similar_is_suspect(self):
        assert classify(record(0.9, 0.95), 0.5) is ViolationLabel.SUSPECT

    def test_above_threshold_is_suspect(self):
        assert classify(record(0.9, 0.6), 0.5) is ViolationLabel.SUSPECT

    def test_equality_falls_to_suspect(self):
        assert classify(record(0.5, 0.5), 0.9) is ViolationLabel.SUSPECT
        assert classify(record(0.9, 0.5), 0.5) is ViolationLabel.SUSPECT

    @given(bleu_null=unit, bleu_alt=unit, threshold=unit)
    def test_partition_never_inlier(self, bleu_null, bleu_alt, threshold):
        label = classify(record(bleu_null, bleu_alt), threshold)
        assert label in (ViolationLabel.OUTLIER, ViolationLabel.SUSPECT)

    @given(bleu_null=unit, bleu_alt=unit, t1=unit, t2=unit)
    def test_outlier_set_monotone_in_threshold(self, bleu_null, bleu_alt, t1, t2):
        lo, hi = min(t1, t2), max(t1, t2)
        r = record(bleu_null, bleu_alt)
        if classify(r, lo) is ViolationLabel.OUTLIER:
            assert classify(r, hi) is ViolationLabel.OUTLIER

    @given(bleu_null=unit, bleu_alt=unit, threshold=unit)
    def test_deterministic(self, bleu_null, bleu_alt, threshold):
        r = record(bleu_null, bleu_alt)
        assert classify(r, threshold) is classify(r, threshold)

    def test_record_validation(self):
        with pytest.raises(ValueError, match="bleu_out_of_range"):
            record(1.2, 0.5)
        with pytest.raises(ValueError, match="bleu_out_of_range"):
            record(0.5, -0.1)
