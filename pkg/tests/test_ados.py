"""Unit tests for ADOS classification rules."""

import pytest

from src.assessment.ados import (
    AdosClass,
    ados_classify,
    classify_score,
    classify_with_tolerance,
    per_score_accuracy,
    predicted_class,
    tolerance_classes,
)
from src.errors import AnalysisError
from src.models import AdosRecord


class TestClassifyScore:
    """Boundary truth table of both modules."""

    @pytest.mark.parametrize(
        "score,age,expected",
        [
            (0, 3, AdosClass.NS),
            (10, 6, AdosClass.NS),
            (11, 6, AdosClass.ASD),
            (15, 9, AdosClass.ASD),
            (11, 4, AdosClass.UNCLASSIFIABLE),
            (16, 5, AdosClass.AUT),
            (16, 7, AdosClass.UNCLASSIFIABLE),
            (8, 7, AdosClass.UNCLASSIFIABLE),
        ],
    )
    def test_module_1(self, score, age, expected):
        assert classify_score(score, 1, age) is expected

    @pytest.mark.parametrize(
        "score,age,expected",
        [
            (5, 3, AdosClass.UNCLASSIFIABLE),
            (6, 3, AdosClass.NS),
            (7, 4, AdosClass.NS),
            (8, 3, AdosClass.ASD),
            (9, 4, AdosClass.ASD),
            (10, 4, AdosClass.AUT),
            (0, 5, AdosClass.NS),
            (6, 6, AdosClass.NS),
            (7, 6, AdosClass.UNCLASSIFIABLE),
            (8, 5, AdosClass.ASD),
            (9, 5, AdosClass.AUT),
            (8, 7, AdosClass.UNCLASSIFIABLE),
        ],
    )
    def test_module_2(self, score, age, expected):
        assert classify_score(score, 2, age) is expected

    def test_unknown_module(self):
        with pytest.raises(AnalysisError, match="module"):
            classify_score(5, 3, 5)

    def test_record_classification(self):
        assert ados_classify(AdosRecord(score=12, module_id=1, age_years=8)) is AdosClass.ASD


class TestTolerance:
    """Class matching of predicted scores within a tolerance."""

    def test_rounded_prediction(self):
        assert predicted_class(7.6, 2, 3) is AdosClass.ASD
        assert predicted_class(-2.0, 1, 4) is AdosClass.NS

    def test_tolerance_widens_reachable_classes(self):
        record = AdosRecord(score=8, module_id=2, age_years=5)
        assert not classify_with_tolerance(9.6, record, 0.0)
        assert classify_with_tolerance(9.6, record, 2.0)
        assert tolerance_classes(9.6, 2, 5, 2.0) == {AdosClass.ASD, AdosClass.AUT}

    def test_negative_prediction_clamps_to_zero(self):
        assert tolerance_classes(-3.0, 1, 4, 0.0) == {AdosClass.NS}

    def test_per_score_accuracy(self):
        records = [
            AdosRecord(score=8, module_id=2, age_years=5),
            AdosRecord(score=8, module_id=2, age_years=5),
            AdosRecord(score=12, module_id=1, age_years=7),
        ]
        table = per_score_accuracy([8.0, 12.0, 8.0], records, 0.0)
        assert list(table) == [8, 12]
        assert (table[8].count, table[8].correct) == (2, 1)
        assert table[8].accuracy == pytest.approx(0.5)
        assert table[12].accuracy == 0.0
