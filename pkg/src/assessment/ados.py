"""Rule-based NS / ASD / AUT classes from ADOS score, module and age."""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, Sequence, Set

from ..errors import AnalysisError
from ..models import AdosRecord


class AdosClass(str, Enum):
    NS = "NS"
    ASD = "ASD"
    AUT = "AUT"
    UNCLASSIFIABLE = "Unclassifiable"


def classify_score(score: int, module_id: int, age_years: int) -> AdosClass:
    """Class of one (score, module, age) combination.

    Module 1: ages 3-6 up to 10 are NS, ages 6 and over with 11-15 are ASD, ages 3-6
    above 15 are AUT. Module 2: ages 3-4 with 6-7 and ages 5-6 up to 6 are NS, ages
    3-4 with 8-9 and ages 5-6 with exactly 8 are ASD, ages 3-4 above 9 and ages 5-6
    above 8 are AUT. The NS branch wins where module 2 branches overlap. Everything
    else is unclassifiable.
    """
    if module_id == 1:
        if 3 <= age_years <= 6 and score <= 10:
            return AdosClass.NS
        if age_years >= 6 and 10 < score <= 15:
            return AdosClass.ASD
        if 3 <= age_years <= 6 and score > 15:
            return AdosClass.AUT
        return AdosClass.UNCLASSIFIABLE

    if module_id == 2:
        young = age_years in (3, 4)
        older = age_years in (5, 6)
        if (young and score in (6, 7)) or (older and score <= 6):
            return AdosClass.NS
        if (young and 6 < score <= 9) or (older and score == 8):
            return AdosClass.ASD
        if (young and score > 9) or (older and score > 8):
            return AdosClass.AUT
        return AdosClass.UNCLASSIFIABLE

    raise AnalysisError(f"ADOS module must be 1 or 2, got {module_id}")


def ados_classify(record: AdosRecord) -> AdosClass:
    return classify_score(record.score, record.module_id, record.age_years)


def tolerance_classes(
    predicted: float, module_id: int, age_years: int, tolerance: float
) -> Set[AdosClass]:
    """Classes of every integer score within ``tolerance`` of a predicted score."""
    lo = max(0, math.ceil(predicted - tolerance))
    hi = math.floor(predicted + tolerance)
    scores = set(range(lo, hi + 1))
    scores.add(max(0, int(round(float(predicted)))))
    return {classify_score(s, module_id, age_years) for s in scores}


def predicted_class(predicted: float, module_id: int, age_years: int) -> AdosClass:
    return classify_score(max(0, int(round(float(predicted)))), module_id, age_years)


def classify_with_tolerance(predicted: float, record: AdosRecord, tolerance: float) -> bool:
    """True when the record's class is reachable from the prediction within tolerance."""
    return ados_classify(record) in tolerance_classes(
        predicted, record.module_id, record.age_years, tolerance
    )


@dataclass
class ScoreAccuracy:
    score: int
    count: int
    correct: int

    @property
    def accuracy(self) -> float:
        return self.correct / self.count if self.count else float("nan")


def per_score_accuracy(
    predicted: Sequence[float], records: Iterable[AdosRecord], tolerance: float
) -> Dict[int, ScoreAccuracy]:
    """Class accuracy grouped by the true ADOS score."""
    table: Dict[int, ScoreAccuracy] = {}
    for p, record in zip(predicted, records):
        entry = table.setdefault(record.score, ScoreAccuracy(record.score, 0, 0))
        entry.count += 1
        entry.correct += classify_with_tolerance(p, record, tolerance)
    return dict(sorted(table.items()))
