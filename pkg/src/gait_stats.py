"""Joint-to-spine angles, motion and left/right asymmetry of gait sequences.

A joint angle is measured between the spine-to-joint direction and the reference
axis (the vertical, or the spine segment). By default it is the plain 3D angle in
[0, 180]: a joint straight above the spine joint reads 0, one level with it reads 90
and one straight below reads 180.

Group statistics use the sagittal lean instead: the direction is projected into the
plane spanned by the reference axis and the walking direction +y, and the signed
angle to the spine line is folded into (-90, 90]. A forward lean then shows up as
the same angular shift on every joint, above or below the spine. The per-joint lean
is the magnitude of the mean signed angle, so a symmetric arm swing averages out
while a constant lean does not. A purely lateral joint has no sagittal component and
reads 0.
"""

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Literal, Optional, Sequence, Tuple

import numpy as np

from .errors import AnalysisError
from .logger import get_logger
from .models import Dataset, SkeletonSequence
from .topology import SkeletonTopology, default_topology

logger = get_logger("gait_stats")

Reference = Literal["vertical", "spine"]
Plane = Literal["sagittal", "3d"]

METRICS: Tuple[str, ...] = ("angle", "motion", "spine_distance")
DEFAULT_EPSILON = 1e-9

_UP = np.array([0.0, 0.0, 1.0])
_FORWARD = np.array([0.0, 1.0, 0.0])


def _as_array(seq: SkeletonSequence | np.ndarray) -> np.ndarray:
    if isinstance(seq, SkeletonSequence):
        return seq.data
    return np.asarray(seq, dtype=np.float64)


def _masked_mean(values: np.ndarray, axis: int = 0) -> np.ndarray:
    """NaN-skipping mean that leaves all-NaN slices as NaN without warnings."""
    valid = ~np.isnan(values)
    count = valid.sum(axis=axis)
    total = np.where(valid, values, 0.0).sum(axis=axis)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(count > 0, total / np.maximum(count, 1), np.nan)


@dataclass(frozen=True, eq=False)
class JointAngles:
    """Per-frame and per-joint angles in degrees; NaN marks skipped frames and missing joints."""

    per_frame: np.ndarray
    signed: np.ndarray
    mean: np.ndarray
    signed_mean: np.ndarray

    @property
    def missing(self) -> np.ndarray:
        return np.isnan(self.mean)


def _reference_axes(
    data: np.ndarray, topo: SkeletonTopology, reference: Reference, epsilon: float
) -> Tuple[np.ndarray, np.ndarray]:
    """Unit reference axis and unit walking direction per frame, both 3 x T."""
    frames = data.shape[1]
    if reference == "vertical":
        return (
            np.repeat(_UP[:, None], frames, axis=1),
            np.repeat(_FORWARD[:, None], frames, axis=1),
        )
    if reference != "spine":
        raise AnalysisError(f"reference must be 'vertical' or 'spine', got {reference!r}")

    axis = data[:, :, topo.spine_top_index] - data[:, :, topo.spine_index]
    length = np.linalg.norm(axis, axis=0)
    if np.any(length < epsilon):
        frame = int(np.argmax(length < epsilon))
        raise AnalysisError(f"spine segment has zero length at frame {frame}")
    axis = axis / length

    walking = _FORWARD[:, None] - np.sum(_FORWARD[:, None] * axis, axis=0) * axis
    walking_length = np.linalg.norm(walking, axis=0)
    if np.any(walking_length < epsilon):
        raise AnalysisError("spine segment is parallel to the walking direction")
    return axis, walking / walking_length


def joint_spine_angles(
    seq: SkeletonSequence | np.ndarray,
    topo: Optional[SkeletonTopology] = None,
    reference: Reference = "vertical",
    plane: Plane = "3d",
    epsilon: float = DEFAULT_EPSILON,
) -> JointAngles:
    """Angle of every joint with the reference axis through the spine joint.

    ``reference="spine"`` uses the instantaneous SpineMid to SpineShoulder segment
    instead of the vertical. The default ``plane="3d"`` is the unprojected angle in
    [0, 180] and its mean is a plain mean. ``plane="sagittal"`` gives the signed
    forward lean described in the module docstring. Only the spine joint itself,
    or a joint on top of it, is NaN.
    """
    topo = topo or default_topology()
    data = _as_array(seq)
    axis, walking = _reference_axes(data, topo, reference, epsilon)
    vectors = data - data[:, :, topo.spine_index : topo.spine_index + 1]

    along = np.einsum("ctj,ct->tj", vectors, axis)
    if plane == "3d":
        length = np.linalg.norm(vectors, axis=0)
        with np.errstate(invalid="ignore", divide="ignore"):
            cosine = np.clip(along / length, -1.0, 1.0)
        angles = np.where(length < epsilon, np.nan, np.degrees(np.arccos(cosine)))
        mean = _masked_mean(angles)
        return JointAngles(per_frame=angles, signed=angles, mean=mean, signed_mean=mean)
    if plane != "sagittal":
        raise AnalysisError(f"plane must be 'sagittal' or '3d', got {plane!r}")

    ahead = np.einsum("ctj,ct->tj", vectors, walking)
    length = np.linalg.norm(vectors, axis=0)
    projected = np.hypot(along, ahead)
    signed = np.degrees(np.arctan2(ahead, along))
    # angle with a line, not a ray: fold into (-90, 90]
    signed = np.where(signed > 90.0, signed - 180.0, signed)
    signed = np.where(signed <= -90.0, signed + 180.0, signed)
    # no sagittal component: the joint is level with the spine line, no lean
    signed = np.where(projected < epsilon, 0.0, signed)
    signed = np.where(length < epsilon, np.nan, signed)

    signed_mean = _masked_mean(signed)
    return JointAngles(
        per_frame=np.abs(signed),
        signed=signed,
        mean=np.abs(signed_mean),
        signed_mean=signed_mean,
    )


def motion_profile(seq: SkeletonSequence | np.ndarray) -> np.ndarray:
    """Mean frame-to-frame displacement of every joint, in meters per frame."""
    data = _as_array(seq)
    if data.shape[1] < 2:
        raise AnalysisError(f"motion needs at least 2 frames, got {data.shape[1]}")
    steps = np.linalg.norm(np.diff(data, axis=1), axis=0)
    return steps.mean(axis=0)


def spine_distances(
    seq: SkeletonSequence | np.ndarray, topo: Optional[SkeletonTopology] = None
) -> np.ndarray:
    """Mean distance of every joint to the spine joint of the same frame."""
    topo = topo or default_topology()
    data = _as_array(seq)
    offsets = data - data[:, :, topo.spine_index : topo.spine_index + 1]
    return np.linalg.norm(offsets, axis=0).mean(axis=0)


@dataclass(frozen=True, eq=False)
class AsymmetryReport:
    """Left, right and absolute difference per mirrored pair, for every metric."""

    pairs: Tuple[Tuple[str, str], ...]
    left: Dict[str, np.ndarray]
    right: Dict[str, np.ndarray]
    delta: Dict[str, np.ndarray]
    index: Dict[str, float]


def _pair_table(
    values: Dict[str, np.ndarray], topo: SkeletonTopology
) -> AsymmetryReport:
    left_idx = list(topo.left_group)
    right_idx = list(topo.right_group)
    left = {m: values[m][left_idx] for m in METRICS}
    right = {m: values[m][right_idx] for m in METRICS}
    delta = {m: np.abs(left[m] - right[m]) for m in METRICS}
    return AsymmetryReport(
        pairs=tuple(
            (topo.joint_names[i], topo.joint_names[j]) for i, j in zip(left_idx, right_idx)
        ),
        left=left,
        right=right,
        delta=delta,
        index={m: float(_masked_mean(delta[m])) for m in METRICS},
    )


def _joint_metrics(
    seq: SkeletonSequence | np.ndarray,
    topo: SkeletonTopology,
    reference: Reference,
    plane: Plane = "sagittal",
) -> Dict[str, np.ndarray]:
    return {
        "angle": joint_spine_angles(seq, topo, reference, plane).mean,
        "motion": motion_profile(seq),
        "spine_distance": spine_distances(seq, topo),
    }


def asymmetry(
    seq: SkeletonSequence | np.ndarray,
    topo: Optional[SkeletonTopology] = None,
    reference: Reference = "vertical",
    plane: Plane = "sagittal",
) -> AsymmetryReport:
    """Per-pair |left - right| of angle, motion and spine distance, and their means."""
    topo = topo or default_topology()
    if not topo.left_group:
        raise AnalysisError("topology defines no mirrored joint pairs")
    return _pair_table(_joint_metrics(seq, topo, reference, plane), topo)


@dataclass(frozen=True)
class FiveNumberSummary:
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float

    @classmethod
    def from_values(cls, values: Iterable[float]) -> "FiveNumberSummary":
        arr = np.asarray(list(values), dtype=np.float64).ravel()
        arr = arr[~np.isnan(arr)]
        if arr.size == 0:
            raise AnalysisError("cannot summarize an empty set of values")
        q = np.percentile(arr, [0, 25, 50, 75, 100])
        return cls(*(float(v) for v in q))

    @property
    def iqr(self) -> float:
        return self.q3 - self.q1

    def as_tuple(self) -> Tuple[float, float, float, float, float]:
        return (self.minimum, self.q1, self.median, self.q3, self.maximum)


# Distributions reported per group: per-joint metrics pooled over samples and joints,
# then the per-sample asymmetry index of each metric.
DISTRIBUTIONS: Tuple[str, ...] = METRICS + tuple(f"{m}_asymmetry" for m in METRICS)


@dataclass(frozen=True, eq=False)
class GaitStatsReport:
    """Aggregate gait statistics of one group of sequences."""

    group: str
    num_samples: int
    joint_names: Tuple[str, ...]
    per_joint_mean_angle: np.ndarray
    mean_motion: np.ndarray
    mean_spine_distance: np.ndarray
    asymmetry: AsymmetryReport
    distributions: Dict[str, FiveNumberSummary] = field(default_factory=dict)

    @property
    def asymmetry_index(self) -> Dict[str, float]:
        return self.asymmetry.index


def group_report(
    sequences: Dataset | Sequence[SkeletonSequence],
    group: str,
    topo: Optional[SkeletonTopology] = None,
    reference: Reference = "vertical",
    plane: Plane = "sagittal",
) -> GaitStatsReport:
    """Statistics of one group; per-joint values are averaged over samples."""
    if isinstance(sequences, Dataset):
        topo = topo or sequences.topology
    topo = topo or default_topology()
    sequences = list(sequences)
    if not sequences:
        raise AnalysisError(f"group {group!r} has no samples")

    per_sample = [_joint_metrics(seq, topo, reference, plane) for seq in sequences]
    stacked = {m: np.stack([s[m] for s in per_sample]) for m in METRICS}
    sample_tables = [_pair_table(s, topo) for s in per_sample]

    # group-level pair values are means over samples; the index is the mean per-sample index
    mean_values = {m: _masked_mean(stacked[m]) for m in METRICS}
    pooled = _pair_table(mean_values, topo)
    index = {
        m: float(np.mean([t.index[m] for t in sample_tables])) for m in METRICS
    }
    asym = AsymmetryReport(
        pairs=pooled.pairs,
        left=pooled.left,
        right=pooled.right,
        delta={
            m: np.mean(np.stack([t.delta[m] for t in sample_tables]), axis=0)
            for m in METRICS
        },
        index=index,
    )

    distributions = {m: FiveNumberSummary.from_values(stacked[m]) for m in METRICS}
    for m in METRICS:
        distributions[f"{m}_asymmetry"] = FiveNumberSummary.from_values(
            t.index[m] for t in sample_tables
        )

    return GaitStatsReport(
        group=group,
        num_samples=len(sequences),
        joint_names=topo.joint_names,
        per_joint_mean_angle=mean_values["angle"],
        mean_motion=mean_values["motion"],
        mean_spine_distance=mean_values["spine_distance"],
        asymmetry=asym,
        distributions=distributions,
    )


@dataclass(frozen=True)
class MedianComparison:
    metric: str
    td_median: float
    asd_median: float

    @property
    def higher(self) -> str:
        if self.asd_median > self.td_median:
            return "ASD"
        if self.td_median > self.asd_median:
            return "TD"
        return "equal"

    @property
    def difference(self) -> float:
        return self.asd_median - self.td_median


@dataclass(frozen=True, eq=False)
class PopulationSummary:
    td: GaitStatsReport
    asd: GaitStatsReport
    comparison: Tuple[MedianComparison, ...]

    def comparison_for(self, metric: str) -> MedianComparison:
        for row in self.comparison:
            if row.metric == metric:
                return row
        raise KeyError(metric)

    def summary_rows(self) -> List[Dict[str, object]]:
        """Boxplot-ready rows: one per group and distribution."""
        rows = []
        for report in (self.td, self.asd):
            for metric, s in report.distributions.items():
                rows.append(
                    {
                        "group": report.group,
                        "metric": metric,
                        "n": report.num_samples,
                        "min": s.minimum,
                        "q1": s.q1,
                        "median": s.median,
                        "q3": s.q3,
                        "max": s.maximum,
                    }
                )
        return rows

    def joint_rows(self) -> List[Dict[str, object]]:
        rows = []
        for report in (self.td, self.asd):
            for j, name in enumerate(report.joint_names):
                rows.append(
                    {
                        "group": report.group,
                        "joint": name,
                        "mean_angle": float(report.per_joint_mean_angle[j]),
                        "mean_motion": float(report.mean_motion[j]),
                        "mean_spine_distance": float(report.mean_spine_distance[j]),
                    }
                )
        return rows

    def comparison_rows(self) -> List[Dict[str, object]]:
        return [
            {
                "metric": c.metric,
                "td_median": c.td_median,
                "asd_median": c.asd_median,
                "higher": c.higher,
            }
            for c in self.comparison
        ]

    def to_dict(self) -> dict:
        def report_dict(report: GaitStatsReport) -> dict:
            return {
                "group": report.group,
                "num_samples": report.num_samples,
                "joints": [
                    {k: v for k, v in row.items() if k != "group"}
                    for row in self.joint_rows()
                    if row["group"] == report.group
                ],
                "pairs": [
                    {
                        "left": left,
                        "right": right,
                        **{
                            f"{side}_{m}": float(table[m][i])
                            for m in METRICS
                            for side, table in (
                                ("left", report.asymmetry.left),
                                ("right", report.asymmetry.right),
                            )
                        },
                    }
                    for i, (left, right) in enumerate(report.asymmetry.pairs)
                ],
                "asymmetry_index": dict(report.asymmetry_index),
                "distributions": {
                    m: dict(zip(("min", "q1", "median", "q3", "max"), s.as_tuple()))
                    for m, s in report.distributions.items()
                },
            }

        return _json_safe(
            {
                "td": report_dict(self.td),
                "asd": report_dict(self.asd),
                "comparison": self.comparison_rows(),
            }
        )


def _json_safe(value):
    if isinstance(value, float):
        return None if math.isnan(value) else value
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_json_safe(v) for v in value]
    return value


def population_summary(
    td: Dataset | Sequence[SkeletonSequence],
    asd: Dataset | Sequence[SkeletonSequence],
    topo: Optional[SkeletonTopology] = None,
    reference: Reference = "vertical",
    plane: Plane = "sagittal",
) -> PopulationSummary:
    """Compare a TD group against an ASD group, metric by metric."""
    td_report = group_report(td, "TD", topo, reference, plane)
    asd_report = group_report(asd, "ASD", topo, reference, plane)
    comparison = tuple(
        MedianComparison(
            metric=m,
            td_median=td_report.distributions[m].median,
            asd_median=asd_report.distributions[m].median,
        )
        for m in DISTRIBUTIONS
    )
    logger.info(
        "Population summary computed",
        extra={
            "td_samples": td_report.num_samples,
            "asd_samples": asd_report.num_samples,
            "angle_median_difference": comparison[0].difference,
        },
    )
    return PopulationSummary(td=td_report, asd=asd_report, comparison=comparison)


def split_by_label(ds: Dataset) -> Tuple[Dataset, Dataset]:
    """TD and ASD records of a labeled dataset; unlabeled records are left out."""
    td = tuple(seq for seq in ds if seq.label == "TD")
    asd = tuple(seq for seq in ds if seq.label == "ASD")
    return (
        Dataset(td, ds.topology, ds.preprocessed),
        Dataset(asd, ds.topology, ds.preprocessed),
    )


def _write_rows(path: Path, rows: List[Dict[str, object]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(list(rows[0].keys()))
        for row in rows:
            writer.writerow(
                [repr(float(v)) if isinstance(v, float) else v for v in row.values()]
            )


def companion_path(path: Path, part: str) -> Path:
    path = Path(path)
    return path.with_name(f"{path.stem}.{part}{path.suffix}")


def save_summary(
    summary: PopulationSummary, path: Path, format: Literal["csv", "json"] = "csv"
) -> List[Path]:
    """Write the report; CSV output adds ``.joints`` and ``.comparison`` companions."""
    path = Path(path)
    if format == "json":
        with open(path, "w", encoding="utf-8") as f:
            json.dump(summary.to_dict(), f, indent=2, sort_keys=False)
            f.write("\n")
        return [path]
    if format != "csv":
        raise AnalysisError(f"unsupported report format {format!r}")

    written = [path, companion_path(path, "joints"), companion_path(path, "comparison")]
    _write_rows(written[0], summary.summary_rows())
    _write_rows(written[1], summary.joint_rows())
    _write_rows(written[2], summary.comparison_rows())
    return written
