"""Reading and writing skeleton datasets (JSON and CSV + sidecar metadata)."""

import csv
import json
import math
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

import numpy as np

from .errors import DatasetFormatError, SkeletonValidationError
from .logger import get_logger
from .models import AdosRecord, Dataset, SkeletonSequence
from .topology import topology_by_name

logger = get_logger("dataset_io")

DatasetFormat = Literal["json", "csv"]

CSV_COLUMNS = ("record", "subject_id", "frame", "joint", "x", "y", "z")


def infer_format(path: Path) -> DatasetFormat:
    """Pick the file format from the file suffix."""
    suffix = Path(path).suffix.lower()
    if suffix == ".csv":
        return "csv"
    if suffix == ".json":
        return "json"
    raise DatasetFormatError(
        f"cannot infer dataset format from suffix {suffix!r}", str(path)
    )


def sidecar_path(path: Path) -> Path:
    """Metadata file that accompanies a CSV dataset."""
    path = Path(path)
    return path.with_name(f"{path.stem}.meta.json")


def load_dataset(path: Path, format: Optional[DatasetFormat] = None) -> Dataset:
    """Load a dataset file."""
    path = Path(path)
    format = format or infer_format(path)
    if not path.exists():
        raise FileNotFoundError(f"Dataset file not found: {path}")

    if format == "json":
        dataset = _load_json(path)
    elif format == "csv":
        dataset = _load_csv(path)
    else:
        raise DatasetFormatError(f"unsupported format {format!r}")

    logger.info(
        f"Loaded {len(dataset)} records from {path}",
        extra={
            "path": str(path),
            "records": len(dataset),
            "needs_completion": dataset.needs_completion,
        },
    )
    return dataset


def save_dataset(
    dataset: Dataset, path: Path, format: Optional[DatasetFormat] = None
) -> None:
    """Write a dataset file; CSV output also writes the sidecar metadata file."""
    path = Path(path)
    format = format or infer_format(path)

    if format == "json":
        payload = {
            "topology": dataset.topology.name,
            "preprocessed": dataset.preprocessed,
            "sequences": [
                {**_metadata_to_dict(seq), "frames": _frames(seq.data)}
                for seq in dataset.sequences
            ],
        }
        path.write_text(json.dumps(payload, separators=(",", ":")), encoding="utf-8")
    elif format == "csv":
        _save_csv(dataset, path)
    else:
        raise DatasetFormatError(f"unsupported format {format!r}")

    logger.info(
        f"Saved {len(dataset)} records to {path}",
        extra={"path": str(path), "records": len(dataset), "format": format},
    )


def _frames(data: np.ndarray) -> List:
    # C x T x J -> T x J x C
    return np.transpose(data, (1, 2, 0)).tolist()


def _gaze_to_list(gaze: Optional[np.ndarray]) -> Optional[List]:
    if gaze is None:
        return None
    return [None if np.isnan(row).any() else row.tolist() for row in gaze]


def _metadata_to_dict(seq: SkeletonSequence) -> Dict[str, Any]:
    return {
        "subject_id": seq.subject_id,
        "label": seq.label,
        "ados": (
            {
                "score": seq.ados.score,
                "module": seq.ados.module_id,
                "age": seq.ados.age_years,
            }
            if seq.ados is not None
            else None
        ),
        "provenance": seq.provenance,
        "frame_rate": seq.frame_rate,
        "gaze": _gaze_to_list(seq.gaze),
    }


def _parse_ados(raw: Any, location: str) -> Optional[AdosRecord]:
    if raw is None:
        return None
    if not isinstance(raw, dict):
        raise DatasetFormatError("'ados' must be an object or null", location)
    try:
        return AdosRecord(
            score=int(raw["score"]),
            module_id=int(raw["module"]),
            age_years=int(raw["age"]),
        )
    except KeyError as e:
        raise DatasetFormatError(f"'ados' is missing field {e}", location) from None
    except (TypeError, ValueError) as e:
        if isinstance(e, SkeletonValidationError):
            raise
        raise DatasetFormatError(f"invalid 'ados' value: {e}", location) from None


def _parse_gaze(raw: Any, frames: int, location: str) -> Optional[np.ndarray]:
    if raw is None:
        return None
    if not isinstance(raw, list) or len(raw) != frames:
        raise DatasetFormatError(f"'gaze' must list {frames} entries", location)
    gaze = np.full((frames, 3), np.nan)
    for t, entry in enumerate(raw):
        if entry is None:
            continue
        try:
            gaze[t] = [float(v) for v in entry]
        except (TypeError, ValueError):
            raise DatasetFormatError(
                f"gaze entry {t} must be three numbers or null", location
            ) from None
    return gaze


def _preprocessed_flag(payload: Dict[str, Any], location: str) -> bool:
    flag = payload.get("preprocessed", False)
    if not isinstance(flag, bool):
        raise DatasetFormatError("'preprocessed' must be true or false", location)
    return flag


def _build_sequence(
    meta: Dict[str, Any], data: np.ndarray, location: str
) -> SkeletonSequence:
    subject_id = meta.get("subject_id")
    if not isinstance(subject_id, str):
        raise DatasetFormatError("'subject_id' must be a string", location)
    frame_rate = meta.get("frame_rate")
    try:
        return SkeletonSequence(
            data=data,
            subject_id=subject_id,
            frame_rate=float(frame_rate) if frame_rate is not None else None,
            label=meta.get("label"),
            ados=_parse_ados(meta.get("ados"), location),
            provenance=meta.get("provenance") or "original",
            gaze=_parse_gaze(meta.get("gaze"), data.shape[1], location),
        )
    except SkeletonValidationError as e:
        raise SkeletonValidationError(f"{location}: {e}") from None


def _load_json(path: Path) -> Dataset:
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise DatasetFormatError(
            f"invalid JSON: {e.msg}", f"{path}:{e.lineno}"
        ) from None

    if not isinstance(payload, dict) or not isinstance(payload.get("sequences"), list):
        raise DatasetFormatError("top level must hold a 'sequences' list", str(path))
    topology = topology_by_name(payload.get("topology", "kinect25"))

    sequences = []
    for i, record in enumerate(payload["sequences"]):
        location = f"{path}: record {i}"
        if not isinstance(record, dict):
            raise DatasetFormatError("record must be an object", location)
        try:
            frames = np.array(record["frames"], dtype=np.float64)
        except KeyError:
            raise DatasetFormatError("record has no 'frames'", location) from None
        except (TypeError, ValueError) as e:
            raise DatasetFormatError(f"malformed 'frames': {e}", location) from None
        if frames.ndim != 3 or frames.shape[2] != 3 or frames.shape[0] < 1:
            raise DatasetFormatError(
                f"'frames' must be T x J x 3, got shape {frames.shape}", location
            )
        sequences.append(
            _build_sequence(record, np.transpose(frames, (2, 0, 1)), location)
        )
    return Dataset(tuple(sequences), topology, _preprocessed_flag(payload, str(path)))


def _save_csv(dataset: Dataset, path: Path) -> None:
    records = []
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(CSV_COLUMNS)
        for r, seq in enumerate(dataset.sequences):
            _, frames, joints = seq.data.shape
            for t in range(frames):
                for j in range(joints):
                    x, y, z = seq.data[:, t, j]
                    writer.writerow(
                        [r, seq.subject_id, t, j, repr(float(x)), repr(float(y)), repr(float(z))]
                    )
            records.append(
                {"record": r, "frames": frames, "joints": joints, **_metadata_to_dict(seq)}
            )

    meta = {
        "topology": dataset.topology.name,
        "preprocessed": dataset.preprocessed,
        "records": records,
    }
    sidecar_path(path).write_text(json.dumps(meta, indent=2), encoding="utf-8")


def _load_csv(path: Path) -> Dataset:
    meta_file = sidecar_path(path)
    if not meta_file.exists():
        raise DatasetFormatError(f"missing sidecar metadata file {meta_file}", str(path))
    try:
        meta = json.loads(meta_file.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise DatasetFormatError(
            f"invalid JSON: {e.msg}", f"{meta_file}:{e.lineno}"
        ) from None
    if not isinstance(meta, dict) or not isinstance(meta.get("records"), list):
        raise DatasetFormatError("sidecar must hold a 'records' list", str(meta_file))
    topology = topology_by_name(meta.get("topology", "kinect25"))

    arrays: List[np.ndarray] = []
    filled: List[np.ndarray] = []
    for i, record in enumerate(meta["records"]):
        try:
            shape = (3, int(record["frames"]), int(record["joints"]))
        except (KeyError, TypeError, ValueError):
            raise DatasetFormatError(
                "record needs integer 'frames' and 'joints'", f"{meta_file}: record {i}"
            ) from None
        arrays.append(np.full(shape, np.nan))
        filled.append(np.zeros(shape[1:], dtype=bool))

    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != CSV_COLUMNS:
            raise DatasetFormatError(
                f"header must be {','.join(CSV_COLUMNS)}", f"{path}:1"
            )
        for row in reader:
            location = f"{path}:{reader.line_num}"
            if len(row) != len(CSV_COLUMNS):
                raise DatasetFormatError(
                    f"expected {len(CSV_COLUMNS)} columns, got {len(row)}", location
                )
            try:
                r, t, j = int(row[0]), int(row[2]), int(row[3])
                coords = [float(v) for v in row[4:7]]
            except ValueError:
                raise DatasetFormatError("non-numeric cell", location) from None
            if not 0 <= r < len(arrays):
                raise DatasetFormatError(f"unknown record index {r}", location)
            if not (0 <= t < arrays[r].shape[1] and 0 <= j < arrays[r].shape[2]):
                raise DatasetFormatError(f"frame/joint ({t}, {j}) out of range", location)
            if meta["records"][r].get("subject_id") != row[1]:
                raise DatasetFormatError(
                    f"subject_id {row[1]!r} does not match record {r}", location
                )
            if not all(math.isfinite(v) for v in coords):
                raise SkeletonValidationError(f"{location}: non-finite coordinate")
            arrays[r][:, t, j] = coords
            filled[r][t, j] = True

    sequences = []
    for i, (record, data) in enumerate(zip(meta["records"], arrays)):
        location = f"{path}: record {i}"
        if not filled[i].all():
            t, j = np.argwhere(~filled[i])[0]
            raise DatasetFormatError(f"missing row for frame {t}, joint {j}", location)
        sequences.append(_build_sequence(record, data, location))
    return Dataset(tuple(sequences), topology, _preprocessed_flag(meta, str(meta_file)))
