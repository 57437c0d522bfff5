"""Procedural TD-like and ASD-like gait cycles on the 25-joint topology."""

from typing import Dict, Tuple

import numpy as np

from ..config import SynthConfig
from ..logger import get_logger
from ..models import AdosRecord, Dataset, SkeletonSequence
from ..topology import JOINT_NAMES, default_topology

logger = get_logger("assessment.synth")

FRAME_RATE = 30.0
HIP_HEIGHT = 1.2
STEP_PER_FRAME = 0.04
ARM_SWING_DEG = 15.0
LEG_SWING_DEG = 15.0

# Standing pose relative to SpineMid; x is the subject's right, y forward, z up
_SIDE_OFFSETS: Dict[str, Tuple[float, float, float]] = {
    "Shoulder": (0.17, 0.0, 0.22),
    "Elbow": (0.19, 0.0, -0.04),
    "Wrist": (0.20, 0.0, -0.28),
    "Hand": (0.20, 0.0, -0.35),
    "HandTip": (0.20, 0.0, -0.43),
    "Thumb": (0.17, 0.03, -0.36),
    "Hip": (0.10, 0.0, -0.30),
    "Knee": (0.10, 0.0, -0.72),
    "Ankle": (0.10, 0.0, -1.12),
    "Foot": (0.10, 0.10, -1.17),
}
_CENTER_OFFSETS: Dict[str, Tuple[float, float, float]] = {
    "SpineBase": (0.0, 0.0, -0.25),
    "SpineMid": (0.0, 0.0, 0.0),
    "SpineShoulder": (0.0, 0.0, 0.25),
    "Neck": (0.0, 0.0, 0.33),
    "Head": (0.0, 0.0, 0.45),
}
ARM_CHAIN = ("Elbow", "Wrist", "Hand", "HandTip", "Thumb")
LEG_CHAIN = ("Knee", "Ankle", "Foot")


def base_pose() -> np.ndarray:
    """3 x 25 standing pose centred on SpineMid."""
    pose = np.zeros((3, len(JOINT_NAMES)))
    topo = default_topology()
    for name, offset in _CENTER_OFFSETS.items():
        pose[:, topo.index(name)] = offset
    for suffix, (x, y, z) in _SIDE_OFFSETS.items():
        pose[:, topo.index(f"{suffix}Left")] = (-x, y, z)
        pose[:, topo.index(f"{suffix}Right")] = (x, y, z)
    return pose


def pitch(points: np.ndarray, angle_rad: np.ndarray | float) -> np.ndarray:
    """Rotate 3 x ... points about the x axis; positive angles swing -z towards +y."""
    c, s = np.cos(angle_rad), np.sin(angle_rad)
    out = np.array(points, dtype=np.float64)
    y, z = points[1], points[2]
    out[1] = c * y - s * z
    out[2] = s * y + c * z
    return out


def lean_forward(points: np.ndarray, degrees: float) -> np.ndarray:
    """Tilt the body forward (head towards +y) about the origin."""
    return pitch(points, -np.radians(degrees))


def gait_cycle(
    frames: int,
    period_frames: float,
    speed: float = 1.0,
    left_amplitude: float = 1.0,
    slant_deg: float = 0.0,
    phase: float = 0.0,
    body_scale: float = 1.0,
    swing_scale: float = 1.0,
) -> np.ndarray:
    """Noise-free 3 x T x 25 walking sequence."""
    topo = default_topology()
    pose = base_pose() * body_scale
    omega = 2 * np.pi * speed / period_frames
    t = np.arange(frames)
    data = np.repeat(pose[:, None, :], frames, axis=1)

    for side, sign, amplitude in (("Left", 1.0, left_amplitude), ("Right", -1.0, 1.0)):
        swing = sign * np.sin(omega * t + phase)
        arm = np.radians(ARM_SWING_DEG) * swing_scale * amplitude * swing
        leg = -np.radians(LEG_SWING_DEG) * swing_scale * amplitude * swing
        for chain, root, angles in (
            (ARM_CHAIN, f"Shoulder{side}", arm),
            (LEG_CHAIN, f"Hip{side}", leg),
        ):
            pivot = pose[:, topo.index(root)][:, None]
            for suffix in chain:
                j = topo.index(f"{suffix}{side}")
                rel = (pose[:, j][:, None] - pivot) * np.ones((1, frames))
                data[:, :, j] = pivot + pitch(rel, angles)

    if slant_deg:
        data = lean_forward(data, slant_deg)
    data[2] += HIP_HEIGHT * body_scale
    data[1] += STEP_PER_FRAME * speed * t[:, None]
    return data


def synthesize(config: SynthConfig) -> Dataset:
    """TD-like and ASD-like subjects, one original sequence each, in seeded order.

    ASD-like subjects lean forward by ``slant_deg`` times a severity factor in
    [0.75, 1.25], swing their left limbs ``asymmetry_ratio`` times wider and walk at
    ``speed_ratio`` times the TD cadence. The same severity sets their ADOS score.
    """
    rng = np.random.default_rng(config.seed)
    labels = np.array(["TD"] * config.n_td + ["ASD"] * config.n_asd)
    labels = labels[rng.permutation(len(labels))]
    width = max(4, len(str(len(labels))))

    sequences = []
    for i, label in enumerate(labels):
        phase = rng.uniform(0, 2 * np.pi)
        body_scale = rng.uniform(0.9, 1.1)
        swing_scale = rng.uniform(0.9, 1.1)
        severity = rng.uniform()
        module_id = int(rng.integers(1, 3))
        age = int(rng.integers(3, 7))

        if label == "ASD":
            slant = config.slant_deg * (0.75 + 0.5 * severity)
            left_amplitude = config.asymmetry_ratio
            speed = config.speed_ratio
        else:
            slant, left_amplitude, speed = 0.0, 1.0, 1.0

        data = gait_cycle(
            config.frames,
            config.period_frames,
            speed=speed,
            left_amplitude=left_amplitude,
            slant_deg=slant,
            phase=phase,
            body_scale=body_scale,
            swing_scale=swing_scale,
        )
        data = data + rng.normal(0.0, config.noise_sigma, size=data.shape)

        ados = None
        if label == "ASD" and config.with_ados:
            ados = AdosRecord(
                score=7 + int(round(13 * severity)), module_id=module_id, age_years=age
            )
        sequences.append(
            SkeletonSequence(
                data=data,
                subject_id=f"subj_{i:0{width}d}",
                frame_rate=FRAME_RATE,
                label=str(label),
                ados=ados,
            )
        )

    logger.info(
        f"Synthesized {len(sequences)} subjects",
        extra={"n_td": config.n_td, "n_asd": config.n_asd, "seed": config.seed},
    )
    return Dataset(tuple(sequences))
