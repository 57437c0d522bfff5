"""The 25-joint body graph shared by every analysis stage."""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import SkeletonValidationError

# Kinect v2 joint order; index i of every joint axis refers to JOINT_NAMES[i].
JOINT_NAMES: Tuple[str, ...] = (
    "SpineBase",
    "SpineMid",
    "Neck",
    "Head",
    "ShoulderLeft",
    "ElbowLeft",
    "WristLeft",
    "HandLeft",
    "ShoulderRight",
    "ElbowRight",
    "WristRight",
    "HandRight",
    "HipLeft",
    "KneeLeft",
    "AnkleLeft",
    "FootLeft",
    "HipRight",
    "KneeRight",
    "AnkleRight",
    "FootRight",
    "SpineShoulder",
    "HandTipLeft",
    "ThumbLeft",
    "HandTipRight",
    "ThumbRight",
)

BONES: Tuple[Tuple[str, str], ...] = (
    ("SpineBase", "SpineMid"),
    ("SpineMid", "SpineShoulder"),
    ("SpineShoulder", "Neck"),
    ("Neck", "Head"),
    ("SpineShoulder", "ShoulderLeft"),
    ("ShoulderLeft", "ElbowLeft"),
    ("ElbowLeft", "WristLeft"),
    ("WristLeft", "HandLeft"),
    ("HandLeft", "HandTipLeft"),
    ("HandLeft", "ThumbLeft"),
    ("SpineShoulder", "ShoulderRight"),
    ("ShoulderRight", "ElbowRight"),
    ("ElbowRight", "WristRight"),
    ("WristRight", "HandRight"),
    ("HandRight", "HandTipRight"),
    ("HandRight", "ThumbRight"),
    ("SpineBase", "HipLeft"),
    ("HipLeft", "KneeLeft"),
    ("KneeLeft", "AnkleLeft"),
    ("AnkleLeft", "FootLeft"),
    ("SpineBase", "HipRight"),
    ("HipRight", "KneeRight"),
    ("KneeRight", "AnkleRight"),
    ("AnkleRight", "FootRight"),
)

# Five arm joints then three leg joints per side; position i mirrors position i.
LATERAL_SUFFIXES: Tuple[str, ...] = (
    "Shoulder",
    "Elbow",
    "Wrist",
    "Hand",
    "HandTip",
    "Hip",
    "Knee",
    "Ankle",
)

# Joint order of 10-joint upper-body recordings.
UPPER_BODY_JOINTS: Tuple[str, ...] = (
    "Head",
    "SpineShoulder",
    "ShoulderLeft",
    "ShoulderRight",
    "ElbowLeft",
    "ElbowRight",
    "WristLeft",
    "WristRight",
    "HandLeft",
    "HandRight",
)


@dataclass(frozen=True)
class SkeletonTopology:
    """Joint names, bones and the joint groups the analyses rely on."""

    joint_names: Tuple[str, ...]
    edges: Tuple[Tuple[int, int], ...]
    spine_index: int
    spine_top_index: int
    shoulder_left_index: int
    shoulder_right_index: int
    left_group: Tuple[int, ...]
    right_group: Tuple[int, ...]
    head_gaze_index: int
    name: str = "kinect25"
    _index: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = len(self.joint_names)
        if len(set(self.joint_names)) != n:
            raise SkeletonValidationError("joint_names must be unique")
        object.__setattr__(
            self, "_index", {name: i for i, name in enumerate(self.joint_names)}
        )

        if len(self.edges) != n - 1:
            raise SkeletonValidationError(
                f"a {n}-joint tree needs {n - 1} edges, got {len(self.edges)}"
            )
        for i, j in self.edges:
            if not (0 <= i < n and 0 <= j < n) or i == j:
                raise SkeletonValidationError(f"invalid bone ({i}, {j})")
        rows = [i for i, _ in self.edges]
        cols = [j for _, j in self.edges]
        graph = csr_matrix((np.ones(len(self.edges)), (rows, cols)), shape=(n, n))
        n_components, _ = connected_components(graph, directed=False)
        if n_components != 1:
            raise SkeletonValidationError(
                f"bones must connect all joints, found {n_components} components"
            )

        special = (
            self.spine_index,
            self.spine_top_index,
            self.shoulder_left_index,
            self.shoulder_right_index,
            self.head_gaze_index,
        )
        if any(not 0 <= idx < n for idx in special):
            raise SkeletonValidationError("special joint index out of range")

        if len(self.left_group) != len(self.right_group):
            raise SkeletonValidationError(
                "left_group and right_group must have equal length, got "
                f"{len(self.left_group)} and {len(self.right_group)}"
            )
        if set(self.left_group) & set(self.right_group):
            raise SkeletonValidationError("left_group and right_group must be disjoint")

    @property
    def num_joints(self) -> int:
        return len(self.joint_names)

    def index(self, name: str) -> int:
        """Index of a joint by name."""
        try:
            return self._index[name]
        except KeyError:
            raise SkeletonValidationError(f"unknown joint name: {name!r}") from None

    def _mirror_pairs(self) -> List[Tuple[int, int]]:
        """Every (left, right) joint pair, matched by name."""
        pairs = []
        for i, name in enumerate(self.joint_names):
            if name.endswith("Left"):
                partner = name[: -len("Left")] + "Right"
                if partner in self._index:
                    pairs.append((i, self._index[partner]))
        return pairs

    def mirror_permutation(self) -> np.ndarray:
        """Joint permutation that swaps every left joint with its right partner."""
        perm = np.arange(self.num_joints)
        for left, right in self._mirror_pairs():
            perm[left], perm[right] = right, left
        return perm


@lru_cache(maxsize=1)
def default_topology() -> SkeletonTopology:
    """The fixed Kinect-v2 style 25-joint tree."""
    index = {name: i for i, name in enumerate(JOINT_NAMES)}
    return SkeletonTopology(
        joint_names=JOINT_NAMES,
        edges=tuple((index[a], index[b]) for a, b in BONES),
        spine_index=index["SpineMid"],
        spine_top_index=index["SpineShoulder"],
        shoulder_left_index=index["ShoulderLeft"],
        shoulder_right_index=index["ShoulderRight"],
        left_group=tuple(index[f"{s}Left"] for s in LATERAL_SUFFIXES),
        right_group=tuple(index[f"{s}Right"] for s in LATERAL_SUFFIXES),
        head_gaze_index=index["Neck"],
    )


def topology_by_name(name: str) -> SkeletonTopology:
    """Resolve the topology identifier stored in dataset files."""
    if name == "kinect25":
        return default_topology()
    raise SkeletonValidationError(f"unknown topology: {name!r}")
