"""Configuration management for gaitscope.

Configuration lives in a plain-text ``KEY=VALUE`` file (dotenv grammar) whose keys are
dotted section paths, for example::

    seed=7
    preprocess.target_frames=32
    network.channels=8,16
    network.co_learning=true

Command-line ``--set KEY=VALUE`` pairs override file values.
"""

import os
from pathlib import Path
from typing import Any, Dict, Iterable, List, Literal, Optional

from dotenv import dotenv_values, load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .errors import ConfigError

# Sections that carry their own seed; unset ones inherit ``RunConfig.seed``.
SEEDED_SECTIONS = ("network", "skepxel", "svr", "synth", "split")


def _split_list(v):
    if isinstance(v, str):
        return [item.strip() for item in v.split(",") if item.strip()]
    return v


class AugmentationConfig(BaseModel):
    """Magnitudes of the seven augmentation kinds."""

    model_config = ConfigDict(extra="forbid")

    jitter_sigma: float = Field(
        default=0.01, description="Std of the Gaussian jitter noise in meters"
    )
    scale_min: float = Field(default=0.9, description="Lower bound of the scale factor")
    scale_max: float = Field(default=1.1, description="Upper bound of the scale factor")
    translation: float = Field(
        default=0.1, description="Shift along x for left/right translation in meters"
    )
    slice_ratio: float = Field(
        default=0.8, description="Fraction of frames kept by the temporal slice"
    )

    @field_validator("jitter_sigma", "translation")
    @classmethod
    def validate_non_negative(cls, v):
        if v < 0:
            raise ValueError("must be non-negative")
        return v

    @field_validator("scale_min", "scale_max")
    @classmethod
    def validate_scale(cls, v):
        if v <= 0:
            raise ValueError("scale bounds must be positive")
        return v

    @field_validator("slice_ratio")
    @classmethod
    def validate_slice_ratio(cls, v):
        if not 0 < v <= 1:
            raise ValueError("slice_ratio must be in (0, 1]")
        return v

    def model_post_init(self, __context) -> None:
        if self.scale_min > self.scale_max:
            raise ValueError("scale_min must not exceed scale_max")


class UpperBodyRatios(BaseModel):
    """Anthropometric offsets used to complete 10-joint upper bodies.

    Every ratio multiplies the torso reference length (the shoulder breadth) and is
    measured from ``SpineShoulder`` along the body's downward axis, except the lateral
    half-widths and the hand extensions (fractions of the wrist-to-hand segment).
    """

    model_config = ConfigDict(extra="forbid")

    spine_mid_drop: float = Field(default=0.75)
    spine_base_drop: float = Field(default=1.45)
    hip_drop: float = Field(default=1.5)
    hip_half_width: float = Field(default=0.3)
    knee_drop: float = Field(default=2.7)
    ankle_drop: float = Field(default=3.85)
    foot_drop: float = Field(default=4.0)
    foot_forward: float = Field(default=0.3)
    hand_tip_extension: float = Field(default=1.0)
    thumb_extension: float = Field(default=0.5)
    thumb_spread: float = Field(default=0.08)

    @field_validator("*")
    @classmethod
    def validate_non_negative(cls, v):
        if v < 0:
            raise ValueError("ratios must be non-negative")
        return v


class PreprocessConfig(BaseModel):
    """Sequence normalization settings."""

    model_config = ConfigDict(extra="forbid")

    target_frames: int = Field(default=32, description="Fixed sequence length T*")
    apply_rotation: bool = Field(
        default=False,
        description="Rotate into the shoulder/spine frame (off for gait data)",
    )
    gaze_as_joint: bool = Field(
        default=False, description="Write gaze trajectories into the gaze joint"
    )
    epsilon: float = Field(default=1e-8, description="Numerical floor")
    augmentation: AugmentationConfig = Field(default_factory=AugmentationConfig)
    upper_body: UpperBodyRatios = Field(default_factory=UpperBodyRatios)

    @field_validator("target_frames")
    @classmethod
    def validate_target_frames(cls, v):
        if v < 1:
            raise ValueError("target_frames must be at least 1")
        return v

    @field_validator("epsilon")
    @classmethod
    def validate_epsilon(cls, v):
        if v <= 0:
            raise ValueError("epsilon must be positive")
        return v


class NetworkConfig(BaseModel):
    """Graph network architecture and training settings."""

    model_config = ConfigDict(extra="forbid")

    k_max: int = Field(default=2, description="Number of adjacency scales")
    blocks: int = Field(default=2, description="Number of GCN/TCN blocks")
    channels: List[int] = Field(
        default_factory=lambda: [8, 16], description="Output channels per block"
    )
    temporal_window: int = Field(default=3, description="TCN kernel width (odd)")
    learning_rate: float = Field(default=0.01)
    epochs: int = Field(default=200)
    batch_size: int = Field(default=16)
    seed: int = Field(default=0)
    lambda_distance: float = Field(
        default=1.0, description="Weight of the Skepxel distance loss"
    )
    grad_clip: Optional[float] = Field(
        default=5.0, description="Global gradient-norm clip; unset disables clipping"
    )
    angle_embedding: bool = Field(
        default=True, description="Embed the joint angle matrix into the input"
    )
    co_learning: bool = Field(
        default=False, description="Train with the Skepxel distance loss"
    )

    @field_validator("channels", mode="before")
    @classmethod
    def split_channels(cls, v):
        return _split_list(v)

    @field_validator("k_max", "blocks", "epochs", "batch_size")
    @classmethod
    def validate_positive_int(cls, v):
        if v < 1:
            raise ValueError("must be at least 1")
        return v

    @field_validator("channels")
    @classmethod
    def validate_channels(cls, v):
        if not v or any(c < 1 for c in v):
            raise ValueError("channels must be positive integers")
        return v

    @field_validator("temporal_window")
    @classmethod
    def validate_temporal_window(cls, v):
        if v < 1 or v % 2 == 0:
            raise ValueError("temporal_window must be a positive odd integer")
        return v

    @field_validator("learning_rate")
    @classmethod
    def validate_learning_rate(cls, v):
        if v <= 0:
            raise ValueError("learning_rate must be positive")
        return v

    @field_validator("lambda_distance")
    @classmethod
    def validate_lambda(cls, v):
        if v < 0:
            raise ValueError("lambda_distance must be non-negative")
        return v

    @field_validator("grad_clip")
    @classmethod
    def validate_grad_clip(cls, v):
        if v is not None and v <= 0:
            raise ValueError("grad_clip must be positive")
        return v

    def model_post_init(self, __context) -> None:
        if len(self.channels) != self.blocks:
            raise ValueError(
                f"channels must list one width per block ({self.blocks}), "
                f"got {self.channels}"
            )


class SkepxelConfig(BaseModel):
    """Skepxel image and patch encoder settings."""

    model_config = ConfigDict(extra="forbid")

    orderings: int = Field(default=4, description="Joint orderings M")
    frames: int = Field(default=20, description="Sampled frames T'")
    patch_size: int = Field(default=5)
    embed_dim: int = Field(default=16, description="Patch projection width D")
    seed: int = Field(default=0)

    @field_validator("orderings", "frames", "patch_size", "embed_dim")
    @classmethod
    def validate_positive(cls, v):
        if v < 1:
            raise ValueError("must be at least 1")
        return v


class SvrConfig(BaseModel):
    """ADOS score regression settings."""

    model_config = ConfigDict(extra="forbid")

    epsilon: float = Field(default=0.5, description="Insensitive tube half-width")
    C: float = Field(default=1.0, description="Loss weight")
    epochs: int = Field(default=2000)
    step_size: float = Field(default=1.0, description="Initial normalized step")
    seed: int = Field(default=0)
    clip_frames: int = Field(default=16, description="Frames per clip")
    n_clips: int = Field(default=4, description="Clips per video feature vector")
    tolerance: float = Field(
        default=0.5, description="Score tolerance used when deriving classes"
    )

    @field_validator("epsilon", "tolerance")
    @classmethod
    def validate_non_negative(cls, v):
        if v < 0:
            raise ValueError("must be non-negative")
        return v

    @field_validator("C", "step_size")
    @classmethod
    def validate_positive(cls, v):
        if v <= 0:
            raise ValueError("must be positive")
        return v

    @field_validator("epochs", "clip_frames", "n_clips")
    @classmethod
    def validate_positive_int(cls, v):
        if v < 1:
            raise ValueError("must be at least 1")
        return v


class SynthConfig(BaseModel):
    """Synthetic gait generator settings."""

    model_config = ConfigDict(extra="forbid")

    n_td: int = Field(default=50)
    n_asd: int = Field(default=50)
    slant_deg: float = Field(default=15.0, description="Forward lean of ASD-like gait")
    asymmetry_ratio: float = Field(
        default=1.5, description="Left-limb swing amplitude multiplier"
    )
    speed_ratio: float = Field(default=0.7, description="Gait speed multiplier")
    noise_sigma: float = Field(default=0.005, description="Coordinate noise in meters")
    seed: int = Field(default=0)
    frames: int = Field(default=32)
    period_frames: float = Field(default=32.0, description="Frames per TD gait cycle")
    with_ados: bool = Field(default=True, description="Attach ADOS records to ASD")

    @field_validator("n_td", "n_asd", "seed")
    @classmethod
    def validate_counts(cls, v):
        if v < 0:
            raise ValueError("must be non-negative")
        return v

    @field_validator("asymmetry_ratio", "speed_ratio", "period_frames")
    @classmethod
    def validate_ratios(cls, v):
        if v <= 0:
            raise ValueError("must be positive")
        return v

    @field_validator("noise_sigma")
    @classmethod
    def validate_noise(cls, v):
        if v < 0:
            raise ValueError("noise_sigma must be non-negative")
        return v

    @field_validator("frames")
    @classmethod
    def validate_frames(cls, v):
        if v < 2:
            raise ValueError("frames must be at least 2")
        return v


class SplitConfig(BaseModel):
    """Cross-validation settings."""

    model_config = ConfigDict(extra="forbid")

    mode: Literal["random", "block"] = Field(default="block")
    n_folds: int = Field(default=10)
    seed: int = Field(default=0)
    permutations: int = Field(
        default=10000, description="Permutations of the Spearman p-value"
    )

    @field_validator("n_folds")
    @classmethod
    def validate_n_folds(cls, v):
        if v < 2:
            raise ValueError("n_folds must be at least 2")
        return v

    @field_validator("permutations")
    @classmethod
    def validate_permutations(cls, v):
        if v < 1:
            raise ValueError("permutations must be at least 1")
        return v


class RunConfig(BaseModel):
    """Root configuration of a gaitscope run."""

    model_config = ConfigDict(extra="forbid")

    seed: int = Field(default=0, description="Global seed")
    preprocess: PreprocessConfig = Field(default_factory=PreprocessConfig)
    network: NetworkConfig = Field(default_factory=NetworkConfig)
    skepxel: SkepxelConfig = Field(default_factory=SkepxelConfig)
    svr: SvrConfig = Field(default_factory=SvrConfig)
    synth: SynthConfig = Field(default_factory=SynthConfig)
    split: SplitConfig = Field(default_factory=SplitConfig)

    @classmethod
    def from_mapping(cls, values: Dict[str, Any]) -> "RunConfig":
        """Build a config from flat dotted keys (``network.epochs`` -> nested)."""
        nested: Dict[str, Any] = {}
        for key, value in values.items():
            parts = [part.strip() for part in key.strip().split(".")]
            if not all(parts):
                raise ConfigError(f"Invalid configuration key: {key!r}")
            node = nested
            for part in parts[:-1]:
                child = node.setdefault(part, {})
                if not isinstance(child, dict):
                    raise ConfigError(f"Key {key!r} conflicts with a scalar value")
                node = child
            node[parts[-1]] = value

        root_seed = nested.get("seed", 0)
        for section in SEEDED_SECTIONS:
            section_values = nested.setdefault(section, {})
            if isinstance(section_values, dict):
                section_values.setdefault("seed", root_seed)

        try:
            return cls.model_validate(nested)
        except ValidationError as e:
            problems = "; ".join(
                f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}"
                for err in e.errors()
            )
            raise ConfigError(f"Invalid configuration: {problems}") from e
        except ValueError as e:
            # cross-field checks in model_post_init
            raise ConfigError(f"Invalid configuration: {e}") from e

    @classmethod
    def from_file(
        cls, path: Optional[Path] = None, overrides: Iterable[str] = ()
    ) -> "RunConfig":
        """Load configuration from a KEY=VALUE file plus command-line overrides."""
        values: Dict[str, Any] = {}
        if path is not None:
            path = Path(path)
            if not path.exists():
                raise ConfigError(f"Config file not found: {path}")
            for key, value in dotenv_values(path).items():
                if value is None:
                    raise ConfigError(f"Config key {key!r} has no value in {path}")
                values[key] = value

        for override in overrides:
            key, sep, value = override.partition("=")
            if not sep or not key.strip():
                raise ConfigError(f"Override must look like KEY=VALUE, got {override!r}")
            values[key.strip()] = value.strip()

        return cls.from_mapping(values)

    @classmethod
    def from_env(cls, overrides: Iterable[str] = ()) -> "RunConfig":
        """Load the file named by ``GAITSCOPE_CONFIG`` (if any) plus overrides."""
        env_paths = [
            Path.cwd() / ".env",
            Path(__file__).parent.parent / ".env",
        ]
        for env_path in env_paths:
            if env_path.exists():
                load_dotenv(env_path)
                break

        config_path = os.getenv("GAITSCOPE_CONFIG")
        return cls.from_file(Path(config_path) if config_path else None, overrides)
