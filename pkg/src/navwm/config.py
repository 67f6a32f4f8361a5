"""Configuration dataclasses and the flat dotted-key registry behind the CLI.

Every tunable lives in one of the section dataclasses below. The CLI (and the
``key = value`` config-file format) addresses them as ``section.field``, e.g.
``model.d_model`` or ``train.lr``. Unknown keys are rejected, and the fully
resolved configuration is embedded in the header of every artifact a run
writes.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from typing import Any


@dataclass
class WorldConfig:
    n_rooms: int = 4
    n_classes: int = 8          # class 0 is reserved for walls
    feat_dim: int = 16
    n_rays: int = 64
    cell: float = 0.25
    max_range: float = 20.0
    room_min: float = 6.0
    room_max: float = 10.0
    door_width: float = 1.5
    min_objects_per_room: int = 1
    max_objects_per_room: int = 3
    object_radius_min: float = 0.3
    object_radius_max: float = 0.5
    agent_radius: float = 0.2
    extra_door_prob: float = 0.15
    max_retries: int = 50
    fov_rays: int = 0           # 0 = full 360 panorama; >0 narrows the FOV (untested variant)


@dataclass
class EpisodeConfig:
    max_step_dist: float = 0.5
    success_radius: float = 1.0
    turn_thresh_deg: float = 30.0
    straight_span: float = 5.0
    min_geodesic: float = 6.0
    max_geodesic: float = 18.0
    max_milestones: int = 8
    max_retries: int = 50


@dataclass
class DatasetConfig:
    short_horizon: int = 4      # k
    n_waypoints: int = 5        # K
    sample_stride: int = 1
    stop_window: int = 1
    turn_lookahead: int = 4
    forward_cap_ratio: float = 2.0
    forward_cap_floor: int = 20
    stop_dup: int = 2


@dataclass
class ModelConfig:
    d_model: int = 128
    n_layers: int = 4
    n_heads: int = 4
    ffn_hidden: int = 256
    n_rays: int = 64            # R
    feat_dim: int = 16          # F
    n_classes: int = 8          # C
    obs_patch: int = 8          # rays per observation token
    q_tokens: int = 8           # tokens per dream-query subgroup
    h_max: int = 8              # max history frames
    short_horizon: int = 4      # k
    n_waypoints: int = 5        # K
    vocab_size: int = 32
    instr_span: int = 64
    max_subinstr: int = 12
    decoder_layers: int = 2
    action_tf_layers: int = 2

    @property
    def obs_tokens(self) -> int:
        return self.n_rays // self.obs_patch

    def validate(self):
        if self.n_rays % self.obs_patch != 0:
            raise ValueError(f"n_rays={self.n_rays} not divisible by obs_patch={self.obs_patch}")
        if self.d_model % self.n_heads != 0:
            raise ValueError(f"d_model={self.d_model} not divisible by n_heads={self.n_heads}")
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, int) and v <= 0:
                raise ValueError(f"model.{f.name} must be positive, got {v}")


@dataclass
class TrainConfig:
    alpha: float = 0.25         # depth loss weight
    beta: float = 0.3           # semantics loss weight
    silog_lambda: float = 0.5
    batch_size: int = 4
    steps: int = 5000
    lr: float = 3e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.01
    seed: int = 0
    mix_ratio: float = 0.5      # P(planning sample)
    checkpoint_every: int = 1000
    cosine_decay: bool = False
    diverge_factor: float = 10.0
    diverge_patience: int = 100
    log_every: int = 1


@dataclass
class EvalConfig:
    exec_horizon: int = 1
    stop_threshold: float = 0.5
    max_steps_factor: float = 4.0
    success_radius: float = 1.0


@dataclass
class AblationFlags:
    planning: bool = True
    long: bool = True
    short: bool = True
    depth: bool = True
    sem: bool = True

    def group_enabled(self, horizon: str, modality: str) -> bool:
        h = self.short if horizon == "S" else self.long
        m = self.depth if modality == "depth" else self.sem
        return h and m

    def enabled_groups(self) -> list[str]:
        out = []
        for horizon in ("S", "L"):
            for modality in ("depth", "sem"):
                if self.group_enabled(horizon, modality):
                    out.append(f"Q{horizon}_{modality.upper()}")
        return out

    def tag(self) -> str:
        if self.planning and self.long and self.short and self.depth and self.sem:
            return "full"
        if not (self.long or self.short or self.planning):
            return "-all"
        if not self.planning:
            return "-planning"
        if not self.long:
            return "-long"
        if not self.depth:
            return "-depth"
        if not self.sem:
            return "-sem"
        return "custom"


ABLATION_ROWS = {
    "full": AblationFlags(),
    "-planning": AblationFlags(planning=False),
    "-long": AblationFlags(long=False),
    "-all": AblationFlags(planning=False, long=False, short=False),
    "-depth": AblationFlags(depth=False),
    "-sem": AblationFlags(sem=False),
}


@dataclass
class RunConfig:
    """Merged configuration tree for one CLI invocation."""

    world: WorldConfig = field(default_factory=WorldConfig)
    episode: EpisodeConfig = field(default_factory=EpisodeConfig)
    dataset: DatasetConfig = field(default_factory=DatasetConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)

    def to_dict(self) -> dict[str, dict[str, Any]]:
        return {s.name: dataclasses.asdict(getattr(self, s.name)) for s in dataclasses.fields(self)}

    def to_flat(self) -> dict[str, Any]:
        flat = {}
        for section, kv in self.to_dict().items():
            for k, v in kv.items():
                flat[f"{section}.{k}"] = v
        return flat

    def header_json(self) -> str:
        """Canonical single-line JSON for artifact headers (no timestamps)."""
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


def default_config() -> RunConfig:
    return RunConfig()


def registry() -> dict[str, Any]:
    """Dotted key -> default value, for --help listings and validation."""
    return default_config().to_flat()


def _coerce(key: str, raw: Any, default: Any) -> Any:
    if isinstance(raw, str):
        s = raw.strip()
        if isinstance(default, bool):
            if s.lower() in ("1", "true", "yes", "on"):
                return True
            if s.lower() in ("0", "false", "no", "off"):
                return False
            raise ConfigError(f"config key {key}: expected boolean, got {raw!r}")
        if isinstance(default, int):
            try:
                return int(s)
            except ValueError:
                raise ConfigError(f"config key {key}: expected integer, got {raw!r}") from None
        if isinstance(default, float):
            try:
                v = float(s)
            except ValueError:
                raise ConfigError(f"config key {key}: expected number, got {raw!r}") from None
            if not math.isfinite(v):
                raise ConfigError(f"config key {key}: non-finite value {raw!r}")
            return v
        return s
    if isinstance(default, bool) and not isinstance(raw, bool):
        raise ConfigError(f"config key {key}: expected boolean, got {raw!r}")
    if isinstance(default, float) and isinstance(raw, int):
        return float(raw)
    if type(raw) is not type(default):
        raise ConfigError(f"config key {key}: expected {type(default).__name__}, got {raw!r}")
    return raw


class ConfigError(ValueError):
    pass


def apply_overrides(cfg: RunConfig, overrides: dict[str, Any]) -> RunConfig:
    """Set dotted keys on a copy of cfg, rejecting unknown keys and bad types."""
    reg = registry()
    cfg = RunConfig(**{s.name: dataclasses.replace(getattr(cfg, s.name))
                       for s in dataclasses.fields(RunConfig)})
    for key, raw in overrides.items():
        if key not in reg:
            raise ConfigError(f"unknown config key {key!r} (value {raw!r})")
        section, name = key.split(".", 1)
        setattr(getattr(cfg, section), name, _coerce(key, raw, reg[key]))
    return cfg


def parse_config_file(path: str) -> dict[str, Any]:
    """Parse the ``key = value`` config-file format ('#' starts a comment)."""
    overrides: dict[str, Any] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line.rstrip()!r}")
            key, val = stripped.split("=", 1)
            overrides[key.strip()] = val.strip()
    return overrides


def load_config(path: str | None = None, overrides: dict[str, Any] | None = None) -> RunConfig:
    cfg = default_config()
    if path is not None:
        cfg = apply_overrides(cfg, parse_config_file(path))
    if overrides:
        cfg = apply_overrides(cfg, overrides)
    cfg.model.validate()
    return cfg
