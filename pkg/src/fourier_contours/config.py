"""Runtime configuration.

One flat key = value file plus command-line overrides; no environment
variables.  Unknown keys are rejected.  The defaults reproduce the reference
operating point: degree 5 signatures from 400 samples, 50 reconstruction
points, unit regression weight, 0.3 shrink, strides 8/16/32 with scale
ranges [0, 0.4] / [0.3, 0.7] / [0.6, 1].
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .errors import ConfigError
from .targets import DEFAULT_LEVELS, LevelSpec

__all__ = ["Config", "load_config", "apply_overrides", "parse_levels"]


@dataclass(frozen=True)
class Config:
    k: int = 5
    n: int = 400
    n_prime: int = 50
    lam: float = 1.0
    shrink_factor: float = 0.3
    levels: tuple[LevelSpec, ...] = field(default_factory=lambda: DEFAULT_LEVELS)
    score_thresh: float = 0.3
    nms_iou: float = 0.1
    eval_iou: float = 0.5
    subset_threshold: float = 0.07
    iou_supersample: int = 4

    def validate(self) -> "Config":
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if 2 * self.k + 1 > self.n:
            raise ConfigError(f"n = {self.n} too small for k = {self.k} (need 2k + 1 <= n)")
        if self.n_prime < 3:
            raise ConfigError(f"n_prime must be >= 3, got {self.n_prime}")
        if not 0.0 < self.shrink_factor < 1.0:
            raise ConfigError(f"shrink_factor must lie in (0, 1), got {self.shrink_factor}")
        if not 0.0 < self.score_thresh < 1.0:
            raise ConfigError(f"score_thresh must lie in (0, 1), got {self.score_thresh}")
        if not 0.0 < self.nms_iou < 1.0:
            raise ConfigError(f"nms_iou must lie in (0, 1), got {self.nms_iou}")
        if not 0.0 < self.eval_iou <= 1.0:
            raise ConfigError(f"eval_iou must lie in (0, 1], got {self.eval_iou}")
        if self.subset_threshold < 0.0:
            raise ConfigError(f"subset_threshold must be >= 0, got {self.subset_threshold}")
        if self.lam < 0.0:
            raise ConfigError(f"lambda must be >= 0, got {self.lam}")
        if self.iou_supersample < 1:
            raise ConfigError(f"iou_supersample must be >= 1, got {self.iou_supersample}")
        if not self.levels:
            raise ConfigError("need at least one pyramid level")
        strides = [spec.stride for spec in self.levels]
        if sorted(strides) != strides or len(set(strides)) != len(strides):
            raise ConfigError(f"level strides must be strictly ascending, got {strides}")
        return self

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "n": self.n,
            "n_prime": self.n_prime,
            "lambda": self.lam,
            "shrink_factor": self.shrink_factor,
            "levels": ",".join(
                f"{s.name}:{s.stride}:{s.low:g}:{s.high:g}" for s in self.levels
            ),
            "score_thresh": self.score_thresh,
            "nms_iou": self.nms_iou,
            "eval_iou": self.eval_iou,
            "subset_threshold": self.subset_threshold,
            "iou_supersample": self.iou_supersample,
        }


def parse_levels(raw: str) -> tuple[LevelSpec, ...]:
    """Parse "P3:8:0:0.4,P4:16:0.3:0.7,P5:32:0.6:1" into LevelSpecs."""
    specs = []
    for part in raw.split(","):
        fields = part.strip().split(":")
        if len(fields) != 4:
            raise ConfigError(f"bad level spec {part!r}, want name:stride:low:high")
        name, stride, low, high = fields
        try:
            specs.append(LevelSpec(name, int(stride), float(low), float(high)))
        except ValueError as exc:
            raise ConfigError(f"bad level spec {part!r}: {exc}") from None
    return tuple(specs)


_INT_KEYS = {"k", "n", "n_prime", "iou_supersample"}
_FLOAT_KEYS = {
    "lambda",
    "shrink_factor",
    "score_thresh",
    "nms_iou",
    "eval_iou",
    "subset_threshold",
}
_ATTR = {"lambda": "lam"}


def _apply(cfg: Config, key: str, raw: str) -> Config:
    key = key.strip()
    raw = raw.strip()
    if key == "levels":
        return replace(cfg, levels=parse_levels(raw))
    if key in _INT_KEYS:
        try:
            return replace(cfg, **{key: int(raw)})
        except ValueError:
            raise ConfigError(f"{key} must be an integer, got {raw!r}") from None
    if key in _FLOAT_KEYS:
        try:
            return replace(cfg, **{_ATTR.get(key, key): float(raw)})
        except ValueError:
            raise ConfigError(f"{key} must be a number, got {raw!r}") from None
    raise ConfigError(f"unknown configuration key {key!r}")


def load_config(path, base: Config | None = None) -> Config:
    cfg = base or Config()
    try:
        text = open(path, "r", encoding="utf-8").read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected key = value, got {line!r}")
        key, raw = stripped.split("=", 1)
        cfg = _apply(cfg, key, raw)
    return cfg.validate()


def apply_overrides(cfg: Config, pairs) -> Config:
    """Apply key=value strings from the command line."""
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"override {pair!r} must look like key=value")
        key, raw = pair.split("=", 1)
        cfg = _apply(cfg, key, raw)
    return cfg.validate()
