from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, Optional, Type, TypeVar

import yaml

from eigenfactors.checks.derivatives import CheckConfig
from eigenfactors.errors import ConfigError
from eigenfactors.models import OptimizerConfig, WorldSpec

logger = logging.getLogger(__name__)

DEFAULTS_PATH = Path(__file__).resolve().parent / "data" / "defaults.yaml"

C = TypeVar("C")


@dataclass
class EvaluationSettings:
    radius: float = 0.3
    min_neighbors: int = 5

    def __post_init__(self) -> None:
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        if self.min_neighbors < 1:
            raise ValueError("min_neighbors must be at least 1")


def _coerce(section: str, name: str, value: Any, default: Any) -> Any:
    if isinstance(default, bool) or isinstance(value, bool):
        raise ConfigError(f"{section}.{name}: booleans are not accepted")
    if isinstance(default, float) and isinstance(value, (int, float)):
        return float(value)
    if isinstance(default, int) and isinstance(value, int):
        return value
    if isinstance(default, str) and isinstance(value, str):
        return value
    raise ConfigError(
        f"{section}.{name}: expected {type(default).__name__}, got {type(value).__name__}"
    )


def _section(cls: Type[C], base: C, section: str, raw: Any) -> C:
    if raw is None:
        return base
    if not isinstance(raw, dict):
        raise ConfigError(f"section '{section}' must be a mapping")
    known = {f.name for f in fields(cls)}
    for key in raw:
        if key not in known:
            logger.warning("unknown setting %s.%s ignored", section, key)
    updates = {
        k: _coerce(section, k, v, getattr(base, k)) for k, v in raw.items() if k in known
    }
    try:
        return replace(base, **updates)
    except ValueError as exc:
        raise ConfigError(f"section '{section}': {exc}") from exc


@dataclass
class Settings:
    world: WorldSpec = field(default_factory=WorldSpec)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    evaluation: EvaluationSettings = field(default_factory=EvaluationSettings)
    checks: CheckConfig = field(default_factory=CheckConfig)

    @classmethod
    def load_default(cls) -> "Settings":
        return cls.load_from_path(DEFAULTS_PATH, base=cls())

    @classmethod
    def load_from_path(cls, path: Path, base: Optional["Settings"] = None) -> "Settings":
        """Layer a YAML file over ``base`` (the packaged defaults when omitted)."""
        try:
            raw = yaml.safe_load(path.read_text(encoding="utf-8"))
        except yaml.YAMLError as exc:
            raise ConfigError(f"YAML parse error in '{path}': {exc}") from exc
        except OSError as exc:
            raise FileNotFoundError(f"settings file not found: {path}") from exc

        if base is None:
            base = cls.load_default()
        if raw is None:
            return base
        if not isinstance(raw, dict):
            raise ConfigError(f"invalid settings file '{path}': top level must be a mapping")
        for key in raw:
            if key not in {"world", "optimizer", "evaluation", "checks"}:
                logger.warning("unknown settings section '%s' in %s ignored", key, path)
        return cls(
            world=_section(WorldSpec, base.world, "world", raw.get("world")),
            optimizer=_section(OptimizerConfig, base.optimizer, "optimizer", raw.get("optimizer")),
            evaluation=_section(EvaluationSettings, base.evaluation, "evaluation", raw.get("evaluation")),
            checks=_section(CheckConfig, base.checks, "checks", raw.get("checks")),
        )

    @classmethod
    def load(cls, path: Optional[Path] = None) -> "Settings":
        return cls.load_default() if path is None else cls.load_from_path(path)

    def as_dict(self) -> Dict[str, Any]:
        return {
            "world": asdict(self.world),
            "optimizer": asdict(self.optimizer),
            "evaluation": asdict(self.evaluation),
            "checks": asdict(self.checks),
        }
