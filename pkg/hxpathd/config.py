"""Configuration management for hxpathd."""
try:
    import tomllib as tomli
except ImportError:
    import tomli
import logging
import os
import tomli_w
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Literal, Optional

from .errors import ConfigError

logger = logging.getLogger(__name__)

CONFIG_ENV = "HXPATHD_CONFIG"
FIXTURES_ENV = "HXPATHD_FIXTURES"
DEFAULT_CONFIG = Path("hxpathd.toml")


@dataclass
class ProverConfig:
    """Proof search limits."""
    max_fresh: int = 4
    max_depth: int = 64
    model_bound: int = 3
    witness_cuts: bool = True


@dataclass
class CutElimConfig:
    """Cut elimination limits."""
    max_steps: int = 10000
    fallback_search: bool = False


@dataclass
class OutputConfig:
    """Report format and log level."""
    format: Literal["human", "structured"] = "human"
    log_level: str = "INFO"


@dataclass
class PathsConfig:
    fixture_dir: str = "fixtures"


@dataclass
class AppConfig:
    """Main application configuration."""
    prover: ProverConfig = field(default_factory=ProverConfig)
    cutelim: CutElimConfig = field(default_factory=CutElimConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    paths: PathsConfig = field(default_factory=PathsConfig)

    def fixture_dir(self) -> Path:
        """Fixture directory, HXPATHD_FIXTURES taking precedence."""
        return Path(os.environ.get(FIXTURES_ENV) or self.paths.fixture_dir)


def _section(cls, name: str, data: dict):
    known = {f.name for f in fields(cls)}
    raw = data.get(name, {})
    if not isinstance(raw, dict):
        raise ConfigError(f"[{name}] must be a table")
    unknown = sorted(set(raw) - known)
    if unknown:
        logger.warning(f"ignoring unknown keys in [{name}]: {', '.join(unknown)}")
    try:
        return cls(**{k: v for k, v in raw.items() if k in known})
    except TypeError as e:
        raise ConfigError(f"bad [{name}] section: {e}") from e


def resolve_config_path(flag: Optional[str] = None) -> Path:
    """--config flag, then HXPATHD_CONFIG, then ./hxpathd.toml."""
    if flag:
        return Path(flag)
    env = os.environ.get(CONFIG_ENV)
    return Path(env) if env else DEFAULT_CONFIG


class ConfigManager:
    """Manages configuration loading and saving."""

    def __init__(self, config_path: Path):
        self.config_path = Path(config_path)

    def load(self) -> AppConfig:
        """Load configuration from TOML file; a missing file gives defaults."""
        if not self.config_path.exists():
            logger.debug(f"no config at {self.config_path}, using defaults")
            return AppConfig()

        try:
            with open(self.config_path, 'rb') as f:
                data = tomli.load(f)
        except (OSError, tomli.TOMLDecodeError) as e:
            raise ConfigError(f"cannot read {self.config_path}: {e}") from e

        unknown = sorted(set(data) - {"prover", "cutelim", "output", "paths"})
        if unknown:
            logger.warning(f"ignoring unknown sections: {', '.join(unknown)}")

        config = AppConfig(
            prover=_section(ProverConfig, "prover", data),
            cutelim=_section(CutElimConfig, "cutelim", data),
            output=_section(OutputConfig, "output", data),
            paths=_section(PathsConfig, "paths", data),
        )
        if config.output.format not in ("human", "structured"):
            raise ConfigError(f"unknown output format {config.output.format!r}")
        if not isinstance(logging.getLevelName(str(config.output.log_level).upper()), int):
            raise ConfigError(f"unknown log level {config.output.log_level!r}")
        config.output.log_level = str(config.output.log_level).upper()
        logger.debug(f"loaded config from {self.config_path}")
        return config

    def save(self, config: AppConfig) -> None:
        """Save configuration to TOML file."""
        self.config_path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.config_path, 'wb') as f:
            tomli_w.dump(asdict(config), f)
