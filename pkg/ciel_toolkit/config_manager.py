"""
Configuration for the CIEL toolkit

Settings live in a JSON file with four sections: limits, performance, output and
logging. Keys missing from the file keep their defaults; unknown keys are reported
and ignored.
"""
import json
import logging
import os
from dataclasses import dataclass, field, fields
from typing import Optional

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_FILE = "./config/ciel.json"
SECTIONS = ("limits", "performance", "output", "logging")


@dataclass
class Limits:
    """Resource caps; exceeding one raises ResourceLimitError"""
    closure_cap: int = 4096
    sigma_cap: int = 256
    type_cap: int = 2 ** 20
    agent_atom_cap: int = 20
    taut_letter_cap: int = 20
    gel_position_cap: int = 20
    puzzle_world_cap: int = 4096
    submodel_world_cap: int = 8
    witness_pair_cap: int = 2_000_000


@dataclass
class PerformanceSettings:
    max_workers: int = 1
    log_file: Optional[str] = None


@dataclass
class OutputSettings:
    report_dir: str = "./data/reports"
    witness_file: Optional[str] = None


@dataclass
class LoggingSettings:
    level: str = "INFO"
    file: Optional[str] = None


@dataclass
class ConfigManager:
    """
    Toolkit settings read from $CIEL_CONFIG, ./config/ciel.json or an explicit file
    """
    config_file: Optional[str] = None
    limits: Limits = field(default_factory=Limits)
    performance: PerformanceSettings = field(default_factory=PerformanceSettings)
    output: OutputSettings = field(default_factory=OutputSettings)
    logging: LoggingSettings = field(default_factory=LoggingSettings)

    def __post_init__(self):
        self.config_file = self.config_file or os.environ.get("CIEL_CONFIG") or DEFAULT_CONFIG_FILE
        self.loaded = self.load_config()

    def load_config(self) -> bool:
        """
        Apply the configuration file on top of the current settings

        Returns:
            True when a file was read, False when it is missing or unreadable
        """
        if not os.path.exists(self.config_file):
            logger.debug(f"Configuration file {self.config_file} not found, using defaults")
            return False
        try:
            with open(self.config_file, "r", encoding="utf-8") as f:
                data = json.load(f)
        except (OSError, ValueError) as e:
            logger.error(f"Error loading configuration from {self.config_file}: {e}")
            return False
        if not isinstance(data, dict):
            logger.error(f"Configuration file {self.config_file} does not hold a JSON object")
            return False

        for name, values in data.items():
            section = getattr(self, name) if name in SECTIONS else None
            if section is None or not isinstance(values, dict):
                logger.warning(f"Ignoring configuration section {name!r}")
                continue
            self._apply(name, section, values)
        logger.info(f"Configuration loaded from {self.config_file}")
        return True

    @staticmethod
    def _apply(name, section, values):
        known = {f.name for f in fields(section)}
        for key, value in values.items():
            if key not in known:
                logger.warning(f"Ignoring unknown setting {name}.{key}")
                continue
            default = getattr(section, key)
            if isinstance(default, int) and not isinstance(value, int):
                logger.warning(f"Ignoring {name}.{key}={value!r}: expected an integer")
                continue
            setattr(section, key, value)

    def override(self, closure_cap: Optional[int] = None, type_cap: Optional[int] = None,
                 max_workers: Optional[int] = None, log_level: Optional[str] = None):
        """Command-line overrides for a single run"""
        if closure_cap:
            self.limits.closure_cap = closure_cap
        if type_cap:
            self.limits.type_cap = type_cap
        if max_workers:
            self.performance.max_workers = max_workers
        if log_level:
            self.logging.level = log_level.upper()
