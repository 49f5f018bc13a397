r"""
Configuration Module

Handles loading and validation of configuration settings from TOML files.

Configuration File Location:
- Windows: AppData\Roaming\kreiss-lab\config.toml
- macOS: ~/Library/Application Support/kreiss-lab/config.toml
- Linux: ~/.config/kreiss-lab/config.toml

Configuration Keys:
- log_level (str): Logging level (debug, info, warning, error, critical, or null)
- seed (int): Base seed for every randomized experiment
- trials (int): Number of random trials per experiment
- threads (int): Worker threads (null = physical cores)
- tol (float): Default tolerance for polynomial identities and FFT stability
- m_max (int): Largest FFT grid the adaptive symbol calculus may use
- singularity_floor (float): Smallest admissible min |lambda - q| for resolvents
- phases (int): Phases sampled on each Kreiss circle
- divergence_slope (float): Log-trend slope above which an estimator diverges
- kreiss_depth (int): Default moduli reach down to 1 + 2**-kreiss_depth
- output_dir (str): Directory for relative --out paths

CLI arguments override config file values; KREISSLAB_THREADS overrides threads.
"""

import logging
import os
import sys
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Optional

import psutil

# Try to import tomllib (Python 3.11+) or tomli (fallback)
try:
    import tomllib
except ImportError:
    try:
        import tomli as tomllib
    except ImportError:
        tomllib = None

logger = logging.getLogger(__name__)

APP_NAME = "kreiss-lab"
THREADS_ENV = "KREISSLAB_THREADS"


@dataclass
class Settings:
    """Application settings with defaults."""

    log_level: Optional[str] = None
    seed: int = 20240101
    trials: int = 200
    threads: Optional[int] = None
    tol: float = 1e-10
    m_max: int = 2**22
    singularity_floor: float = 1e-12
    phases: int = 16
    divergence_slope: float = 0.02
    kreiss_depth: int = 20
    output_dir: str = "."

    def __post_init__(self):
        """Validate settings after initialization."""
        self._validate()

    def _validate(self):
        """Validate settings values."""
        defaults = Settings.__dataclass_fields__

        valid_log_levels = ['debug', 'info', 'warning', 'error', 'critical']
        if self.log_level is not None and str(self.log_level).lower() not in valid_log_levels:
            logger.warning(f"Invalid log_level '{self.log_level}'. Using default (no logging)")
            self.log_level = None
        elif self.log_level is not None:
            self.log_level = self.log_level.lower()

        if not isinstance(self.seed, int) or self.seed < 0 or self.seed >= 2**64:
            logger.warning(f"Invalid seed {self.seed!r}, must be a 64-bit unsigned integer. Using default")
            self.seed = defaults["seed"].default

        if self.trials < 1:
            logger.warning(f"Invalid trials {self.trials}, must be >= 1. Using default 200")
            self.trials = defaults["trials"].default

        if self.threads is not None and self.threads < 1:
            logger.warning(f"Invalid threads {self.threads}, must be >= 1. Using physical core count")
            self.threads = None

        if not 0.0 < self.tol < 1.0:
            logger.warning(f"Invalid tol {self.tol}, must lie in (0, 1). Using default 1e-10")
            self.tol = defaults["tol"].default

        if self.m_max < 64 or self.m_max & (self.m_max - 1):
            logger.warning(f"Invalid m_max {self.m_max}, must be a power of two >= 64. Using default 2**22")
            self.m_max = defaults["m_max"].default

        if self.singularity_floor <= 0.0:
            logger.warning(f"Invalid singularity_floor {self.singularity_floor}, must be > 0. Using default 1e-12")
            self.singularity_floor = defaults["singularity_floor"].default

        if self.phases < 1:
            logger.warning(f"Invalid phases {self.phases}, must be >= 1. Using default 16")
            self.phases = defaults["phases"].default

        if self.divergence_slope <= 0.0:
            logger.warning(f"Invalid divergence_slope {self.divergence_slope}, must be > 0. Using default 0.02")
            self.divergence_slope = defaults["divergence_slope"].default

        if not 0 <= self.kreiss_depth <= 30:
            logger.warning(f"Invalid kreiss_depth {self.kreiss_depth}, must lie in [0, 30]. Using default 20")
            self.kreiss_depth = defaults["kreiss_depth"].default

    def resolved_threads(self) -> int:
        """Worker count: the configured value, else the number of physical cores."""
        if self.threads is not None:
            return self.threads
        return psutil.cpu_count(logical=False) or os.cpu_count() or 1

    def as_dict(self) -> dict:
        return asdict(self)


def get_config_dir() -> Path:
    """Per-platform directory holding kreiss-lab's config.toml."""
    if sys.platform == "win32":
        return Path.home() / "AppData" / "Roaming" / APP_NAME
    if sys.platform == "darwin":
        return Path.home() / "Library" / "Application Support" / APP_NAME
    base = os.environ.get("XDG_CONFIG_HOME") or str(Path.home() / ".config")
    return Path(base) / APP_NAME


def get_default_config_path() -> Path:
    return get_config_dir() / "config.toml"


def load_config(path: Optional[Path] = None) -> Settings:
    """
    Read settings from a TOML file.

    A missing or unreadable file is not an error: the lab falls back to the
    default Settings and says so in the log. Unknown keys are ignored with a
    warning; invalid values are reset by Settings validation.

    Args:
        path: explicit --config file, or None for get_default_config_path()

    Returns:
        Settings built from the file's known keys
    """
    source = "--config" if path is not None else "default location"
    path = path if path is not None else get_default_config_path()
    logger.info(f"Looking for settings at {path} ({source})")

    if not path.exists():
        logger.info(f"No settings file at {path}; running with built-in defaults")
        return Settings()

    if tomllib is None:
        logger.warning(f"Cannot parse {path}: neither tomllib nor tomli is importable (pip install tomli)")
        return Settings()

    try:
        with path.open("rb") as handle:
            table = tomllib.load(handle)
        logger.info(f"Read {len(table)} setting(s) from {path}")

        known = Settings.__dataclass_fields__
        unknown = sorted(set(table) - set(known))
        if unknown:
            logger.warning(f"Ignoring unknown config keys: {', '.join(unknown)}")

        return Settings(**{key: value for key, value in table.items() if key in known})

    except Exception as e:
        logger.warning(f"Settings file {path} is unusable ({e}); running with built-in defaults")
        return Settings()


def apply_env_overrides(settings: Settings) -> Settings:
    """
    Apply environment overrides (currently KREISSLAB_THREADS).

    Args:
        settings: Settings loaded from config file

    Returns:
        Settings with environment values applied
    """
    raw = os.environ.get(THREADS_ENV)
    if raw is None or not raw.strip():
        return settings
    try:
        threads = int(raw)
    except ValueError:
        logger.warning(f"Ignoring {THREADS_ENV}={raw!r}: not an integer")
        return settings
    logger.info(f"{THREADS_ENV} overrides threads: {threads}")
    return replace(settings, threads=threads)


def merge_cli_args(settings: Settings, args) -> Settings:
    """
    Merge CLI arguments into settings, with CLI taking precedence.

    Args:
        settings: Settings loaded from config file
        args: Parsed command line arguments

    Returns:
        Merged Settings object
    """
    merged = replace(settings)

    for key in ("seed", "trials", "threads", "tol", "m_max", "phases"):
        value = getattr(args, key, None)
        if value is not None:
            setattr(merged, key, value)

    if getattr(args, 'debug', False):
        merged.log_level = 'debug'
    elif getattr(args, 'verbose', False):
        merged.log_level = 'info'
    elif getattr(args, 'log_level', None):
        merged.log_level = args.log_level

    # re-run validation on the merged values
    merged._validate()
    return merged
