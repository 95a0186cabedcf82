import os
import logging
from dataclasses import dataclass, asdict, replace

logger = logging.getLogger(__name__)

VERSION = "0.1.0"

# Default seed used when neither --seed nor STABVERIFY_SEED is given
DEFAULT_SEED = 20160301


def _env_int(name, default):
    value = os.environ.get(name)
    if value is None or value == "":
        return default
    try:
        return int(value)
    except ValueError:
        logger.warning(f"Ignoring non-integer {name}={value!r}, using {default}")
        return default


@dataclass(frozen=True)
class RunConfig:
    """Settings shared by every command: seed, dense caps, tolerances and trial counts"""

    seed: int = DEFAULT_SEED
    pure_cap: int = 12
    mixed_cap: int = 10
    tol_valid: float = 1e-9
    tol_exact: float = 1e-12
    rounds: int = 10000
    sweep_cases: int = 1000
    max_challenge_bits: int = 10
    out: str | None = None
    database_url: str | None = None

    def __post_init__(self):
        if self.pure_cap <= 0 or self.mixed_cap <= 0:
            raise ValueError("Dense caps must be positive")
        if self.rounds < 0 or self.sweep_cases < 0:
            raise ValueError("Trial counts must be non-negative")

    @classmethod
    def from_env(cls):
        """
        Build a config from STABVERIFY_* environment variables

        Returns:
            RunConfig: defaults overridden by whatever the environment sets
        """
        return cls(
            seed=_env_int("STABVERIFY_SEED", DEFAULT_SEED),
            pure_cap=_env_int("STABVERIFY_PURE_CAP", 12),
            mixed_cap=_env_int("STABVERIFY_MIXED_CAP", 10),
            rounds=_env_int("STABVERIFY_ROUNDS", 10000),
            database_url=os.environ.get("STABVERIFY_DATABASE_URL") or None,
        )

    def to_dict(self):
        return asdict(self)

    def echo(self):
        """The part of the config that affects results (paths and URLs left out)"""
        data = self.to_dict()
        data.pop("out")
        data.pop("database_url")
        return data


settings = RunConfig.from_env()


def configure(**overrides):
    """
    Replace the active settings, ignoring overrides that are None

    Returns:
        RunConfig: the new active config
    """
    global settings
    changes = {key: value for key, value in overrides.items() if value is not None}
    settings = replace(settings, **changes)
    logger.debug(f"Active config: {settings}")
    return settings


def current():
    return settings


def reset():
    """Back to the environment defaults"""
    global settings
    settings = RunConfig.from_env()
    return settings
