# config.py - run configuration and logging setup
"""
Mushroom-body plasticity search - configuration
===============================================

Environment settings (.env / process env) plus the JSON run file that
describes one experiment: dataset, network, training protocol, search
knobs and output paths. Every bound is checked before any work starts.
"""

import json
import logging
import sys
from pathlib import Path
from typing import Any, Literal

import structlog
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from pydantic_settings import BaseSettings

from errors import ConfigError
from space import Configuration

load_dotenv()

DatasetId = Literal["mnist", "fashion-mnist"]


class Settings(BaseSettings):
    """Process environment. Field names map to MUSHROOM_DATA_DIR, LOG_LEVEL, ..."""

    mushroom_data_dir: Path = Path("./data")
    log_level: str = "INFO"
    log_format: Literal["console", "json"] = "console"
    debug: bool = False


def get_settings() -> Settings:
    return Settings()


def configure_logging(settings: Settings | None = None) -> None:
    """structlog to stderr; stdout is reserved for command output."""
    settings = settings or get_settings()
    level_name = "DEBUG" if settings.debug else settings.log_level.upper()
    level = getattr(logging, level_name, logging.INFO)

    renderer = (
        structlog.processors.JSONRenderer()
        if settings.log_format == "json"
        else structlog.dev.ConsoleRenderer(colors=False)
    )
    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(level),
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )


class NetConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    n_in: int = Field(784, ge=1)
    n_hidden: int = Field(1000, ge=1)
    n_out: int = Field(10, ge=1)
    fan_in: int = Field(32, ge=1)
    k_active: int = Field(50, ge=1)
    gamma: float = Field(0.0, ge=0.0)  # lateral inhibition strength

    @model_validator(mode="after")
    def _check_sizes(self) -> "NetConfig":
        if self.k_active > self.n_hidden:
            raise ValueError(f"k_active ({self.k_active}) must be <= n_hidden ({self.n_hidden})")
        if self.fan_in > self.n_in:
            raise ValueError(f"fan_in ({self.fan_in}) must be <= n_in ({self.n_in})")
        return self


class TrainProtocol(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    n_train: int = Field(20000, ge=0)
    passes: float = Field(1.0, ge=0.0)
    train_seed: int = 0
    net_seed: int = 0

    @property
    def n_updates(self) -> int:
        return int(round(self.n_train * self.passes))


class SearchSettings(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    budget: int = Field(200, ge=1)
    n_workers: int = Field(1, ge=1)
    n_init: int | None = Field(None, ge=1)
    pool_size: int = Field(10000, ge=1)
    eta: float = Field(1.0, gt=0.0)
    kappa: float = Field(1.96, ge=0.0)
    seed: int = 0
    strategy: Literal["ambs", "random"] = "ambs"
    n_trees: int = Field(100, ge=1)
    min_leaf: int = Field(3, ge=1)

    @model_validator(mode="after")
    def _check_init(self) -> "SearchSettings":
        if self.n_init is not None and self.n_init > self.budget:
            raise ValueError(f"n_init ({self.n_init}) must be <= budget ({self.budget})")
        return self

    @property
    def initial_design(self) -> int:
        if self.n_init is not None:
            return self.n_init
        return min(self.budget, max(10, self.n_workers))


class OutputPaths(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    log: Path = Path("search_log.jsonl")
    report_csv: Path = Path("scatter.csv")


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    dataset: DatasetId = "mnist"
    net: NetConfig = NetConfig()
    protocol: TrainProtocol = TrainProtocol()
    search: SearchSettings = SearchSettings()
    output: OutputPaths = OutputPaths()
    evaluation: Configuration | None = None  # the single point `eval` runs
    expected_sha256: dict[str, str] = Field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RunConfig":
        try:
            return cls.model_validate(data)
        except ValidationError as e:
            raise ConfigError(_field_problems(e)) from e

    @classmethod
    def from_file(cls, path: str | Path | None) -> "RunConfig":
        if path is None:
            return cls()
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError([f"{path}: {e}"]) from e
        return cls.from_dict(data)

    def with_overrides(
        self,
        dataset: str | None = None,
        budget: int | None = None,
        workers: int | None = None,
        seed: int | None = None,
        out: str | Path | None = None,
        strategy: str | None = None,
    ) -> "RunConfig":
        """CLI flags win over file values; the merged result is re-validated."""
        data = self.model_dump()
        search = data["search"]
        if dataset is not None:
            data["dataset"] = dataset
        if budget is not None:
            search["budget"] = budget
        if workers is not None:
            search["n_workers"] = workers
        if seed is not None:
            search["seed"] = seed
        if strategy is not None:
            search["strategy"] = strategy
        if out is not None:
            data["output"]["log"] = Path(out)
        return RunConfig.from_dict(data)


def _field_problems(error: ValidationError) -> list[str]:
    problems = []
    for item in error.errors():
        where = ".".join(str(part) for part in item["loc"]) or "<root>"
        problems.append(f"{where}: {item['msg']}")
    return problems
