# space.py
"""Search space: categorical rule choice plus four log-scaled coefficients."""

import hashlib
from dataclasses import dataclass, field

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from errors import ConfigError
from plasticity import RuleId, RuleParams

CONTINUOUS = ("alpha", "beta1", "beta2", "beta3")

ALPHA_BOUNDS = (1e-3, 1.0)
BETA_BOUNDS = (1e-5, 1.0)


class Configuration(BaseModel):
    """One point of the search box (rule + coefficients)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    rule: RuleId
    alpha: float = Field(ge=ALPHA_BOUNDS[0], le=ALPHA_BOUNDS[1])
    beta1: float = Field(BETA_BOUNDS[0], ge=BETA_BOUNDS[0], le=BETA_BOUNDS[1])
    beta2: float = Field(BETA_BOUNDS[0], ge=BETA_BOUNDS[0], le=BETA_BOUNDS[1])
    beta3: float = Field(BETA_BOUNDS[0], ge=BETA_BOUNDS[0], le=BETA_BOUNDS[1])

    def rule_params(self) -> RuleParams:
        return RuleParams(alpha=self.alpha, beta1=self.beta1, beta2=self.beta2, beta3=self.beta3)

    def digest(self) -> int:
        """Stable 64-bit fingerprint, independent of process and hash seed."""
        text = f"{self.rule.value}|{self.alpha!r}|{self.beta1!r}|{self.beta2!r}|{self.beta3!r}"
        return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big")


@dataclass(frozen=True)
class SearchSpaceDef:
    rules: tuple[RuleId, ...] = tuple(RuleId)
    bounds: dict[str, tuple[float, float]] = field(
        default_factory=lambda: {
            "alpha": ALPHA_BOUNDS,
            "beta1": BETA_BOUNDS,
            "beta2": BETA_BOUNDS,
            "beta3": BETA_BOUNDS,
        }
    )
    scale: str = "log"

    def __post_init__(self):
        for name in CONTINUOUS:
            lo, hi = self.bounds[name]
            if not 0 < lo < hi:
                raise ConfigError([f"{name}: bounds must satisfy 0 < lower < upper, got {(lo, hi)}"])

    @property
    def n_features(self) -> int:
        return len(self.rules) + len(CONTINUOUS)

    @property
    def log_bounds(self) -> np.ndarray:
        """(4, 2) array of log10 bounds, CONTINUOUS order."""
        return np.log10(np.array([self.bounds[name] for name in CONTINUOUS], dtype=np.float64))


DEFAULT_SPACE = SearchSpaceDef()


def encode_config(config: Configuration, space: SearchSpaceDef = DEFAULT_SPACE) -> np.ndarray:
    """8 one-hot rule indicators followed by log10 of alpha, beta1..beta3."""
    problems = []
    for name in CONTINUOUS:
        lo, hi = space.bounds[name]
        value = getattr(config, name)
        if not lo <= value <= hi:
            problems.append(f"{name}={value} outside [{lo}, {hi}]")
    if config.rule not in space.rules:
        problems.append(f"rule {config.rule} not in search space")
    if problems:
        raise ConfigError(problems)

    x = np.zeros(space.n_features)
    x[space.rules.index(config.rule)] = 1.0
    x[len(space.rules):] = np.log10([getattr(config, name) for name in CONTINUOUS])
    return x


def decode_config(x: np.ndarray, space: SearchSpaceDef = DEFAULT_SPACE) -> Configuration:
    n_rules = len(space.rules)
    rule = space.rules[int(np.argmax(x[:n_rules]))]
    values = _from_log(np.asarray(x[n_rules:], dtype=np.float64), space)
    return Configuration(rule=rule, **dict(zip(CONTINUOUS, values.tolist())))


def _from_log(logs: np.ndarray, space: SearchSpaceDef) -> np.ndarray:
    # clip guards the box against 10**log10(x) rounding past an endpoint
    bounds = np.array([space.bounds[name] for name in CONTINUOUS])
    return np.clip(10.0**logs, bounds[:, 0], bounds[:, 1])


def random_config(space: SearchSpaceDef, rng: np.random.Generator) -> Configuration:
    """Rule uniform over the space, coefficients log-uniform within their bounds."""
    rule = space.rules[int(rng.integers(len(space.rules)))]
    lb = space.log_bounds
    values = _from_log(rng.uniform(lb[:, 0], lb[:, 1]), space)
    return Configuration(rule=rule, **dict(zip(CONTINUOUS, values.tolist())))


def sample_pool(space: SearchSpaceDef, rng: np.random.Generator, size: int) -> np.ndarray:
    """Encoded (size, n_features) matrix of uniform draws; decode rows with decode_config."""
    n_rules = len(space.rules)
    lb = space.log_bounds
    X = np.zeros((size, space.n_features))
    X[np.arange(size), rng.integers(n_rules, size=size)] = 1.0
    logs = rng.uniform(lb[:, 0], lb[:, 1], size=(size, len(CONTINUOUS)))
    # store the log of the clipped value so decode(encode) stays inside the box
    X[:, n_rules:] = np.log10(_from_log(logs, space))
    return X
