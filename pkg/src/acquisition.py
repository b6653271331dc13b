# acquisition.py
"""
Acquisition portfolio (EI, PI, LCB) with a hedge bandit choosing among them.

Objective convention: f = 1 - test accuracy, minimized. EI and PI are
maximized, LCB minimized.
"""

from dataclasses import dataclass, replace
try:
    from enum import StrEnum
except ImportError:  # Python < 3.11
    from enum import Enum

    class StrEnum(str, Enum):
        __str__ = str.__str__
        __format__ = str.__format__
from typing import Iterable

import numpy as np
import structlog
from scipy.stats import norm

from space import (
    Configuration,
    SearchSpaceDef,
    decode_config,
    encode_config,
    random_config,
    sample_pool,
)
from surrogate import ForestModel, predict_many

log = structlog.get_logger(__name__)


class AcquisitionId(StrEnum):
    EI = "EI"
    PI = "PI"
    LCB = "LCB"


PORTFOLIO: tuple[AcquisitionId, ...] = tuple(AcquisitionId)


def _out(x: np.ndarray):
    return float(x) if np.ndim(x) == 0 else x


def ei(mean, spread, f_best: float):
    """Expected improvement below f_best; max(0, f_best - mean) when spread is 0."""
    mean = np.asarray(mean, dtype=np.float64)
    spread = np.asarray(spread, dtype=np.float64)
    improvement = f_best - mean
    with np.errstate(divide="ignore", invalid="ignore"):
        z = improvement / spread
        value = improvement * norm.cdf(z) + spread * norm.pdf(z)
    value = np.where(spread > 0, value, improvement)
    return _out(np.maximum(value, 0.0))


def pi(mean, spread, f_best: float):
    """Probability of improving on f_best."""
    mean = np.asarray(mean, dtype=np.float64)
    spread = np.asarray(spread, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = (f_best - mean) / spread
    value = np.where(spread > 0, norm.cdf(z), (mean < f_best).astype(np.float64))
    return _out(value)


def lcb(mean, spread, kappa: float = 1.96):
    """Lower confidence bound; lower is better."""
    mean = np.asarray(mean, dtype=np.float64)
    spread = np.asarray(spread, dtype=np.float64)
    return _out(mean - kappa * spread)


# ------------------------------------------------------------ hedge

@dataclass(frozen=True)
class HedgeState:
    gains: tuple[float, ...]
    rng: np.random.Generator
    eta: float = 1.0

    @classmethod
    def start(cls, seed: int | np.random.SeedSequence, eta: float = 1.0) -> "HedgeState":
        return cls(gains=(0.0,) * len(PORTFOLIO), rng=np.random.default_rng(seed), eta=eta)


def hedge_probabilities(state: HedgeState) -> np.ndarray:
    """softmax(eta * gains), max-shifted; floored so every arm stays selectable."""
    logits = state.eta * np.asarray(state.gains, dtype=np.float64)
    p = np.exp(logits - logits.max())
    p = np.maximum(p / p.sum(), np.finfo(np.float64).tiny)
    return p / p.sum()


def hedge_select(state: HedgeState) -> AcquisitionId:
    """Sample an acquisition; advances state.rng."""
    p = hedge_probabilities(state)
    return PORTFOLIO[int(state.rng.choice(len(PORTFOLIO), p=p))]


def hedge_update(state: HedgeState, chosen: AcquisitionId | str, reward: float) -> HedgeState:
    k = PORTFOLIO.index(AcquisitionId(chosen))
    gains = list(state.gains)
    gains[k] += reward
    return replace(state, gains=tuple(gains))


# ------------------------------------------------------------ proposals

@dataclass(frozen=True)
class Proposal:
    config: Configuration
    acquisition: AcquisitionId
    predicted_mean: float
    predicted_spread: float


def score(acq: AcquisitionId, mean, spread, f_best: float, kappa: float = 1.96) -> np.ndarray:
    """Acquisition values oriented so that larger is always better."""
    if acq is AcquisitionId.EI:
        return np.asarray(ei(mean, spread, f_best))
    if acq is AcquisitionId.PI:
        return np.asarray(pi(mean, spread, f_best))
    return -np.asarray(lcb(mean, spread, kappa))


def propose(
    model: ForestModel,
    space: SearchSpaceDef,
    f_best: float,
    hedge: HedgeState,
    rng: np.random.Generator,
    pool_size: int = 10000,
    kappa: float = 1.96,
    exclude: Iterable[Configuration] = (),
) -> Proposal:
    """Best scorer of a uniform candidate pool; ties go to the first draw.

    Candidates equal to an excluded (in-flight) configuration are skipped.
    """
    if pool_size < 1:
        raise ValueError(f"pool_size must be >= 1, got {pool_size}")
    acq = hedge_select(hedge)
    X = sample_pool(space, rng, pool_size)
    means, spreads = predict_many(model, X)
    values = score(acq, means, spreads, f_best, kappa).astype(np.float64, copy=True)

    excluded = set(exclude)
    # stable descending order keeps the first-drawn candidate on ties
    for k in np.argsort(-values, kind="stable"):
        config = decode_config(X[k], space)
        if config not in excluded:
            break
    else:
        # whole pool collided with in-flight points
        while config in excluded:
            config = random_config(space, rng)
        means, spreads = predict_many(model, encode_config(config, space))
        k = 0
    log.debug(
        "acquisition.proposed",
        acquisition=acq.value,
        rule=config.rule.value,
        predicted_mean=round(float(means[k]), 4),
    )
    return Proposal(config, acq, float(means[k]), float(spreads[k]))
