# plasticity.py
"""
Modulated local learning rules for the plastic output layer.

Every rule is a pure operator  W' = rule(inputs, params, W)  over a weight
matrix of shape (n_hidden, n_out). Broadcast convention: row index i pairs
with the presynaptic activity x_e[i], column index j pairs with the
postsynaptic x_o[j] and modulatory x_m[j] activities.
"""

from dataclasses import dataclass
try:
    from enum import StrEnum
except ImportError:  # Python < 3.11
    from enum import Enum

    class StrEnum(str, Enum):
        __str__ = str.__str__
        __format__ = str.__format__
from typing import Callable

import numpy as np

from errors import ShapeError


class RuleId(StrEnum):
    # Table order; the values are the serialized names
    GMR = "GMR"
    MCR = "MCR"
    NSCR = "NSCR"
    LMSR = "LMSR"
    SLR = "SLR"
    GUR = "GUR"
    NSCoR = "NSCoR"
    MOR = "MOR"


@dataclass(frozen=True)
class RuleParams:
    """Learning rate and rule coefficients.

    Search-box bounds are enforced by space.Configuration; the operators
    themselves accept any finite values (tests probe the limits).
    """

    alpha: float
    beta1: float = 0.0
    beta2: float = 0.0
    beta3: float = 0.0
    w0: float = 1.0  # SLR ceiling, fixed

    def __post_init__(self):
        if not self.w0 > 0:
            raise ValueError(f"w0 must be > 0, got {self.w0}")


@dataclass(frozen=True)
class SynapticInputs:
    x_e: np.ndarray  # presynaptic (n_hidden,)
    x_o: np.ndarray  # postsynaptic (n_out,)
    x_m: np.ndarray  # modulatory (n_out,)


# Which of (alpha, beta1, beta2, beta3) each rule actually reads
ACTIVE_PARAMS: dict[RuleId, tuple[str, ...]] = {
    RuleId.GMR: ("alpha", "beta1", "beta2", "beta3"),
    RuleId.MCR: ("alpha", "beta1"),
    RuleId.NSCR: ("alpha", "beta1"),
    RuleId.LMSR: ("alpha",),
    RuleId.SLR: ("alpha", "beta1"),
    RuleId.GUR: ("alpha", "beta1", "beta2", "beta3"),
    RuleId.NSCoR: ("alpha", "beta1"),
    RuleId.MOR: ("alpha", "beta1"),
}

GATED_RULES = frozenset({RuleId.MCR, RuleId.NSCR, RuleId.NSCoR, RuleId.MOR, RuleId.SLR})


def _relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def _check(s: SynapticInputs, W: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    x_e = np.asarray(s.x_e, dtype=np.float64)
    x_o = np.asarray(s.x_o, dtype=np.float64)
    x_m = np.asarray(s.x_m, dtype=np.float64)
    if W.ndim != 2:
        raise ShapeError(f"W must be 2-D, got shape {W.shape}")
    n_hidden, n_out = W.shape
    if x_e.shape != (n_hidden,):
        raise ShapeError(f"x_e has shape {x_e.shape}, W expects ({n_hidden},)")
    if x_o.shape != (n_out,) or x_m.shape != (n_out,):
        raise ShapeError(
            f"x_o {x_o.shape} and x_m {x_m.shape} must both be ({n_out},) to match W"
        )
    return x_e, x_o, x_m


def mcr(s: SynapticInputs, p: RuleParams, W: np.ndarray) -> np.ndarray:
    """Modulated covariance rule: learns only where the modulatory drive exceeds the output."""
    x_e, x_o, x_m = _check(s, W)
    post = _relu(x_m - x_o) * (x_m - p.beta1)
    return W + p.alpha * np.outer(x_e, post)


def nscr(s: SynapticInputs, p: RuleParams, W: np.ndarray) -> np.ndarray:
    """Nonlocal, stabilized covariance rule. g is a scalar summed over all outputs."""
    x_e, x_o, x_m = _check(s, W)
    g = _relu(x_m - x_o).sum()
    return W + p.alpha * g * x_e[:, None] * (x_m[None, :] - p.beta1 * W)


def nscor(s: SynapticInputs, p: RuleParams, W: np.ndarray) -> np.ndarray:
    x_e, x_o, x_m = _check(s, W)
    g = _relu(x_m - x_o).sum()
    return W + p.alpha * g * (np.outer(x_e, x_m) - p.beta1 * W)


def mor(s: SynapticInputs, p: RuleParams, W: np.ndarray) -> np.ndarray:
    """Modulated Oja's rule with a per-output gate."""
    x_e, x_o, x_m = _check(s, W)
    g = _relu(x_m - x_o)
    decay = p.beta1 * (x_o**2)[None, :] * W
    return W + p.alpha * g[None, :] * (np.outer(x_e, x_m) - decay)


def lmsr(s: SynapticInputs, p: RuleParams, W: np.ndarray) -> np.ndarray:
    """Least mean square (delta) rule."""
    x_e, x_o, x_m = _check(s, W)
    return W + p.alpha * np.outer(x_e, x_m - x_o)


def slr(s: SynapticInputs, p: RuleParams, W: np.ndarray) -> np.ndarray:
    """Self-limited rule, implicit step. Replaces W; keeps [0, w0] invariant."""
    x_e, x_o, x_m = _check(s, W)
    ag = p.alpha * _relu(x_m - x_o)[None, :]
    return (W + p.w0 * ag * x_e[:, None]) / (1.0 + ag * (p.beta1 + x_e[:, None]))


def gmr(s: SynapticInputs, p: RuleParams, W: np.ndarray) -> np.ndarray:
    x_e, x_o, x_m = _check(s, W)
    drive = p.beta1 * x_o[None, :] + p.beta2 * (x_o[None, :] - x_e[:, None]) + p.beta3
    return W + p.alpha * x_m[None, :] * drive


def gur(s: SynapticInputs, p: RuleParams, W: np.ndarray) -> np.ndarray:
    """General unsupervised rule: x_m never enters."""
    x_e, x_o, _ = _check(s, W)
    drive = p.beta1 * x_o[None, :] + p.beta2 * (x_o[None, :] - x_e[:, None]) + p.beta3
    return W + p.alpha * drive


RuleFn = Callable[[SynapticInputs, RuleParams, np.ndarray], np.ndarray]

RULES: dict[RuleId, RuleFn] = {
    RuleId.GMR: gmr,
    RuleId.MCR: mcr,
    RuleId.NSCR: nscr,
    RuleId.LMSR: lmsr,
    RuleId.SLR: slr,
    RuleId.GUR: gur,
    RuleId.NSCoR: nscor,
    RuleId.MOR: mor,
}


def apply_rule(rule: RuleId | str, s: SynapticInputs, p: RuleParams, W: np.ndarray) -> np.ndarray:
    """Dispatch to the rule's operator; coefficients the rule does not read are ignored."""
    return RULES[RuleId(rule)](s, p, W)
