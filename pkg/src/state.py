# state.py
from dataclasses import dataclass
from typing import Literal, TypedDict

from acquisition import AcquisitionId, HedgeState
from space import Configuration
from surrogate import ForestModel
from trainer import EvaluationRecord

ProposalKind = Literal["random", "model"]


class LogEntry(EvaluationRecord):
    """EvaluationRecord plus the coordinator's bookkeeping for that evaluation."""

    completion_index: int
    proposal_kind: ProposalKind
    acquisition_used: AcquisitionId | None = None
    liar_value: float | None = None
    predicted_mean: float | None = None


@dataclass(frozen=True)
class InFlight:
    """A dispatched configuration whose record has not come back yet."""

    config: Configuration
    seed: int
    kind: ProposalKind
    acquisition: AcquisitionId | None = None
    predicted_mean: float | None = None
    liar_value: float | None = None


class SearchState(TypedDict):
    """Coordinator state; only graph nodes write to it.

    Runtime objects (worker pool, rng, search space, settings) travel in
    the run config's "configurable" section, not here.
    """

    budget: int
    n_workers: int
    completed: list[LogEntry]
    in_flight: dict[int, InFlight]  # ticket -> job
    pending_initial: list[Configuration]  # initial design not yet dispatched
    dispatched: int  # tickets handed out so far
    next_job: InFlight | None  # proposal waiting for dispatch
    hedge: HedgeState | None
    forest: ForestModel | None
