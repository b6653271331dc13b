# search.py - asynchronous model-based search entry points and the JSONL log
import json
from pathlib import Path

import numpy as np
import structlog
from pydantic import ValidationError

from config import NetConfig, SearchSettings, TrainProtocol
from dataset import Dataset
from errors import LogFormatError
from graph import app, recursion_limit
from nodes import derive_seed
from pool import Objective, WorkerPool
from space import DEFAULT_SPACE, Configuration, SearchSpaceDef
from state import LogEntry, SearchState
from trainer import EvaluationRecord, evaluate_config

log = structlog.get_logger(__name__)

EvaluationLog = list[LogEntry]


def make_objective(dataset: Dataset | str, proto: TrainProtocol, net: NetConfig | None = None) -> Objective:
    """Bind the training objective; the per-evaluation seed drives the subsample."""

    def objective(config: Configuration, seed: int) -> EvaluationRecord:
        return evaluate_config(config, dataset, proto.model_copy(update={"train_seed": seed}), net)

    return objective


def run_search(
    objective: Objective,
    budget: int,
    n_workers: int = 1,
    seed: int = 0,
    space: SearchSpaceDef = DEFAULT_SPACE,
    settings: SearchSettings | None = None,
) -> EvaluationLog:
    """Run AMBS (or the random baseline) until `budget` evaluations complete.

    Records come back in completion order. With one worker the whole
    trajectory is a function of the seed.
    """
    settings = (settings or SearchSettings()).model_copy(
        update={"budget": budget, "n_workers": n_workers, "seed": seed}
    )
    initial: SearchState = {
        "budget": budget,
        "n_workers": n_workers,
        "completed": [],
        "in_flight": {},
        "pending_initial": [],
        "dispatched": 0,
        "next_job": None,
        "hedge": None,
        "forest": None,
    }
    with WorkerPool(n_workers, objective) as pool:
        runtime = {
            "pool": pool,
            "space": space,
            "settings": settings,
            "rng": np.random.default_rng(derive_seed(seed, 3)),
        }
        final = app.invoke(
            initial,
            config={"configurable": runtime, "recursion_limit": recursion_limit(budget)},
        )

    completed = final["completed"]
    best = best_entry(completed)
    log.info(
        "search.done",
        evaluations=len(completed),
        best_rule=best.rule.value if best else None,
        best_accuracy=best.test_accuracy if best else None,
    )
    return completed


def best_entry(entries: list[EvaluationRecord]) -> EvaluationRecord | None:
    """Highest test accuracy; earliest completion wins ties."""
    ok = [e for e in entries if e.status == "ok"]
    return max(ok, key=lambda e: e.test_accuracy) if ok else None


def best_so_far(entries: EvaluationLog) -> list[float]:
    """Running minimum of the objective over completion order."""
    return np.minimum.accumulate([e.objective for e in entries]).tolist() if entries else []


def persist_log(entries: EvaluationLog, path: str | Path, timing: bool = True) -> None:
    """One JSON object per line, completion order. timing=False zeroes wall_time."""
    lines = []
    for entry in entries:
        data = entry.model_dump(mode="json")
        if not timing:
            data["wall_time"] = 0.0
        lines.append(json.dumps(data))
    Path(path).write_text("".join(line + "\n" for line in lines))


def load_log(path: str | Path) -> EvaluationLog:
    entries = []
    with open(path) as f:
        for number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                entries.append(LogEntry.model_validate(json.loads(line)))
            except (json.JSONDecodeError, ValidationError) as e:
                raise LogFormatError(number, str(e).splitlines()[0]) from e
    return entries
