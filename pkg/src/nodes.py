# nodes.py - coordinator steps of the asynchronous model-based search
from typing import Any

import numpy as np
import structlog
from langchain_core.runnables import RunnableConfig

from acquisition import HedgeState, hedge_update, propose
from config import SearchSettings
from pool import WorkerPool
from space import SearchSpaceDef, encode_config, random_config
from state import InFlight, LogEntry, SearchState
from surrogate import ForestHyper, fit

log = structlog.get_logger(__name__)


def _runtime(config: RunnableConfig) -> dict[str, Any]:
    return config["configurable"]


def derive_seed(master_seed: int, *key: int) -> int:
    """Counter-based split of the master seed."""
    return int(np.random.SeedSequence(master_seed, spawn_key=key).generate_state(1)[0])


def f_best(completed: list[LogEntry]) -> float:
    return min(record.objective for record in completed)


def seed_node(state: SearchState, config: RunnableConfig) -> dict[str, Any]:
    """Draw the initial random design and start the hedge."""
    rt = _runtime(config)
    settings: SearchSettings = rt["settings"]
    space: SearchSpaceDef = rt["space"]
    rng: np.random.Generator = rt["rng"]

    n_init = min(settings.initial_design, state["budget"])
    initial = [random_config(space, rng) for _ in range(n_init)]
    hedge = HedgeState.start(derive_seed(settings.seed, 2), eta=settings.eta)
    log.info("search.start", budget=state["budget"], n_init=n_init, workers=settings.n_workers)
    return {"pending_initial": initial, "hedge": hedge}


def propose_node(state: SearchState, config: RunnableConfig) -> dict[str, Any]:
    """Next job: initial design first, then random or model-based proposals."""
    rt = _runtime(config)
    settings: SearchSettings = rt["settings"]
    space: SearchSpaceDef = rt["space"]
    rng: np.random.Generator = rt["rng"]
    completed = state["completed"]

    if state["pending_initial"]:
        chosen, *rest = state["pending_initial"]
        job = InFlight(chosen, derive_seed(settings.seed, 0, chosen.digest()), "random")
        return {"next_job": job, "pending_initial": rest}

    in_flight = [job.config for job in state["in_flight"].values()]
    if settings.strategy == "random" or not completed:
        chosen = random_config(space, rng)
        while chosen in in_flight:
            chosen = random_config(space, rng)
        return {"next_job": InFlight(chosen, derive_seed(settings.seed, 0, chosen.digest()), "random")}

    # constant liar: in-flight points count as achieving the current best
    liar = f_best(completed)
    X = np.array([encode_config(r.config, space) for r in completed] + [encode_config(c, space) for c in in_flight])
    y = np.array([r.objective for r in completed] + [liar] * len(in_flight))
    hyper = ForestHyper(n_trees=settings.n_trees, min_leaf=settings.min_leaf)
    forest = fit(X, y, hyper, seed=derive_seed(settings.seed, 1, state["dispatched"]))

    proposal = propose(
        forest,
        space,
        liar,
        state["hedge"],
        rng,
        pool_size=settings.pool_size,
        kappa=settings.kappa,
        exclude=in_flight,
    )
    job = InFlight(
        proposal.config,
        derive_seed(settings.seed, 0, proposal.config.digest()),
        "model",
        acquisition=proposal.acquisition,
        predicted_mean=proposal.predicted_mean,
        liar_value=liar,
    )
    return {"next_job": job, "forest": forest}


def dispatch_node(state: SearchState, config: RunnableConfig) -> dict[str, Any]:
    pool: WorkerPool = _runtime(config)["pool"]
    job = state["next_job"]
    ticket = state["dispatched"]
    pool.submit(ticket, job.config, job.seed)
    log.debug("search.dispatch", ticket=ticket, kind=job.kind, rule=job.config.rule.value)
    return {
        "in_flight": {**state["in_flight"], ticket: job},
        "dispatched": ticket + 1,
        "next_job": None,
    }


def collect_node(state: SearchState, config: RunnableConfig) -> dict[str, Any]:
    """Wait for one completion, log it, and credit the acquisition that proposed it."""
    pool: WorkerPool = _runtime(config)["pool"]
    ticket, record = pool.next_answer()

    in_flight = dict(state["in_flight"])
    job = in_flight.pop(ticket)
    entry = LogEntry(
        **record.model_dump(),
        completion_index=len(state["completed"]),
        proposal_kind=job.kind,
        acquisition_used=job.acquisition,
        liar_value=job.liar_value,
        predicted_mean=job.predicted_mean,
    )
    completed = [*state["completed"], entry]

    hedge = state["hedge"]
    if job.kind == "model":
        hedge = hedge_update(hedge, job.acquisition, -job.predicted_mean)

    log.info(
        "search.completed",
        index=entry.completion_index,
        rule=entry.rule.value,
        test_accuracy=round(entry.test_accuracy, 4),
        best=round(1.0 - f_best(completed), 4),
        status=entry.status,
    )
    return {"completed": completed, "in_flight": in_flight, "hedge": hedge}
