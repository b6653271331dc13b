import json
import threading
import time

import numpy as np
import pytest

import nodes
from config import SearchSettings
from conftest import synthetic_objective
from errors import LogFormatError
from plasticity import RuleId
from routers import route_after_collect, route_after_dispatch
from space import DEFAULT_SPACE, random_config
from search import best_entry, best_so_far, load_log, persist_log, run_search
from trainer import EvaluationRecord

FAST = SearchSettings(n_trees=10, pool_size=200)


def test_budget_of_one_never_fits(monkeypatch):
    def no_fit(*args, **kwargs):
        raise AssertionError("surrogate fit with budget=1")

    monkeypatch.setattr(nodes, "fit", no_fit)
    log = run_search(synthetic_objective, budget=1, seed=3, settings=FAST)
    assert len(log) == 1
    assert log[0].proposal_kind == "random"
    assert log[0].completion_index == 0


def test_model_proposals_follow_initial_design():
    log = run_search(synthetic_objective, budget=16, seed=1, settings=FAST.model_copy(update={"n_init": 6}))
    kinds = [entry.proposal_kind for entry in log]
    assert kinds == ["random"] * 6 + ["model"] * 10
    for entry in log[6:]:
        assert entry.acquisition_used is not None
        assert entry.liar_value == pytest.approx(min(e.objective for e in log[: entry.completion_index]))


def test_single_worker_logs_are_identical(tmp_path):
    first, second = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    persist_log(run_search(synthetic_objective, budget=15, seed=7, settings=FAST), first, timing=False)
    persist_log(run_search(synthetic_objective, budget=15, seed=7, settings=FAST), second, timing=False)
    assert first.read_bytes() == second.read_bytes()


def test_seeds_follow_configuration():
    log = run_search(synthetic_objective, budget=12, seed=5, settings=FAST)
    for entry in log:
        assert entry.seeds["train_seed"] == nodes.derive_seed(5, 0, entry.config.digest())


def test_parallel_workers_complete_budget():
    in_flight = []
    lock = threading.Lock()
    peak = [0]

    def slow_objective(config, seed):
        with lock:
            in_flight.append(config)
            peak[0] = max(peak[0], len(in_flight))
            # no two simultaneously running configurations are identical
            assert len(set(in_flight)) == len(in_flight)
        time.sleep(0.005 * (seed % 3))
        with lock:
            in_flight.remove(config)
        return synthetic_objective(config, seed)

    log = run_search(slow_objective, budget=25, n_workers=4, seed=2, settings=FAST)
    assert len(log) == 25
    assert [entry.completion_index for entry in log] == list(range(25))
    assert all(entry.status == "ok" for entry in log)
    assert peak[0] <= 4


BROKEN = {RuleId.MOR, RuleId.SLR, RuleId.GUR, RuleId.GMR}


def test_crashing_worker_becomes_failed_record():
    def flaky(config, seed):
        if config.rule in BROKEN:
            raise RuntimeError("worker lost")
        return synthetic_objective(config, seed)

    log = run_search(flaky, budget=30, seed=4, settings=FAST)
    assert len(log) == 30
    failed = [entry for entry in log if entry.status == "failed"]
    assert failed
    assert all(entry.rule in BROKEN and entry.objective == 1.0 for entry in failed)
    assert "worker lost" in failed[0].error


def test_best_so_far_non_increasing():
    curve = best_so_far(run_search(synthetic_objective, budget=20, seed=9, settings=FAST))
    assert all(b <= a for a, b in zip(curve, curve[1:]))


@pytest.mark.slow
def test_model_search_beats_random_search():
    settings = SearchSettings(n_trees=20, pool_size=1000)
    wins = 0
    for trial in range(10):
        ambs = run_search(synthetic_objective, budget=100, seed=trial, settings=settings)
        rand = run_search(
            synthetic_objective, budget=100, seed=trial, settings=settings.model_copy(update={"strategy": "random"})
        )
        wins += best_entry(ambs).test_accuracy > best_entry(rand).test_accuracy
    assert wins >= 8


# ------------------------------------------------------------ routing

def state(**overrides):
    base = {"budget": 5, "n_workers": 2, "completed": [], "in_flight": {}, "dispatched": 0}
    return {**base, **overrides}


def test_route_fills_free_workers():
    assert route_after_dispatch(state(in_flight={0: None}, dispatched=1)) == "propose"
    assert route_after_dispatch(state(in_flight={0: None, 1: None}, dispatched=2)) == "collect"
    assert route_after_dispatch(state(in_flight={4: None}, dispatched=5)) == "collect"


def test_route_after_collect():
    done = [object()] * 5
    assert route_after_collect(state(completed=done, dispatched=5)) == "__end__"
    assert route_after_collect(state(completed=done[:3], dispatched=4)) == "propose"
    assert route_after_collect(state(completed=done[:3], dispatched=5)) == "collect"


# ------------------------------------------------------------ log file

def test_log_round_trip(tmp_path):
    log = run_search(synthetic_objective, budget=14, seed=0, settings=FAST)
    path = tmp_path / "log.jsonl"
    persist_log(log, path)
    assert load_log(path) == log


def test_empty_log_is_empty_file(tmp_path):
    path = tmp_path / "log.jsonl"
    persist_log([], path)
    assert path.read_bytes() == b""
    assert load_log(path) == []


def test_three_records_three_lines(tmp_path):
    path = tmp_path / "log.jsonl"
    persist_log(run_search(synthetic_objective, budget=3, seed=1, settings=FAST), path)
    lines = path.read_text().splitlines()
    assert [json.loads(line)["completion_index"] for line in lines] == [0, 1, 2]


def test_malformed_line_is_named(tmp_path):
    path = tmp_path / "log.jsonl"
    persist_log(run_search(synthetic_objective, budget=3, seed=1, settings=FAST), path)
    lines = path.read_text().splitlines()
    lines[1] = lines[1][:-5]
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(LogFormatError) as info:
        load_log(path)
    assert info.value.line_number == 2


def test_timing_flag_zeroes_wall_time(tmp_path):
    record = synthetic_objective(random_config(DEFAULT_SPACE, np.random.default_rng(0)), 1)
    log = run_search(lambda c, s: record.model_copy(update={"wall_time": 3.5}), budget=2, settings=FAST)
    path = tmp_path / "log.jsonl"
    persist_log(log, path, timing=False)
    assert {entry.wall_time for entry in load_log(path)} == {0.0}


def test_best_entry_ignores_failures():
    config = random_config(DEFAULT_SPACE, np.random.default_rng(1))
    failed = EvaluationRecord.failed(config, {"train_seed": 0}, "boom")
    assert best_entry([failed]) is None
