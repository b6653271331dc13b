# pool.py
import queue
import threading
from typing import Callable

import structlog

from space import Configuration
from trainer import EvaluationRecord

log = structlog.get_logger(__name__)

Objective = Callable[[Configuration, int], EvaluationRecord]


class WorkerPool:
    """Pool of worker threads. Workers consume (ticket, config, seed) jobs
    from the request queue and feed (ticket, record) answers to the answer
    queue. Evaluations never escape as exceptions.
    """

    def __init__(self, n_workers: int, objective: Objective):
        self.objective = objective
        self.requests: queue.Queue = queue.Queue()
        self.answers: queue.Queue = queue.Queue()
        self.workers = [
            threading.Thread(target=self._work, name=f"evaluator-{i}", daemon=True)
            for i in range(n_workers)
        ]
        for worker in self.workers:
            worker.start()

    def _work(self):
        while True:
            job = self.requests.get()
            if job is None:
                break
            ticket, config, seed = job
            try:
                record = self.objective(config, seed)
            except Exception as e:
                log.warning("pool.worker_crashed", ticket=ticket, error=str(e))
                record = EvaluationRecord.failed(config, {"train_seed": seed}, f"{type(e).__name__}: {e}")
            self.answers.put((ticket, record))

    def submit(self, ticket: int, config: Configuration, seed: int) -> None:
        self.requests.put((ticket, config, seed))

    def next_answer(self) -> tuple[int, EvaluationRecord]:
        """Block until exactly one evaluation completes."""
        return self.answers.get()

    def close(self) -> None:
        for _ in self.workers:
            self.requests.put(None)
        for worker in self.workers:
            worker.join(timeout=1.0)

    def __enter__(self) -> "WorkerPool":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
