# trainer.py - online training of the plastic layer and the search objective
import threading
import time
from collections import OrderedDict
from dataclasses import dataclass
from typing import Literal

import numpy as np
import structlog
from pydantic import BaseModel, Field

from config import NetConfig, TrainProtocol, get_settings
from dataset import Dataset, ImageSet, LabelSet, load_dataset, subsample_indices
from errors import DatasetError, NumericError
from network import Projection, build_projection, encode_batch, forward_active, predict_batch
from plasticity import RuleId, RuleParams, SynapticInputs, apply_rule
from space import Configuration

log = structlog.get_logger(__name__)


class EvaluationRecord(BaseModel):
    """Outcome of one (configuration, seeds) evaluation; one JSON line in the log."""

    rule: RuleId
    alpha: float
    beta1: float
    beta2: float
    beta3: float
    seeds: dict[str, int]
    test_accuracy: float = Field(ge=0.0, le=1.0)
    train_accuracy: float = Field(ge=0.0, le=1.0)
    wall_time: float = Field(ge=0.0)
    status: Literal["ok", "failed"] = "ok"
    error: str | None = None

    @property
    def config(self) -> Configuration:
        return Configuration(
            rule=self.rule, alpha=self.alpha, beta1=self.beta1, beta2=self.beta2, beta3=self.beta3
        )

    @property
    def objective(self) -> float:
        """Minimized internally: 1 - test accuracy (1.0 for failures)."""
        return 1.0 - self.test_accuracy

    @classmethod
    def failed(cls, config: Configuration, seeds: dict[str, int], error: str, wall_time: float = 0.0):
        return cls(
            **config.model_dump(),
            seeds=seeds,
            test_accuracy=0.0,
            train_accuracy=0.0,
            wall_time=wall_time,
            status="failed",
            error=error,
        )


def make_modulatory(label: int, n_out: int) -> np.ndarray:
    """One-hot supervision signal x_m."""
    if not 0 <= label < n_out:
        raise ValueError(f"label {label} out of range for {n_out} outputs")
    x_m = np.zeros(n_out)
    x_m[label] = 1.0
    return x_m


# ------------------------------------------------------------ code cache

@dataclass(frozen=True)
class EncodedSplit:
    """Kenyon codes of a whole dataset under one projection, shared read-only."""

    projection: Projection
    train_active: np.ndarray  # (n_train_total, k)
    test_active: np.ndarray  # (n_test_total, k)


MAX_ENCODED = 4

_codes: OrderedDict[tuple[int, NetConfig, int], tuple[Dataset, EncodedSplit]] = OrderedDict()
_codes_lock = threading.Lock()


def get_encoded(dataset: Dataset, net: NetConfig, net_seed: int) -> EncodedSplit:
    """Codes depend only on (dataset, net, net_seed); the MAX_ENCODED most recent are kept."""
    key = (id(dataset), net, net_seed)
    with _codes_lock:
        if key in _codes:
            _codes.move_to_end(key)
        else:
            started = time.perf_counter()
            proj = build_projection(net, net_seed)
            split = EncodedSplit(
                projection=proj,
                train_active=encode_batch(dataset.train_images.data, proj, net.k_active),
                test_active=encode_batch(dataset.test_images.data, proj, net.k_active),
            )
            # the dataset is kept alongside so its id cannot be recycled
            _codes[key] = (dataset, split)
            log.info(
                "trainer.encoded",
                dataset=dataset.name,
                net_seed=net_seed,
                seconds=round(time.perf_counter() - started, 2),
            )
            while len(_codes) > MAX_ENCODED:
                _codes.popitem(last=False)
        return _codes[key][1]


# ------------------------------------------------------------ training

def train_online(
    data: tuple[ImageSet, LabelSet],
    rule: RuleId | str,
    params: RuleParams,
    net: NetConfig,
    proto: TrainProtocol,
    active: np.ndarray | None = None,
) -> np.ndarray:
    """Single online pass: encode -> forward -> modulate -> update, per sample.

    `active` optionally carries precomputed codes for every image in `data`.
    Raises NumericError when the weights stop being finite.
    """
    images, labels = data
    if images.count == 0:
        raise DatasetError("training data is empty")

    order = subsample_indices(images.count, proto.n_train, proto.train_seed)
    if active is None:
        proj = build_projection(net, proto.net_seed)
        codes = encode_batch(images.data[order], proj, net.k_active)
    else:
        codes = active[order]
    targets = labels.labels[order]

    W = np.zeros((net.n_hidden, net.n_out))
    x_e = np.zeros(net.n_hidden)
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(proto.n_updates):
            pos = step % proto.n_train
            x_o = forward_active(codes[pos], W, net)
            x_e[:] = 0.0
            x_e[codes[pos]] = 1.0
            inputs = SynapticInputs(x_e=x_e, x_o=x_o, x_m=make_modulatory(int(targets[pos]), net.n_out))
            W = apply_rule(rule, inputs, params, W)

    if not np.isfinite(W).all():
        raise NumericError(f"weights diverged under {RuleId(rule).value}")
    return W


def evaluate(
    W: np.ndarray,
    testset: tuple[ImageSet, LabelSet],
    net: NetConfig,
    *,
    net_seed: int | None = None,
    active: np.ndarray | None = None,
) -> float:
    """Fraction of samples whose argmax readout matches the label.

    Pass either the precomputed codes (`active`) or the `net_seed` W was
    trained under; the projection is never guessed.
    """
    images, labels = testset
    if images.count == 0:
        raise DatasetError("test set is empty")
    if active is None:
        if net_seed is None:
            raise ValueError("evaluate needs net_seed (or precomputed active codes)")
        active = encode_batch(images.data, build_projection(net, net_seed), net.k_active)
    predictions = predict_batch(forward_active(active, W, net))
    return float(np.mean(predictions == labels.labels))


def evaluate_config(
    config: Configuration,
    dataset: Dataset | str,
    proto: TrainProtocol,
    net: NetConfig | None = None,
) -> EvaluationRecord:
    """The search objective. Never raises: failures come back as status="failed"."""
    net = net or NetConfig()
    seeds = {"train_seed": proto.train_seed, "net_seed": proto.net_seed}
    started = time.perf_counter()
    try:
        if isinstance(dataset, str):
            dataset = load_dataset(dataset, get_settings().mushroom_data_dir)
        codes = get_encoded(dataset, net, proto.net_seed)
        train = (dataset.train_images, dataset.train_labels)
        W = train_online(train, config.rule, config.rule_params(), net, proto, active=codes.train_active)

        order = subsample_indices(dataset.train_images.count, proto.n_train, proto.train_seed)
        if len(order):
            seen = (dataset.train_images.take(order), dataset.train_labels.take(order))
            train_accuracy = evaluate(W, seen, net, active=codes.train_active[order])
        else:
            train_accuracy = 0.0
        test = (dataset.test_images, dataset.test_labels)
        test_accuracy = evaluate(W, test, net, active=codes.test_active)
    except Exception as e:
        elapsed = time.perf_counter() - started
        log.warning("trainer.failed", rule=config.rule.value, alpha=config.alpha, error=str(e))
        return EvaluationRecord.failed(config, seeds, f"{type(e).__name__}: {e}", elapsed)

    record = EvaluationRecord(
        **config.model_dump(),
        seeds=seeds,
        test_accuracy=test_accuracy,
        train_accuracy=train_accuracy,
        wall_time=time.perf_counter() - started,
    )
    log.debug(
        "trainer.evaluated",
        rule=config.rule.value,
        alpha=config.alpha,
        test_accuracy=round(test_accuracy, 4),
        seconds=round(record.wall_time, 2),
    )
    return record
