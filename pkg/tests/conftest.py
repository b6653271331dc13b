import numpy as np
import pytest

from dataset import (
    FILES,
    Dataset,
    ImageSet,
    LabelSet,
    serialize_idx_images,
    serialize_idx_labels,
)
from plasticity import RuleId
from space import Configuration
from trainer import EvaluationRecord


def block_images(labels: np.ndarray, seed: int = 0) -> ImageSet:
    """28x28 images: class 0 lights the top half, class 1 the bottom half."""
    rng = np.random.default_rng(seed)
    data = np.zeros((len(labels), 28, 28), dtype=np.uint8)
    for n, label in enumerate(labels):
        rows = slice(0, 14) if label == 0 else slice(14, 28)
        data[n, rows, :] = rng.integers(200, 256, size=(14, 28), dtype=np.uint8)
    return ImageSet(len(labels), 28, 28, data.reshape(len(labels), -1))


def toy_split(n_train: int = 40, n_test: int = 20, seed: int = 0) -> Dataset:
    train_labels = np.array([0, 1] * (n_train // 2), dtype=np.uint8)
    test_labels = np.array([1, 0] * (n_test // 2), dtype=np.uint8)
    return Dataset(
        name="toy",
        train_images=block_images(train_labels, seed),
        train_labels=LabelSet(len(train_labels), train_labels),
        test_images=block_images(test_labels, seed + 1),
        test_labels=LabelSet(len(test_labels), test_labels),
    )


def write_idx_dir(directory, dataset: Dataset) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    (directory / FILES["train_images"]).write_bytes(serialize_idx_images(dataset.train_images))
    (directory / FILES["train_labels"]).write_bytes(serialize_idx_labels(dataset.train_labels))
    (directory / FILES["test_images"]).write_bytes(serialize_idx_images(dataset.test_images))
    (directory / FILES["test_labels"]).write_bytes(serialize_idx_labels(dataset.test_labels))


@pytest.fixture
def toy_dataset() -> Dataset:
    return toy_split()


@pytest.fixture
def data_dir(tmp_path, monkeypatch):
    """MUSHROOM_DATA_DIR holding the toy split under the "mnist" name."""
    write_idx_dir(tmp_path / "mnist", toy_split())
    monkeypatch.setenv("MUSHROOM_DATA_DIR", str(tmp_path))
    return tmp_path


def synthetic_accuracy(config: Configuration) -> float:
    """Flat 0.3 except one basin under LMSR, peaking at alpha=10**-1.5, beta1=10**-2.5."""
    if config.rule != RuleId.LMSR:
        return 0.3
    la, lb = np.log10(config.alpha), np.log10(config.beta1)
    return float(0.3 + 0.65 * np.exp(-((la + 1.5) ** 2 + (lb + 2.5) ** 2) / 2.0))


def synthetic_objective(config: Configuration, seed: int) -> EvaluationRecord:
    accuracy = synthetic_accuracy(config)
    return EvaluationRecord(
        **config.model_dump(),
        seeds={"train_seed": seed},
        test_accuracy=accuracy,
        train_accuracy=accuracy,
        wall_time=0.0,
    )
