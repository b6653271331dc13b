# dataset.py - IDX parsing, dataset files and seeded subsets
import gzip
import hashlib
import struct
import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import requests
import structlog
from tenacity import retry, retry_if_exception_type, stop_after_attempt, wait_exponential

from errors import ChecksumError, DatasetError, IdxFormatError, IdxLengthError

log = structlog.get_logger(__name__)

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801
N_CLASSES = 10

# role -> file name inside <data_dir>/<dataset>/
FILES = {
    "train_images": "train-images-idx3-ubyte",
    "train_labels": "train-labels-idx1-ubyte",
    "test_images": "t10k-images-idx3-ubyte",
    "test_labels": "t10k-labels-idx1-ubyte",
}
MIRRORS = {
    "mnist": "https://ossci-datasets.s3.amazonaws.com/mnist/",
    "fashion-mnist": "http://fashion-mnist.s3-website.eu-central-1.amazonaws.com/",
}
MANIFEST = "SHA256SUMS"

# MD5 of the published gzip members, as distributed by the dataset authors
ARCHIVE_MD5 = {
    "mnist": {
        "train-images-idx3-ubyte": "f68b3c2dcbeaaa9fbdd348bbdeb94873",
        "train-labels-idx1-ubyte": "d53e105ee54ea40749a09fcbcd1e9432",
        "t10k-images-idx3-ubyte": "9fb629c4189551a2d022fa330f9573f3",
        "t10k-labels-idx1-ubyte": "ec29112dd5afa0611ce80d1b7f02629c",
    },
    "fashion-mnist": {
        "train-images-idx3-ubyte": "8d4fb7e6c68d591d4c3dfef9ec88bf0d",
        "train-labels-idx1-ubyte": "25c81989df183df01b3e8a0aad5dffbe",
        "t10k-images-idx3-ubyte": "bef4ecab320f06d8554ea6380940ec79",
        "t10k-labels-idx1-ubyte": "bb300cfdad3c16e7a12a480ee83cd310",
    },
}


@dataclass(frozen=True)
class ImageSet:
    """Images kept as raw bytes; `pixels` is the [0, 1] view (v / 255)."""

    count: int
    rows: int
    cols: int
    data: np.ndarray  # uint8, (count, rows * cols)

    @property
    def n_pixels(self) -> int:
        return self.rows * self.cols

    @property
    def pixels(self) -> np.ndarray:
        return self.data / 255.0

    def take(self, idx: np.ndarray) -> "ImageSet":
        return ImageSet(len(idx), self.rows, self.cols, self.data[idx])


@dataclass(frozen=True)
class LabelSet:
    count: int
    labels: np.ndarray  # uint8 class indices

    def take(self, idx: np.ndarray) -> "LabelSet":
        return LabelSet(len(idx), self.labels[idx])


@dataclass(frozen=True)
class Dataset:
    name: str
    train_images: ImageSet
    train_labels: LabelSet
    test_images: ImageSet
    test_labels: LabelSet


def _header(raw: bytes, fmt: str, magic: int, what: str) -> tuple[int, ...]:
    if len(raw) >= 4:
        (found,) = struct.unpack_from(">I", raw)
        if found != magic:
            raise IdxFormatError(f"{what} magic is {found:#010x}, expected {magic:#010x}")
    size = struct.calcsize(fmt)
    if len(raw) < size:
        raise IdxLengthError(f"{what}: {len(raw)} bytes is shorter than the {size}-byte header")
    return struct.unpack_from(fmt, raw)


def parse_idx_images(raw: bytes) -> ImageSet:
    # i32 magic | i32 count | i32 rows | i32 cols | u8[] pixels, big endian
    _, count, rows, cols = _header(raw, ">IIII", IMAGE_MAGIC, "image file")
    expected = count * rows * cols
    payload = len(raw) - 16
    if payload != expected:
        raise IdxLengthError(
            f"image file header claims {count}x{rows}x{cols} = {expected} bytes, payload has {payload}"
        )
    data = np.frombuffer(raw, dtype=np.uint8, offset=16).reshape(count, rows * cols)
    return ImageSet(count, rows, cols, data)


def parse_idx_labels(raw: bytes) -> LabelSet:
    _, count = _header(raw, ">II", LABEL_MAGIC, "label file")
    payload = len(raw) - 8
    if payload != count:
        raise IdxLengthError(f"label file header claims {count} labels, payload has {payload}")
    return LabelSet(count, np.frombuffer(raw, dtype=np.uint8, offset=8))


def serialize_idx_images(images: ImageSet) -> bytes:
    header = struct.pack(">IIII", IMAGE_MAGIC, images.count, images.rows, images.cols)
    return header + np.ascontiguousarray(images.data, dtype=np.uint8).tobytes()


def serialize_idx_labels(labels: LabelSet) -> bytes:
    return struct.pack(">II", LABEL_MAGIC, labels.count) + np.asarray(labels.labels, dtype=np.uint8).tobytes()


def check_pairing(images: ImageSet, labels: LabelSet, n_classes: int = N_CLASSES) -> None:
    if images.count != labels.count:
        raise DatasetError(f"{images.count} images paired with {labels.count} labels")
    if labels.count and int(labels.labels.max()) >= n_classes:
        raise DatasetError(f"label {int(labels.labels.max())} out of range for {n_classes} classes")


def subsample_indices(count: int, n: int, seed: int) -> np.ndarray:
    """n distinct indices in seeded random order."""
    if n > count:
        raise DatasetError(f"cannot draw {n} samples without replacement from {count}")
    if n < 0:
        raise DatasetError(f"subsample size must be >= 0, got {n}")
    return np.random.default_rng(seed).choice(count, size=n, replace=False)


def subsample(images: ImageSet, labels: LabelSet, n: int, seed: int) -> tuple[ImageSet, LabelSet]:
    check_pairing(images, labels)
    idx = subsample_indices(images.count, n, seed)
    return images.take(idx), labels.take(idx)


# ---------------------------------------------------------------- files

def dataset_dir(name: str, data_dir: Path) -> Path:
    return Path(data_dir) / name


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def read_manifest(directory: Path) -> dict[str, str]:
    path = directory / MANIFEST
    if not path.exists():
        return {}
    digests = {}
    for line in path.read_text().splitlines():
        if line.strip():
            digest, filename = line.split(maxsplit=1)
            digests[filename.strip().lstrip("*")] = digest
    return digests


def write_manifest(directory: Path, digests: dict[str, str] | None = None) -> dict[str, str]:
    if digests is None:
        digests = {filename: sha256_file(directory / filename) for filename in FILES.values()}
    lines = [f"{digest}  {filename}" for filename, digest in digests.items()]
    (directory / MANIFEST).write_text("\n".join(lines) + "\n")
    return digests


def verify_dataset(name: str, data_dir: Path, expected: dict[str, str] | None = None) -> dict:
    """Presence and SHA-256 check of the four IDX files.

    Digests come from `expected` (pinned in the run config) first, then from
    the SHA256SUMS manifest written at fetch time. A file with neither is
    checked through its published .gz archive when one sits next to it.
    """
    directory = dataset_dir(name, data_dir)
    missing = [f for f in FILES.values() if not (directory / f).exists()]
    if missing:
        raise DatasetError(
            f"missing {', '.join(missing)} in {directory}; "
            f"set MUSHROOM_DATA_DIR or rerun with --fetch"
        )

    known = {**read_manifest(directory), **(expected or {})}
    verified, unverified = [], []
    for filename in FILES.values():
        actual = sha256_file(directory / filename)
        if filename in known:
            if actual != known[filename]:
                raise ChecksumError(filename, known[filename], actual)
            verified.append(filename)
            continue

        archive = directory / f"{filename}.gz"
        if name in ARCHIVE_MD5 and archive.exists():
            raw = _unpack_archive(name, filename, archive.read_bytes())
            unpacked = hashlib.sha256(raw).hexdigest()
            if actual != unpacked:
                raise ChecksumError(filename, unpacked, actual)
            verified.append(filename)
            continue
        unverified.append(filename)

    if unverified:
        log.warning("dataset.unverified", dataset=name, files=unverified)
    return {"status": "success", "verified": verified, "unverified": unverified}


@retry(
    retry=retry_if_exception_type(requests.RequestException),
    stop=stop_after_attempt(4),
    wait=wait_exponential(multiplier=1, max=20),
    reraise=True,
)
def _download(url: str) -> bytes:
    log.info("dataset.download", url=url)
    response = requests.get(url, timeout=60)
    response.raise_for_status()
    return response.content


def _unpack_archive(name: str, filename: str, blob: bytes) -> bytes:
    """Check a gzip member against its published digest, then decompress it."""
    expected = ARCHIVE_MD5[name][filename]
    actual = hashlib.md5(blob, usedforsecurity=False).hexdigest()
    if actual != expected:
        raise ChecksumError(f"{filename}.gz", expected, actual, algorithm="md5")
    return gzip.decompress(blob)


def fetch_dataset(name: str, data_dir: Path) -> dict[str, str]:
    """Download the gzip members, check them, decompress them and record their SHA-256.

    Files already listed in SHA256SUMS with a matching digest are kept; anything
    else is downloaded again. Nothing is written for an archive that fails its check.
    """
    if name not in MIRRORS:
        raise DatasetError(f"unknown dataset {name!r}; choose from {sorted(MIRRORS)}")
    directory = dataset_dir(name, data_dir)
    directory.mkdir(parents=True, exist_ok=True)
    known = read_manifest(directory)
    digests = {}
    for filename in FILES.values():
        target = directory / filename
        if target.exists() and known.get(filename) == sha256_file(target):
            digests[filename] = known[filename]
            continue
        blob = _download(MIRRORS[name] + filename + ".gz")
        raw = _unpack_archive(name, filename, blob)
        (directory / f"{filename}.gz").write_bytes(blob)
        target.write_bytes(raw)
        digests[filename] = hashlib.sha256(raw).hexdigest()
        log.info("dataset.fetched", dataset=name, file=filename)
    return write_manifest(directory, digests)


_cache: dict[tuple[str, str], Dataset] = {}
_cache_lock = threading.Lock()


def load_dataset(name: str, data_dir: Path) -> Dataset:
    """Parse (once per process) and return the train/test split."""
    key = (name, str(Path(data_dir).resolve()))
    with _cache_lock:
        if key in _cache:
            return _cache[key]

        directory = dataset_dir(name, data_dir)
        parts = {}
        for role, filename in FILES.items():
            path = directory / filename
            if not path.exists():
                raise DatasetError(f"missing {path}; set MUSHROOM_DATA_DIR or run `data --fetch`")
            raw = path.read_bytes()
            parts[role] = parse_idx_images(raw) if role.endswith("images") else parse_idx_labels(raw)

        check_pairing(parts["train_images"], parts["train_labels"])
        check_pairing(parts["test_images"], parts["test_labels"])
        dataset = Dataset(name=name, **parts)
        log.info(
            "dataset.loaded",
            dataset=name,
            train=dataset.train_images.count,
            test=dataset.test_images.count,
        )
        _cache[key] = dataset
        return dataset
