# network.py
"""
Sparse expansion (antennal lobe -> Kenyon layer) and plastic readout.

The Kenyon code is binary k-winners-take-all over a fixed random fan-in
projection. The readout averages the weights of the active units and
applies one subtractive step of lateral inhibition.
"""

from dataclasses import dataclass

import numpy as np

from config import NetConfig
from errors import NumericError, ShapeError


@dataclass(frozen=True)
class Projection:
    n_in: int
    n_hidden: int
    fan_in: int
    connections: np.ndarray  # int, (n_hidden, fan_in), distinct per row


def build_projection(cfg: NetConfig, seed: int) -> Projection:
    """Each hidden unit samples fan_in distinct inputs uniformly."""
    if cfg.fan_in > cfg.n_in:
        raise ValueError(f"fan_in ({cfg.fan_in}) exceeds n_in ({cfg.n_in})")
    rng = np.random.default_rng(seed)
    # argsort of iid uniforms = a uniform random permutation per row
    order = np.argsort(rng.random((cfg.n_hidden, cfg.n_in)), axis=1, kind="stable")
    connections = np.sort(order[:, : cfg.fan_in], axis=1).astype(np.int32)
    return Projection(cfg.n_in, cfg.n_hidden, cfg.fan_in, connections)


def hidden_drive(U: np.ndarray, proj: Projection) -> np.ndarray:
    """h[n, j] = sum of U[n, i] over the inputs wired to hidden unit j.

    uint8 images are summed as integers, so ties between units are exact.
    """
    if U.shape[-1] != proj.n_in:
        raise ShapeError(f"input has {U.shape[-1]} values, projection expects {proj.n_in}")
    gathered = U[..., proj.connections]
    if np.issubdtype(U.dtype, np.integer):
        return gathered.sum(axis=-1, dtype=np.int64)
    return gathered.sum(axis=-1)


def k_winners(h: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k largest entries per row; ties go to the lower index."""
    if not 1 <= k <= h.shape[-1]:
        raise ValueError(f"k must lie in [1, {h.shape[-1]}], got {k}")
    return np.argsort(-h, axis=-1, kind="stable")[..., :k]


def encode(u: np.ndarray, proj: Projection, k: int) -> np.ndarray:
    """Binary sparse code x_e with exactly k ones."""
    u = np.asarray(u)
    if u.ndim != 1:
        raise ShapeError(f"encode expects one image, got shape {u.shape}")
    x_e = np.zeros(proj.n_hidden)
    x_e[k_winners(hidden_drive(u, proj), k)] = 1.0
    return x_e


def encode_batch(U: np.ndarray, proj: Projection, k: int, chunk: int = 256) -> np.ndarray:
    """Active-unit indices (N, k) for a stack of images, computed in chunks."""
    active = np.empty((U.shape[0], k), dtype=np.int32)
    for start in range(0, U.shape[0], chunk):
        stop = start + chunk
        active[start:stop] = k_winners(hidden_drive(U[start:stop], proj), k)
    return active


def _inhibit(z: np.ndarray, gamma: float) -> np.ndarray:
    if gamma == 0.0:
        return np.maximum(z, 0.0)
    # mean taken relative to the first entry so a uniform row gives mean == z exactly
    ref = z[..., :1]
    mean = ref + (z - ref).mean(axis=-1, keepdims=True)
    return np.maximum(z - gamma * mean, 0.0)


def forward_active(active: np.ndarray, W: np.ndarray, cfg: NetConfig) -> np.ndarray:
    """Output activity from the indices of the active Kenyon units."""
    if not np.isfinite(W).all():
        raise NumericError("weight matrix contains non-finite values")
    z = W[active].sum(axis=-2) / cfg.k_active
    return _inhibit(z, cfg.gamma)


def forward(x_e: np.ndarray, W: np.ndarray, cfg: NetConfig) -> np.ndarray:
    """x_o[j] = max(0, z[j] - gamma * mean(z)),  z = (1/k) * sum_i W[i, j] x_e[i]."""
    x_e = np.asarray(x_e)
    if W.shape != (cfg.n_hidden, cfg.n_out) or x_e.shape != (cfg.n_hidden,):
        raise ShapeError(
            f"forward got x_e {x_e.shape} and W {W.shape}, "
            f"expected ({cfg.n_hidden},) and ({cfg.n_hidden}, {cfg.n_out})"
        )
    if not np.isfinite(W).all():
        raise NumericError("weight matrix contains non-finite values")
    return _inhibit((x_e @ W) / cfg.k_active, cfg.gamma)


def predict(x_o: np.ndarray) -> int:
    """Argmax readout; lowest index wins ties."""
    x_o = np.asarray(x_o)
    if x_o.size == 0:
        raise ShapeError("cannot predict from empty activity")
    return int(np.argmax(x_o))


def predict_batch(X_o: np.ndarray) -> np.ndarray:
    return np.argmax(X_o, axis=-1)
