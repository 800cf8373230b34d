"""Dataset generation, augmentation, and all file formats.

Trajectories travel as CSV (one row per node and sample, 17 significant
digits so that read-back is bit exact), labels as a two-column CSV, and
metrics/config as JSON.  The config schema is documented in the README;
unknown sections or keys are rejected.
"""

from __future__ import annotations

import copy
import json
import os
from dataclasses import dataclass

import numpy as np

from .dynamics import StackedTrajectory


class ParseError(ValueError):
    """A malformed input file; carries the offending line number."""

    def __init__(self, path: str, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line


class ConfigError(ValueError):
    pass


def gen_concentric_spheres(
    dim: int,
    n: int = 3000,
    r1: float = 1.0,
    r2: float = 2.0,
    r3: float = 3.0,
    seed: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Two-class shells: |x| <= r1 is labeled -1, r2 <= |x| <= r3 is +1.

    Classes are balanced to within one sample and the draw is a pure
    function of the arguments.
    """
    if dim not in (1, 2):
        raise ValueError("dim must be 1 or 2")
    if not 0 < r1 < r2 <= r3:
        raise ValueError("radii must satisfy 0 < r1 < r2 <= r3")
    if n < 2:
        raise ValueError("need at least two samples")
    rng = np.random.default_rng(seed)
    n_inner = n // 2
    n_outer = n - n_inner

    def draw(count: int, lo: float, hi: float) -> np.ndarray:
        # radius density proportional to r^{dim-1} over the band
        q = rng.uniform(size=count)
        r = (q * (hi**dim - lo**dim) + lo**dim) ** (1.0 / dim)
        if dim == 1:
            sign = np.where(rng.uniform(size=count) < 0.5, -1.0, 1.0)
            return (sign * r)[:, None]
        angle = rng.uniform(0.0, 2.0 * np.pi, size=count)
        return np.stack([r * np.cos(angle), r * np.sin(angle)], axis=1)

    inner = draw(n_inner, 0.0, r1)
    outer = draw(n_outer, r2, r3)
    inputs = np.concatenate([inner, outer], axis=0)
    labels = np.concatenate([-np.ones(n_inner), np.ones(n_outer)])
    return inputs, labels


def display_batch(inputs: np.ndarray, labels: np.ndarray, k: int = 128):
    """First k samples for figures; training keeps the full set."""
    return inputs[:k], labels[:k]


def augment_zeros(inputs: np.ndarray, d_aug: int) -> np.ndarray:
    """Zero-pad the feature dimension up to d_aug (identity when equal)."""
    inputs = np.atleast_2d(np.asarray(inputs, dtype=float))
    d = inputs.shape[1]
    if d_aug < d:
        raise ValueError("d_aug must be at least the current dimension")
    if d_aug == d:
        return inputs.copy()
    out = np.zeros((inputs.shape[0], d_aug))
    out[:, :d] = inputs
    return out


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_trajectory(path: str, traj: StackedTrajectory | tuple[np.ndarray, np.ndarray]) -> None:
    """CSV with header t,sample,dim_0..dim_{d-1}; one row per (node, sample)."""
    if isinstance(traj, StackedTrajectory):
        times, states = traj.times, traj.states
    else:
        times, states = traj
    times = np.asarray(times, dtype=float)
    states = np.asarray(states, dtype=float)
    if states.ndim != 3 or states.shape[0] != times.size or states.size == 0:
        raise ValueError("refusing to write an empty or misshaped trajectory")
    _, n, d = states.shape
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t,sample," + ",".join(f"dim_{j}" for j in range(d)) + "\n")
        for k, t in enumerate(times):
            for i in range(n):
                row = [_fmt(t), str(i)] + [_fmt(v) for v in states[k, i]]
                fh.write(",".join(row) + "\n")


def read_trajectory(path: str) -> tuple[np.ndarray, np.ndarray]:
    """Exact inverse of :func:`write_trajectory`; returns (times, states)."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError(path, 1, "empty file")
    header = lines[0].split(",")
    if len(header) < 3 or header[0] != "t" or header[1] != "sample":
        raise ParseError(path, 1, f"unexpected header {lines[0]!r}")
    d = len(header) - 2
    for j, name in enumerate(header[2:]):
        if name != f"dim_{j}":
            raise ParseError(path, 1, f"unexpected column name {name!r}")
    times: list[float] = []
    rows: list[list[float]] = []
    samples: list[int] = []
    for ln, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != d + 2:
            raise ParseError(path, ln, f"expected {d + 2} fields, got {len(parts)}")
        try:
            times.append(float(parts[0]))
            samples.append(int(parts[1]))
            rows.append([float(v) for v in parts[2:]])
        except ValueError as exc:
            raise ParseError(path, ln, str(exc)) from exc
    if not rows:
        raise ParseError(path, 2, "no data rows")
    n = max(samples) + 1
    if len(rows) % n != 0:
        raise ParseError(path, len(lines), f"row count {len(rows)} not divisible by {n} samples")
    k = len(rows) // n
    states = np.asarray(rows, dtype=float).reshape(k, n, d)
    node_times = np.asarray(times, dtype=float).reshape(k, n)[:, 0]
    return node_times, states


def write_labels(path: str, labels: np.ndarray) -> None:
    labels = np.asarray(labels)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("sample,label\n")
        for i, y in enumerate(labels.reshape(labels.shape[0], -1)[:, 0]):
            fh.write(f"{i},{_fmt(y)}\n")


def read_labels(path: str) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != "sample,label":
        raise ParseError(path, 1, "expected header 'sample,label'")
    out = []
    for ln, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ParseError(path, ln, "expected two fields")
        try:
            out.append(float(parts[1]))
        except ValueError as exc:
            raise ParseError(path, ln, str(exc)) from exc
    return np.asarray(out)


def write_metrics(path: str, document: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(document, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_metrics(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


# --- configuration -----------------------------------------------------------

_SCHEMA: dict[str, dict[str, object]] = {
    "experiment": {"": "run"},  # scalar section
    "dynamics": {"tag": "sigma_inside", "activation": "tanh", "leak": 0.1, "hidden": None},
    "horizon": {"T": 5.0, "n_layers": 20},
    "functional": {
        "alpha": 1.0,
        "beta": 0.0,
        "k": 0,
        "loss": "mse",
        "l1_bound": None,
        "include_final_cost": True,
        "target_scale": 2.0,
        "min_phi": 0.0,
    },
    "projector": {"kind": "tanh_affine", "trainable": True},
    "data": {
        "kind": "spheres",
        "n": 3000,
        "seed": 0,
        "dim": 2,
        "r1": 1.0,
        "r2": 2.0,
        "r3": 3.0,
        "augment_to": None,
    },
    "optimizer": {"lr": 1e-3, "iters": 500, "seed": 0, "init_scale": 0.1},
    "sweep": {"horizons": [1.0, 3.0, 9.0], "warm_start": True},
    "greedy": {"n0": 4, "schedule": [8, 16, 32], "tol": 0.05},
    "steer": {"x0": [[0.9, 0.05], [0.05, 0.9]], "x1": [[1.0, 0.0], [0.0, 1.0]], "n_steps": 2000},
    "bounds": {"x0": [[0.1], [-0.1]], "x1": [[1.0], [-1.0]], "lipschitz": 1.0, "norm": "l1"},
    "nonlocal": {"widths": [11, 21, 11], "kernel_scale": 0.0, "seed": 0},
}


@dataclass
class Config:
    raw: dict

    def __getitem__(self, section: str) -> dict:
        return self.raw[section]

    def to_json_dict(self) -> dict:
        return self.raw


def default_config() -> Config:
    raw: dict = {}
    for section, keys in _SCHEMA.items():
        if "" in keys:
            raw[section] = keys[""]
        else:
            raw[section] = copy.deepcopy(keys)
    return Config(raw)


def validate_config(document: dict) -> Config:
    cfg = default_config()
    if not isinstance(document, dict):
        raise ConfigError("config must be a JSON object")
    for section, value in document.items():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section {section!r}")
        schema = _SCHEMA[section]
        if "" in schema:
            if not isinstance(value, str):
                raise ConfigError(f"section {section!r} must be a string")
            cfg.raw[section] = value
            continue
        if not isinstance(value, dict):
            raise ConfigError(f"section {section!r} must be an object")
        for key, v in value.items():
            if key not in schema:
                raise ConfigError(f"unknown key {section}.{key}")
            cfg.raw[section][key] = v
    _sanity_check(cfg)
    return cfg


def _sanity_check(cfg: Config) -> None:
    dyn = cfg["dynamics"]
    if dyn["tag"] not in ("sigma_outside", "sigma_inside", "bottleneck"):
        raise ConfigError(f"unknown dynamics.tag {dyn['tag']!r}")
    if dyn["activation"] not in ("tanh", "sigmoid", "relu", "leaky_relu", "identity"):
        raise ConfigError(f"unknown dynamics.activation {dyn['activation']!r}")
    hor = cfg["horizon"]
    if not (isinstance(hor["T"], (int, float)) and hor["T"] > 0):
        raise ConfigError("horizon.T must be positive")
    if not (isinstance(hor["n_layers"], int) and hor["n_layers"] >= 1):
        raise ConfigError("horizon.n_layers must be a positive integer")
    fn = cfg["functional"]
    if fn["loss"] not in ("mse", "logistic"):
        raise ConfigError(f"unknown functional.loss {fn['loss']!r}")
    if fn["k"] not in (0, 1):
        raise ConfigError("functional.k must be 0 or 1")
    if fn["alpha"] < 0 or fn["beta"] < 0:
        raise ConfigError("functional.alpha and functional.beta must be nonnegative")
    if fn["l1_bound"] is not None and fn["l1_bound"] <= 0:
        raise ConfigError("functional.l1_bound must be positive when set")
    data = cfg["data"]
    if data["kind"] != "spheres":
        raise ConfigError(f"unknown data.kind {data['kind']!r}")
    if data["dim"] not in (1, 2):
        raise ConfigError("data.dim must be 1 or 2")
    opt = cfg["optimizer"]
    if opt["lr"] <= 0 or opt["iters"] < 0:
        raise ConfigError("optimizer.lr must be positive and optimizer.iters nonnegative")
    if cfg["projector"]["kind"] not in ("linear", "softmax", "tanh_affine"):
        raise ConfigError(f"unknown projector.kind {cfg['projector']['kind']!r}")


def load_config(path: str) -> Config:
    if not os.path.exists(path):
        raise ConfigError(f"config file {path!r} does not exist")
    with open(path, "r", encoding="utf-8") as fh:
        try:
            document = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return validate_config(document)
