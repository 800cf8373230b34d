"""Componentwise activation functions with their pointwise derivatives."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_KINDS = ("tanh", "sigmoid", "relu", "leaky_relu", "identity")


@dataclass(frozen=True)
class Activation:
    """A scalar nonlinearity applied componentwise to arrays.

    ``leak`` is only meaningful for ``kind="leaky_relu"`` and must lie in
    [0, 1).  Rectifiers use their lower subgradient at 0 (``relu`` takes 0,
    ``leaky_relu`` takes ``leak``) so that the derivative is defined
    everywhere and the value at 0 is exactly 0.
    """

    kind: str
    leak: float = 0.1

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown activation kind {self.kind!r}")
        if self.kind == "leaky_relu" and not 0.0 <= self.leak < 1.0:
            raise ValueError("leaky_relu slope must lie in [0, 1)")

    @property
    def lipschitz_constant(self) -> float:
        return 0.25 if self.kind == "sigmoid" else 1.0

    @property
    def zero_at_zero(self) -> bool:
        return self.kind != "sigmoid"

    @property
    def positively_homogeneous(self) -> bool:
        return self.kind in ("relu", "leaky_relu", "identity")

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        if self.kind == "tanh":
            return np.tanh(z)
        if self.kind == "sigmoid":
            out = np.empty_like(z)
            pos = z >= 0
            out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
            ez = np.exp(z[~pos])
            out[~pos] = ez / (1.0 + ez)
            return out
        if self.kind == "relu":
            return np.maximum(z, 0.0)
        if self.kind == "leaky_relu":
            return np.where(z > 0.0, z, self.leak * z)
        return z.copy()

    def derivative(self, z):
        z = np.asarray(z, dtype=float)
        if self.kind == "tanh":
            t = np.tanh(z)
            return 1.0 - t * t
        if self.kind == "sigmoid":
            s = self(z)
            return s * (1.0 - s)
        if self.kind == "relu":
            return np.where(z > 0.0, 1.0, 0.0)
        if self.kind == "leaky_relu":
            return np.where(z > 0.0, 1.0, self.leak)
        return np.ones_like(z)


TANH = Activation("tanh")
SIGMOID = Activation("sigmoid")
RELU = Activation("relu")
IDENTITY = Activation("identity")


def leaky_relu(slope: float = 0.1) -> Activation:
    return Activation("leaky_relu", leak=slope)


def activation_from_name(name: str, leak: float = 0.1) -> Activation:
    """Resolve a config-style activation name."""
    if name == "leaky_relu":
        return leaky_relu(leak)
    return Activation(name)
