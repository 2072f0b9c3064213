"""Gaussian RBF networks and the basis-norm quantities used by the neural terms."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np


class PsiVariant(enum.Enum):
    NORM_PLUS_ONE = "norm+1"
    NORM = "norm"


@dataclass(frozen=True, eq=False)
class RbfNetwork:
    """Fixed-center Gaussian network, ``exp(-|x - c_k|^2 / width^2)`` per node.

    ``centers`` has shape (nodes, dim); ``active_box`` has shape (dim, 2).
    """

    centers: np.ndarray
    width: float
    active_box: np.ndarray

    def __post_init__(self):
        centers = np.atleast_2d(np.asarray(self.centers, dtype=float))
        box = np.atleast_2d(np.asarray(self.active_box, dtype=float))
        if centers.shape[0] < 1:
            raise ValueError("network needs at least one node")
        if not self.width > 0:
            raise ValueError(f"width must be positive, got {self.width!r}")
        if box.shape != (centers.shape[1], 2):
            raise ValueError("active_box must give one (low, high) interval per input dimension")
        if np.any(centers < box[:, 0]) or np.any(centers > box[:, 1]):
            raise ValueError("all centers must lie inside active_box")
        centers.flags.writeable = False
        box.flags.writeable = False
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "active_box", box)
        object.__setattr__(self, "_inv_w2", 1.0 / (self.width * self.width))

    @property
    def dim(self) -> int:
        return self.centers.shape[1]

    @property
    def n_nodes(self) -> int:
        return self.centers.shape[0]

    @classmethod
    def grid(cls, lower: Sequence[float], upper: Sequence[float], nodes_per_dim: int, width: float) -> "RbfNetwork":
        """Evenly spaced centers on a box, row-major over dimensions (last index fastest)."""
        axes = [np.linspace(lo, hi, nodes_per_dim) for lo, hi in zip(lower, upper)]
        centers = np.array(list(itertools.product(*axes)), dtype=float)
        return cls(centers, width, np.column_stack([lower, upper]))


def basis(net: RbfNetwork, x) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != net.dim:
        raise ValueError(f"dimension mismatch: input has {x.size} entries, network expects {net.dim}")
    diff = net.centers - x
    return np.exp(-np.einsum("ij,ij->i", diff, diff) * net._inv_w2)


def psi_norm_sq(psi: np.ndarray) -> float:
    psi = np.asarray(psi, dtype=float)
    return float(psi @ psi)


def psi_h(psi: np.ndarray, variant: PsiVariant) -> float:
    norm = float(np.sqrt(psi_norm_sq(psi)))
    if variant is PsiVariant.NORM_PLUS_ONE:
        return norm + 1.0
    return norm
