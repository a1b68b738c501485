"""Undirected weighted communication graph: validation, Laplacian, lambda_2."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import Violation, ValidationError

SYMMETRY_TOL = 1e-12
CONNECTIVITY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Adjacency:
    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] < 1:
            raise ValidationError([Violation("bad_graph", "adjacency matrix",
                                             f"weights must be a non-empty square matrix, got shape {w.shape}")])
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    def violations(self) -> list[Violation]:
        w = self.weights
        out = []
        if not np.all(np.isfinite(w)):
            out.append(Violation("bad_graph", "adjacency matrix", "weights must be finite"))
        if np.any(w < 0):
            out.append(Violation("negative_weight", "undirected graph", "edge weights must be >= 0"))
        if np.any(np.diag(w) != 0):
            out.append(Violation("self_loop", "undirected graph", "diagonal weights must be 0"))
        if np.max(np.abs(w - w.T), initial=0.0) > SYMMETRY_TOL:
            out.append(Violation("asymmetric_graph", "undirected graph",
                                 "weight matrix must be symmetric"))
        return out

    def validate(self) -> None:
        v = self.violations()
        if v:
            raise ValidationError(v)

    def neighbors(self, i: int) -> list[int]:
        return [j for j in range(self.n) if self.weights[i, j] > 0]

    def disagreement(self, estimates: np.ndarray) -> np.ndarray:
        """``sum_{i<j} a_ij ||x_i - x_j||^2`` over the agent axis (-2)."""
        x = np.asarray(estimates, dtype=float)
        total = np.zeros(x.shape[:-2])
        for i in range(self.n):
            for j in range(i + 1, self.n):
                a = self.weights[i, j]
                if a > 0:
                    diff = x[..., i, :] - x[..., j, :]
                    total = total + a * np.sum(diff * diff, axis=-1)
        return total

    def to_dict(self) -> dict:
        return {"weights": self.weights.tolist()}


def named_topology(name: str, n: int, weight: float = 1.0) -> Adjacency:
    """``cycle``, ``complete``, ``path`` or ``empty`` graph with uniform weight."""
    w = np.zeros((n, n))
    if name == "cycle":
        if n == 2:
            w[0, 1] = w[1, 0] = weight
        elif n > 2:
            for i in range(n):
                w[i, (i + 1) % n] = w[(i + 1) % n, i] = weight
    elif name == "complete":
        w[:] = weight
        np.fill_diagonal(w, 0.0)
    elif name == "path":
        for i in range(n - 1):
            w[i, i + 1] = w[i + 1, i] = weight
    elif name != "empty":
        raise ValueError(f"unknown topology {name!r}")
    return Adjacency(w)


@dataclass(frozen=True, eq=False)
class LaplacianView:
    L: np.ndarray
    eigenvalues: np.ndarray

    @property
    def lambda2(self) -> float:
        if len(self.eigenvalues) < 2:
            return 0.0
        return float(max(self.eigenvalues[1], 0.0))


def build_laplacian(adj: Adjacency) -> LaplacianView:
    adj.validate()
    A = adj.weights
    L = np.diag(A.sum(axis=1)) - A
    L = 0.5 * (L + L.T)
    return LaplacianView(L=L, eigenvalues=np.linalg.eigvalsh(L))


def is_connected(adj: Adjacency) -> bool:
    """Breadth-first search from node 0 over positive-weight edges."""
    n = adj.n
    seen = {0}
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for j in adj.neighbors(i):
            if j not in seen:
                seen.add(j)
                queue.append(j)
    return len(seen) == n
