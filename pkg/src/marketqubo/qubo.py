"""K-medoid QUBO assembly and exact/incremental energy evaluation.

A problem is stored as a symmetric quadratic matrix ``Q``, a separate linear
vector ``c`` and a scalar ``offset``::

    E(z) = z @ Q @ z + c @ z + offset,   z in {0, 1}^n

The K-medoid model over a dissimilarity matrix ``delta`` is

    Q = gamma * 11^T - (alpha / 2) * delta
    c = beta * delta @ 1 - 2 * gamma * k * 1

with defaults ``alpha = 1/k``, ``beta = 1/n``, ``gamma = 2``. The ``gamma``
terms equal ``gamma * ((sum(z) - k)**2 - k**2)``, a soft cardinality penalty.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionError, MalformedInputError, ParameterError, UnsupportedProblemError, ValidationError


@dataclass(frozen=True)
class KMedoidParams:
    alpha: float
    beta: float
    gamma: float
    k: int


@dataclass(frozen=True)
class QuboProblem:
    Q: np.ndarray
    c: np.ndarray
    offset: float = 0.0
    params: KMedoidParams | None = None

    def __post_init__(self):
        Q = np.array(self.Q, dtype=float)
        c = np.array(self.c, dtype=float).reshape(-1)
        if Q.ndim != 2 or Q.shape != (len(c), len(c)):
            raise DimensionError(f"Q shape {Q.shape} does not match linear vector length {len(c)}")
        if not np.array_equal(Q, Q.T):
            raise ValidationError("Q must be symmetric")
        Q.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def n(self) -> int:
        return len(self.c)

    @classmethod
    def generic(cls, Q, c=None, offset: float = 0.0) -> "QuboProblem":
        """Problem from an arbitrary square ``Q``; it is symmetrised, which leaves energies unchanged."""
        Q = np.asarray(Q, dtype=float)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise DimensionError(f"Q must be square, got shape {Q.shape}")
        if c is None:
            c = np.zeros(Q.shape[0])
        return cls(0.5 * (Q + Q.T), c, offset)


@dataclass(frozen=True)
class Selection:
    """Binary selection vector; ``exemplars`` are the indices set to 1."""

    z: np.ndarray

    def __post_init__(self):
        z = np.array(self.z, dtype=np.int8).reshape(-1)
        if not np.all((z == 0) | (z == 1)):
            raise ValidationError("selection entries must be 0 or 1")
        z.setflags(write=False)
        object.__setattr__(self, "z", z)

    def __eq__(self, other):
        return isinstance(other, Selection) and np.array_equal(self.z, other.z)

    def __hash__(self):
        return hash(self.z.tobytes())

    @property
    def exemplars(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.z))

    @property
    def size(self) -> int:
        return int(self.z.sum())

    @classmethod
    def from_indices(cls, indices, n: int) -> "Selection":
        z = np.zeros(n, dtype=np.int8)
        z[list(indices)] = 1
        return cls(z)


def build_kmedoid_qubo(
    delta,
    k: int,
    alpha: float | None = None,
    beta: float | None = None,
    gamma: float = 2.0,
) -> QuboProblem:
    """Assemble the K-medoid QUBO for selecting ``k`` exemplars.

    Parameters
    ----------
    delta : (n, n) array
        Symmetric dissimilarities with zero diagonal.
    k : int
        Target number of exemplars, ``1 <= k <= n``.
    alpha, beta : float, optional
        Weights of the pairwise-separation and centrality terms; default
        ``1/k`` and ``1/n``.
    gamma : float
        Cardinality penalty weight, must be positive.
    """
    delta = np.asarray(delta, dtype=float)
    if delta.ndim != 2 or delta.shape[0] != delta.shape[1]:
        raise ValidationError(f"delta must be square, got shape {delta.shape}")
    n = delta.shape[0]
    if not np.all(np.isfinite(delta)):
        raise ValidationError("delta has non-finite entries")
    if not np.allclose(delta, delta.T, rtol=0, atol=1e-12):
        raise ValidationError("delta must be symmetric")
    if np.any(np.diag(delta) != 0):
        raise ValidationError("delta must have a zero diagonal")
    if isinstance(k, bool) or int(k) != k or not 1 <= k <= n:
        raise ParameterError(f"k must be an integer in [1, {n}], got {k!r}")
    k = int(k)
    if not gamma > 0:
        raise ParameterError(f"gamma must be positive, got {gamma!r}")
    alpha = 1.0 / k if alpha is None else float(alpha)
    beta = 1.0 / n if beta is None else float(beta)

    delta = 0.5 * (delta + delta.T)
    ones = np.ones(n)
    Q = gamma * np.outer(ones, ones) - alpha * 0.5 * delta
    c = beta * delta @ ones - 2.0 * gamma * k * ones
    return QuboProblem(Q, c, 0.0, KMedoidParams(alpha, beta, float(gamma), k))


def _as_binary(problem: QuboProblem, z) -> np.ndarray:
    z = np.asarray(z)
    if z.shape[-1:] != (problem.n,) or z.ndim > 2:
        raise DimensionError(f"state shape {z.shape} incompatible with {problem.n} variables")
    if not np.all((z == 0) | (z == 1)):
        raise ValidationError("state entries must be 0 or 1")
    return z.astype(float)


def energy(problem: QuboProblem, z) -> float | np.ndarray:
    """Energy of one state (1-D ``z``) or of each row of a 2-D batch."""
    x = _as_binary(problem, z)
    if x.ndim == 1:
        return float(x @ problem.Q @ x + x @ problem.c + problem.offset)
    return ((x @ problem.Q) * x).sum(axis=1) + x @ problem.c + problem.offset


def _check_index(problem: QuboProblem, i: int) -> int:
    if not -problem.n <= i < problem.n:
        raise DimensionError(f"bit index {i} out of range for {problem.n} variables")
    return i % problem.n


def delta_energy(problem: QuboProblem, z, i: int) -> float:
    """``E(z with bit i flipped) - E(z)`` in O(n)."""
    x = _as_binary(problem, z)
    if x.ndim != 1:
        raise DimensionError("delta_energy takes a single state")
    i = _check_index(problem, i)
    Q = problem.Q
    field = Q[i, i] + problem.c[i] + 2.0 * (Q[i] @ x - Q[i, i] * x[i])
    return float((1.0 - 2.0 * x[i]) * field)


def delta_energies(problem: QuboProblem, z) -> np.ndarray:
    """All single-flip energy changes of ``z`` (last axis indexes the bit)."""
    x = _as_binary(problem, z)
    diag = np.diag(problem.Q)
    field = diag + problem.c + 2.0 * (x @ problem.Q - x * diag)
    return (1.0 - 2.0 * x) * field


def cardinality_penalty_decomposition(problem: QuboProblem, z) -> tuple[float, float]:
    """Split ``energy(z)`` into ``(penalty, medoid_objective)``.

    ``penalty = gamma * ((sum(z) - k)**2 - k**2)``; the medoid objective is the
    remainder and does not depend on ``gamma``.
    """
    if problem.params is None:
        raise UnsupportedProblemError("problem carries no K-medoid parameters")
    x = _as_binary(problem, z)
    p = problem.params
    size = x.sum(axis=-1)
    penalty = p.gamma * ((size - p.k) ** 2 - p.k**2)
    medoid = energy(problem, z) - penalty
    if x.ndim == 1:
        return float(penalty), float(medoid)
    return penalty, medoid


def write_qubo_triplets(problem: QuboProblem, path: str | Path) -> None:
    """Upper-triangular ``i j value`` lines.

    Off-diagonal lines carry ``Q_ij + Q_ji``; diagonal lines carry
    ``Q_ii + c_i`` since ``z_i**2 == z_i``. Zero entries are omitted.
    """
    n = problem.n
    lines = [
        "# QUBO triplets: minimise sum(value * z_i * z_j) + offset over binary z",
        "# i<j lines hold Q_ij + Q_ji; i i lines hold Q_ii + c_i (linear terms folded in)",
        f"# n {n}",
        f"# offset {problem.offset!r}",
    ]
    Q, c = problem.Q, problem.c
    for i in range(n):
        v = float(Q[i, i] + c[i])
        if v != 0.0:
            lines.append(f"{i} {i} {v!r}")
        for j in range(i + 1, n):
            v = float(2.0 * Q[i, j])
            if v != 0.0:
                lines.append(f"{i} {j} {v!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_qubo_triplets(path: str | Path) -> QuboProblem:
    """Read a triplet file back as a generic problem (linear terms stay on the diagonal of ``Q``)."""
    path = Path(path)
    n, offset, entries = None, 0.0, []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 2 and parts[0] == "n":
                n = int(parts[1])
            elif len(parts) == 2 and parts[0] == "offset":
                offset = float(parts[1])
            continue
        try:
            i, j, v = line.split()
            entries.append((int(i), int(j), float(v)))
        except ValueError:
            raise MalformedInputError(f"{path}:{lineno}: expected 'i j value'") from None
    if n is None:
        n = 1 + max((max(i, j) for i, j, _ in entries), default=-1)
    Q = np.zeros((n, n))
    for i, j, v in entries:
        if i == j:
            Q[i, i] += v
        else:
            Q[i, j] += 0.5 * v
            Q[j, i] += 0.5 * v
    return QuboProblem(Q, np.zeros(n), offset)
