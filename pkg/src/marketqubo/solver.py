"""QUBO minimisation: simulated annealing with restarts, exhaustive search, cardinality repair.

The annealer proposes single-bit flips in sequential sweeps and accepts with
the Metropolis rule under a geometric temperature schedule. Every restart
draws its initial state and acceptance uniforms from its own child of
``np.random.SeedSequence(seed)``, so results do not depend on how restarts
are scheduled across threads.
"""
from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import ConfigError, ProblemTooLargeError, UnsupportedProblemError
from .qubo import QuboProblem, Selection, delta_energies, energy

log = logging.getLogger(__name__)

MAX_EXHAUSTIVE_N = 25
_CHUNK_BITS = 16


@dataclass(frozen=True)
class AnnealConfig:
    """Annealing schedule and budget.

    ``t_initial=None`` picks the 90th percentile of ``|delta_energy|`` at a
    random probe state; ``t_final=None`` is ``1e-3 * t_initial``. ``seed=None``
    draws fresh entropy, reported back as ``SolveResult.seed_used``.
    """

    sweeps: int = 1000
    restarts: int = 16
    t_initial: float | None = None
    t_final: float | None = None
    schedule: str = "geometric"
    seed: int | None = None
    repair: bool = True

    def __post_init__(self):
        if int(self.sweeps) != self.sweeps or self.sweeps < 1:
            raise ConfigError(f"sweeps must be a positive integer, got {self.sweeps!r}")
        if int(self.restarts) != self.restarts or self.restarts < 1:
            raise ConfigError(f"restarts must be a positive integer, got {self.restarts!r}")
        if self.schedule != "geometric":
            raise ConfigError(f"unsupported schedule {self.schedule!r}")
        for name in ("t_initial", "t_final"):
            t = getattr(self, name)
            if t is not None and not (np.isfinite(t) and t > 0):
                raise ConfigError(f"{name} must be a positive finite temperature, got {t!r}")
        if self.t_initial is not None and self.t_final is not None and self.t_final > self.t_initial:
            raise ConfigError(f"t_final {self.t_final} exceeds t_initial {self.t_initial}")
        if self.seed is not None and not 0 <= int(self.seed) < 2**64:
            raise ConfigError(f"seed must fit in 64 unsigned bits, got {self.seed!r}")


@dataclass(frozen=True)
class SolveResult:
    best: Selection
    best_energy: float
    feasible: bool
    seed_used: int | None = None
    # running minimum over restarts, in restart order
    energy_trace: tuple[float, ...] = ()
    restart_energies: tuple[float, ...] = ()
    # feasibility of the best state before repair
    raw_feasible: bool | None = None
    t_initial: float | None = None
    t_final: float | None = None
    wall_time: float = field(default=0.0, compare=False)


def _is_feasible(problem: QuboProblem, sel: Selection) -> bool:
    return problem.params is not None and sel.size == problem.params.k


def _lex_better(e1: float, z1: np.ndarray, e2: float, z2: np.ndarray) -> bool:
    """Strictly lower energy wins; exact ties go to the lexicographically smaller state."""
    if e1 != e2:
        return e1 < e2
    return tuple(z1) < tuple(z2)


def solve_exhaustive(problem: QuboProblem) -> SolveResult:
    """Global minimum by enumerating all ``2**n`` states.

    States are enumerated with ``z[0]`` as the most significant bit, i.e. in
    lexicographic order; among states within ``1e-12`` (relative) of the
    minimum the first one is returned.
    """
    n = problem.n
    if n > MAX_EXHAUSTIVE_N:
        raise ProblemTooLargeError(f"exhaustive search limited to n <= {MAX_EXHAUSTIVE_N}, got {n}")
    start = time.perf_counter()
    total = 1 << n
    chunk = min(total, 1 << _CHUNK_BITS)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)

    def block(lo: int) -> np.ndarray:
        idx = np.arange(lo, min(lo + chunk, total), dtype=np.int64)
        states = ((idx[:, None] >> shifts) & 1).astype(np.int8)
        return states, energy(problem, states)

    chunk_mins = []
    for lo in range(0, total, chunk):
        _, e = block(lo)
        chunk_mins.append(e.min())
    best = min(chunk_mins)
    tol = 1e-12 * max(1.0, abs(best))
    for lo, m in zip(range(0, total, chunk), chunk_mins):
        if m <= best + tol:
            states, e = block(lo)
            z = states[int(np.argmax(e <= best + tol))]
            break
    sel = Selection(z)
    return SolveResult(
        best=sel,
        best_energy=energy(problem, sel.z),
        feasible=_is_feasible(problem, sel),
        raw_feasible=_is_feasible(problem, sel),
        wall_time=time.perf_counter() - start,
    )


def repair_cardinality(problem: QuboProblem, z) -> Selection:
    """Greedily flip bits until exactly ``k`` are set.

    With too many bits set, clear the set bit whose removal gives the lowest
    energy; with too few, set the unset bit whose addition gives the lowest
    energy. Ties go to the lowest index.
    """
    if problem.params is None:
        raise UnsupportedProblemError("repair needs a problem carrying the target cardinality k")
    k = problem.params.k
    x = np.array(Selection(z).z)
    while (size := int(x.sum())) != k:
        d = delta_energies(problem, x)
        candidates = x == 1 if size > k else x == 0
        d = np.where(candidates, d, np.inf)
        x[int(np.argmin(d))] ^= 1
    return Selection(x)


@njit(cache=True, nogil=True)
def _anneal_kernel(Q, c, z0, temps, uniforms):
    n = Q.shape[0]
    z = z0.copy()
    base = np.empty(n)
    g = np.zeros(n)
    for i in range(n):
        base[i] = Q[i, i] + c[i]
    # g[i] = 2 * sum_{j != i} Q[i, j] z[j]; flip delta is (1 - 2 z[i]) * (base[i] + g[i])
    e = 0.0
    for i in range(n):
        acc = 0.0
        for j in range(n):
            if j != i and z[j]:
                acc += Q[i, j]
        g[i] = 2.0 * acc
        if z[i]:
            e += base[i] + acc
    best_e = e
    best_z = z.copy()
    for s in range(temps.shape[0]):
        t = temps[s]
        for i in range(n):
            sign = 1.0 - 2.0 * z[i]
            d = sign * (base[i] + g[i])
            if d <= 0.0 or uniforms[s, i] < np.exp(-d / t):
                z[i] = 1 - z[i]
                e += d
                for j in range(n):
                    if j != i:
                        g[j] += 2.0 * Q[j, i] * sign
                if e < best_e:
                    best_e = e
                    best_z[:] = z
    return best_z


def _probe_temperature(problem: QuboProblem, rng: np.random.Generator) -> float:
    p = 0.5 if problem.params is None else problem.params.k / problem.n
    probe = (rng.random(problem.n) < p).astype(np.int8)
    mags = np.abs(delta_energies(problem, probe))
    t = float(np.percentile(mags, 90))
    if not t > 0:
        t = float(mags.max()) if mags.max() > 0 else 1.0
    return t


def resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return int(seed)
    return int(np.random.SeedSequence().entropy % 2**64)


def solve_anneal(problem: QuboProblem, config: AnnealConfig | None = None, workers: int = 1) -> SolveResult:
    """Best-of-restarts simulated annealing.

    ``workers`` only changes scheduling; the result is identical for any value.
    """
    config = config or AnnealConfig()
    start = time.perf_counter()
    seed = resolve_seed(config.seed)
    streams = np.random.SeedSequence(seed).spawn(config.restarts + 1)

    t_initial = config.t_initial
    if t_initial is None:
        t_initial = _probe_temperature(problem, np.random.default_rng(streams[0]))
    t_final = config.t_final if config.t_final is not None else 1e-3 * t_initial
    if t_final > t_initial:
        raise ConfigError(f"t_final {t_final} exceeds t_initial {t_initial}")
    temps = np.geomspace(t_initial, t_final, config.sweeps)
    Q = np.ascontiguousarray(problem.Q)
    c = np.ascontiguousarray(problem.c)

    def run(r: int) -> np.ndarray:
        rng = np.random.default_rng(streams[r + 1])
        z0 = rng.integers(0, 2, size=problem.n, dtype=np.int8)
        uniforms = rng.random((config.sweeps, problem.n))
        return _anneal_kernel(Q, c, z0, temps, uniforms)

    if workers > 1 and config.restarts > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            raw = list(pool.map(run, range(config.restarts)))
    else:
        raw = [run(r) for r in range(config.restarts)]

    best_raw = None
    for z in raw:
        e = energy(problem, z)
        if best_raw is None or _lex_better(e, z, *best_raw):
            best_raw = (e, z)

    finals = [repair_cardinality(problem, z).z if config.repair else z for z in raw]
    energies = [energy(problem, z) for z in finals]
    best_i = 0
    for r in range(1, len(finals)):
        if _lex_better(energies[r], finals[r], energies[best_i], finals[best_i]):
            best_i = r
    sel = Selection(finals[best_i])
    result = SolveResult(
        best=sel,
        best_energy=energy(problem, sel.z),
        feasible=_is_feasible(problem, sel),
        seed_used=seed,
        energy_trace=tuple(float(v) for v in np.minimum.accumulate(energies)),
        restart_energies=tuple(float(v) for v in energies),
        raw_feasible=_is_feasible(problem, Selection(best_raw[1])),
        t_initial=float(t_initial),
        t_final=float(t_final),
        wall_time=time.perf_counter() - start,
    )
    log.debug(
        "anneal n=%d restarts=%d sweeps=%d best=%.12g feasible=%s (%.2fs)",
        problem.n, config.restarts, config.sweeps, result.best_energy, result.feasible, result.wall_time,
    )
    return result
