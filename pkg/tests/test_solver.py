import itertools

import numpy as np
import pytest

from marketqubo.errors import ConfigError, ProblemTooLargeError, UnsupportedProblemError
from marketqubo.qubo import QuboProblem, build_kmedoid_qubo, delta_energy, energy
from marketqubo.solver import AnnealConfig, repair_cardinality, solve_anneal, solve_exhaustive


def random_delta(n, rng):
    pts = rng.random((n, 2))
    d = np.linalg.norm(pts[:, None] - pts[None], axis=-1)
    return 1 - np.exp(-d / 2)


def brute_min(problem):
    best = None
    for bits in itertools.product((0, 1), repeat=problem.n):
        e = energy(problem, bits)
        if best is None or e < best[0] - 1e-12:
            best = (e, bits)
    return best


def test_exhaustive_single_bit():
    r = solve_exhaustive(QuboProblem([[0.0]], [-1.0]))
    assert r.best.z.tolist() == [1] and r.best_energy == -1.0


def test_exhaustive_tie_break_is_lexicographic():
    p = build_kmedoid_qubo(np.zeros((2, 2)), 1)
    r = solve_exhaustive(p)
    assert r.best_energy == -2.0
    assert r.best.z.tolist() == [0, 1]
    assert r.feasible


@pytest.mark.parametrize("n, k", [(4, 1), (7, 3), (10, 5)])
def test_exhaustive_zero_delta_is_feasible(n, k):
    r = solve_exhaustive(build_kmedoid_qubo(np.zeros((n, n)), k))
    assert r.best.size == k
    assert r.best_energy == -2.0 * k * k


@pytest.mark.parametrize("seed", range(4))
def test_exhaustive_matches_loop(seed):
    rng = np.random.default_rng(seed)
    p = QuboProblem.generic(rng.normal(size=(6, 6)), rng.normal(size=6))
    e, bits = brute_min(p)
    r = solve_exhaustive(p)
    assert r.best_energy == pytest.approx(e, abs=1e-12)
    assert tuple(r.best.z) == bits


def test_exhaustive_guard():
    with pytest.raises(ProblemTooLargeError):
        solve_exhaustive(QuboProblem(np.zeros((26, 26)), np.zeros(26)))


def test_config_validation():
    with pytest.raises(ConfigError):
        AnnealConfig(t_initial=0.1, t_final=1.0)
    with pytest.raises(ConfigError):
        AnnealConfig(t_initial=-1.0)
    with pytest.raises(ConfigError):
        AnnealConfig(sweeps=0)
    with pytest.raises(ConfigError):
        AnnealConfig(restarts=0)
    with pytest.raises(ConfigError):
        AnnealConfig(schedule="linear")
    with pytest.raises(ConfigError):
        solve_anneal(QuboProblem([[1.0]], [0.0]), AnnealConfig(t_final=1e9))


def test_anneal_matches_exhaustive_on_small_instances():
    hits = 0
    for seed in range(20):
        rng = np.random.default_rng(100 + seed)
        n = int(rng.integers(4, 13))
        p = build_kmedoid_qubo(random_delta(n, rng), int(rng.integers(1, n // 2 + 1)))
        exact = solve_exhaustive(p)
        got = solve_anneal(p, AnnealConfig(sweeps=200, restarts=20, seed=seed))
        hits += got.best_energy <= exact.best_energy + 1e-9 * abs(exact.best_energy)
    assert hits >= 19


@pytest.mark.parametrize("k", [1, 4, 9])
def test_anneal_penalty_only_closed_form(k):
    p = build_kmedoid_qubo(np.zeros((20, 20)), k)
    r = solve_anneal(p, AnnealConfig(sweeps=100, restarts=4, seed=k))
    assert r.feasible and r.best.size == k
    assert r.best_energy == -2.0 * k * k


def test_anneal_deterministic_and_thread_independent():
    rng = np.random.default_rng(7)
    p = build_kmedoid_qubo(random_delta(30, rng), 4)
    cfg = AnnealConfig(sweeps=150, restarts=6, seed=1234)
    a = solve_anneal(p, cfg)
    b = solve_anneal(p, cfg)
    c = solve_anneal(p, cfg, workers=3)
    assert a == b == c
    assert a.seed_used == 1234


def test_anneal_result_invariants():
    rng = np.random.default_rng(8)
    p = build_kmedoid_qubo(random_delta(25, rng), 3)
    r = solve_anneal(p, AnnealConfig(sweeps=100, restarts=8, seed=3))
    assert r.best_energy == energy(p, r.best.z)
    trace = np.array(r.energy_trace)
    assert len(trace) == 8 and np.all(np.diff(trace) <= 0)
    assert trace[-1] == r.best_energy == min(r.restart_energies)
    assert 0 < r.t_final == pytest.approx(1e-3 * r.t_initial)


def test_unseeded_run_reports_seed():
    p = build_kmedoid_qubo(np.zeros((5, 5)), 2)
    r = solve_anneal(p, AnnealConfig(sweeps=10, restarts=2))
    again = solve_anneal(p, AnnealConfig(sweeps=10, restarts=2, seed=r.seed_used))
    assert r == again


def test_repair_noop_on_feasible():
    p = build_kmedoid_qubo(random_delta(6, np.random.default_rng(0)), 2)
    z = [0, 1, 0, 0, 1, 0]
    assert repair_cardinality(p, z).z.tolist() == z


def test_repair_all_ones_removes_best_single_bit():
    n = 7
    p = build_kmedoid_qubo(random_delta(n, np.random.default_rng(1)), n - 1)
    ones = np.ones(n, int)
    removals = []
    for i in range(n):
        z = ones.copy()
        z[i] = 0
        removals.append(energy(p, z))
    expected = np.ones(n, int)
    expected[int(np.argmin(removals))] = 0
    assert repair_cardinality(p, ones).z.tolist() == expected.tolist()


def test_repair_from_empty_sets_min_linear_bit():
    p = build_kmedoid_qubo(random_delta(8, np.random.default_rng(2)), 1)
    z = repair_cardinality(p, np.zeros(8, int))
    assert z.exemplars == (int(np.argmin(np.diag(p.Q) + p.c)),)


@pytest.mark.parametrize("seed", range(10))
def test_repair_steps_follow_delta_energy(seed):
    rng = np.random.default_rng(seed)
    n = 10
    k = int(rng.integers(1, n))
    p = build_kmedoid_qubo(random_delta(n, rng), k)
    z = rng.integers(0, 2, n)
    out = repair_cardinality(p, z)
    assert out.size == k
    # replay one greedy step and compare with full re-evaluation
    if z.sum() != k:
        step = np.flatnonzero(out.z != z)[0] if abs(int(z.sum()) - k) == 1 else None
        if step is not None:
            assert energy(p, out.z) - energy(p, z) == pytest.approx(delta_energy(p, z, step), abs=1e-12)


def test_repair_needs_k():
    with pytest.raises(UnsupportedProblemError):
        repair_cardinality(QuboProblem([[1.0]], [0.0]), [1])


def test_no_repair_flag_keeps_raw_state():
    # weak penalty so the raw optimum overshoots k
    n = 8
    delta = np.full((n, n), 0.6)
    np.fill_diagonal(delta, 0)
    p = build_kmedoid_qubo(delta, 2, alpha=20.0, gamma=0.05)
    raw = solve_anneal(p, AnnealConfig(sweeps=100, restarts=4, seed=0, repair=False))
    fixed = solve_anneal(p, AnnealConfig(sweeps=100, restarts=4, seed=0))
    assert not raw.feasible and raw.raw_feasible is False
    assert fixed.feasible and fixed.best.size == 2
