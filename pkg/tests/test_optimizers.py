import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latticeplan.bench import make_objective, suite_map
from latticeplan.gridmap import OccupancyGrid
from latticeplan.objective import PathObjective
from latticeplan.optimizers import (KINDS, OptimizerConfig, SadeState, SearchDomain, Swarm,
                                    de_crossover_select, de_mutate, greedy_select, optimize,
                                    pso_step, rbde_select_indices, update_bests, velocity_update,
                                    whitley_index)


class ScriptedRng:
    """Replays fixed integers and uniforms; ``random(n)`` returns ones by default."""

    def __init__(self, ints=(), uniform=1.0):
        self.ints = list(ints)
        self.value = uniform

    def integers(self, n):
        return self.ints.pop(0)

    def random(self, size=None):
        return self.value if size is None else np.full(size, self.value)


def test_velocity_update_examples():
    assert velocity_update(0.0, 2.0, 2.0, 2.0, 0.3, 0.9, 0.7, 2.05, 2.05) == 0.0
    assert velocity_update(1.0, 2.0, 3.0, 4.0, 1.0, 1.0, 0.7, 2.05, 2.05) == pytest.approx(6.85)


def test_pso_step_fixed_point_and_clamp():
    cfg = OptimizerConfig(kind="pso")
    x = np.array([2.0, 9.5])
    swarm = Swarm(x.copy(), np.array([0.0, 1.0]), np.array([80.0, 90.0]),
                  x.copy(), np.array([80.0, 90.0]))
    moved = pso_step(swarm, 2.0, ScriptedRng(uniform=1.0), cfg)
    assert moved.x[0] == 2.0 and moved.v[0] == 0.0
    # second particle: v' = 0.7 + 2.05*(2 - 9.5) < 0 -> moves down
    swarm = Swarm(np.array([9.5]), np.array([5.0]), np.array([90.0]), np.array([9.5]), np.array([90.0]))
    moved = pso_step(swarm, 9.5, ScriptedRng(uniform=0.0), cfg)
    assert moved.x[0] == cfg.alpha_max


def test_pso_bests_never_worsen():
    s = Swarm(np.array([1.0, 2.0]), np.zeros(2), np.array([75.0, 60.0]),
              np.array([0.5, 2.5]), np.array([70.0, 70.0]))
    update_bests(s, 2)
    assert s.pbest_fit.tolist() == [70.0, 60.0]
    assert s.pbest_x.tolist() == [0.5, 2.0]


def test_de_mutate_examples():
    dom = SearchDomain()
    pop = np.array([0.2, 0.5, 0.1, 0.9])
    fit = np.array([80.0, 81.0, 82.0, 83.0])
    assert de_mutate("rand", pop, fit, 3, 0.7, ScriptedRng([0, 1, 2]), dom) == pytest.approx(0.48)
    pop2 = np.array([0.2, 0.5, 0.5, 0.9])
    assert de_mutate("rand", pop2, fit, 3, 0.7, ScriptedRng([0, 1, 2]), dom) == pytest.approx(0.2)
    assert de_mutate("rand", np.array([0.1, 0.0, 5.0, 1.0]), fit, 3, 0.7, ScriptedRng([0, 1, 2]), dom) == 0.0
    # best/1 uses the lowest-fitness individual as base
    assert de_mutate("best", pop, fit, 3, 0.7, ScriptedRng([1, 2]), dom) == pytest.approx(0.2 + 0.7 * 0.4)


def test_de_mutate_indices_distinct_from_target():
    rng = np.random.default_rng(0)
    pop = np.arange(4, dtype=float)
    fit = np.zeros(4)
    # with 4 individuals the three donors are exactly the non-targets
    for target in range(4):
        v = de_mutate("rand", pop, fit, target, 1.0, rng, SearchDomain(0, 100))
        others = [i for i in range(4) if i != target]
        combos = {pop[a] + (pop[b] - pop[c]) for a in others for b in others for c in others
                  if len({a, b, c}) == 3}
        assert v in combos


def test_crossover_selection_rules():
    assert greedy_select(1.0, 80.0, 2.0, 75.0) == (2.0, 75.0, True)
    assert greedy_select(1.0, 80.0, 2.0, 500.0) == (1.0, 80.0, False)
    assert greedy_select(1.0, 80.0, 2.0, 80.0) == (2.0, 80.0, True)
    calls = []

    def obj(a):
        calls.append(a)
        return 70.0

    rng = np.random.default_rng(0)
    for _ in range(20):
        x, f, won = de_crossover_select(1.0, 80.0, 3.0, 0.5, rng, obj)
        assert (x, f, won) == (3.0, 70.0, True)
    assert calls == [3.0] * 20


def test_sade_learning_symmetric():
    st_ = SadeState.initial()
    for k in range(4):
        for _ in range(5):
            st_.record(k, True, 0.4)
            st_.record(k, False, 0.4)
    for _ in range(50):
        st_.end_generation(50)
    assert np.allclose(st_.probs, 0.25)
    assert np.allclose(st_.crm, 0.4)


def test_sade_learning_favours_successful_strategy():
    st_ = SadeState.initial()
    history = []
    for period in range(3):
        for g in range(50):
            for k in range(4):
                st_.record(k, k == 0, 0.6 + 0.01 * period)
            st_.end_generation(50)
        history.append(st_.probs.copy())
    for probs in history:
        assert int(np.argmax(probs)) == 0
        # success rate 1 vs 0 with epsilon 0.01: (1.01) / (1.01 + 3 * 0.01)
        assert probs[0] == pytest.approx(1.01 / 1.04)
        assert probs.sum() == pytest.approx(1.0)
    assert st_.crm[0] == pytest.approx(0.62)
    assert np.allclose(st_.crm[1:], 0.5)


def test_sade_learning_without_trials_keeps_probabilities():
    st_ = SadeState.initial()
    st_.probs = np.array([0.4, 0.3, 0.2, 0.1])
    for _ in range(50):
        st_.end_generation(50)
    assert st_.probs.tolist() == [0.4, 0.3, 0.2, 0.1]


def test_whitley_transform():
    assert whitley_index(0.0, 10, 2.0) == 0
    assert whitley_index(0.999999, 10, 2.0) == 9
    rng = np.random.default_rng(123)
    counts = np.zeros(10, dtype=int)
    for u in rng.random(1_000_000):
        counts[whitley_index(float(u), 10, 2.0)] += 1
    assert counts.sum() == 1_000_000  # every draw landed in [0, 9]
    assert counts[0] > counts[9]
    assert np.all(np.diff(counts) < 0)


def test_rbde_donors_distinct():
    rng = np.random.default_rng(1)
    for target in range(10):
        idx = rbde_select_indices(10, 2.0, rng, 3, exclude=target)
        assert len(set(idx)) == 3 and target not in idx


@pytest.mark.parametrize("kind", KINDS)
def test_optimizers_on_empty_map(kind):
    g = OccupancyGrid.empty(50)
    obj = make_objective(g, 1, 1000)
    res = optimize(kind, OptimizerConfig(seed=1), obj)
    assert obj.budget.used == 1000 and len(res.trace) == 1000
    assert res.best_fitness <= 75.0
    assert res.incumbent is not None and res.incumbent.length == res.best_fitness


@pytest.mark.parametrize("kind", KINDS)
def test_zero_budget(kind):
    obj = make_objective(OccupancyGrid.empty(20), 0, 0)
    res = optimize(kind, OptimizerConfig(), obj)
    assert len(res.trace) == 0 and res.incumbent is None and res.best_fitness == obj.penalty


@pytest.mark.parametrize("kind", KINDS)
def test_determinism(kind):
    g = suite_map("map11")
    runs = []
    for _ in range(2):
        res = optimize(kind, OptimizerConfig(seed=9), make_objective(g, 9, 300))
        runs.append((res.trace.best, res.best_alpha, res.incumbent))
    assert runs[0] == runs[1]


@pytest.mark.parametrize("kind", KINDS)
def test_infeasible_everywhere(kind):
    cells = np.zeros((30, 30), dtype=bool)
    cells[29, :29] = True
    obj = make_objective(OccupancyGrid(cells), 0, 200)
    res = optimize(kind, OptimizerConfig(), obj)
    assert res.best_fitness == obj.penalty and res.incumbent is None


class RecordingObjective(PathObjective):
    def evaluate(self, alpha):
        self.seen = getattr(self, "seen", [])
        self.seen.append(alpha)
        return super().evaluate(alpha)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(KINDS), st.integers(0, 2**31), st.integers(0, 137),
       st.sampled_from(["map02", "map11", "map16"]))
def test_budget_trace_and_domain_invariants(kind, seed, evals, map_name):
    g = suite_map(map_name)
    base = make_objective(g, seed, evals)
    obj = RecordingObjective(g, base.rng, base.budget)
    res = optimize(kind, OptimizerConfig(seed=seed, alpha_max=6.0), obj)
    assert obj.budget.used == evals == len(res.trace)
    assert all(b <= a for a, b in zip(res.trace.best, res.trace.best[1:]))
    assert all(0.0 <= a <= 6.0 for a in getattr(obj, "seen", []))
    assert res.trace.evals == list(range(1, evals + 1))


def test_config_validation_and_json():
    with pytest.raises(ValueError, match="valid kinds"):
        OptimizerConfig(kind="psosp")
    with pytest.raises(ValueError):
        OptimizerConfig(kind="derand", population=3)
    cfg = OptimizerConfig(kind="RBDE", beta=2.5)
    assert cfg.kind == "rbde"
    assert OptimizerConfig.from_json(cfg.to_json()) == cfg
    assert json.loads(OptimizerConfig().to_json())["population"] == 10


def test_trace_csv():
    obj = make_objective(OccupancyGrid.empty(10), 0, 12)
    res = optimize("pso", OptimizerConfig(), obj)
    lines = res.trace.to_csv().splitlines()
    assert lines[0] == "evaluation_index,best_fitness"
    assert len(lines) == 13 and lines[1].startswith("1,")
