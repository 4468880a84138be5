import math

import numpy as np
import pytest

from robustim.diffusion import (DiffusionScenario, ScenarioError, draw_delays, sample_dlt_live,
                                sample_realization, simulate_cascade)
from robustim.graph import Graph

from conftest import bfs, exact_dic_spread, exact_dlt_spread, random_graph, random_scenario


def test_scenario_validation():
    g = Graph.from_edges(2, [(0, 1, 1.5)])
    with pytest.raises(ScenarioError):
        DiffusionScenario("DIC", g)
    with pytest.raises(ScenarioError):
        DiffusionScenario("XYZ", g)
    with pytest.raises(ScenarioError):
        DiffusionScenario("CIC", g)
    with pytest.raises(ScenarioError):
        DiffusionScenario("CIC", g, window=1.0, delay_family="gamma")
    with pytest.raises(ScenarioError):
        DiffusionScenario("CIC", Graph.from_edges(2, [(0, 1, 0.0)]), window=1.0)
    with pytest.raises(ScenarioError):
        DiffusionScenario("DLT", Graph.from_edges(3, [(0, 2, 0.6), (1, 2, 0.6)]))
    assert DiffusionScenario("dic", Graph.from_edges(2, [(0, 1, 0.5)])).model == "DIC"


def test_dic_parallel_edges_merged_on_construction():
    s = DiffusionScenario("DIC", Graph.from_edges(2, [(0, 1, 0.5), (0, 1, 0.5)]))
    assert s.graph.edge_list() == [(0, 1, 0.75)]


def test_deterministic_dic_cascade_is_reachability(rng):
    g = random_graph(rng, 9, 14).with_params(np.ones(14))
    s = DiffusionScenario("DIC", g)
    arcs = [(u, v) for u, v, _ in g.edge_list()]
    for v in range(g.n):
        assert simulate_cascade(s, {v}, rng) == bfs(g.n, arcs, [v])


@pytest.mark.parametrize("model", ["DIC", "DLT", "CIC"])
def test_empty_seed_set(model, rng):
    s = random_scenario(rng, model, 5, 6)
    assert simulate_cascade(s, set(), rng) == set()
    assert sample_realization(s, rng).spread([]) == 0


def test_seed_out_of_range(rng):
    s = random_scenario(rng, "DIC", 4, 3)
    with pytest.raises(ScenarioError):
        simulate_cascade(s, {4}, rng)


def _cic_path(window):
    g = Graph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)])
    return DiffusionScenario("CIC", g, window=window)


@pytest.mark.parametrize("window", [1.0, 1e6])
def test_cic_path_matches_closed_form(window):
    # b is reached iff D1 <= T, c iff D1 + D2 <= T (a Gamma(2, 1) variable)
    s = _cic_path(window)
    p_b = 1.0 - math.exp(-window)
    p_c = 1.0 - math.exp(-window) * (1.0 + window)
    mean = 1.0 + p_b + p_c
    var = p_b * (1 - p_b) + p_c * (1 - p_c) + 2 * (p_c - p_b * p_c)
    rng = np.random.default_rng(7)
    runs = 10_000
    sizes = np.array([len(simulate_cascade(s, {0}, rng)) for _ in range(runs)])
    assert abs(sizes.mean() - mean) <= 3 * math.sqrt(var / runs) + 1e-12
    if window == 1e6:
        assert np.all(sizes == 3)


def test_degenerate_dic_realization(rng):
    g = Graph.from_edges(4, [(0, 1, 1.0), (1, 2, 0.0), (2, 3, 1.0), (3, 0, 0.0)])
    s = DiffusionScenario("DIC", g)
    for _ in range(20):
        assert sample_realization(s, rng).live.tolist() == [True, False, True, False]


def test_dlt_live_edge_frequencies():
    g = Graph.from_edges(3, [(0, 2, 0.3), (1, 2, 0.7)])
    s = DiffusionScenario("DLT", g)
    rng = np.random.default_rng(3)
    draws = 100_000
    picks = np.array([sample_dlt_live(s, rng) for _ in range(draws)])
    assert not np.any(picks.all(axis=1))
    for e, w in enumerate([0.3, 0.7]):
        freq = picks[:, e].mean()
        assert abs(freq - w) <= 3 * math.sqrt(w * (1 - w) / draws)


def test_dlt_leftover_weight_means_no_edge():
    g = Graph.from_edges(3, [(0, 2, 0.2), (1, 2, 0.3)])
    s = DiffusionScenario("DLT", g)
    rng = np.random.default_rng(4)
    draws = 50_000
    none = sum(not sample_dlt_live(s, rng).any() for _ in range(draws)) / draws
    assert abs(none - 0.5) <= 3 * math.sqrt(0.25 / draws)


def test_exponential_delay_mean():
    rng = np.random.default_rng(5)
    d = draw_delays("exponential", np.full(100_000, 2.0), rng)
    assert abs(d.mean() - 0.5) <= 3 * 0.5 / math.sqrt(d.size)
    assert np.all(np.isfinite(d))


def test_rayleigh_delay_mean():
    rng = np.random.default_rng(6)
    sigma = 1.5
    d = draw_delays("rayleigh", np.full(100_000, sigma), rng)
    mean = sigma * math.sqrt(math.pi / 2)
    sd = sigma * math.sqrt((4 - math.pi) / 2)
    assert abs(d.mean() - mean) <= 3 * sd / math.sqrt(d.size)


@pytest.mark.parametrize("model", ["DIC", "DLT", "CIC"])
def test_simulation_matches_realization_spread(model):
    # two independent estimators of the same expectation must agree within 3 sigma
    rng = np.random.default_rng({"DIC": 11, "DLT": 12, "CIC": 13}[model])
    s = random_scenario(rng, model, 6, 9)
    seeds = {0, 3}
    runs = 6000
    a = np.array([len(simulate_cascade(s, seeds, rng)) for _ in range(runs)])
    b = np.array([sample_realization(s, rng).spread(seeds) for _ in range(runs)])
    se = math.sqrt(a.var(ddof=1) / runs + b.var(ddof=1) / runs)
    assert abs(a.mean() - b.mean()) <= 3 * se + 1e-12


@pytest.mark.parametrize("model", ["DIC", "DLT"])
def test_simulation_matches_exact_expectation(model):
    rng = np.random.default_rng(21)
    s = random_scenario(rng, model, 5, 7)
    exact = (exact_dic_spread if model == "DIC" else exact_dlt_spread)(s.graph, [1])
    runs = 6000
    sizes = np.array([len(simulate_cascade(s, {1}, rng)) for _ in range(runs)])
    assert abs(sizes.mean() - exact) <= 3 * sizes.std(ddof=1) / math.sqrt(runs) + 1e-12
