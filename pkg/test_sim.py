"""
Tests for the Monte Carlo samplers: union-find bookkeeping, agreement with exact values
within a few standard errors, and reproducibility across worker counts.
"""

import sys
import os
import math
import random

sys.path.append(os.path.dirname(os.path.abspath(__file__)))

import pytest

from engines.asym import k3_exact, ratio_bound
from backend.cli import main as cli_main
from engines.codes import GeneratorMatrix, identity_matrix, span_contains, unit_vector
from engines.construct import build_gk, construction_for
from engines.exact import closed_form_expectation
from engines.sim import (
    GraphModelParams,
    GraphState,
    graph_recoverable,
    mc_matrix_report,
    mc_tau_graph,
    mc_tau_matrix,
)
from utils.errors import GuardError, InputError
from utils.gf import build_field
from utils.settings import get_settings

ALPHA_STAR_K3 = 0.833968


def within(report, expected, strand=0, z=4.0):
    mean, stderr = report.per_strand[strand], report.stderr[strand]
    assert stderr > 0
    assert abs(mean - expected) <= z * stderr, f"{mean} vs {expected} (stderr {stderr})"


@pytest.fixture
def env(monkeypatch):
    """Set RA_* variables for one test and re-read settings on both sides."""

    def apply(**values):
        for key, value in values.items():
            monkeypatch.setenv(key, str(value))
        get_settings(refresh=True)

    yield apply
    monkeypatch.undo()
    get_settings(refresh=True)


def test_graph_state_repeated_edge_closes_a_cycle():
    state = GraphState(3)
    state.add_edge(1, 2)
    assert not graph_recoverable(state, 1)
    state.add_edge(1, 2)
    assert graph_recoverable(state, 1)
    assert graph_recoverable(state, 2)
    assert not graph_recoverable(state, 3)
    assert state.rounds == 2


def test_graph_state_vertex_and_triangle():
    state = GraphState(4)
    state.add_edge(1, 2)
    state.add_vertex(3)
    assert not graph_recoverable(state, 1)
    assert graph_recoverable(state, 3)
    state.add_edge(2, 3)
    assert graph_recoverable(state, 1)

    state = GraphState(3)
    state.add_edge(1, 2)
    state.add_edge(2, 3)
    assert not graph_recoverable(state, 1)
    state.add_edge(1, 3)
    assert graph_recoverable(state, 1)
    assert state.find(1) == state.find(3)


def test_graph_params_validation():
    params = GraphModelParams.from_multiplicities(3, 2, 1)
    assert abs(params.p - 2 / 9) < 1e-15 and abs(params.P - 1 / 9) < 1e-15
    params = GraphModelParams.from_ratio(4, 0.5)
    assert abs(4 * params.P + 6 * params.p - 1) < 1e-12
    with pytest.raises(ValueError):
        GraphModelParams(k=3, p=0.2, P=0.2)
    with pytest.raises(ValueError):
        GraphModelParams(k=1, p=0.0, P=1.0)
    with pytest.raises(InputError):
        GraphModelParams.from_ratio(3, -1)


def test_identity_matrix_mean_is_k():
    report = mc_tau_matrix(identity_matrix(build_field(2, 1), 2), 1, 20_000, seed=1)
    assert report.method == "monte_carlo"
    assert report.trials == 20_000
    within(report, 2.0)


def test_example_1_all_strands():
    fs = build_field(2, 1)
    G = GeneratorMatrix.from_columns(fs, 2, [(1, 0), (0, 1), (1, 0), (0, 1), (1, 1)])
    report = mc_matrix_report(G, 20_000, seed=2)
    assert len(report.per_strand) == 2
    within(report, 23 / 12, strand=0)
    within(report, 23 / 12, strand=1)
    within(mc_tau_matrix(G, 2, 20_000, seed=3), 23 / 12)


def test_construction_matches_finite_closed_form():
    G = build_gk(construction_for(3, 2, 2))
    within(mc_tau_matrix(G, 1, 20_000, seed=4), closed_form_expectation(3, 2, 2))


def test_graph_model_vertices_only():
    report = mc_tau_graph(GraphModelParams(k=2, p=0.0, P=0.5), 20_000, seed=5)
    within(report, 2.0)


def test_graph_model_k3_at_optimal_ratio():
    params = GraphModelParams.from_ratio(3, ALPHA_STAR_K3)
    report = mc_tau_graph(params, 200_000, seed=6)
    within(report, k3_exact(ALPHA_STAR_K3))
    assert abs(k3_exact(ALPHA_STAR_K3) - 2.644626) < 1e-5


@pytest.mark.parametrize("k", [2, 3, 4, 5, 6, 7, 8])
def test_graph_model_stays_below_bound(k):
    for alpha in (0.25, 0.8, 2.0):
        bound = ratio_bound(k, alpha)
        params = GraphModelParams(k=k, p=bound.p, P=bound.P)
        report = mc_tau_graph(params, 10_000, seed=100 + k)
        assert report.per_strand[0] <= bound.total + 4 * report.stderr[0]


def test_results_do_not_depend_on_worker_count(env):
    params = GraphModelParams.from_ratio(4, 1.0)
    env(RA_THREADS=1, RA_BLOCK_SIZE=1000)
    serial = mc_tau_graph(params, 5_000, seed=9)
    env(RA_THREADS=3, RA_BLOCK_SIZE=1000)
    parallel = mc_tau_graph(params, 5_000, seed=9)
    assert serial.per_strand == parallel.per_strand
    assert serial.stderr == parallel.stderr
    assert mc_tau_graph(params, 5_000, seed=10).per_strand != serial.per_strand


def test_default_seed_comes_from_settings(env):
    G = identity_matrix(build_field(2, 1), 3)
    env(RA_SEED=42, RA_THREADS=1)
    assert mc_tau_matrix(G, 2, 500).per_strand == mc_tau_matrix(G, 2, 500, seed=42).per_strand


def test_round_cap(env):
    env(RA_ROUND_CAP_FACTOR=1, RA_THREADS=1)
    with pytest.raises(GuardError):
        mc_tau_matrix(identity_matrix(build_field(2, 1), 2), 1, 1_000, seed=1)
    with pytest.raises(GuardError):
        mc_tau_graph(GraphModelParams(k=2, p=0.0, P=0.5), 1_000, seed=1)


def test_bad_arguments():
    G = identity_matrix(build_field(2, 1), 2)
    with pytest.raises(InputError):
        mc_tau_matrix(G, 3, 10)
    with pytest.raises(InputError):
        mc_tau_matrix(G, 1, 0)


def test_malformed_settings_are_input_errors(env, monkeypatch):
    previous = get_settings()
    with pytest.raises(InputError):
        env(RA_THREADS="four")
    assert get_settings() is previous
    monkeypatch.setenv("RA_THREADS", "0")
    with pytest.raises(InputError):
        get_settings(refresh=True)


def test_cli_exits_2_on_malformed_setting(monkeypatch, capsys):
    monkeypatch.setenv("RA_BLOCK_SIZE", "lots")
    monkeypatch.setattr("utils.settings._settings", None)
    assert cli_main(["asymptotic", "--k", "4", "--alpha", "0.95"]) == 2
    assert "RA_BLOCK_SIZE" in capsys.readouterr().err


def _collect(state, column):
    support = [c + 1 for c, value in enumerate(column) if value]
    if len(support) == 1:
        state.add_vertex(support[0])
    else:
        state.add_edge(*support)


@pytest.mark.parametrize("k,x,y", [(3, 2, 2), (4, 1, 1)])
def test_cycle_criterion_matches_span_membership(k, x, y):
    G = build_gk(construction_for(k, x, y))
    columns = G.expanded_columns()
    target = unit_vector(k, 0)
    rng = random.Random(10 * k + x)
    for _ in range(300):
        state = GraphState(k)
        drawn = []
        recovered = False
        for index in rng.sample(range(G.n), G.n):
            drawn.append(columns[index])
            _collect(state, columns[index])
            now = graph_recoverable(state, 1)
            assert now == span_contains(G.field, drawn, target), drawn
            assert now or not recovered
            recovered = now
        assert recovered


def test_recoverability_never_reverts():
    rng = random.Random(4)
    for _ in range(200):
        state = GraphState(6)
        seen = set()
        for _ in range(12):
            if rng.random() < 0.2:
                state.add_vertex(rng.randrange(1, 7))
            else:
                a, b = rng.sample(range(1, 7), 2)
                state.add_edge(a, b)
            now = {v for v in range(1, 7) if graph_recoverable(state, v)}
            assert seen <= now
            seen = now


def test_large_construction_matches_graph_model():
    x, y = 200, 167
    G = build_gk(construction_for(3, x, y))
    assert G.n == 3 * x + 3 * y
    matrix = mc_tau_matrix(G, 1, 10_000, seed=11)
    graph = mc_tau_graph(GraphModelParams.from_multiplicities(3, x, y), 10_000, seed=12)
    assert abs(matrix.per_strand[0] - graph.per_strand[0]) < 0.02 * graph.per_strand[0]


def test_stderr_shrinks_with_root_trials():
    # Waiting time for a vertex drawn with probability 1/2 has variance 2
    params = GraphModelParams(k=2, p=0.0, P=0.5)
    small = mc_tau_graph(params, 4_000, seed=21)
    large = mc_tau_graph(params, 16_000, seed=22)
    for report in (small, large):
        assert abs(report.stderr[0] * math.sqrt(report.trials) - math.sqrt(2)) < 0.15 * math.sqrt(2)
    assert 1.7 < small.stderr[0] / large.stderr[0] < 2.3
