"""
Monte Carlo estimates of random access stopping times.

Two samplers share one block runner: uniform column draws from an explicit generator
matrix, and the complete-graph collection model where each draw is an edge of K_k
(probability p each) or a vertex (probability P each). Trials are grouped in blocks;
block b draws from its own stream spawned from (seed, b), so any worker count gives
the same result.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from engines.codes import GeneratorMatrix, canonical_representative, echelon_basis, projective_classes
from engines.exact import ExpectationReport
from utils.calculations import RunningMoments
from utils.errors import GuardError, InputError
from utils.settings import get_settings

logger = logging.getLogger(__name__)

DRAW_CHUNK = 4096
CONSTRAINT_TOLERANCE = 1e-12


class GraphModelParams(BaseModel):
    """Per-edge probability p and per-vertex probability P with k*P + C(k,2)*p = 1."""

    model_config = ConfigDict(frozen=True)

    k: int
    p: float
    P: float

    @model_validator(mode="after")
    def _check_distribution(self):
        if self.k < 2:
            raise ValueError(f"k = {self.k} must be at least 2")
        if self.p < 0 or self.P < 0:
            raise ValueError("probabilities must be non-negative")
        total = self.k * self.P + math.comb(self.k, 2) * self.p
        if abs(total - 1) > CONSTRAINT_TOLERANCE:
            raise ValueError(f"k*P + C(k,2)*p = {total!r}, expected 1")
        return self

    @classmethod
    def from_ratio(cls, k, alpha):
        """Vertex-to-edge probability ratio alpha = P / p."""
        if alpha < 0:
            raise InputError(f"ratio {alpha} must be non-negative")
        p = 1 / (k * alpha + math.comb(k, 2))
        return cls(k=k, p=p, P=alpha * p)

    @classmethod
    def from_multiplicities(cls, k, x, y):
        """Draw probabilities of one edge and one vertex column in G_k(x, y)."""
        total = k * y + math.comb(k, 2) * x
        if total <= 0:
            raise InputError("G_k(x, y) has no columns")
        return cls(k=k, p=x / total, P=y / total)


class GraphState:
    """
    Union-find over vertices 1..k tracking the collected multiset of vertices and edges.

    Each component keeps its vertex count, the number of edge draws inside it, and
    whether one of its vertices was drawn.
    """

    def __init__(self, k):
        self.k = k
        self.parent = list(range(k + 1))
        self.vertex_count = [1] * (k + 1)
        self.edge_draws = [0] * (k + 1)
        self.has_vertex = [False] * (k + 1)
        self.rounds = 0

    def find(self, v):
        parent = self.parent
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    def add_vertex(self, v):
        self.rounds += 1
        self.has_vertex[self.find(v)] = True

    def add_edge(self, a, b):
        self.rounds += 1
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            self.edge_draws[ra] += 1
            return
        if self.vertex_count[ra] < self.vertex_count[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.vertex_count[ra] += self.vertex_count[rb]
        self.edge_draws[ra] += self.edge_draws[rb] + 1
        self.has_vertex[ra] = self.has_vertex[ra] or self.has_vertex[rb]


def graph_recoverable(state: GraphState, v: int) -> bool:
    """A component holds a cycle once a vertex was drawn or its edge draws reach its vertex count."""
    root = state.find(v)
    return state.has_vertex[root] or state.edge_draws[root] >= state.vertex_count[root]


def _block_rng(seed, block):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))


class _DrawBuffer:
    """Serves draws one at a time from chunks produced by a numpy sampler."""

    def __init__(self, sample):
        self.sample = sample
        self.values = []
        self.position = 0

    def next(self):
        if self.position == len(self.values):
            self.values = self.sample(DRAW_CHUNK)
            self.position = 0
        value = self.values[self.position]
        self.position += 1
        return value


def _matrix_block(G, targets, block, count, seed, cap):
    rng = _block_rng(seed, block)
    lookup = np.repeat(np.arange(len(G.columns)), [m for _, m in G.columns])
    class_ids = {rep: idx for idx, (rep, _) in enumerate(projective_classes(G))}
    class_of = [class_ids[canonical_representative(G.field, v)] for v, _ in G.columns]
    draws = _DrawBuffer(lambda size: lookup[rng.integers(0, len(lookup), size)].tolist())

    moments = [RunningMoments() for _ in targets]
    for _ in range(count):
        basis = echelon_basis(G.field, G.k)
        seen = set()
        pending = list(range(len(targets)))
        rounds = 0
        while pending:
            rounds += 1
            if rounds > cap:
                raise GuardError(f"trial exceeded the round cap {cap}")
            column = draws.next()
            cls = class_of[column]
            if cls in seen:
                continue
            seen.add(cls)
            if not basis.insert(G.columns[column][0]):
                continue
            still = []
            for t in pending:
                if basis.contains_unit(targets[t] - 1):
                    moments[t].add(rounds)
                else:
                    still.append(t)
            pending = still
    return [(m.count, m.total, m.total_sq) for m in moments]


def _graph_block(params, block, count, seed, cap):
    rng = _block_rng(seed, block)
    k = params.k
    items = [(a, b) for a in range(1, k + 1) for b in range(a + 1, k + 1)]
    items += [(v, 0) for v in range(1, k + 1)]
    probs = np.array([params.p] * (len(items) - k) + [params.P] * k)
    probs = probs / probs.sum()
    draws = _DrawBuffer(lambda size: rng.choice(len(items), size=size, p=probs).tolist())

    moments = RunningMoments()
    for _ in range(count):
        state = GraphState(k)
        while not graph_recoverable(state, 1):
            if state.rounds >= cap:
                raise GuardError(f"trial exceeded the round cap {cap}")
            a, b = items[draws.next()]
            if b:
                state.add_edge(a, b)
            else:
                state.add_vertex(a)
        moments.add(state.rounds)
    return [(moments.count, moments.total, moments.total_sq)]


def _run_blocks(kernel, args, trials, seed, cap):
    """Run `kernel(*args, block, count, seed, cap)` over all blocks and merge the moments."""
    if trials < 1:
        raise InputError(f"trials = {trials} must be positive")
    settings = get_settings()
    size = settings.block_size
    blocks = [(b, min(size, trials - b * size)) for b in range(math.ceil(trials / size))]
    workers = min(settings.threads, len(blocks))

    if workers > 1:
        logger.info("running %d trials in %d blocks on %d workers", trials, len(blocks), workers)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(kernel, *args, b, count, seed, cap) for b, count in blocks]
            results = [f.result() for f in futures]
    else:
        results = [kernel(*args, b, count, seed, cap) for b, count in blocks]

    merged = None
    for result in results:
        block_moments = [RunningMoments(*triple) for triple in result]
        if merged is None:
            merged = block_moments
        else:
            merged = [a.merge(b) for a, b in zip(merged, block_moments)]
    return merged


def _report(moments, trials):
    return ExpectationReport.build(
        [m.mean for m in moments],
        "monte_carlo",
        stderr=[m.stderr for m in moments],
        trials=trials,
    )


def _simulate_matrix(G, targets: Sequence[int], trials, seed):
    for i in targets:
        if not 1 <= i <= G.k:
            raise InputError(f"strand index {i} outside 1..{G.k}")
    seed = get_settings().seed if seed is None else seed
    cap = get_settings().round_cap_factor * G.k
    return _run_blocks(_matrix_block, (G, list(targets)), trials, seed, cap)


def mc_tau_matrix(G: GeneratorMatrix, i: int, trials: int, seed: int = None) -> ExpectationReport:
    """
    Mean number of uniform column draws until e_i is in the span.

    Args:
        G (GeneratorMatrix): Full-rank matrix
        i (int): Strand index, 1..k
        trials (int): Number of independent trials
        seed (int): Base seed, RA_SEED when omitted

    Returns:
        ExpectationReport: Single-strand estimate with its standard error
    """
    return _report(_simulate_matrix(G, [i], trials, seed), trials)


def mc_matrix_report(G: GeneratorMatrix, trials: int, seed: int = None) -> ExpectationReport:
    """All strands from shared draw sequences; each trial runs until the matrix is fully recovered."""
    return _report(_simulate_matrix(G, range(1, G.k + 1), trials, seed), trials)


def mc_tau_graph(params: GraphModelParams, trials: int, seed: int = None) -> ExpectationReport:
    """Mean number of graph-model draws until vertex 1 lies in a component with a cycle."""
    settings = get_settings()
    seed = settings.seed if seed is None else seed
    cap = settings.round_cap_factor * params.k
    moments = _run_blocks(_graph_block, (params,), trials, seed, cap)
    logger.debug("graph model k=%d p=%g P=%g: mean %.6f", params.k, params.p, params.P, moments[0].mean)
    return _report(moments, trials)
