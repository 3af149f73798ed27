"""Weighted MaxCut problem instances, exact oracle, and solution metrics.

Bit convention, used everywhere in this package: character ``i`` of an
assignment bitstring is vertex (= atom) ``i``; ``'1'`` puts the vertex in the
cut subset and corresponds to the atom being measured in the excited state,
i.e. a Z eigenvalue of -1.  For integer basis indices, bit ``i`` of the index
is vertex ``i`` (``index_to_bits`` / ``bits_to_index`` convert between the
two forms).
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, DomainError, InputError

BRUTE_FORCE_LIMIT = 24
# Relative tolerance for treating near-equal cut values as co-optimal,
# absorbing floating-point rounding of weight sums.
ORACLE_TIE_RTOL = 1e-12


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected graph with strictly positive edge weights.

    Edges are stored canonically as ``(i, j, w)`` with ``0 <= i < j < n``.
    """

    n_vertices: int
    edges: tuple[tuple[int, int, float], ...]

    def __post_init__(self):
        if self.n_vertices < 1:
            raise InputError("graph needs at least one vertex")
        edges = tuple((int(i), int(j), float(w)) for i, j, w in self.edges)
        object.__setattr__(self, "edges", edges)
        seen = set()
        for i, j, w in edges:
            if not 0 <= i < j < self.n_vertices:
                raise InputError(f"edge ({i},{j}) violates 0 <= i < j < n")
            if (i, j) in seen:
                raise InputError(f"duplicate edge ({i},{j})")
            seen.add((i, j))
            if not (math.isfinite(w) and w > 0):
                raise InputError(f"edge ({i},{j}) weight {w} must be positive and finite")

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def total_weight(self) -> float:
        return float(sum(w for _, _, w in self.edges))

    def weight_matrix(self) -> np.ndarray:
        """Symmetric (n, n) matrix of edge weights, zero elsewhere."""
        m = np.zeros((self.n_vertices, self.n_vertices))
        for i, j, w in self.edges:
            m[i, j] = m[j, i] = w
        return m

    def is_connected(self) -> bool:
        if self.n_vertices == 1:
            return True
        adj: dict[int, list[int]] = {v: [] for v in range(self.n_vertices)}
        for i, j, _ in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        seen = {0}
        stack = [0]
        while stack:
            for u in adj[stack.pop()]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        return len(seen) == self.n_vertices

    def to_dict(self) -> dict:
        return {"n": self.n_vertices, "edges": [[i, j, w] for i, j, w in self.edges]}

    @classmethod
    def from_dict(cls, data: dict) -> "WeightedGraph":
        """Load from the ``{"n": .., "edges": [[i, j, w], ..]}`` wire format.

        Endpoint order is normalized to i < j and edges are sorted, so any
        permutation of a valid edge list loads to the same graph.
        """
        try:
            n = int(data["n"])
            raw = data["edges"]
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed graph data: {exc}") from exc
        edges = []
        for entry in raw:
            i, j, w = entry
            i, j = int(i), int(j)
            if i == j:
                raise InputError(f"self-loop on vertex {i}")
            if i > j:
                i, j = j, i
            edges.append((i, j, float(w)))
        edges.sort(key=lambda e: (e[0], e[1]))
        return cls(n, tuple(edges))


@dataclass(frozen=True)
class OracleResult:
    """Exact MaxCut optimum: value, equivalent minimum cost, and all optima."""

    max_cut_value: float
    min_cost: float
    optimal_assignments: frozenset[str]


def index_to_bits(index: int, n: int) -> str:
    """Bitstring for a basis index; character i is vertex/atom i."""
    return format(index, f"0{n}b")[::-1]


def bits_to_index(bits: str) -> int:
    return int(bits[::-1], 2)


def _check_assignment(graph: WeightedGraph, bits: str) -> None:
    if len(bits) != graph.n_vertices:
        raise InputError(
            f"assignment length {len(bits)} does not match {graph.n_vertices} vertices"
        )
    if set(bits) - {"0", "1"}:
        raise InputError(f"assignment {bits!r} is not a bitstring")


def cut_value(graph: WeightedGraph, bits: str) -> float:
    """Total weight of edges whose endpoints fall in different subsets."""
    _check_assignment(graph, bits)
    return float(sum(w for i, j, w in graph.edges if bits[i] != bits[j]))


def cost_value(graph: WeightedGraph, bits: str) -> float:
    """Ising cost sum(w_ij * s_i * s_j) with s = +1 for bit 0, -1 for bit 1.

    Equals total_weight - 2 * cut_value up to floating-point rounding.
    """
    _check_assignment(graph, bits)
    total = 0.0
    for i, j, w in graph.edges:
        total += w if bits[i] == bits[j] else -w
    return total


def cut_vector(graph: WeightedGraph, indices: np.ndarray | None = None) -> np.ndarray:
    """Cut values for basis indices (all 2^n by default), vectorized."""
    n = graph.n_vertices
    if indices is None:
        if n > BRUTE_FORCE_LIMIT:
            raise CapacityError(f"refusing to enumerate 2^{n} assignments")
        indices = np.arange(1 << n, dtype=np.int64)
    cuts = np.zeros(indices.shape, dtype=np.float64)
    for i, j, w in graph.edges:
        differ = ((indices >> i) ^ (indices >> j)) & 1
        cuts += w * differ
    return cuts


def cost_vector(graph: WeightedGraph) -> np.ndarray:
    """Ising cost of every basis index; used for exact expectation values."""
    n = graph.n_vertices
    if n > BRUTE_FORCE_LIMIT:
        raise CapacityError(f"refusing to enumerate 2^{n} assignments")
    indices = np.arange(1 << n, dtype=np.int64)
    costs = np.zeros(indices.shape, dtype=np.float64)
    for i, j, w in graph.edges:
        same = 1.0 - 2.0 * (((indices >> i) ^ (indices >> j)) & 1)
        costs += w * same
    return costs


def brute_force_maxcut(graph: WeightedGraph) -> OracleResult:
    """Enumerate all assignments and return the exact maximum cut.

    Enumerates half the space (the cut is invariant under flipping every
    bit) and mirrors the optima, so the result is always complement-closed.
    """
    n = graph.n_vertices
    if n > BRUTE_FORCE_LIMIT:
        raise CapacityError(f"n={n} exceeds brute-force limit {BRUTE_FORCE_LIMIT}")
    # Fix the top vertex to subset 0; complements supply the other half.
    half = np.arange(1 << max(n - 1, 0), dtype=np.int64)
    cuts = cut_vector(graph, half)
    best = float(cuts.max())
    tol = ORACLE_TIE_RTOL * max(1.0, abs(best))
    winners = np.nonzero(cuts >= best - tol)[0]
    full_mask = (1 << n) - 1
    optimal = set()
    for idx in winners:
        optimal.add(index_to_bits(int(idx), n))
        optimal.add(index_to_bits(int(idx) ^ full_mask, n))
    return OracleResult(
        max_cut_value=best,
        min_cost=graph.total_weight - 2.0 * best,
        optimal_assignments=frozenset(optimal),
    )


def gen_erdos_renyi(
    n: int, p: float, w_low: float, w_high: float, seed: int
) -> WeightedGraph:
    """Erdos-Renyi G(n, p) with edge weights drawn uniformly from [w_low, w_high].

    Each unordered pair is included independently with probability p; weights
    are redrawn in the zero-probability event of a non-positive draw, so all
    weights are strictly positive.  Deterministic for a given seed.
    """
    if n < 2:
        raise InputError("need n >= 2")
    if not 0.0 <= p <= 1.0:
        raise InputError(f"edge probability {p} outside [0, 1]")
    if w_high < w_low or w_high <= 0:
        raise InputError(f"invalid weight range [{w_low}, {w_high}]")
    rng = np.random.default_rng(seed)
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                w = rng.uniform(w_low, w_high)
                while w <= 0.0:
                    w = rng.uniform(w_low, w_high)
                edges.append((i, j, float(w)))
    return WeightedGraph(n, tuple(edges))


def ground_state_probability(
    distribution: Mapping[str, float], oracle: OracleResult
) -> float:
    """Probability mass on maximum-cut bitstrings.

    Accepts an exact distribution or a shot histogram; values are normalized
    by their total either way.
    """
    n = len(next(iter(oracle.optimal_assignments)))
    total = 0.0
    hit = 0.0
    for bits, value in distribution.items():
        if len(bits) != n:
            raise InputError(f"bitstring {bits!r} has length {len(bits)}, expected {n}")
        if value < 0:
            raise InputError(f"negative probability/count for {bits!r}")
        total += value
        if bits in oracle.optimal_assignments:
            hit += value
    if total <= 0:
        raise InputError("distribution has no mass")
    return hit / total


def step_to_solution(p_gs: float) -> float:
    """Expected repetitions to observe a maximum cut with 99% certainty."""
    if p_gs < 0.0 or p_gs > 1.0:
        raise InputError(f"probability {p_gs} outside [0, 1]")
    if p_gs == 0.0:
        return math.inf
    if p_gs == 1.0:
        raise DomainError("step count is singular at p_gs = 1")
    return math.log(0.01) / math.log1p(-p_gs)
