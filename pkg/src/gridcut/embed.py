"""Force-directed embedding of problem graphs into the 2-D atom plane.

Implements the classic Fruchterman-Reingold relaxation and a variant whose
repulsion mimics the r^-6 interaction falloff and whose pair coupling k_ij
is derived from triangle (3-clique) membership.  Heavier problem edges pull
their endpoints closer: the attractive force is scaled by w_ij / max(w).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import CapacityError, InputError
from .graph import WeightedGraph
from .rydsim import Layout, PulseSchedule, SimConfig, StateVector, evolve, expectation_cost

VARIANTS = ("classic", "rydberg")


@dataclass(frozen=True)
class EmbedParams:
    """Knobs of the relaxation; area sets the natural pair distance k."""

    box: tuple[float, float] = (75.0, 76.0)
    iterations: int = 60
    initial_temperature: float | None = None  # defaults to max(box)/10
    rho: float = 0.5
    k_scale: float | None = None  # defaults to sqrt(area / n)
    min_spacing: float = 4.0
    seed: int = 0
    variant: str = "rydberg"

    def __post_init__(self):
        if self.iterations < 1:
            raise InputError("need at least one iteration")
        if self.min_spacing <= 0:
            raise InputError("min_spacing must be positive")
        if min(self.box) < self.min_spacing:
            raise InputError("bounding box smaller than min_spacing")
        if self.variant not in VARIANTS:
            raise InputError(f"variant must be one of {VARIANTS}")

    @property
    def area(self) -> float:
        return self.box[0] * self.box[1]

    def temperature(self) -> float:
        if self.initial_temperature is not None:
            return self.initial_temperature
        return max(self.box) / 10.0

    def coupling_scale(self, n_vertices: int) -> float:
        if self.k_scale is not None:
            return self.k_scale
        return math.sqrt(self.area / n_vertices)


def fr_forces(
    d: float, k: float, variant: str = "classic", d_floor: float = 0.4
) -> tuple[float, float]:
    """(repulsive, attractive) force magnitudes at pair distance d.

    Classic: (-k^2/d, d^2/k).  Modified: (-k^6/d^6, d^2/k), matching the
    interaction falloff.  d = 0 is regularized by clamping d to d_floor
    (one tenth of the default minimum spacing).
    """
    if k <= 0:
        raise InputError("k must be positive")
    if variant not in VARIANTS:
        raise InputError(f"variant must be one of {VARIANTS}")
    d = max(d, d_floor)
    if variant == "classic":
        return -(k * k) / d, (d * d) / k
    return -((k / d) ** 6), (d * d) / k


def clique_coupling(graph: WeightedGraph, rho: float, k_scale: float) -> np.ndarray:
    """Pair couplings k_ij = (T_ij / N_tri)^rho * k_scale from triangle counts.

    T_ij counts triangles containing both i and j.  Pairs in no triangle
    (including every pair of a triangle-free graph) get the neutral k_scale.
    """
    if not math.isfinite(rho):
        raise InputError("rho must be finite")
    n = graph.n_vertices
    adj = np.zeros((n, n), dtype=bool)
    for i, j, _ in graph.edges:
        adj[i, j] = adj[j, i] = True
    # T_ij = common neighbours of an edge pair; zero for non-edges since a
    # triangle containing both i and j must contain the (i, j) edge.
    common = (adj.astype(np.int64) @ adj.astype(np.int64)) * adj
    n_triangles = int(np.triu(common, 1).sum()) // 3
    k = np.full((n, n), float(k_scale))
    if n_triangles > 0:
        hit = common > 0
        k[hit] = (common[hit] / n_triangles) ** rho * k_scale
    np.fill_diagonal(k, float(k_scale))
    return k


def fr_layout(graph: WeightedGraph, params: EmbedParams) -> Layout:
    """Relax the graph into atom positions; deterministic for a given seed.

    Runs the selected force variant with a linearly decaying displacement cap,
    clamps into the bounding box, then repairs any min-spacing violations by
    pushing offending pairs apart (at most 100 passes).
    """
    n = graph.n_vertices
    w, h = params.box
    rng = np.random.default_rng(params.seed)
    pos = rng.random((n, 2)) * np.array([w, h])
    if n == 1:
        return Layout(((float(pos[0, 0]), float(pos[0, 1])),),
                      min_spacing=params.min_spacing, box=params.box)

    k_scale = params.coupling_scale(n)
    if params.variant == "rydberg":
        k = clique_coupling(graph, params.rho, k_scale)
    else:
        k = np.full((n, n), k_scale)
    np.fill_diagonal(k, 1.0)  # unused; avoids 0/0 on the diagonal

    wmat = graph.weight_matrix()
    max_w = wmat.max() if graph.edges else 1.0
    attract_scale = wmat / max_w  # zero for non-edges
    d_floor = params.min_spacing / 10.0

    t0 = params.temperature()
    for it in range(params.iterations):
        temp = t0 * (1.0 - it / params.iterations)
        diff = pos[:, None, :] - pos[None, :, :]
        dist = np.sqrt((diff**2).sum(axis=-1))
        np.fill_diagonal(dist, 1.0)
        dist = np.maximum(dist, d_floor)
        unit = diff / dist[:, :, None]
        if params.variant == "rydberg":
            rep = (k / dist) ** 6
        else:
            rep = k**2 / dist
        att = attract_scale * dist**2 / k
        np.fill_diagonal(rep, 0.0)
        np.fill_diagonal(att, 0.0)
        disp = ((rep - att)[:, :, None] * unit).sum(axis=1)
        length = np.maximum(np.sqrt((disp**2).sum(axis=1)), 1e-12)
        step = np.minimum(length, temp)
        pos = pos + disp / length[:, None] * step[:, None]
        pos[:, 0] = np.clip(pos[:, 0], 0.0, w)
        pos[:, 1] = np.clip(pos[:, 1], 0.0, h)

    pos = _repair_spacing(pos, params, rng)
    return Layout(
        tuple((float(x), float(y)) for x, y in pos),
        min_spacing=params.min_spacing,
        box=params.box,
    )


def _repair_spacing(pos: np.ndarray, params: EmbedParams, rng: np.random.Generator) -> np.ndarray:
    """Push pairs apart until every distance reaches min_spacing."""
    n = pos.shape[0]
    w, h = params.box
    spacing = params.min_spacing
    target = spacing * (1.0 + 1e-6)
    for _ in range(100):
        diff = pos[:, None, :] - pos[None, :, :]
        dist = np.sqrt((diff**2).sum(axis=-1))
        iu = np.triu_indices(n, k=1)
        bad = dist[iu] < spacing
        if not bad.any():
            return pos
        for a, b in zip(iu[0][bad], iu[1][bad]):
            delta = pos[a] - pos[b]
            d = float(np.hypot(*delta))
            if d < 1e-9:
                angle = rng.random() * 2.0 * math.pi
                delta = np.array([math.cos(angle), math.sin(angle)])
                d = 1.0
            push = 0.5 * (target - d)
            pos[a] += delta / d * push
            pos[b] -= delta / d * push
        pos[:, 0] = np.clip(pos[:, 0], 0.0, w)
        pos[:, 1] = np.clip(pos[:, 1], 0.0, h)
    raise CapacityError(
        f"could not satisfy {spacing} um spacing for {n} atoms in a "
        f"{w} x {h} um box"
    )


def select_register(
    graph: WeightedGraph,
    n_layouts: int,
    default_pulse: PulseSchedule,
    sim_config: SimConfig = SimConfig(),
    embed_params: EmbedParams = EmbedParams(),
) -> tuple[Layout, list[float]]:
    """Generate candidate layouts and keep the one with the lowest cost.

    Each candidate comes from fr_layout with a distinct seed and is scored by
    the exact expected problem cost after evolving the all-ground state under
    the supplied default pulse.  Ties break toward the lowest seed index.
    """
    if n_layouts < 1:
        raise InputError("need at least one candidate layout")
    best_layout = None
    best_cost = math.inf
    costs: list[float] = []
    for i in range(n_layouts):
        layout = fr_layout(graph, replace(embed_params, seed=embed_params.seed + i))
        state = evolve(
            StateVector.zero_state(graph.n_vertices),
            layout,
            default_pulse,
            dt=sim_config.dt,
            constants=sim_config.constants,
        )
        cost = expectation_cost(state, graph)
        costs.append(cost)
        if cost < best_cost:
            best_cost = cost
            best_layout = layout
    return best_layout, costs
