"""QAOA on the Rydberg simulator with per-atom detuning cancellation.

Setting each atom's detuning to twice the sum of its pair couplings cancels
every linear Z term, leaving a pure ZZ cost Hamiltonian (plus drive).  One
layer is: evolve the diagonal cost Hamiltonian for gamma_k (an exact phase),
then the mixer (drive on, interactions still on) for beta_k.  An ideal
circuit-model baseline with exact phase separator and X mixer shares the
optimization harness.

Frequencies here (omega_prep = 5*pi, omega_mixer = 2, couplings ~0.45 at
12 um) are read as rad/us: 5*pi rad/us respects the 15.8 rad/us hardware
amplitude cap and the 12-um coupling only matches the quoted value in
angular units.  Set assume_mhz=True in QaoaHardwareConfig to study the
other reading.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .graph import WeightedGraph, bits_to_index, brute_force_maxcut, cost_vector
from .optimize import OptimizerConfig, OptimizeResult, fd_steps, minimize
from .rydsim import (
    ConstantDrivePropagator,
    Layout,
    PhysicsConstants,
    SimConfig,
    StateVector,
    diagonal_tables,
    interaction_weights,
)

T_LAYER_CAP = 4.0  # us, per-layer evolution-time bound


@dataclass(frozen=True)
class QaoaHardwareConfig:
    omega_prep: float = 5.0 * math.pi
    omega_mixer: float = 2.0
    phi_prep: float = -0.5 * math.pi
    alpha: float = 12.0  # lattice spacing, um
    assume_mhz: bool = False  # reinterpret the frequencies as true MHz

    def _scale(self) -> float:
        return 2.0 * math.pi if self.assume_mhz else 1.0

    @property
    def omega_prep_rad(self) -> float:
        return self.omega_prep * self._scale()

    @property
    def omega_mixer_rad(self) -> float:
        return self.omega_mixer * self._scale()

    @property
    def t_prep(self) -> float:
        return math.pi / (2.0 * self.omega_prep_rad)


@dataclass(frozen=True)
class QaoaParams:
    gammas: tuple[float, ...]
    betas: tuple[float, ...]

    def __post_init__(self):
        gammas = tuple(float(g) for g in self.gammas)
        betas = tuple(float(b) for b in self.betas)
        object.__setattr__(self, "gammas", gammas)
        object.__setattr__(self, "betas", betas)
        if len(gammas) != len(betas):
            raise InputError("need one beta per gamma")
        for v in gammas + betas:
            if not (0.0 <= v <= T_LAYER_CAP):
                raise InputError(f"evolution time {v} outside [0, {T_LAYER_CAP}] us")

    @property
    def layers(self) -> int:
        return len(self.gammas)

    @classmethod
    def from_array(cls, x: np.ndarray) -> "QaoaParams":
        p = x.size // 2
        return cls(tuple(x[:p]), tuple(x[p:]))

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.gammas, self.betas])


def local_detunings(weights: np.ndarray) -> np.ndarray:
    """Per-atom detunings Delta_i = 2 sum_j w_ij cancelling all linear Z terms."""
    w = np.asarray(weights, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise InputError("need a square coupling matrix")
    return 2.0 * (w.sum(axis=1) - np.diag(w))


def prepare_plus(
    layout: Layout,
    cfg: QaoaHardwareConfig = QaoaHardwareConfig(),
    sim_config: SimConfig = SimConfig(),
    method: str = "auto",
) -> StateVector:
    """Rotate the all-ground register to (approximately) the plus state.

    Evolves under the full Hamiltonian with the drive at omega_prep along
    phi_prep and the cancelling local detunings on, for t = pi/(2 omega_prep).
    Exact up to the residual ZZ couplings, which are tiny against the drive
    at lattice-scale spacings.
    """
    w = interaction_weights(layout, sim_config.constants)
    static, _ = diagonal_tables(layout, sim_config.constants, local_detunings(w))
    prop = ConstantDrivePropagator(static, cfg.omega_prep_rad, cfg.phi_prep, method)
    amps = prop.apply(StateVector.zero_state(layout.n_atoms).amplitudes, cfg.t_prep)
    return StateVector(layout.n_atoms, amps)


def apply_qaoa_layers(
    state: StateVector,
    layout: Layout,
    weights: np.ndarray,
    params: QaoaParams,
    cfg: QaoaHardwareConfig = QaoaHardwareConfig(),
    sim_config: SimConfig = SimConfig(),
    method: str = "auto",
) -> StateVector:
    """Alternate cost (exact diagonal phase) and mixer evolution p times."""
    static, _ = diagonal_tables(layout, sim_config.constants, local_detunings(weights))
    mixer = ConstantDrivePropagator(static, cfg.omega_mixer_rad, 0.0, method)
    amps = state.amplitudes.copy()
    for gamma, beta in zip(params.gammas, params.betas):
        if gamma != 0.0:
            amps = np.exp(-1j * gamma * static) * amps
        if beta != 0.0:
            amps = mixer.apply(amps, beta)
    return StateVector(state.n_qubits, amps)


def qaoa_objective(
    graph: WeightedGraph,
    layout: Layout,
    params: QaoaParams,
    cfg: QaoaHardwareConfig = QaoaHardwareConfig(),
    sim_config: SimConfig = SimConfig(),
    method: str = "auto",
) -> float:
    """Expected problem cost (graph edges only) of the p-layer QAOA state."""
    if graph.n_vertices != layout.n_atoms:
        raise InputError("graph size does not match layout")
    state = prepare_plus(layout, cfg, sim_config, method)
    state = apply_qaoa_layers(
        state, layout, interaction_weights(layout, sim_config.constants),
        params, cfg, sim_config, method,
    )
    probs = np.abs(state.amplitudes) ** 2
    return float(probs @ cost_vector(graph))


class _Engine:
    """Caches propagators and prefix states for fast repeated evaluation.

    Subclasses provide the prepared state, the cost-separator diagonal, and
    a mixer propagator; the finite-difference gradient reuses shared layer
    prefixes and propagates all perturbed trajectories as one batch, which
    reproduces the plain central-difference values.
    """

    psi0: np.ndarray
    separator_diag: np.ndarray
    cost_vec: np.ndarray

    def mixer_apply(self, amps: np.ndarray, beta: float) -> np.ndarray:
        raise NotImplementedError

    def _phase(self, gamma: float) -> np.ndarray:
        return np.exp(-1j * gamma * self.separator_diag)

    def final_state(self, x: np.ndarray) -> np.ndarray:
        p = x.size // 2
        amps = self.psi0.copy()
        for k in range(p):
            amps = self._phase(x[k]) * amps
            amps = self.mixer_apply(amps, x[p + k])
        return amps

    def objective(self, x: np.ndarray) -> float:
        amps = self.final_state(x)
        return float((np.abs(amps) ** 2) @ self.cost_vec)

    def gradient(self, x: np.ndarray, fd_step: float) -> np.ndarray:
        p = x.size // 2
        h = fd_steps(x, fd_step)
        prefixes = [self.psi0]
        amps = self.psi0
        for k in range(p):
            amps = self.mixer_apply(self._phase(x[k]) * amps, x[p + k])
            prefixes.append(amps)

        batch: np.ndarray | None = None
        order: list[tuple[int, int]] = []  # (param index, sign)
        for k in range(p):
            base = prefixes[k]
            gamma, beta = x[k], x[p + k]
            plus = self._phase(gamma + h[k]) * base
            minus = self._phase(gamma - h[k]) * base
            gamma_pair = self.mixer_apply(np.column_stack([plus, minus]), beta)
            shifted = self._phase(gamma) * base
            beta_plus = self.mixer_apply(shifted, beta + h[p + k])
            beta_minus = self.mixer_apply(shifted, beta - h[p + k])
            fresh = np.column_stack([gamma_pair, beta_plus, beta_minus])
            if batch is not None:
                batch = self.mixer_apply(self._phase(gamma)[:, None] * batch, beta)
                batch = np.column_stack([batch, fresh])
            else:
                batch = fresh
            order += [(k, +1), (k, -1), (p + k, +1), (p + k, -1)]

        values = (np.abs(batch) ** 2).T @ self.cost_vec
        grad = np.zeros_like(x)
        for (idx, sign), val in zip(order, values):
            grad[idx] += sign * val
        return grad / (2.0 * h)


class LocalDetuningEngine(_Engine):
    def __init__(
        self,
        graph: WeightedGraph,
        layout: Layout,
        cfg: QaoaHardwareConfig,
        sim_config: SimConfig,
        method: str = "auto",
    ):
        if graph.n_vertices != layout.n_atoms:
            raise InputError("graph size does not match layout")
        w = interaction_weights(layout, sim_config.constants)
        static, _ = diagonal_tables(layout, sim_config.constants, local_detunings(w))
        self.separator_diag = static
        self.cost_vec = cost_vector(graph)
        self._mixer = ConstantDrivePropagator(static, cfg.omega_mixer_rad, 0.0, method)
        prep = ConstantDrivePropagator(static, cfg.omega_prep_rad, cfg.phi_prep, method)
        self.psi0 = prep.apply(StateVector.zero_state(layout.n_atoms).amplitudes, cfg.t_prep)

    def mixer_apply(self, amps: np.ndarray, beta: float) -> np.ndarray:
        return self._mixer.apply(amps, beta)


class VanillaEngine(_Engine):
    """Ideal circuit model: exact |+>^n, exact e^{-i gamma C}, exact X mixer."""

    def __init__(self, graph: WeightedGraph):
        self.cost_vec = cost_vector(graph)
        self.separator_diag = self.cost_vec
        self.n = graph.n_vertices
        self.psi0 = StateVector.plus_state(self.n).amplitudes

    def mixer_apply(self, amps: np.ndarray, beta: float) -> np.ndarray:
        # exp(-i beta sum_k X_k) is a product of identical one-qubit rotations
        c, s = math.cos(beta), -1j * math.sin(beta)
        out = amps.astype(np.complex128, copy=True)
        v = out[:, None] if out.ndim == 1 else out
        for k in range(self.n):
            m = v.reshape(-1, 2, 1 << k, v.shape[1])
            top = m[:, 0].copy()
            m[:, 0] = c * top + s * m[:, 1]
            m[:, 1] = s * top + c * m[:, 1]
        return out


@dataclass
class SeedOutcome:
    seed: int
    cost: float
    p_gs: float
    converged: bool
    failed: bool
    steps: int
    gammas: list[float]
    betas: list[float]

    def to_dict(self) -> dict:
        return dict(vars(self))


@dataclass
class QaoaReport:
    variant: str
    layers: int
    n_seeds: int
    outcomes: list[SeedOutcome]
    mean_p_gs: float
    best_p_gs: float
    best_seed: int
    n_failed: int
    max_cut_value: float
    optimal_assignments: list[str]
    config: dict

    def to_dict(self) -> dict:
        d = dict(vars(self))
        d["outcomes"] = [o.to_dict() for o in self.outcomes]
        return d


def _run_seeds(
    engine: _Engine,
    oracle,
    p: int,
    n_seeds: int,
    opt: OptimizerConfig,
    base_seed: int,
    variant: str,
    config: dict,
) -> QaoaReport:
    bounds = [(0.0, T_LAYER_CAP)] * (2 * p)
    outcomes = []
    for s in range(n_seeds):
        rng = np.random.default_rng(base_seed + s)
        x0 = rng.uniform(0.0, 1.0, 2 * p)
        result: OptimizeResult = minimize(
            engine.objective,
            x0,
            bounds,
            opt,
            gradient=lambda x: engine.gradient(x, opt.fd_step),
            on_nonfinite="fail",
        )
        if result.failed:
            outcomes.append(
                SeedOutcome(s, math.inf, 0.0, False, True, result.n_steps, [], [])
            )
            continue
        amps = engine.final_state(result.x)
        optimal_idx = [bits_to_index(b) for b in oracle.optimal_assignments]
        p_gs = float(sum(abs(amps[i]) ** 2 for i in optimal_idx))
        outcomes.append(
            SeedOutcome(
                seed=s,
                cost=float(result.fun),
                p_gs=float(p_gs),
                converged=result.converged,
                failed=False,
                steps=result.n_steps,
                gammas=[float(v) for v in result.x[:p]],
                betas=[float(v) for v in result.x[p:]],
            )
        )
    ok = [o for o in outcomes if not o.failed]
    if not ok:
        raise InputError("every seed failed with a non-finite objective")
    mean_p = float(np.mean([o.p_gs for o in ok]))
    best = max(ok, key=lambda o: o.p_gs)
    return QaoaReport(
        variant=variant,
        layers=p,
        n_seeds=n_seeds,
        outcomes=outcomes,
        mean_p_gs=mean_p,
        best_p_gs=float(best.p_gs),
        best_seed=best.seed,
        n_failed=len(outcomes) - len(ok),
        max_cut_value=oracle.max_cut_value,
        optimal_assignments=sorted(oracle.optimal_assignments),
        config=config,
    )


def optimize_qaoa(
    graph: WeightedGraph,
    layout: Layout,
    p: int,
    n_seeds: int,
    cfg: QaoaHardwareConfig = QaoaHardwareConfig(),
    opt: OptimizerConfig = OptimizerConfig(algorithm="adam"),
    sim_config: SimConfig = SimConfig(),
    base_seed: int = 0,
    method: str = "auto",
) -> QaoaReport:
    """Multi-seed Adam training of the local-detuning QAOA.

    Each seed draws (gammas, betas) uniformly from [0, 1] us; seeds whose
    objective goes non-finite are excluded from the mean and flagged.
    """
    if p < 1 or n_seeds < 1:
        raise InputError("need p >= 1 and n_seeds >= 1")
    engine = LocalDetuningEngine(graph, layout, cfg, sim_config, method)
    oracle = brute_force_maxcut(graph)
    config = {
        "omega_prep": cfg.omega_prep_rad,
        "omega_mixer": cfg.omega_mixer_rad,
        "phi_prep": cfg.phi_prep,
        "base_seed": base_seed,
        "optimizer": vars(opt),
        "method": method,
    }
    return _run_seeds(engine, oracle, p, n_seeds, opt, base_seed, "local_detuning", config)


def vanilla_qaoa(
    graph: WeightedGraph,
    p: int,
    n_seeds: int,
    opt: OptimizerConfig = OptimizerConfig(algorithm="adam"),
    base_seed: int = 0,
) -> QaoaReport:
    """Distance-independent baseline with ideal separator and mixer."""
    if p < 1 or n_seeds < 1:
        raise InputError("need p >= 1 and n_seeds >= 1")
    engine = VanillaEngine(graph)
    oracle = brute_force_maxcut(graph)
    config = {"base_seed": base_seed, "optimizer": vars(opt)}
    return _run_seeds(engine, oracle, p, n_seeds, opt, base_seed, "vanilla", config)


def lattice_graph(
    n: int,
    lattice: str = "square",
    alpha: float = 12.0,
    seed: int = 0,
    constants: PhysicsConstants = PhysicsConstants(),
) -> tuple[WeightedGraph, Layout]:
    """Random connected cluster of lattice sites with nearest-neighbour edges.

    Grows from the origin by repeatedly occupying a uniformly random frontier
    site.  Edges are exactly the occupied nearest-neighbour pairs, all with
    the distance-alpha coupling C6/(4 alpha^6); the layout is the site
    coordinates shifted into the first quadrant.
    """
    if n < 2:
        raise InputError("need n >= 2")
    if lattice not in ("square", "honeycomb"):
        raise InputError("lattice must be 'square' or 'honeycomb'")
    rng = np.random.default_rng(seed)

    def neighbours(site):
        if lattice == "square":
            (i, j) = site
            return [(i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)]
        (m, k, s) = site
        if s == 0:
            return [(m, k, 1), (m, k - 1, 1), (m + 1, k - 1, 1)]
        return [(m, k, 0), (m, k + 1, 0), (m - 1, k + 1, 0)]

    def coords(site):
        if lattice == "square":
            return (site[0] * alpha, site[1] * alpha)
        m, k, s = site
        x = math.sqrt(3.0) * alpha * (m + 0.5 * k)
        y = 1.5 * alpha * k
        return (x, y + alpha) if s else (x, y)

    start = (0, 0) if lattice == "square" else (0, 0, 0)
    box = Layout.__dataclass_fields__["box"].default
    for _ in range(64):  # re-grow on the rare cluster too stringy for the box
        occupied = [start]
        occupied_set = {start}
        frontier = [s for s in neighbours(start)]
        while len(occupied) < n:
            pick = int(rng.integers(len(frontier)))
            site = frontier.pop(pick)
            if site in occupied_set:
                continue
            occupied.append(site)
            occupied_set.add(site)
            for nb in neighbours(site):
                if nb not in occupied_set:
                    frontier.append(nb)
        pos = np.array([coords(s) for s in occupied])
        pos -= pos.min(axis=0)
        if pos[:, 0].max() <= box[0] and pos[:, 1].max() <= box[1]:
            break
    else:
        raise InputError(f"could not grow {n} lattice sites inside the {box} um box")
    index = {site: i for i, site in enumerate(occupied)}
    weight = constants.c6 / (4.0 * alpha**6)
    edges = []
    for site, i in index.items():
        for nb in neighbours(site):
            j = index.get(nb)
            if j is not None and i < j:
                edges.append((i, j, weight))
    edges.sort(key=lambda e: (e[0], e[1]))
    graph = WeightedGraph(n, tuple(edges))
    layout = Layout(tuple((float(x), float(y)) for x, y in pos))
    return graph, layout
