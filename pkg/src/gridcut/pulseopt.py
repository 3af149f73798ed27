"""Adiabatic pulse shaping: ansatz, hardware projection, and the full pipeline.

The drive is a three-parameter family

    Omega(t) = p0 * (1 - [1 - sin^2(pi t / t_max)]^(p1/2))
    Delta(t) = (2/pi) * p2 * arctan(p1 * (t - t_max/2))

which ramps the amplitude up and back to zero while sweeping the detuning
from negative to positive (for p2 > 0), dragging the all-ground register
toward the maximum-cut state.  The three parameters are trained by
Nadam/Adam on the exact simulated cost expectation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .embed import EmbedParams, select_register
from .errors import CapacityError, InputError
from .graph import (
    WeightedGraph,
    brute_force_maxcut,
    ground_state_probability,
    step_to_solution,
)
from .optimize import OptimizerConfig, minimize
from .rydsim import (
    Layout,
    MeasurementNoise,
    PhysicsConstants,
    PulseSchedule,
    SimConfig,
    StateVector,
    evolve,
    expectation_cost,
    probabilities,
    sample,
)

T_MAX_DEFAULT = 4.0  # us
KNOTS_DEFAULT = 101
SIMULATOR_CAPACITY = 16


@dataclass(frozen=True)
class AdiabaticParams:
    """(peak amplitude rad/us, shape exponent, detuning asymptote rad/us)."""

    p0: float
    p1: float
    p2: float

    def as_array(self) -> np.ndarray:
        return np.array([self.p0, self.p1, self.p2])

    @classmethod
    def from_array(cls, arr) -> "AdiabaticParams":
        return cls(float(arr[0]), float(arr[1]), float(arr[2]))

    def validate(self, constants: PhysicsConstants) -> None:
        if not 0.0 < self.p0 <= constants.omega_max:
            raise InputError(f"p0 = {self.p0} outside (0, {constants.omega_max}]")
        if self.p1 <= 0.0:
            raise InputError(f"p1 = {self.p1} must be positive")
        if abs(self.p2) > constants.delta_max:
            raise InputError(f"|p2| = {abs(self.p2)} exceeds {constants.delta_max}")


def default_params(constants: PhysicsConstants = PhysicsConstants()) -> AdiabaticParams:
    return AdiabaticParams(0.8 * constants.omega_max, 2.0, 0.5 * constants.delta_max)


def ansatz_omega(t, params: AdiabaticParams, t_max: float = T_MAX_DEFAULT):
    s2 = np.sin(np.pi * np.asarray(t, dtype=float) / t_max) ** 2
    return params.p0 * (1.0 - (1.0 - s2) ** (params.p1 / 2.0))


def ansatz_delta(t, params: AdiabaticParams, t_max: float = T_MAX_DEFAULT):
    return (2.0 / math.pi) * params.p2 * np.arctan(
        params.p1 * (np.asarray(t, dtype=float) - t_max / 2.0)
    )


def adiabatic_schedule(
    params: AdiabaticParams,
    t_max: float = T_MAX_DEFAULT,
    constants: PhysicsConstants = PhysicsConstants(),
    knots: int = KNOTS_DEFAULT,
    enforce_bounds: bool = True,
) -> PulseSchedule:
    """Sample the ansatz onto a knot grid as a hardware-legal schedule.

    The endpoints are pinned to exactly zero amplitude.  With
    enforce_bounds, knots outside the hardware envelope raise, listing the
    offending times.
    """
    if knots < 3:
        raise InputError("need at least 3 knots")
    ts = np.linspace(0.0, t_max, knots)
    om = ansatz_omega(ts, params, t_max)
    om[0] = 0.0
    om[-1] = 0.0
    de = ansatz_delta(ts, params, t_max)
    schedule = PulseSchedule.from_knots(
        t_max,
        list(zip(ts, om)),
        list(zip(ts, de)),
        [(0.0, 0.0)],
        hardware_legal=True,
    )
    if enforce_bounds:
        violations = schedule.hardware_violations(constants)
        if violations:
            raise InputError("schedule violates hardware bounds: " + "; ".join(violations))
    return schedule


def project_to_hardware(
    schedule: PulseSchedule, constants: PhysicsConstants = PhysicsConstants()
) -> tuple[PulseSchedule, bool]:
    """Clamp amplitude/detuning into the hardware envelope.

    Forces Omega(0) = Omega(t_max) = 0 and returns whether anything changed.
    """
    om = np.clip(schedule.omega.values, 0.0, constants.omega_max)
    om_times = schedule.omega.times.copy()
    for bound, idx in ((0.0, 0), (schedule.t_max, -1)):
        if abs(om_times[idx] - bound) < 1e-12:
            om[idx] = 0.0
    de = np.clip(schedule.delta_global.values, -constants.delta_max, constants.delta_max)
    clamped = bool(
        np.any(om != schedule.omega.values) or np.any(de != schedule.delta_global.values)
    )
    projected = PulseSchedule.from_knots(
        schedule.t_max,
        list(zip(om_times, om)),
        list(zip(schedule.delta_global.times, de)),
        list(zip(schedule.phi.times, schedule.phi.values)),
        local_detuning=schedule.local_detuning,
        hardware_legal=True,
    )
    return projected, clamped


def pulse_objective(
    graph: WeightedGraph,
    layout: Layout,
    params: AdiabaticParams,
    sim_config: SimConfig = SimConfig(),
    t_max: float = T_MAX_DEFAULT,
    knots: int = KNOTS_DEFAULT,
) -> float:
    """Exact expected problem cost after the full adiabatic sweep."""
    if layout.n_atoms != graph.n_vertices:
        raise InputError("layout size does not match graph")
    schedule = adiabatic_schedule(
        params, t_max, sim_config.constants, knots, enforce_bounds=False
    )
    state = evolve(
        StateVector.zero_state(graph.n_vertices),
        layout,
        schedule,
        dt=sim_config.dt,
        constants=sim_config.constants,
    )
    return expectation_cost(state, graph)


def parameter_bounds(constants: PhysicsConstants) -> list[tuple[float, float]]:
    """Optimization box for (p0, p1, p2)."""
    return [
        (1e-3, constants.omega_max),
        (0.05, 50.0),
        (-constants.delta_max, constants.delta_max),
    ]


def optimize_pulse(
    graph: WeightedGraph,
    layout: Layout,
    init: AdiabaticParams,
    cfg: OptimizerConfig,
    sim_config: SimConfig = SimConfig(),
    t_max: float = T_MAX_DEFAULT,
    knots: int = KNOTS_DEFAULT,
) -> tuple[AdiabaticParams, list[float]]:
    """Train the ansatz parameters on one layout; returns best-seen params."""
    init.validate(sim_config.constants)

    def objective(x: np.ndarray) -> float:
        return pulse_objective(
            graph, layout, AdiabaticParams.from_array(x), sim_config, t_max, knots
        )

    result = minimize(
        objective,
        init.as_array(),
        parameter_bounds(sim_config.constants),
        cfg,
        on_nonfinite="raise",
    )
    return AdiabaticParams.from_array(result.x), result.trace


@dataclass(frozen=True)
class PipelineConfig:
    """Everything the adiabatic pipeline needs, with reproducible seeds.

    init_p2_grid: candidate initial detuning asymptotes.  Register scoring
    and the optimizer start are taken over (layout, init) pairs instead of
    layouts alone: the good detuning range is instance- and layout-specific,
    and a single default start regularly misses it.  Set to () to score with
    the single default pulse only.
    """

    n_registers: int = 50
    seed: int = 0
    t_max: float = T_MAX_DEFAULT
    knots: int = KNOTS_DEFAULT
    dt_opt: float = 1e-3
    dt_final: float = 1e-4
    shots: int = 0
    noise: MeasurementNoise | None = None
    embed: EmbedParams = field(
        default_factory=lambda: EmbedParams(box=(75.0, 76.0), k_scale=8.0, variant="rydberg")
    )
    optimizer: OptimizerConfig = field(
        default_factory=lambda: OptimizerConfig(algorithm="nadam", learning_rate=0.4,
                                                max_steps=100, fd_step=1e-2)
    )
    constants: PhysicsConstants = field(default_factory=PhysicsConstants)
    init_params: AdiabaticParams | None = None  # None = hardware-scaled defaults
    init_p2_grid: tuple[float, ...] = (10.0, 20.0, 40.0, 85.0, 110.0)

    def to_dict(self) -> dict:
        return {
            "n_registers": self.n_registers,
            "seed": self.seed,
            "t_max": self.t_max,
            "knots": self.knots,
            "dt_opt": self.dt_opt,
            "dt_final": self.dt_final,
            "shots": self.shots,
            "noise": None if self.noise is None else {"p01": self.noise.p01, "p10": self.noise.p10},
            "embed": {
                "box": list(self.embed.box),
                "iterations": self.embed.iterations,
                "rho": self.embed.rho,
                "k_scale": self.embed.k_scale,
                "min_spacing": self.embed.min_spacing,
                "variant": self.embed.variant,
            },
            "optimizer": {
                "algorithm": self.optimizer.algorithm,
                "learning_rate": self.optimizer.learning_rate,
                "max_steps": self.optimizer.max_steps,
                "fd_step": self.optimizer.fd_step,
                "convergence_tol": self.optimizer.convergence_tol,
                "patience": self.optimizer.patience,
            },
            "init_params": None if self.init_params is None else vars(self.init_params),
        }


@dataclass
class RunReport:
    """Outcome of one adiabatic pipeline run; JSON-serializable via to_dict."""

    n_vertices: int
    n_edges: int
    total_weight: float
    connected: bool
    max_cut_value: float
    min_cost: float
    optimal_assignments: list[str]
    register_costs: list[float]
    best_register_index: int
    layout: dict
    init_params: dict
    best_params: dict
    cost_trace: list[float]
    final_cost: float
    schedule: dict
    schedule_clamped: bool
    distribution: dict[str, float]
    histogram: dict | None
    p_gs: float
    steps_to_solution: float | None  # None when p_gs = 1 (formula is singular)
    seeds: dict
    config: dict

    def to_dict(self) -> dict:
        return dict(vars(self))


def run_adiabatic_pipeline(graph: WeightedGraph, config: PipelineConfig = PipelineConfig()) -> RunReport:
    """Layout selection, pulse training, and final exact evaluation."""
    n = graph.n_vertices
    if n > SIMULATOR_CAPACITY:
        raise CapacityError(f"graph size {n} exceeds simulator capacity {SIMULATOR_CAPACITY}")
    constants = config.constants
    oracle = brute_force_maxcut(graph)
    sim_opt = SimConfig(dt=config.dt_opt, constants=constants)
    init = config.init_params or default_params(constants)

    default_schedule = adiabatic_schedule(init, config.t_max, constants, config.knots)
    embed_params = EmbedParams(
        box=config.embed.box,
        iterations=config.embed.iterations,
        initial_temperature=config.embed.initial_temperature,
        rho=config.embed.rho,
        k_scale=config.embed.k_scale,
        min_spacing=config.embed.min_spacing,
        seed=config.seed,
        variant=config.embed.variant,
    )
    best_layout, register_costs = select_register(
        graph, config.n_registers, default_schedule, sim_opt, embed_params
    )
    best_index = int(np.argmin(register_costs))

    best_params, trace = optimize_pulse(
        graph, best_layout, init, config.optimizer, sim_opt, config.t_max, config.knots
    )

    schedule = adiabatic_schedule(
        best_params, config.t_max, constants, config.knots, enforce_bounds=False
    )
    schedule, clamped = project_to_hardware(schedule, constants)
    final_state = evolve(
        StateVector.zero_state(n),
        best_layout,
        schedule,
        dt=config.dt_final,
        constants=constants,
    )
    distribution = probabilities(final_state, cutoff=1e-12)
    final_cost = expectation_cost(final_state, graph)
    p_gs = ground_state_probability(distribution, oracle)

    histogram = None
    sample_seed = config.seed + 1_000_003
    if config.shots > 0:
        histogram = sample(final_state, config.shots, sample_seed, config.noise).to_dict()

    return RunReport(
        n_vertices=n,
        n_edges=graph.n_edges,
        total_weight=graph.total_weight,
        connected=graph.is_connected(),
        max_cut_value=oracle.max_cut_value,
        min_cost=oracle.min_cost,
        optimal_assignments=sorted(oracle.optimal_assignments),
        register_costs=[float(c) for c in register_costs],
        best_register_index=best_index,
        layout=best_layout.to_dict(),
        init_params=vars(init),
        best_params=vars(best_params),
        cost_trace=[float(c) for c in trace],
        final_cost=final_cost,
        schedule=schedule.to_dict(),
        schedule_clamped=clamped,
        distribution=distribution,
        histogram=histogram,
        p_gs=p_gs,
        steps_to_solution=None if p_gs >= 1.0 else step_to_solution(p_gs),
        seeds={"embed_base": config.seed, "sample": sample_seed},
        config=config.to_dict(),
    )
