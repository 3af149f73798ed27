"""Exact state-vector simulation of driven Rydberg-atom arrays.

The system Hamiltonian is

    H(t) = (delta_global(t)/2) sum_i Z_i
         + (Omega(t)/2) sum_i [X_i cos(phi) - Y_i sin(phi)]
         + (C6/4) sum_{i<j} (Z_i - 1)(Z_j - 1) / d_ij^6

plus optional time-constant per-atom detunings, (Delta_i/2) Z_i.  The
interaction term equals C6/d^6 on pairs of simultaneously excited atoms and
vanishes otherwise (n_i n_j form), with bit 1 = excited = Z eigenvalue -1.

Units: every frequency-like quantity is angular, rad/us.  User-facing files
carry MHz; MHZ_TO_RAD = 2*pi is the single conversion constant.  Distances
are um, times us.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import jv

from .errors import DomainError, InputError
from .graph import WeightedGraph, cost_vector, index_to_bits

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is an optional accelerator
    _HAVE_NUMBA = False

MHZ_TO_RAD = 2.0 * math.pi


def mhz_to_rad(value):
    return np.asarray(value, dtype=float) * MHZ_TO_RAD if np.ndim(value) else value * MHZ_TO_RAD


def rad_to_mhz(value):
    return np.asarray(value, dtype=float) / MHZ_TO_RAD if np.ndim(value) else value / MHZ_TO_RAD


@dataclass(frozen=True)
class PhysicsConstants:
    """Hardware-class constants, all angular (rad/us).

    The Rydberg coefficient corresponds to 2*pi x 862,690 MHz um^6; the drive
    and detuning caps are 2.51 MHz and 19.89 MHz after conversion.
    """

    c6: float = 5_420_441.0
    omega_max: float = 15.8
    delta_max: float = 125.0

    def __post_init__(self):
        if min(self.c6, self.omega_max, self.delta_max) <= 0:
            raise InputError("physics constants must be positive")


@dataclass(frozen=True)
class Layout:
    """2-D atom positions in um, constrained to a spacing and bounding box."""

    positions: tuple[tuple[float, float], ...]
    min_spacing: float = 4.0
    box: tuple[float, float] = (75.0, 76.0)

    def __post_init__(self):
        pos = tuple((float(x), float(y)) for x, y in self.positions)
        object.__setattr__(self, "positions", pos)
        if not pos:
            raise InputError("layout needs at least one atom")
        w, h = self.box
        for x, y in pos:
            if not (-1e-9 <= x <= w + 1e-9 and -1e-9 <= y <= h + 1e-9):
                raise InputError(f"position ({x}, {y}) outside {w} x {h} um box")
        d = self.distances()
        n = len(pos)
        if n > 1:
            off = d[np.triu_indices(n, k=1)]
            if off.min() < self.min_spacing - 1e-9:
                raise InputError(
                    f"minimum pairwise distance {off.min():.4f} um below "
                    f"required spacing {self.min_spacing} um"
                )

    @property
    def n_atoms(self) -> int:
        return len(self.positions)

    def distances(self) -> np.ndarray:
        xy = np.asarray(self.positions)
        diff = xy[:, None, :] - xy[None, :, :]
        return np.sqrt((diff**2).sum(axis=-1))

    def to_dict(self) -> dict:
        return {"positions_um": [[x, y] for x, y in self.positions]}

    @classmethod
    def from_dict(cls, data: dict, **kwargs) -> "Layout":
        return cls(tuple((p[0], p[1]) for p in data["positions_um"]), **kwargs)


class PiecewiseLinear:
    """Linear interpolation between (t, value) knots; defined on [t0, t1]."""

    def __init__(self, knots):
        knots = [(float(t), float(v)) for t, v in knots]
        if not knots:
            raise InputError("need at least one knot")
        ts = np.array([t for t, _ in knots])
        if np.any(np.diff(ts) < 0):
            raise InputError("knot times must be non-decreasing")
        self.times = ts
        self.values = np.array([v for _, v in knots])

    def __call__(self, t):
        return np.interp(t, self.times, self.values)

    def covers(self, t_start: float, t_end: float) -> bool:
        return self.times[0] <= t_start + 1e-12 and t_end <= self.times[-1] + 1e-12

    def knots(self) -> list[list[float]]:
        return [[float(t), float(v)] for t, v in zip(self.times, self.values)]


class PiecewiseConstant(PiecewiseLinear):
    """Right-open step function: value of the knot at or before t.

    Defined from the first knot onward (the last value extends rightward).
    """

    def __call__(self, t):
        idx = np.clip(np.searchsorted(self.times, t, side="right") - 1, 0, len(self.values) - 1)
        return self.values[idx]

    def covers(self, t_start: float, t_end: float) -> bool:
        return self.times[0] <= t_start + 1e-12


@dataclass
class PulseSchedule:
    """Drive waveforms: Omega(t), global detuning(t), phase phi(t), and
    optional time-constant per-atom detunings (rad/us)."""

    t_max: float
    omega: PiecewiseLinear
    delta_global: PiecewiseLinear
    phi: PiecewiseConstant
    local_detuning: np.ndarray | None = None
    hardware_legal: bool = False

    @classmethod
    def from_knots(
        cls,
        t_max: float,
        omega_knots,
        delta_knots,
        phi_knots=None,
        local_detuning=None,
        hardware_legal: bool = False,
    ) -> "PulseSchedule":
        local = None if local_detuning is None else np.asarray(local_detuning, dtype=float)
        return cls(
            t_max=float(t_max),
            omega=PiecewiseLinear(omega_knots),
            delta_global=PiecewiseLinear(delta_knots),
            phi=PiecewiseConstant(phi_knots if phi_knots is not None else [(0.0, 0.0)]),
            local_detuning=local,
            hardware_legal=hardware_legal,
        )

    @classmethod
    def constant(
        cls, t_max: float, omega: float, delta: float = 0.0, phi: float = 0.0,
        local_detuning=None,
    ) -> "PulseSchedule":
        return cls.from_knots(
            t_max,
            [(0.0, omega), (t_max, omega)],
            [(0.0, delta), (t_max, delta)],
            [(0.0, phi)],
            local_detuning=local_detuning,
        )

    def hardware_violations(self, constants: PhysicsConstants) -> list[str]:
        """Knot-level checks of the amplitude/detuning hardware envelope."""
        bad = []
        for t, v in zip(self.omega.times, self.omega.values):
            if v < -1e-9 or v > constants.omega_max + 1e-9:
                bad.append(f"omega({t:g}) = {v:g} outside [0, {constants.omega_max}]")
        for bound_t in (0.0, self.t_max):
            if abs(float(self.omega(bound_t))) > 1e-9:
                bad.append(f"omega({bound_t:g}) = {float(self.omega(bound_t)):g} must be 0")
        for t, v in zip(self.delta_global.times, self.delta_global.values):
            if abs(v) > constants.delta_max + 1e-9:
                bad.append(f"delta({t:g}) = {v:g} outside +/-{constants.delta_max}")
        return bad

    def to_dict(self) -> dict:
        """JSON form; omega/delta values in MHz, phi in radians."""
        return {
            "t_max": self.t_max,
            "omega": [[t, v / MHZ_TO_RAD] for t, v in self.omega.knots()],
            "delta": [[t, v / MHZ_TO_RAD] for t, v in self.delta_global.knots()],
            "phi": self.phi.knots(),
            "local_detuning_MHz": (
                None
                if self.local_detuning is None
                else [v / MHZ_TO_RAD for v in self.local_detuning]
            ),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PulseSchedule":
        local = data.get("local_detuning_MHz")
        return cls.from_knots(
            data["t_max"],
            [(t, v * MHZ_TO_RAD) for t, v in data["omega"]],
            [(t, v * MHZ_TO_RAD) for t, v in data["delta"]],
            [(t, v) for t, v in data.get("phi", [[0.0, 0.0]])],
            local_detuning=None if local is None else [v * MHZ_TO_RAD for v in local],
        )


@dataclass(frozen=True)
class MeasurementNoise:
    """Independent asymmetric readout bit flips: p01 for 0->1, p10 for 1->0."""

    p01: float = 0.0
    p10: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.p01 <= 1.0 and 0.0 <= self.p10 <= 1.0):
            raise InputError("flip probabilities must lie in [0, 1]")


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-3
    constants: PhysicsConstants = field(default_factory=PhysicsConstants)

    def __post_init__(self):
        if self.dt <= 0:
            raise InputError("dt must be positive")


@dataclass
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    @classmethod
    def zero_state(cls, n: int) -> "StateVector":
        amps = np.zeros(1 << n, dtype=np.complex128)
        amps[0] = 1.0
        return cls(n, amps)

    @classmethod
    def plus_state(cls, n: int) -> "StateVector":
        amps = np.full(1 << n, 1.0 / math.sqrt(1 << n), dtype=np.complex128)
        return cls(n, amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy())


@dataclass
class ShotHistogram:
    shots: int
    counts: dict[str, int]

    def to_dict(self) -> dict:
        return {"shots": self.shots, "counts": dict(self.counts)}


def interaction_weights(layout: Layout, constants: PhysicsConstants) -> np.ndarray:
    """Pairwise couplings w_ij = C6 / (4 d_ij^6) in rad/us (zero diagonal)."""
    d = layout.distances()
    n = layout.n_atoms
    w = np.zeros((n, n))
    off = ~np.eye(n, dtype=bool)
    if n > 1 and d[off].min() < 1e-9:
        raise DomainError("coincident atoms have a divergent interaction")
    w[off] = constants.c6 / (4.0 * d[off] ** 6)
    return w


def diagonal_tables(
    layout: Layout,
    constants: PhysicsConstants,
    local_detuning: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Basis-diagonal pieces of the Hamiltonian.

    Returns (static_diag, sum_z): the t-independent part (interaction plus
    per-atom detunings) and the sum-of-Z table, so the full diagonal at time
    t is static_diag + 0.5 * delta_global(t) * sum_z.
    """
    n = layout.n_atoms
    idx = np.arange(1 << n, dtype=np.int64)
    bits = ((idx[:, None] >> np.arange(n)) & 1).astype(np.float64)
    v = 4.0 * interaction_weights(layout, constants)  # C6/d^6 on excited pairs
    static = 0.5 * np.einsum("bi,ij,bj->b", bits, v, bits)
    z = 1.0 - 2.0 * bits
    if local_detuning is not None:
        local = np.asarray(local_detuning, dtype=float)
        if local.shape != (n,):
            raise InputError(f"need one local detuning per atom, got shape {local.shape}")
        static = static + 0.5 * (z @ local)
    return static, z.sum(axis=1)


if _HAVE_NUMBA:

    @njit(cache=True)
    def _rotate_all_qubits(amps, n, u00, u01, u10, u11):  # pragma: no cover - jit
        for k in range(n):
            step = 1 << k
            block = step << 1
            for base in range(0, amps.shape[0], block):
                for off in range(step):
                    i0 = base + off
                    i1 = i0 + step
                    a = amps[i0]
                    b = amps[i1]
                    amps[i0] = u00 * a + u01 * b
                    amps[i1] = u10 * a + u11 * b

else:

    def _rotate_all_qubits(amps, n, u00, u01, u10, u11):
        for k in range(n):
            m = amps.reshape(-1, 2, 1 << k)
            a = m[:, 0, :].copy()
            b = m[:, 1, :]
            m[:, 0, :] = u00 * a + u01 * b
            m[:, 1, :] = u10 * a + u11 * b


def _drive_matrix_elements(omega: float, phi: float, dt: float):
    """Entries of exp(-i dt (Omega/2)(X cos phi - Y sin phi)) for one qubit."""
    half = 0.5 * omega * dt
    c = math.cos(half)
    s = math.sin(half)
    return (
        complex(c, 0.0),
        -1j * s * complex(math.cos(phi), math.sin(phi)),
        -1j * s * complex(math.cos(phi), -math.sin(phi)),
        complex(c, 0.0),
    )


def evolve(
    state: StateVector,
    layout: Layout,
    schedule: PulseSchedule,
    dt: float,
    t_start: float = 0.0,
    t_end: float | None = None,
    constants: PhysicsConstants = PhysicsConstants(),
) -> StateVector:
    """Integrate the Schrodinger equation by symmetric Strang splitting.

    Each step freezes the drive at the step midpoint, then applies
    half-step diagonal phase, a full-step exact per-qubit drive rotation,
    and another half-step diagonal phase.  Every factor is an exact
    exponential of a Hermitian term, so the norm is conserved to rounding.
    """
    if t_end is None:
        t_end = schedule.t_max
    if not (0.0 <= t_start < t_end <= schedule.t_max + 1e-12):
        raise InputError(f"need 0 <= t_start < t_end <= t_max, got [{t_start}, {t_end}]")
    if dt <= 0:
        raise InputError("dt must be positive")
    if abs(state.norm() - 1.0) > 1e-9:
        raise InputError(f"input state norm {state.norm():.2e} is not 1")
    if state.n_qubits != layout.n_atoms:
        raise InputError("state size does not match layout")
    for fn, name in ((schedule.omega, "omega"), (schedule.delta_global, "delta"),
                     (schedule.phi, "phi")):
        if not fn.covers(t_start, t_end):
            raise InputError(f"schedule {name} is undefined on [{t_start}, {t_end}]")

    span = t_end - t_start
    n_steps = max(1, math.ceil(span / dt - 1e-12))
    dt_eff = span / n_steps

    static, sum_z = diagonal_tables(layout, constants, schedule.local_detuning)
    mids = t_start + (np.arange(n_steps) + 0.5) * dt_eff
    om = np.atleast_1d(schedule.omega(mids))
    ph = np.atleast_1d(schedule.phi(mids))
    dg = np.atleast_1d(schedule.delta_global(mids))

    amps = state.amplitudes.astype(np.complex128, copy=True)
    n = state.n_qubits
    constant_drive = (np.ptp(om) == 0.0) and (np.ptp(ph) == 0.0) and (np.ptp(dg) == 0.0)
    if constant_drive:
        half = np.exp(-0.5j * dt_eff * (static + 0.5 * dg[0] * sum_z))
        u = _drive_matrix_elements(om[0], ph[0], dt_eff)
        for _ in range(n_steps):
            amps *= half
            if om[0] != 0.0:
                _rotate_all_qubits(amps, n, *u)
            amps *= half
    else:
        for k in range(n_steps):
            half = np.exp(-0.5j * dt_eff * (static + 0.5 * dg[k] * sum_z))
            amps *= half
            if om[k] != 0.0:
                _rotate_all_qubits(amps, n, *_drive_matrix_elements(om[k], ph[k], dt_eff))
            amps *= half
    return StateVector(n, amps)


def probabilities(state: StateVector, cutoff: float = 1e-15) -> dict[str, float]:
    """Measurement distribution |amplitude|^2; entries below cutoff omitted."""
    probs = np.abs(state.amplitudes) ** 2
    n = state.n_qubits
    return {
        index_to_bits(i, n): float(p)
        for i, p in enumerate(probs)
        if p >= cutoff
    }


def sample(
    state: StateVector,
    shots: int,
    seed: int,
    noise: MeasurementNoise | None = None,
) -> ShotHistogram:
    """Draw i.i.d. measurement outcomes, optionally through readout noise."""
    if shots < 1:
        raise InputError("need at least one shot")
    probs = np.abs(state.amplitudes) ** 2
    probs = probs / probs.sum()
    n = state.n_qubits
    rng = np.random.default_rng(seed)
    drawn = rng.choice(len(probs), size=shots, p=probs)
    bits = ((drawn[:, None] >> np.arange(n)) & 1).astype(np.int8)
    if noise is not None and (noise.p01 > 0.0 or noise.p10 > 0.0):
        r = rng.random(bits.shape)
        flip = np.where(bits == 0, r < noise.p01, r < noise.p10)
        bits ^= flip.astype(np.int8)
    counts: dict[str, int] = {}
    for row in bits:
        key = "".join("1" if b else "0" for b in row)
        counts[key] = counts.get(key, 0) + 1
    return ShotHistogram(shots=shots, counts=dict(sorted(counts.items())))


def expectation_cost(state: StateVector, graph: WeightedGraph) -> float:
    """Exact expectation of the problem cost over the measurement distribution."""
    if graph.n_vertices != state.n_qubits:
        raise InputError(
            f"graph has {graph.n_vertices} vertices but state has {state.n_qubits} qubits"
        )
    probs = np.abs(state.amplitudes) ** 2
    return float(probs @ cost_vector(graph))


def _drive_apply(amps: np.ndarray, n: int, phase: complex) -> np.ndarray:
    """Apply sum_k [X_k cos(phi) - Y_k sin(phi)] with phase = exp(i phi).

    Accepts (dim,) or (dim, m) arrays; the drive acts on the dim axis.
    """
    flat = amps.ndim == 1
    v = amps[:, None] if flat else amps
    out = np.zeros_like(v)
    m = v.shape[1]
    for k in range(n):
        view = v.reshape(-1, 2, 1 << k, m)
        ov = out.reshape(-1, 2, 1 << k, m)
        ov[:, 0] += phase * view[:, 1]
        ov[:, 1] += np.conj(phase) * view[:, 0]
    return out[:, 0] if flat else out


class ConstantDrivePropagator:
    """Exact exp(-i H t) for H = diag + (Omega/2) sum_k [X_k cos phi - Y_k sin phi].

    Two interchangeable backends: a Chebyshev polynomial expansion of the
    exponential (matrix-free, machine precision at any size), or a dense
    eigendecomposition (cheapest for repeated application at small sizes).
    """

    def __init__(self, diag: np.ndarray, omega: float, phi: float, method: str = "auto"):
        self.diag = np.asarray(diag, dtype=float)
        dim = self.diag.shape[0]
        if dim & (dim - 1):
            raise InputError("diagonal length must be a power of two")
        self.n = dim.bit_length() - 1
        self.omega = float(omega)
        self.phi = float(phi)
        if method == "auto":
            method = "eigh" if dim <= 2048 else "chebyshev"
        if method not in ("eigh", "chebyshev"):
            raise InputError(f"unknown propagator method {method!r}")
        self.method = method
        self._eig = None

    def _dense(self) -> np.ndarray:
        dim = 1 << self.n
        h = np.diag(self.diag.astype(np.complex128))
        rows = np.arange(dim)
        phase = complex(math.cos(self.phi), math.sin(self.phi))
        for k in range(self.n):
            cols = rows ^ (1 << k)
            upper = (rows >> k) & 1 == 0
            h[rows[upper], cols[upper]] += 0.5 * self.omega * phase
            h[rows[~upper], cols[~upper]] += 0.5 * self.omega * np.conj(phase)
        return h

    def _eigensystem(self):
        if self._eig is None:
            h = self._dense()
            if abs(math.sin(self.phi)) < 1e-15 or self.omega == 0.0:
                vals, vecs = np.linalg.eigh(h.real)
            else:
                vals, vecs = np.linalg.eigh(h)
            self._eig = (vals, vecs)
        return self._eig

    def apply(self, amps: np.ndarray, t: float) -> np.ndarray:
        """Propagate (dim,) or (dim, m) amplitudes for duration t."""
        if t == 0.0:
            return amps.copy()
        if self.method == "eigh":
            vals, vecs = self._eigensystem()
            rotated = vecs.conj().T @ amps
            if rotated.ndim == 1:
                rotated *= np.exp(-1j * vals * t)
            else:
                rotated *= np.exp(-1j * vals * t)[:, None]
            return vecs @ rotated
        return self._chebyshev(amps, t)

    def _chebyshev(self, amps: np.ndarray, t: float) -> np.ndarray:
        lo = float(self.diag.min()) - 0.5 * abs(self.omega) * self.n
        hi = float(self.diag.max()) + 0.5 * abs(self.omega) * self.n
        center = 0.5 * (hi + lo)
        radius = 0.5 * (hi - lo)
        if radius == 0.0:
            return amps * np.exp(-1j * center * t)
        z = radius * t
        order = int(abs(z) + 8.0 * abs(z) ** 0.5 + 40)
        coeffs = jv(np.arange(order + 1), z)
        while abs(coeffs[-1]) > 1e-16 or abs(coeffs[-2]) > 1e-16:
            order += 32
            coeffs = jv(np.arange(order + 1), z)
        phase = complex(math.cos(self.phi), math.sin(self.phi))
        scaled_diag = (self.diag - center) / radius
        drive_scale = 0.5 * self.omega / radius

        def h_apply(v):
            if v.ndim == 1:
                out = scaled_diag * v
            else:
                out = scaled_diag[:, None] * v
            if self.omega != 0.0:
                out += drive_scale * _drive_apply(v, self.n, phase)
            return out

        prev = amps.astype(np.complex128, copy=True)
        cur = h_apply(prev)
        acc = coeffs[0] * prev + (2.0 * -1j * coeffs[1]) * cur
        ik = -1j
        for k in range(2, order + 1):
            nxt = 2.0 * h_apply(cur) - prev
            prev, cur = cur, nxt
            ik *= -1j
            if abs(coeffs[k]) > 0.0:
                acc += (2.0 * ik * coeffs[k]) * cur
        return acc * np.exp(-1j * center * t)
