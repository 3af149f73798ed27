"""Gradient-descent machinery shared by pulse shaping and QAOA training.

Gradients come from central finite differences of the (simulated) objective;
the update rule is Adam or Nadam.  Parameter bounds are enforced by clipping
after every step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import GridcutError, InputError

ALGORITHMS = ("nadam", "adam")


@dataclass(frozen=True)
class OptimizerConfig:
    algorithm: str = "nadam"
    learning_rate: float = 0.1
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    max_steps: int = 100
    fd_step: float = 1e-3  # relative finite-difference step
    convergence_tol: float = 1e-7
    patience: int = 25  # plateau steps before an early stop

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise InputError(f"algorithm must be one of {ALGORITHMS}")
        if not (0.0 < self.beta1 < 1.0 and 0.0 < self.beta2 < 1.0):
            raise InputError("need 0 < beta1, beta2 < 1")
        if self.learning_rate < 0 or self.epsilon <= 0 or self.fd_step <= 0:
            raise InputError("learning_rate >= 0, epsilon > 0, fd_step > 0 required")
        if self.max_steps < 1 or self.patience < 1:
            raise InputError("max_steps and patience must be >= 1")


@dataclass
class OptimizeResult:
    x: np.ndarray  # best-seen parameters
    fun: float  # best-seen objective
    trace: list[float]  # objective after each accepted step (index 0 = initial)
    n_steps: int
    converged: bool
    failed: bool = False
    message: str = ""


def fd_steps(x: np.ndarray, fd_step: float) -> np.ndarray:
    """Per-coordinate step sizes: relative to |x_i| with a unit floor."""
    return fd_step * np.maximum(np.abs(x), 1.0)


def central_fd_gradient(
    objective: Callable[[np.ndarray], float], x: np.ndarray, fd_step: float
) -> np.ndarray:
    h = fd_steps(x, fd_step)
    grad = np.empty_like(x)
    for i in range(x.size):
        up = x.copy()
        up[i] += h[i]
        down = x.copy()
        down[i] -= h[i]
        grad[i] = (objective(up) - objective(down)) / (2.0 * h[i])
    return grad


def minimize(
    objective: Callable[[np.ndarray], float],
    x0: Sequence[float],
    bounds: Sequence[tuple[float, float]] | None,
    cfg: OptimizerConfig,
    gradient: Callable[[np.ndarray], np.ndarray] | None = None,
    on_nonfinite: str = "raise",
) -> OptimizeResult:
    """Run Adam/Nadam from x0, projecting onto bounds after each update.

    Returns the best parameters seen anywhere along the trajectory.  A
    non-finite objective either raises (``on_nonfinite='raise'``) or marks
    the result as failed (``'fail'``).
    """
    x = np.asarray(x0, dtype=float).copy()
    if bounds is not None:
        lo = np.array([b[0] for b in bounds])
        hi = np.array([b[1] for b in bounds])
        x = np.clip(x, lo, hi)
    if gradient is None:
        gradient = lambda p: central_fd_gradient(objective, p, cfg.fd_step)

    def guard(value: float) -> float:
        if not math.isfinite(value):
            if on_nonfinite == "raise":
                raise GridcutError(f"objective became non-finite ({value}) at x={x}")
            raise _NonFinite(value)
        return value

    m = np.zeros_like(x)
    v = np.zeros_like(x)
    try:
        f = guard(objective(x.copy()))
        trace = [f]
        best_x, best_f = x.copy(), f
        stall = 0
        converged = False
        steps = 0
        for t in range(1, cfg.max_steps + 1):
            g = gradient(x.copy())
            guard(float(np.max(np.abs(g))))
            m = cfg.beta1 * m + (1.0 - cfg.beta1) * g
            v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g
            bias1 = 1.0 - cfg.beta1**t
            bias2 = 1.0 - cfg.beta2**t
            m_hat = m / bias1
            v_hat = v / bias2
            if cfg.algorithm == "nadam":
                direction = cfg.beta1 * m_hat + (1.0 - cfg.beta1) * g / bias1
            else:
                direction = m_hat
            x = x - cfg.learning_rate * direction / (np.sqrt(v_hat) + cfg.epsilon)
            if bounds is not None:
                x = np.clip(x, lo, hi)
            f = guard(objective(x.copy()))
            trace.append(f)
            steps = t
            improvement = best_f - f
            if f < best_f:
                best_x, best_f = x.copy(), f
            if improvement > cfg.convergence_tol * max(1.0, abs(best_f)):
                stall = 0
            else:
                stall += 1
                if stall >= cfg.patience:
                    converged = True
                    break
    except _NonFinite as exc:
        return OptimizeResult(
            x=best_x if "best_x" in locals() else x,
            fun=best_f if "best_f" in locals() else math.inf,
            trace=trace if "trace" in locals() else [],
            n_steps=steps if "steps" in locals() else 0,
            converged=False,
            failed=True,
            message=f"objective became non-finite ({exc.value})",
        )
    return OptimizeResult(
        x=best_x, fun=best_f, trace=trace, n_steps=steps, converged=converged
    )


class _NonFinite(Exception):
    def __init__(self, value):
        self.value = value
