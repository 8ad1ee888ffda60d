"""Classical outer loop: derivative-free minimization of the cost landscape.

Nelder-Mead over the 2p angle parameters, optionally seeded by a coarse
grid scan at p=1.  Every objective call is recorded in the trace and
counted against the evaluation budget, which makes runs reproducible and
comparable across evaluators.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from ._seeds import rng_from
from .errors import ConfigError
from .problem import SpinPolynomial
from .simulator import QaoaParams, build_qaoa_state, expectation

GAMMA_SPAN = 2.0 * math.pi  # search box: gamma in [0, 2pi)
BETA_SPAN = math.pi  # beta in [0, pi)

# standard Nelder-Mead coefficients
_REFLECT = 1.0
_EXPAND = 2.0
_CONTRACT = 0.5
_SHRINK = 0.5

_INCUMBENT_REEVAL_PERIOD = 10


@dataclass(frozen=True)
class OptimizerConfig:
    method: str = "nelder_mead"  # or "grid_then_nelder_mead"
    max_evaluations: int = 200
    tolerance: float = 1e-4
    initial: tuple[float, ...] | None = None
    grid_resolution: int = 12
    restarts: int = 1
    noisy: bool = False  # re-evaluate the incumbent every 10 iterations

    def __post_init__(self) -> None:
        if self.method not in ("nelder_mead", "grid_then_nelder_mead"):
            raise ConfigError(f"unknown optimizer method '{self.method}'")
        if self.max_evaluations < 1:
            raise ConfigError("max_evaluations must be >= 1")
        if self.tolerance <= 0:
            raise ConfigError("tolerance must be > 0")
        if self.restarts < 1:
            raise ConfigError("restarts must be >= 1")
        if self.grid_resolution < 2:
            raise ConfigError("grid_resolution must be >= 2")


@dataclass(frozen=True)
class OptimizationTrace:
    evaluations: tuple[tuple[QaoaParams, float], ...]
    best_params: QaoaParams
    best_value: float
    num_evaluations: int

    @property
    def evaluation_errors(self) -> int:
        return sum(1 for _, v in self.evaluations if not math.isfinite(v))

    def running_best(self) -> list[float]:
        best = math.inf
        out = []
        for _, v in self.evaluations:
            if math.isfinite(v) and v < best:
                best = v
            out.append(best)
        return out


class _Budget:
    """Wraps the evaluator: records the trace, enforces the budget."""

    def __init__(self, fn: Callable[[QaoaParams], float], limit: int):
        self.fn = fn
        self.limit = limit
        self.trace: list[tuple[QaoaParams, float]] = []

    @property
    def used(self) -> int:
        return len(self.trace)

    @property
    def exhausted(self) -> bool:
        return self.used >= self.limit

    def __call__(self, x: np.ndarray) -> float:
        params = QaoaParams.from_flat(x)
        raw = float(self.fn(params))
        self.trace.append((params, raw))
        return raw if math.isfinite(raw) else math.inf


def noiseless_evaluator(poly: SpinPolynomial) -> Callable[[QaoaParams], float]:
    """Expectation of the cost over the exact ansatz state."""

    def evaluate(params: QaoaParams) -> float:
        return expectation(build_qaoa_state(poly, params), poly)

    return evaluate


def _spans(p: int) -> np.ndarray:
    return np.array([GAMMA_SPAN] * p + [BETA_SPAN] * p)


def _random_point(rng: np.random.Generator, p: int) -> np.ndarray:
    return rng.random(2 * p) * _spans(p)


def _nelder_mead(
    budget: _Budget,
    x0: np.ndarray,
    p: int,
    tolerance: float,
    noisy: bool,
) -> None:
    """Minimize within the budget; trace carries all state we report."""
    dim = 2 * p
    spans = _spans(p)

    simplex = [np.array(x0, dtype=float)]
    for i in range(dim):
        step = 0.1 * spans[i]
        vertex = simplex[0].copy()
        vertex[i] += step if vertex[i] + step < spans[i] else -step
        simplex.append(vertex)
    values = []
    for v in simplex:
        if budget.exhausted:
            return
        values.append(budget(v))

    iteration = 0
    while not budget.exhausted:
        order = np.argsort(np.array(values), kind="stable")
        simplex = [simplex[i] for i in order]
        values = [values[i] for i in order]

        finite = [v for v in values if math.isfinite(v)]
        if len(finite) == len(values) and max(values) - min(values) < tolerance:
            return

        iteration += 1
        if noisy and iteration % _INCUMBENT_REEVAL_PERIOD == 0:
            if budget.exhausted:
                return
            values[0] = budget(simplex[0])
            continue

        centroid = np.mean(simplex[:-1], axis=0)
        worst = simplex[-1]

        reflected = centroid + _REFLECT * (centroid - worst)
        if budget.exhausted:
            return
        f_r = budget(reflected)

        if f_r < values[0]:
            expanded = centroid + _EXPAND * (centroid - worst)
            if budget.exhausted:
                simplex[-1], values[-1] = reflected, f_r
                return
            f_e = budget(expanded)
            if f_e < f_r:
                simplex[-1], values[-1] = expanded, f_e
            else:
                simplex[-1], values[-1] = reflected, f_r
        elif f_r < values[-2]:
            simplex[-1], values[-1] = reflected, f_r
        else:
            if f_r < values[-1]:
                contracted = centroid + _CONTRACT * (reflected - centroid)
            else:
                contracted = centroid + _CONTRACT * (worst - centroid)
            if budget.exhausted:
                return
            f_c = budget(contracted)
            if f_c < min(f_r, values[-1]):
                simplex[-1], values[-1] = contracted, f_c
            else:
                # shrink toward the best vertex
                for i in range(1, len(simplex)):
                    simplex[i] = simplex[0] + _SHRINK * (simplex[i] - simplex[0])
                    if budget.exhausted:
                        return
                    values[i] = budget(simplex[i])


def _grid_scan(budget: _Budget, resolution: int) -> np.ndarray | None:
    """Coarse p=1 scan; returns the best (gamma, beta) found."""
    best_x: np.ndarray | None = None
    best_v = math.inf
    for gi in range(resolution):
        for bi in range(resolution):
            if budget.exhausted:
                return best_x
            x = np.array(
                [GAMMA_SPAN * gi / resolution, BETA_SPAN * bi / resolution]
            )
            v = budget(x)
            if v < best_v:
                best_v, best_x = v, x
    return best_x


def optimize(
    poly: SpinPolynomial,
    p: int,
    evaluator: Callable[[QaoaParams], float] | None,
    cfg: OptimizerConfig,
    seed: int = 0,
) -> OptimizationTrace:
    """Minimize the evaluator over 2p angles; deterministic under seed.

    ``evaluator`` defaults to the noiseless expectation for ``poly``.
    Restarts split the evaluation budget evenly; the best point across the
    whole trace wins.  Non-finite objective values stay in the trace but
    never become the incumbent.
    """
    if p < 1:
        raise ConfigError(f"p must be >= 1, got {p}")
    fn = evaluator if evaluator is not None else noiseless_evaluator(poly)
    budget = _Budget(fn, cfg.max_evaluations)

    # start points in priority order: grid scan result, explicit initial,
    # then seeded random points, truncated to the configured restart count
    starts: list[np.ndarray] = []
    if cfg.method == "grid_then_nelder_mead" and p == 1:
        grid_budget = min(cfg.grid_resolution**2, max(1, cfg.max_evaluations // 2))
        saved_limit = budget.limit
        budget.limit = grid_budget
        best = _grid_scan(budget, cfg.grid_resolution)
        budget.limit = saved_limit
        if best is not None:
            starts.append(best)
    if cfg.initial is not None:
        if len(cfg.initial) != 2 * p:
            raise ConfigError(
                f"initial point has {len(cfg.initial)} values, expected {2 * p}"
            )
        starts.append(np.array(cfg.initial, dtype=float))
    for r in range(cfg.restarts):
        if len(starts) >= cfg.restarts:
            break
        starts.append(_random_point(rng_from(seed, "nm-start", r), p))
    starts = starts[: cfg.restarts]

    per_start = max(1, (budget.limit - budget.used) // len(starts))
    for i, x0 in enumerate(starts):
        cap = budget.used + per_start if i < len(starts) - 1 else budget.limit
        saved_limit = budget.limit
        budget.limit = min(cap, saved_limit)
        _nelder_mead(budget, x0, p, cfg.tolerance, cfg.noisy)
        budget.limit = saved_limit
        if budget.exhausted:
            break

    finite = [(v, i) for i, (_, v) in enumerate(budget.trace) if math.isfinite(v)]
    if not finite:
        raise ConfigError("optimizer saw no finite objective value")
    best_v, best_i = min(finite)
    return OptimizationTrace(
        evaluations=tuple(budget.trace),
        best_params=budget.trace[best_i][0],
        best_value=float(best_v),
        num_evaluations=len(budget.trace),
    )
