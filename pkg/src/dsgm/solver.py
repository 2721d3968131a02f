"""Scaled-gradient iterations for ``min_x D(p || H x)`` subject to ``x >= 0``.

Three update rules share the split ``-dD/dx = U - V`` (``U, V >= 0``):

* additive:        ``x + alpha * x * (U - V)``
* preconditioned:  ``x + alpha * x * (U / V - 1)``
* multiplicative:  ``x * U / V``, optionally rescaled to a fixed sum

The two line-search rules take ``alpha`` from an Armijo backtracking search
started just inside the largest step that keeps every component of ``x``
non-negative.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple

import numpy as np

from .divergences import DivergenceSpec, Variant
from .errors import (
    DomainError,
    EvalError,
    LengthMismatch,
    LineSearchFailed,
    PreconditionerDegenerate,
)
from .operators import InverseProblem, neg_grad_split_x, objective_x

__all__ = [
    "Mode",
    "Status",
    "SolverConfig",
    "TraceRecord",
    "ConvergenceTrace",
    "max_step",
    "armijo_step",
    "iterate_additive",
    "iterate_preconditioned",
    "iterate_multiplicative",
    "solve",
]

log = logging.getLogger(__name__)

#: V components at or below this are refused by the ratio-based updates.
PRECONDITIONER_FLOOR = 1e-300

#: Line-search failures are treated as convergence (ValueTol) when D or the
#: predicted gain is below this multiple of the initial or current ``|D|``.
ROUNDING_GAIN = 1e3 * np.finfo(float).eps


class Mode(str, enum.Enum):
    ADDITIVE = "additive"
    PRECONDITIONED = "preconditioned"
    MULTIPLICATIVE = "multiplicative"


class Status(str, enum.Enum):
    GRAD_TOL = "GradTol"
    VALUE_TOL = "ValueTol"
    MAX_ITERS = "MaxIters"
    DEGENERATE = "Degenerate"


@dataclass(frozen=True)
class SolverConfig:
    """Solver settings.

    Parameters
    ----------
    spec : DivergenceSpec
        The divergence to minimise.
    mode : Mode
        Update rule.
    max_iters : int
        Iteration budget; 0 returns the starting point.
    grad_tol : float
        Stop once the infinity norm of ``-dD/dx`` is at most this.
    value_tol : float
        Stop once ``|D_k - D_{k+1}| <= value_tol * |D_k|``.
    armijo_c, backtrack_ratio : float
        Sufficient-decrease constant and backtracking factor, both in (0, 1).
    step_safety : float
        Fraction of the non-negativity limit used as the first trial step.
        Values below 1 keep iterates strictly positive.
    alpha_cap : float
        First trial step when no component limits the step.
    sum_constraint : float, optional
        Required ``sum(x)``.  With the multiplicative rule each iterate is
        rescaled to it.
    max_backtracks : int
        Armijo budget before :class:`LineSearchFailed`.
    degenerate_window : int
        Multiplicative runs stop with ``Degenerate`` when the value exceeds
        the one this many iterations earlier.
    """

    spec: DivergenceSpec
    mode: Mode = Mode.ADDITIVE
    max_iters: int = 10000
    grad_tol: float = 1e-8
    value_tol: float = 1e-12
    armijo_c: float = 1e-4
    backtrack_ratio: float = 0.5
    step_safety: float = 0.99
    alpha_cap: float = 1e4
    sum_constraint: float | None = None
    max_backtracks: int = 60
    degenerate_window: int = 10

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if int(self.max_iters) != self.max_iters or self.max_iters < 0:
            raise DomainError("max_iters must be a non-negative integer")
        object.__setattr__(self, "max_iters", int(self.max_iters))
        for name in ("grad_tol", "value_tol", "alpha_cap"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        for name in ("armijo_c", "backtrack_ratio"):
            if not 0 < getattr(self, name) < 1:
                raise DomainError(f"{name} must lie in (0, 1)")
        if not 0 < self.step_safety <= 1:
            raise DomainError("step_safety must lie in (0, 1]")
        if self.max_backtracks < 0 or self.degenerate_window < 1:
            raise DomainError("max_backtracks must be >= 0 and degenerate_window >= 1")
        if self.sum_constraint is not None:
            if not self.sum_constraint > 0:
                raise DomainError("sum_constraint must be positive")
            if self.mode is Mode.MULTIPLICATIVE and self.spec.variant is not Variant.INVARIANT:
                raise DomainError(
                    "the multiplicative rule with a sum constraint needs an invariant divergence"
                )


class TraceRecord(NamedTuple):
    iter: int
    value: float
    gradnorm: float
    alpha: float
    sum_x: float
    min_x: float


TRACE_COLUMNS = TraceRecord._fields


@dataclass
class ConvergenceTrace:
    """Per-iteration history; record ``k`` describes ``x_k``.

    ``alpha`` is the step that produced ``x_k`` (NaN for the starting point,
    1 for multiplicative updates).
    """

    records: list[TraceRecord] = field(default_factory=list)
    status: Status | None = None

    def append(self, rec: TraceRecord) -> None:
        self.records.append(rec)

    def column(self, name: str) -> np.ndarray:
        i = TRACE_COLUMNS.index(name)
        return np.array([r[i] for r in self.records], dtype=float)

    @property
    def values(self) -> np.ndarray:
        return self.column("value")

    @property
    def iterations(self) -> int:
        return self.records[-1].iter if self.records else 0

    def is_monotone(self, rtol: float = 1e-12) -> bool:
        v = self.values
        return bool(np.all(np.diff(v) <= rtol * np.abs(v[:-1])))

    def __len__(self):
        return len(self.records)


# ---------------------------------------------------------------------------
# step size


def max_step(x, d) -> float:
    """Largest ``alpha`` with ``x + alpha * d >= 0``; ``inf`` if ``d >= 0``."""
    x = np.asarray(x, dtype=float)
    d = np.asarray(d, dtype=float)
    if x.shape != d.shape:
        raise LengthMismatch("x and d must have the same length")
    neg = d < 0
    if not np.any(neg):
        return math.inf
    return float(np.min(-x[neg] / d[neg]))


def _armijo(fun, x, d, alpha_max, slope, value0, cfg):
    if not slope < 0:
        raise DomainError(f"not a descent direction (slope {slope!r})")
    alpha = alpha0 = min(cfg.step_safety * alpha_max, cfg.alpha_cap)
    for _ in range(cfg.max_backtracks + 1):
        trial = x + alpha * d
        if cfg.step_safety < 1 or np.all(trial >= 0):
            try:
                v = fun(np.maximum(trial, 0.0))
            except EvalError:
                v = math.nan
            if math.isfinite(v) and v <= value0 + cfg.armijo_c * alpha * slope:
                return alpha, v
        alpha *= cfg.backtrack_ratio
    raise LineSearchFailed(
        f"no sufficient decrease after {cfg.max_backtracks} backtracks "
        f"(value {value0!r}, slope {slope!r})",
        predicted=-slope * alpha0,
    )


def armijo_step(
    objective: Callable[[np.ndarray], float],
    x,
    d,
    alpha_max: float,
    slope: float,
    config: SolverConfig,
    value0: float | None = None,
) -> float:
    """Backtracking step from ``min(step_safety * alpha_max, alpha_cap)``.

    Parameters
    ----------
    objective : callable
        ``x -> D``.  Trial points where it raises :class:`EvalError` or
        returns a non-finite value are rejected.
    slope : float
        Directional derivative ``<grad D, d>``; must be negative.
    """
    x = np.asarray(x, dtype=float)
    if value0 is None:
        value0 = objective(x)
    return _armijo(objective, x, np.asarray(d, dtype=float), alpha_max, slope, value0, config)[0]


# ---------------------------------------------------------------------------
# iterations


def _split(config, problem, x):
    return neg_grad_split_x(config.spec, problem, x)


def _check_preconditioner(V):
    if np.any(V <= PRECONDITIONER_FLOOR):
        raise PreconditionerDegenerate(f"preconditioner component {float(np.min(V))!r} is not positive")


def _line_search_update(config, problem, x, d, slope, value0):
    if np.all(d == 0):
        return x.copy(), 0.0, value0
    fun = lambda z: objective_x(config.spec, problem, z)  # noqa: E731
    if value0 is None:
        value0 = fun(x)
    alpha, v = _armijo(fun, x, d, max_step(x, d), slope, value0, config)
    return np.maximum(x + alpha * d, 0.0), alpha, v


def _additive(config, problem, x, value0=None):
    U, V = _split(config, problem, x)
    g = U - V
    d = x * g
    return _line_search_update(config, problem, x, d, -float(np.sum(x * g * g)), value0)


def _preconditioned(config, problem, x, value0=None):
    U, V = _split(config, problem, x)
    _check_preconditioner(V)
    ratio = U / V - 1.0
    d = x * ratio
    return _line_search_update(config, problem, x, d, -float(np.sum(d * (U - V))), value0)


def _multiplicative(config, problem, x, value0=None):
    U, V = _split(config, problem, x)
    _check_preconditioner(V)
    with np.errstate(invalid="ignore", over="ignore"):
        xt = x * (U / V)
        C = config.sum_constraint
        if C is not None:
            xt = C * xt / np.sum(xt)
    if not np.all(np.isfinite(xt)) or np.any(xt <= 0):
        raise EvalError("multiplicative update left the positive finite range")
    return xt, 1.0, None


_STEP = {
    Mode.ADDITIVE: _additive,
    Mode.PRECONDITIONED: _preconditioned,
    Mode.MULTIPLICATIVE: _multiplicative,
}


def _check_start(config, problem, x):
    x = np.array(x, dtype=float)
    if x.shape != (problem.n,):
        raise LengthMismatch(f"x has shape {x.shape}, expected ({problem.n},)")
    if not np.all(np.isfinite(x)) or np.any(x <= 0):
        raise DomainError("iterates must be finite and strictly positive")
    return x


def iterate_additive(config: SolverConfig, problem: InverseProblem, x) -> np.ndarray:
    """One additive step with max-step and Armijo search."""
    return _additive(config, problem, _check_start(config, problem, x))[0]


def iterate_preconditioned(config: SolverConfig, problem: InverseProblem, x) -> np.ndarray:
    """One step along ``x * (U / V - 1)``."""
    return _preconditioned(config, problem, _check_start(config, problem, x))[0]


def iterate_multiplicative(config: SolverConfig, problem: InverseProblem, x) -> np.ndarray:
    """``x * U / V``, rescaled to ``config.sum_constraint`` when set."""
    return _multiplicative(config, problem, _check_start(config, problem, x))[0]


# ---------------------------------------------------------------------------
# driver


def solve(config: SolverConfig, problem: InverseProblem, x0) -> tuple[np.ndarray, ConvergenceTrace]:
    """Iterate until a stopping rule fires.

    Returns the final iterate and its trace.  Stopping is checked in the
    order gradient norm, multiplicative degeneration, relative value change,
    iteration budget.
    """
    x = _check_start(config, problem, x0)
    if config.sum_constraint is None and problem.sum_constraint is not None:
        config = replace(config, sum_constraint=problem.sum_constraint)
    C = config.sum_constraint
    if C is not None and abs(np.sum(x) - C) > 1e-9 * C:
        raise DomainError(f"sum(x0) = {np.sum(x)!r} does not match the constraint {C!r}")

    step = _STEP[config.mode]
    spec = config.spec
    trace = ConvergenceTrace()

    def gradnorm(z):
        U, V = neg_grad_split_x(spec, problem, z)
        return float(np.max(np.abs(U - V)))

    v = objective_x(spec, problem, x)
    gn = gradnorm(x)
    trace.append(TraceRecord(0, v, gn, math.nan, float(np.sum(x)), float(np.min(x))))

    status = Status.MAX_ITERS
    for k in range(1, config.max_iters + 1):
        if gn <= config.grad_tol:
            status = Status.GRAD_TOL
            break
        try:
            x_new, alpha, v_new = step(config, problem, x, v)
            if v_new is None:
                v_new = objective_x(spec, problem, x_new)
                if not math.isfinite(v_new):
                    raise EvalError("divergence overflowed")
        except EvalError as exc:
            if config.mode is not Mode.MULTIPLICATIVE:
                raise
            log.warning("multiplicative iteration stopped at %d: %s", k, exc)
            status = Status.DEGENERATE
            break
        except LineSearchFailed as exc:
            # D already at its rounding floor, or a predicted gain below it:
            # x is as good as floating point can resolve.  Anything else is a
            # real value/gradient inconsistency.
            floor = ROUNDING_GAIN * max(abs(v), abs(trace.records[0].value))
            gain = exc.predicted if exc.predicted is not None else math.inf
            if abs(v) <= floor or gain <= floor:
                log.info("line search at rounding level; stopping at iteration %d", k - 1)
                status = Status.VALUE_TOL
                break
            raise
        gn = gradnorm(x_new)
        trace.append(
            TraceRecord(k, v_new, gn, alpha, float(np.sum(x_new)), float(np.min(x_new)))
        )
        v_old, x = v, x_new
        v = v_new
        if gn <= config.grad_tol:
            status = Status.GRAD_TOL
            break
        w = config.degenerate_window
        if config.mode is Mode.MULTIPLICATIVE and k >= w and v > trace.records[k - w].value:
            log.warning("multiplicative iteration stopped: value rose over %d steps", w)
            status = Status.DEGENERATE
            break
        if abs(v_old - v) <= config.value_tol * abs(v_old):
            status = Status.VALUE_TOL
            break
    else:
        if gn <= config.grad_tol:
            status = Status.GRAD_TOL
    trace.status = status
    return x, trace
