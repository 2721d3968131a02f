"""Central finite-difference checks of analytic negative gradients."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import objective
from .divergences import DivergenceSpec, as_pair

__all__ = ["random_pair", "fd_neg_grad", "relative_error", "GradcheckResult", "gradcheck"]

DEFAULT_TOL = 1e-5
REL_STEP = 1e-6


def random_pair(seed: int, n: int = 6, low: float = 0.1, high: float = 10.0):
    """Two strictly positive vectors with components uniform in [low, high]."""
    rng = np.random.default_rng(seed)
    return rng.uniform(low, high, n), rng.uniform(low, high, n)


def fd_neg_grad(fun: Callable[[np.ndarray], float], q, rel_step: float = REL_STEP) -> np.ndarray:
    """``-dfun/dq`` by central differences with step ``rel_step * max(q_j, 1)``."""
    q = np.asarray(q, dtype=float)
    out = np.empty_like(q)
    for j in range(q.size):
        h = rel_step * max(q[j], 1.0)
        up, dn = q.copy(), q.copy()
        up[j] += h
        dn[j] -= h
        out[j] = -(fun(up) - fun(dn)) / (2 * h)
    return out


def relative_error(analytic, numeric) -> float:
    """``max|a - n| / max(max|a|, max|n|, 1e-12)``."""
    a = np.asarray(analytic, dtype=float)
    n = np.asarray(numeric, dtype=float)
    scale = max(float(np.max(np.abs(a))), float(np.max(np.abs(n))), 1e-12)
    return float(np.max(np.abs(a - n))) / scale


@dataclass(frozen=True)
class GradcheckResult:
    spec: DivergenceSpec
    analytic: np.ndarray
    numeric: np.ndarray
    max_rel_err: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.max_rel_err <= self.tol)


def gradcheck(spec: DivergenceSpec, p, q, tol: float = DEFAULT_TOL) -> GradcheckResult:
    """Compare ``objective.neg_grad`` with differences of ``objective.value`` in q."""
    p, q = as_pair(p, q)
    analytic = objective.neg_grad(spec, p, q)
    numeric = fd_neg_grad(lambda z: objective.value(spec, p, z), q)
    return GradcheckResult(spec, analytic, numeric, relative_error(analytic, numeric), tol)
