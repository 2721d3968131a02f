"""Forward linear models ``q = H x`` and the chain rule into x-space."""

from __future__ import annotations

import abc
from dataclasses import dataclass

import numpy as np

from . import objective
from .divergences import DivergenceSpec, Form, GradientSplit, as_vector
from .errors import DomainError, LengthMismatch, ModelDegenerate

__all__ = [
    "LinearOperator",
    "DenseMatrix",
    "Convolution1D",
    "InverseProblem",
    "forward",
    "adjoint_apply",
    "model",
    "objective_x",
    "neg_grad_x",
    "neg_grad_split_x",
]


def _vector(x, n, name):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise LengthMismatch(f"{name} must be 1-D")
    if x.size != n:
        raise LengthMismatch(f"{name} has length {x.size}, expected {n}")
    return x


class LinearOperator(abc.ABC):
    """Non-negative linear map from R^n to R^m."""

    shape: tuple[int, int]

    @abc.abstractmethod
    def _apply(self, x: np.ndarray) -> np.ndarray: ...

    @abc.abstractmethod
    def _apply_adjoint(self, y: np.ndarray) -> np.ndarray: ...

    def apply(self, x) -> np.ndarray:
        return self._apply(_vector(x, self.shape[1], "x"))

    def adjoint(self, y) -> np.ndarray:
        return self._apply_adjoint(_vector(y, self.shape[0], "y"))

    def to_dense(self) -> np.ndarray:
        n = self.shape[1]
        return np.column_stack([self._apply(e) for e in np.eye(n)])


class DenseMatrix(LinearOperator):
    def __init__(self, entries):
        a = np.array(entries, dtype=float, ndmin=2)
        if a.ndim != 2 or a.size == 0:
            raise LengthMismatch("operator entries must form a non-empty 2-D array")
        if not np.all(np.isfinite(a)) or np.any(a < 0):
            raise DomainError("operator entries must be finite and non-negative")
        a.setflags(write=False)
        self.entries = a
        self.shape = a.shape

    def _apply(self, x):
        return self.entries @ x

    def _apply_adjoint(self, y):
        return self.entries.T @ y

    def __repr__(self):
        return f"DenseMatrix(shape={self.shape})"


class Convolution1D(LinearOperator):
    """Square 1-D convolution by direct summation.

    The kernel is centred on index ``len(kernel) // 2``.  With periodic
    boundaries the columns of H are circular shifts of the kernel, so
    ``sum(H x) = sum(kernel) * sum(x)``.  Zero padding drops the mass that
    leaves the support.
    """

    BOUNDARIES = ("periodic", "zero")

    def __init__(self, kernel, n: int, boundary: str = "periodic"):
        k = np.array(kernel, dtype=float, ndmin=1)
        if k.ndim != 1 or k.size == 0:
            raise LengthMismatch("kernel must be a non-empty 1-D array")
        if not np.all(np.isfinite(k)) or np.any(k < 0):
            raise DomainError("kernel entries must be finite and non-negative")
        boundary = {"zero-pad": "zero", "zero_pad": "zero", "zeropad": "zero"}.get(
            boundary, boundary
        )
        if boundary not in self.BOUNDARIES:
            raise DomainError(f"boundary must be 'periodic' or 'zero', got {boundary!r}")
        n = int(n)
        if n < 1:
            raise DomainError("n must be positive")
        if boundary == "periodic" and k.size > n:
            raise DomainError(f"periodic kernel of width {k.size} exceeds n={n}")
        k.setflags(write=False)
        self.kernel = k
        self.boundary = boundary
        self.shape = (n, n)
        offsets = np.arange(k.size) - k.size // 2
        # out[i] = sum_s kernel[s] * x[i - s]; gather tables for H and H^T
        self._fwd = self._gather(offsets, n)
        self._adj = self._gather(-offsets, n)

    def _gather(self, offsets, n):
        src = np.arange(n)[None, :] - offsets[:, None]
        if self.boundary == "periodic":
            return src % n, None
        mask = (src >= 0) & (src < n)
        return np.clip(src, 0, n - 1), mask

    def _convolve(self, x, table):
        idx, mask = table
        cols = x[idx]
        if mask is not None:
            cols = np.where(mask, cols, 0.0)
        return self.kernel @ cols

    def _apply(self, x):
        return self._convolve(x, self._fwd)

    def _apply_adjoint(self, y):
        return self._convolve(y, self._adj)

    def __repr__(self):
        return f"Convolution1D(width={self.kernel.size}, n={self.shape[0]}, boundary={self.boundary!r})"


@dataclass(frozen=True)
class InverseProblem:
    operator: LinearOperator
    p: np.ndarray
    sum_constraint: float | None = None

    def __post_init__(self):
        p = _vector(self.p, self.operator.shape[0], "p")
        as_vector(p, "p")
        object.__setattr__(self, "p", p)
        if self.sum_constraint is not None:
            if not self.sum_constraint > 0:
                raise DomainError("sum_constraint must be positive")
            object.__setattr__(self, "sum_constraint", float(self.sum_constraint))

    @property
    def n(self) -> int:
        return self.operator.shape[1]


def forward(op: LinearOperator, x) -> np.ndarray:
    return op.apply(x)


def adjoint_apply(op: LinearOperator, g) -> np.ndarray:
    return op.adjoint(g)


def model(spec: DivergenceSpec, problem: InverseProblem, x) -> np.ndarray:
    """``q = H x``, checked for the zeros the divergence cannot take."""
    q = forward(problem.operator, x)
    if np.any(q <= 0):
        raise ModelDegenerate("the model H x has a zero component")
    if spec.form in (Form.CSISZAR_DUAL, Form.BREGMAN_DUAL) and np.any(problem.p <= 0):
        raise ModelDegenerate("dual divergences need strictly positive data p")
    return q


def objective_x(spec: DivergenceSpec, problem: InverseProblem, x) -> float:
    """``D(p || H x)``."""
    return objective.value(spec, problem.p, model(spec, problem, x))


def neg_grad_x(spec: DivergenceSpec, problem: InverseProblem, x) -> np.ndarray:
    """``-dD/dx = H^T (-dD/dq)`` at ``q = H x``."""
    q = model(spec, problem, x)
    return adjoint_apply(problem.operator, objective.neg_grad(spec, problem.p, q))


def neg_grad_split_x(spec: DivergenceSpec, problem: InverseProblem, x) -> GradientSplit:
    """``(H^T U, H^T V)``; non-negative because H is."""
    q = model(spec, problem, x)
    U, V = objective.neg_grad_split(spec, problem.p, q)
    op = problem.operator
    return GradientSplit(adjoint_apply(op, U), adjoint_apply(op, V))
