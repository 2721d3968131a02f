"""Uniform access to any divergence described by a :class:`DivergenceSpec`.

Everything works in q-space: ``value(spec, p, q)`` is ``D(p || q)`` (or its
invariant counterpart), ``neg_grad`` is ``-dD/dq`` and ``neg_grad_split``
returns non-negative ``U, V`` with ``-dD/dq = U - V``.
"""

from __future__ import annotations

import numpy as np

from .divergences import (
    DivergenceSpec,
    GradientSplit,
    Variant,
    plain_neg_grad,
    plain_split,
    plain_value,
)
from .invariance import invariant_neg_grad, invariant_split, invariant_value

__all__ = ["value", "neg_grad", "neg_grad_split"]


def value(spec: DivergenceSpec, p, q) -> float:
    if spec.variant is Variant.INVARIANT:
        return invariant_value(spec, p, q)
    return plain_value(spec.family, spec.form, p, q)


def neg_grad(spec: DivergenceSpec, p, q) -> np.ndarray:
    if spec.variant is Variant.INVARIANT:
        return invariant_neg_grad(spec, p, q)
    return plain_neg_grad(spec.family, spec.form, p, q)


def neg_grad_split(spec: DivergenceSpec, p, q) -> GradientSplit:
    if spec.variant is Variant.INVARIANT:
        return invariant_split(spec, p, q)
    return plain_split(spec.family, spec.form, p, q)
