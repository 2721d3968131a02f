"""Generalized divergences and scaled-gradient reconstruction.

Subpackages, from the bottom up:

* :mod:`dsgm.entropy` - entropy families, convex generators, deformed logs
* :mod:`dsgm.divergences` - Csiszar/Bregman divergences and their duals
* :mod:`dsgm.invariance` - invariance factors and scale-invariant divergences
* :mod:`dsgm.operators` - forward models ``q = H x``
* :mod:`dsgm.solver` - additive, preconditioned and multiplicative iterations
* :mod:`dsgm.cli` - the ``dsgm`` command
"""

from .divergences import DivergenceSpec, FactorChoice, Form, GradientSplit, Variant
from .entropy import EntropyFamily, Tag, parse_family, to_ab
from .errors import (
    DomainError,
    DsgmError,
    EvalError,
    LengthMismatch,
    LineSearchFailed,
    ModelDegenerate,
    NotReducible,
    PreconditionerDegenerate,
    Unsupported,
)
from .objective import neg_grad, neg_grad_split, value
from .operators import Convolution1D, DenseMatrix, InverseProblem
from .solver import ConvergenceTrace, Mode, SolverConfig, Status, solve

__version__ = "0.1.0"

__all__ = [
    "DivergenceSpec",
    "FactorChoice",
    "Form",
    "GradientSplit",
    "Variant",
    "EntropyFamily",
    "Tag",
    "parse_family",
    "to_ab",
    "DomainError",
    "DsgmError",
    "EvalError",
    "LengthMismatch",
    "LineSearchFailed",
    "ModelDegenerate",
    "NotReducible",
    "PreconditionerDegenerate",
    "Unsupported",
    "neg_grad",
    "neg_grad_split",
    "value",
    "Convolution1D",
    "DenseMatrix",
    "InverseProblem",
    "ConvergenceTrace",
    "Mode",
    "SolverConfig",
    "Status",
    "solve",
]
