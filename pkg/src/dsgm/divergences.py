"""Plain Csiszar, dual Csiszar, Bregman and dual Bregman divergences.

All values are separable sums over components; all gradients are the
*negative* gradients with respect to the model ``q`` (the convention used by
the multiplicative algorithms).  Families reducible to an (a, b) pair go
through the closed two-exponent formulas; Shannon, Newton and Alpha have
their own expressions.  When ``|a - b|`` is below
:data:`~dsgm.entropy.DEGENERACY_THRESHOLD` the generic route built from
``f``, ``f'`` and ``f''`` in their logarithmic limit form is used instead.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import entropy as ez
from .entropy import EntropyFamily, Tag, powz
from .errors import EvalError, LengthMismatch, Unsupported

log = logging.getLogger(__name__)

__all__ = [
    "Form",
    "Variant",
    "FactorChoice",
    "DivergenceSpec",
    "GradientSplit",
    "as_vector",
    "as_pair",
    "csiszar_value",
    "csiszar_neg_grad",
    "csiszar_dual_value",
    "csiszar_dual_neg_grad",
    "bregman_value",
    "bregman_neg_grad",
    "bregman_dual_value",
    "bregman_dual_neg_grad",
    "plain_value",
    "plain_neg_grad",
    "plain_split",
    "positive_part_split",
]


class Form(str, enum.Enum):
    CSISZAR = "csiszar"
    CSISZAR_DUAL = "csiszar_dual"
    BREGMAN = "bregman"
    BREGMAN_DUAL = "bregman_dual"


class Variant(str, enum.Enum):
    PLAIN = "plain"
    INVARIANT = "invariant"


class FactorChoice(str, enum.Enum):
    REFERENCE = "reference"  # sum(p) / sum(q)
    NOMINAL = "nominal"  # Tsallis-only closed-form minimiser over K


@dataclass(frozen=True)
class DivergenceSpec:
    """Which functional to evaluate: family x form x variant x factor."""

    family: EntropyFamily
    form: Form = Form.CSISZAR
    variant: Variant = Variant.PLAIN
    factor: FactorChoice = FactorChoice.REFERENCE

    def __post_init__(self):
        object.__setattr__(self, "form", Form(self.form))
        object.__setattr__(self, "variant", Variant(self.variant))
        object.__setattr__(self, "factor", FactorChoice(self.factor))
        tag = self.family.tag
        if tag is Tag.ALPHA and self.form in (Form.BREGMAN, Form.BREGMAN_DUAL):
            raise Unsupported("Bregman divergences of the alpha logarithm are not provided")
        if self.variant is Variant.INVARIANT:
            if tag in (Tag.NEWTON, Tag.ALPHA):
                raise Unsupported(f"no invariant divergences for the {tag.value} family")
            if self.factor is FactorChoice.NOMINAL and tag is not Tag.TSALLIS:
                raise Unsupported("the nominal invariance factor exists only for tsallis")

    def __str__(self):
        s = f"{self.form.value}/{self.variant.value} [{self.family}]"
        if self.variant is Variant.INVARIANT:
            s += f" factor={self.factor.value}"
        return s


class GradientSplit(NamedTuple):
    """Non-negative parts of the negative gradient: ``-grad = U - V``."""

    U: np.ndarray
    V: np.ndarray


# ---------------------------------------------------------------------------
# input handling


def _bounds(x):
    # one pass each; NaN propagates through min and max
    return float(x.min()), float(x.max())


def as_vector(x, name="vector") -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise LengthMismatch(f"{name} must be a non-empty 1-D vector")
    lo, hi = _bounds(x)
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise EvalError(f"{name} has non-finite components")
    if lo < 0:
        raise EvalError(f"{name} has negative components")
    return x


def as_pair(p, q, *, p_positive=False, q_positive=True):
    p = as_vector(p, "p")
    q = as_vector(q, "q")
    if p.shape != q.shape:
        raise LengthMismatch(f"p has length {p.size} but q has length {q.size}")
    if q_positive and q.min() == 0:
        raise EvalError("q must be strictly positive")
    if p_positive and p.min() == 0:
        raise EvalError("p must be strictly positive")
    return p, q


def _ab(family):
    """(a, b) for the closed-form path, or None when another route applies."""
    if family.tag in (Tag.SHANNON, Tag.NEWTON, Tag.ALPHA):
        return None
    a, b = ez.to_ab(family)
    if ez.is_degenerate(a, b):
        return None
    return a, b


def _degenerate_c(family):
    """Midpoint exponent ``c`` when *family* takes the ``x^c ln x`` limit, else None."""
    if family.tag in (Tag.SHANNON, Tag.NEWTON, Tag.ALPHA):
        return None
    a, b = ez.to_ab(family)
    return 0.5 * (a + b) if ez.is_degenerate(a, b) else None


def _reject_alpha_bregman(family):
    if family.tag is Tag.ALPHA:
        raise Unsupported("Bregman divergences of the alpha logarithm are not provided")


# ---------------------------------------------------------------------------
# accurate per-component terms
#
# With L = ln(p/q) every power ratio is r^c = 1 + c L + E(c L), E(x) = e^x - 1 - x.
# Writing the terms through E removes the first-order parts exactly, so a term
# of size O(L^2) is not computed as a difference of O(1) quantities.


def _expm1_rem(x):
    """``expm1(x) - x``, accurate for small ``|x|``."""
    x = np.asarray(x, dtype=float)
    with np.errstate(invalid="ignore", over="ignore"):
        out = np.expm1(x) - x
    small = np.abs(x) < 1e-2
    if np.any(small):
        xs = x[small]
        acc = np.full_like(xs, 1.0 / 40320)
        for k in (5040, 720, 120, 24, 6, 2):
            acc = 1.0 / k + xs * acc
        out[small] = xs * xs * acc
    return out


def _log_ratio(p, q):
    """Mask of ``p > 0`` and ``ln(p/q)`` on that mask."""
    pos = p > 0
    return pos, np.log(p[pos] / q[pos])


def _kl_terms(p, q):
    """``p ln(p/q) - p + q`` as ``q [L expm1(L) - E(L)]``; ``q`` where ``p = 0``."""
    terms = q.copy()
    pos, L = _log_ratio(p, q)
    terms[pos] = q[pos] * (L * np.expm1(L) - _expm1_rem(L))
    return terms


# ---------------------------------------------------------------------------
# Csiszar


def csiszar_value(family: EntropyFamily, p, q) -> float:
    """``sum_i q_i f_c(p_i / q_i)``; zero iff ``p == q``."""
    p, q = as_pair(p, q)
    r = p / q
    ab = _ab(family)
    if ab is not None:
        a, b = ab
        terms = np.empty_like(q)
        pos, L = _log_ratio(p, q)
        terms[pos] = q[pos] * ((_expm1_rem(a * L) - _expm1_rem(b * L)) / (a - b) - _expm1_rem(L))
        r0 = r[~pos]
        terms[~pos] = q[~pos] * ((powz(r0, a) - powz(r0, b)) / (a - b) + 1.0)
    elif family.tag is Tag.SHANNON:
        terms = _kl_terms(p, q)
    elif (c := _degenerate_c(family)) is not None:
        # f(r) = r^c L: f(r) - r + 1 = c L^2 + L E(cL) - E(L)
        terms = q.copy()
        pos, L = _log_ratio(p, q)
        terms[pos] = q[pos] * (c * L * L + L * _expm1_rem(c * L) - _expm1_rem(L))
    else:
        terms = q * ez.f_c(family, r)
    return float(np.sum(terms))


def csiszar_neg_grad(family: EntropyFamily, p, q) -> np.ndarray:
    p, q = as_pair(p, q)
    r = p / q
    ab = _ab(family)
    if ab is not None:
        a, b = ab
        return (a - 1) / (a - b) * powz(r, a) + (1 - b) / (a - b) * powz(r, b) - 1.0
    tag = family.tag
    if tag is Tag.SHANNON:
        return r - 1.0
    if tag is Tag.NEWTON:
        return r * (0.5 * r + 0.5) - 1.0
    if tag is Tag.ALPHA:
        (al,) = family.params
        with np.errstate(divide="ignore"):
            s = powz(r, al) + powz(r, -al)
        return r * 4.0 / (s * s) - 1.0
    # degenerate (a, b): r f'(r) - f(r) - 1
    return _generic_csiszar_grad(family, r)


def _generic_csiszar_grad(family, r):
    fr = ez.f(family, r)
    if np.any(r == 0):
        out = np.empty_like(r)
        pos = r > 0
        out[pos] = r[pos] * ez.df(family, r[pos]) - fr[pos] - 1.0
        out[~pos] = -fr[~pos] - 1.0
        return out
    return r * ez.df(family, r) - fr - 1.0


def csiszar_dual_value(family: EntropyFamily, p, q) -> float:
    """Csiszar divergence with the arguments exchanged, ``C(q || p)``."""
    p, q = as_pair(p, q, p_positive=True)
    return csiszar_value(family, q, p)


def csiszar_dual_neg_grad(family: EntropyFamily, p, q) -> np.ndarray:
    p, q = as_pair(p, q, p_positive=True)
    r = p / q
    ab = _ab(family)
    if ab is not None:
        a, b = ab
        return (b * r ** (1 - b) - a * r ** (1 - a)) / (a - b) + 1.0
    tag = family.tag
    if tag is Tag.SHANNON:
        return np.log(r)
    if tag is Tag.NEWTON:
        return 0.5 * np.log(r) + 1.0 - 1.0 / r
    if tag is Tag.ALPHA:
        (al,) = family.params
        p2, q2 = p ** (2 * al), q ** (2 * al)
        R = (p2 - q2) / (p2 + q2)
        return R / al + R * R
    return 1.0 - ez.df(family, q / p)


# ---------------------------------------------------------------------------
# Bregman


def bregman_value(family: EntropyFamily, p, q) -> float:
    """``sum_i f(p_i) - f(q_i) - (p_i - q_i) f'(q_i)``."""
    _reject_alpha_bregman(family)
    p, q = as_pair(p, q)
    ab = _ab(family)
    if ab is not None:
        a, b = ab
        terms = np.empty_like(q)
        pos, L = _log_ratio(p, q)
        qp, ea = q[pos], _expm1_rem(L)
        terms[pos] = (
            qp**a * (_expm1_rem(a * L) - a * ea) - qp**b * (_expm1_rem(b * L) - b * ea)
        ) / (a - b)
        q0 = q[~pos]
        terms[~pos] = ((a - 1) * q0**a - (b - 1) * q0**b) / (a - b)
    elif family.tag is Tag.SHANNON:
        terms = _kl_terms(p, q)
    elif (c := _degenerate_c(family)) is not None:
        # q^c [ln q (E(cL) - c E(L)) + c L^2 + L E(cL) - E(L)], L = ln(p/q)
        terms = np.empty_like(q)
        pos, L = _log_ratio(p, q)
        qp, ec, e1 = q[pos], _expm1_rem(c * L), _expm1_rem(L)
        terms[pos] = qp**c * (np.log(qp) * (ec - c * e1) + c * L * L + L * ec - e1)
        q0 = q[~pos]
        terms[~pos] = (c - 1) * q0**c * np.log(q0) + q0**c
    elif family.tag is Tag.NEWTON:
        terms = 0.5 * (p * p - p + ez._xlogx(p) + q * q + q - 2 * p * q - p * np.log(q))
    else:
        terms = ez.f(family, p) - ez.f(family, q) - (p - q) * ez.df(family, q)
    return float(np.sum(terms))


def _bregman_weight(family, q):
    """Non-negative factor Z with ``-grad = (p/q - 1) * Z``."""
    ab = _ab(family)
    if ab is not None:
        a, b = ab
        return (a * a - a) / (a - b) * q ** (a - 1) + (b - b * b) / (a - b) * q ** (b - 1)
    if family.tag is Tag.SHANNON:
        return np.ones_like(q)
    if family.tag is Tag.NEWTON:
        return 0.5 + q
    # degenerate: (p - q) f''(q) = (p/q - 1) q f''(q)
    return q * ez.d2f(family, q)


def bregman_neg_grad(family: EntropyFamily, p, q) -> np.ndarray:
    _reject_alpha_bregman(family)
    p, q = as_pair(p, q)
    return (p / q - 1.0) * _bregman_weight(family, q)


def bregman_dual_value(family: EntropyFamily, p, q) -> float:
    """Bregman divergence with the arguments exchanged, ``B(q || p)``."""
    _reject_alpha_bregman(family)
    p, q = as_pair(p, q, p_positive=True)
    return bregman_value(family, q, p)


def _bregman_dual_terms(family, p, q):
    """(P, Q) with ``-grad = P - Q``; see :func:`bregman_dual_neg_grad`."""
    ab = _ab(family)
    if ab is not None:
        a, b = ab
        # (a p^{a-1} + b q^{b-1}) - (a q^{a-1} + b p^{b-1}), over (a - b)
        return (
            (a * p ** (a - 1) + b * q ** (b - 1)) / (a - b),
            (a * q ** (a - 1) + b * p ** (b - 1)) / (a - b),
        )
    if family.tag is Tag.NEWTON:
        return p + 0.5 * np.log(p), q + 0.5 * np.log(q)
    if family.tag is Tag.SHANNON:
        return np.log(p), np.log(q)
    return ez.df(family, p), ez.df(family, q)


def bregman_dual_neg_grad(family: EntropyFamily, p, q) -> np.ndarray:
    _reject_alpha_bregman(family)
    p, q = as_pair(p, q, p_positive=True)
    ab = _ab(family)
    if ab is not None:
        a, b = ab
        return (a * (p ** (a - 1) - q ** (a - 1)) - b * (p ** (b - 1) - q ** (b - 1))) / (a - b)
    if family.tag is Tag.SHANNON:
        return np.log(p / q)
    P, Q = _bregman_dual_terms(family, p, q)
    return P - Q


# ---------------------------------------------------------------------------
# dispatch by form

_VALUE = {
    Form.CSISZAR: csiszar_value,
    Form.CSISZAR_DUAL: csiszar_dual_value,
    Form.BREGMAN: bregman_value,
    Form.BREGMAN_DUAL: bregman_dual_value,
}
_NEG_GRAD = {
    Form.CSISZAR: csiszar_neg_grad,
    Form.CSISZAR_DUAL: csiszar_dual_neg_grad,
    Form.BREGMAN: bregman_neg_grad,
    Form.BREGMAN_DUAL: bregman_dual_neg_grad,
}


def plain_value(family: EntropyFamily, form: Form, p, q) -> float:
    return _VALUE[Form(form)](family, p, q)


def plain_neg_grad(family: EntropyFamily, form: Form, p, q) -> np.ndarray:
    return _NEG_GRAD[Form(form)](family, p, q)


def positive_part_split(g, offset=1.0) -> GradientSplit:
    """Split with no sign structure: ``U = max(g, 0) + c``, ``V = max(-g, 0) + c``."""
    g = np.asarray(g, dtype=float)
    return GradientSplit(np.maximum(g, 0.0) + offset, np.maximum(-g, 0.0) + offset)


def plain_split(family: EntropyFamily, form: Form, p, q) -> GradientSplit:
    """Decompose the negative gradient into ``U - V`` with ``U, V >= 0``.

    For the dual forms the assignment of the two power terms to U and V
    depends on the sign of ``a - b``.  Shannon dual and Newton dual Bregman
    have no sign-stable two-term split and fall back to positive parts.
    """
    form = Form(form)
    tag = family.tag
    ab = _ab(family)
    if form is Form.CSISZAR:
        p, q = as_pair(p, q)
        r = p / q
        if ab is not None:
            a, b = ab
            U = (a - 1) / (a - b) * powz(r, a) + (1 - b) / (a - b) * powz(r, b)
            return GradientSplit(U, np.ones_like(r))
        if tag is Tag.SHANNON:
            return GradientSplit(r, np.ones_like(r))
        if tag is Tag.NEWTON:
            return GradientSplit(r * (0.5 * r + 0.5), np.ones_like(r))
        if tag is Tag.ALPHA:
            g = csiszar_neg_grad(family, p, q)
            return GradientSplit(g + 1.0, np.ones_like(r))
        return positive_part_split(csiszar_neg_grad(family, p, q))
    if form is Form.CSISZAR_DUAL:
        p, q = as_pair(p, q, p_positive=True)
        r = p / q
        if ab is not None:
            a, b = ab
            # -grad = [b r^{1-b} + (a - b)] / (a-b) - a r^{1-a} / (a-b)
            first = b * r ** (1 - b) / (a - b)
            second = a * r ** (1 - a) / (a - b)
            if a > b:
                return GradientSplit(first + 1.0, second)
            log.debug("dual split branch a<b")
            return GradientSplit(-second + 1.0, -first)
        if tag is Tag.NEWTON:
            h = 0.5 * np.log(r)
            return GradientSplit(np.maximum(h, 0.0) + 1.0, np.maximum(-h, 0.0) + 1.0 / r)
        return positive_part_split(csiszar_dual_neg_grad(family, p, q))
    if form is Form.BREGMAN:
        _reject_alpha_bregman(family)
        p, q = as_pair(p, q)
        Z = _bregman_weight(family, q)
        if ab is None and tag not in (Tag.SHANNON, Tag.NEWTON):
            return positive_part_split((p / q - 1.0) * Z)
        return GradientSplit(p / q * Z, Z)
    # BREGMAN_DUAL
    _reject_alpha_bregman(family)
    p, q = as_pair(p, q, p_positive=True)
    if ab is not None:
        a, b = ab
        P, Q = _bregman_dual_terms(family, p, q)
        if a > b:
            return GradientSplit(P, Q)
        log.debug("dual split branch a<b")
        return GradientSplit(-Q, -P)
    return positive_part_split(bregman_dual_neg_grad(family, p, q))
