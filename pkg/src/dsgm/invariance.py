"""Scale-invariant divergences and invariance factors.

An invariance factor ``K(p, q)`` is a positive scalar with
``K(p, lam * q) = K(p, q) / lam``, so the rescaled model ``K q`` and every
divergence evaluated at it do not change when ``q`` is multiplied by a
constant.  Two choices are provided:

* the reference factor ``sum(p) / sum(q)``, usable with every (a, b) family;
* the Tsallis nominal factors, the closed-form minimisers over ``K`` of the
  four Tsallis divergences.

Invariant divergences are written in the normalized variables
``p_bar = p / sum(p)`` and ``q_bar = q / sum(q)``.  All of them satisfy the
Euler identity ``sum_j q_j dD/dq_j = 0``; the additive algorithm relies on it
to keep ``sum(x)`` fixed.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import entropy as ez
from .divergences import (
    DivergenceSpec,
    FactorChoice,
    Form,
    GradientSplit,
    Variant,
    as_pair,
    plain_neg_grad,
    plain_split,
    plain_value,
    positive_part_split,
)
from .entropy import EntropyFamily, Tag
from .errors import DomainError, EvalError, Unsupported

__all__ = [
    "FactorKind",
    "InvarianceFactor",
    "NormalizedPair",
    "normalize",
    "factor",
    "nominal_kind",
    "nominal_stationarity_residual",
    "invariant_csiszar_value",
    "invariant_csiszar_neg_grad",
    "invariant_csiszar_tsallis_nominal_value",
    "invariant_csiszar_tsallis_nominal_neg_grad",
    "invariant_csiszar_dual_value",
    "invariant_csiszar_dual_neg_grad",
    "invariant_csiszar_dual_tsallis_nominal_value",
    "invariant_csiszar_dual_tsallis_nominal_neg_grad",
    "invariant_bregman_value",
    "invariant_bregman_neg_grad",
    "invariant_bregman_tsallis_nominal_value",
    "invariant_bregman_tsallis_nominal_neg_grad",
    "invariant_bregman_dual_value",
    "invariant_bregman_dual_neg_grad",
    "invariant_bregman_dual_tsallis_nominal_value",
    "invariant_bregman_dual_tsallis_nominal_neg_grad",
    "invariant_value",
    "invariant_neg_grad",
    "invariant_split",
    "closed_form_value",
]

#: |t - 1| at or below which Tsallis nominal forms are refused (0/0 limits).
NOMINAL_T_THRESHOLD = 1e-8


class FactorKind(str, enum.Enum):
    REFERENCE_SUM_RATIO = "reference"
    CSISZAR_TSALLIS_NOMINAL = "csiszar_tsallis_nominal"
    CSISZAR_DUAL_TSALLIS_NOMINAL = "csiszar_dual_tsallis_nominal"
    BREGMAN_TSALLIS_NOMINAL = "bregman_tsallis_nominal"
    BREGMAN_DUAL_TSALLIS_NOMINAL = "bregman_dual_tsallis_nominal"


_KIND_FORM = {
    FactorKind.CSISZAR_TSALLIS_NOMINAL: Form.CSISZAR,
    FactorKind.CSISZAR_DUAL_TSALLIS_NOMINAL: Form.CSISZAR_DUAL,
    FactorKind.BREGMAN_TSALLIS_NOMINAL: Form.BREGMAN,
    FactorKind.BREGMAN_DUAL_TSALLIS_NOMINAL: Form.BREGMAN_DUAL,
}
_FORM_KIND = {v: k for k, v in _KIND_FORM.items()}


@dataclass(frozen=True)
class InvarianceFactor:
    kind: FactorKind
    t: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", FactorKind(self.kind))
        if self.kind is FactorKind.REFERENCE_SUM_RATIO:
            return
        if self.t is None or not self.t > 0:
            raise DomainError(f"{self.kind.value} requires a Tsallis parameter t > 0")
        object.__setattr__(self, "t", float(self.t))


def nominal_kind(form: Form) -> FactorKind:
    return _FORM_KIND[Form(form)]


@dataclass(frozen=True)
class NormalizedPair:
    p_bar: np.ndarray
    q_bar: np.ndarray
    sum_p: float
    sum_q: float

    @property
    def ratio(self) -> float:
        """The reference factor ``sum(p) / sum(q)``."""
        return self.sum_p / self.sum_q


def normalize(p, q) -> NormalizedPair:
    p, q = _positive_pair(p, q)
    sp, sq = float(np.sum(p)), float(np.sum(q))
    return NormalizedPair(p / sp, q / sq, sp, sq)


def _positive_pair(p, q):
    return as_pair(p, q, p_positive=True)


def _check_t(t):
    if abs(t - 1.0) <= NOMINAL_T_THRESHOLD:
        raise EvalError(f"t={t!r} is too close to 1 for the nominal Tsallis form")


# ---------------------------------------------------------------------------
# factors


def factor(kind: InvarianceFactor | FactorKind, p, q, t: float | None = None) -> float:
    """Evaluate an invariance factor ``K(p, q) > 0``."""
    if not isinstance(kind, InvarianceFactor):
        kind = InvarianceFactor(kind, t)
    p, q = _positive_pair(p, q)
    k, t = kind.kind, kind.t
    if k is FactorKind.REFERENCE_SUM_RATIO:
        return float(np.sum(p) / np.sum(q))
    if k is FactorKind.CSISZAR_TSALLIS_NOMINAL:
        return float((np.sum(p**t * q ** (1 - t)) / np.sum(q)) ** (1 / t))
    if k is FactorKind.BREGMAN_TSALLIS_NOMINAL:
        return float(np.sum(p * q ** (t - 1)) / np.sum(q**t))
    _check_t(t)
    if k is FactorKind.CSISZAR_DUAL_TSALLIS_NOMINAL:
        return float((np.sum(q) / np.sum(q**t * p ** (1 - t))) ** (1 / (t - 1)))
    return float((np.sum(q**t) / np.sum(q * p ** (t - 1))) ** (1 / (1 - t)))


def nominal_stationarity_residual(kind: InvarianceFactor, p, q) -> float:
    """``dD/dK`` at ``K = factor(kind, p, q)``; zero for a nominal factor.

    For the direct forms this is ``d/dK D(p || K q)``, for the dual forms
    ``d/dK D(K q || p)``.  Both equal ``-sum_i q_i g_i`` with ``g`` the plain
    negative gradient evaluated at the rescaled model.
    """
    if kind.kind is FactorKind.REFERENCE_SUM_RATIO:
        raise Unsupported("the stationarity residual is defined for nominal kinds only")
    p, q = _positive_pair(p, q)
    K0 = factor(kind, p, q)
    fam = EntropyFamily.tsallis(kind.t)
    g = plain_neg_grad(fam, _KIND_FORM[kind.kind], p, K0 * q)
    return float(-np.sum(q * g))


# ---------------------------------------------------------------------------
# reference factor, generic composition (Shannon and near-degenerate (a, b))


def _ab_or_none(family):
    if family.tag is Tag.SHANNON:
        return None
    if family.tag in (Tag.NEWTON, Tag.ALPHA):
        raise Unsupported(f"no invariant divergences for the {family.tag.value} family")
    a, b = ez.to_ab(family)
    return None if ez.is_degenerate(a, b) else (a, b)


def _composed(family, form, n: NormalizedPair):
    """Value, negative gradient and split of ``D(p || K q)`` with ``K q = sum(p) q_bar``."""
    P, K = n.sum_p, n.ratio
    p = n.p_bar * P
    kq = n.q_bar * P
    value = plain_value(family, form, p, kq)
    g = plain_neg_grad(family, form, p, kq)
    mean = float(np.sum(n.q_bar * g))
    grad = K * (g - mean)
    U0, V0 = plain_split(family, form, p, kq)
    if family.tag is Tag.SHANNON and form in (Form.CSISZAR, Form.BREGMAN):
        # U0 = p_bar/q_bar, V0 = 1 and sum(q_bar U0) = sum(q_bar V0) = 1
        split = GradientSplit(K * U0, K * V0)
    else:
        split = GradientSplit(K * (U0 + np.sum(n.q_bar * V0)), K * (V0 + np.sum(n.q_bar * U0)))
    return value, grad, split


def _composed_value(family, form, t, p, q):
    """``D(p || K q)`` (dual forms ``D(K q || p)``) evaluated by the plain terms.

    ``t`` selects the nominal Tsallis factor; ``None`` the reference factor.
    """
    if t is None:
        _ab_or_none(family)  # refuses Newton / Alpha
        n = normalize(p, q)
        return plain_value(family, form, n.p_bar * n.sum_p, n.q_bar * n.sum_p)
    _check_t(t)
    p, q = _positive_pair(p, q)
    K = factor(InvarianceFactor(nominal_kind(form), t), p, q)
    return plain_value(family, form, p, K * q)


# ---------------------------------------------------------------------------
# invariant Csiszar


def _csiszar_ref(family, p, q):
    n = normalize(p, q)
    ab = _ab_or_none(family)
    if ab is None:
        return _composed(family, Form.CSISZAR, n)
    a, b = ab
    r = n.p_bar / n.q_bar
    K = n.ratio
    value = n.sum_p * float(np.sum(n.q_bar * ((r**a - r**b) / (a - b) - r + 1.0)))
    X = (a - 1) / (a - b) * r**a + (1 - b) / (a - b) * r**b
    mean = float(np.sum(n.q_bar * X))
    grad = K * (X - mean)
    return value, grad, GradientSplit(K * X, np.full_like(X, K * mean))


def invariant_csiszar_value(family: EntropyFamily, p, q) -> float:
    """Csiszar divergence at the reference-rescaled model; invariant in the scale of q."""
    return _composed_value(family, Form.CSISZAR, None, p, q)


def invariant_csiszar_neg_grad(family: EntropyFamily, p, q) -> np.ndarray:
    return _csiszar_ref(family, p, q)[1]


def _csiszar_nominal(t, p, q):
    _check_t(t)
    n = normalize(p, q)
    K = n.ratio
    pt = n.p_bar**t * n.q_bar ** (-t)
    S = float(np.sum(n.q_bar * pt))  # sum p_bar^t q_bar^{1-t}
    value = n.sum_p * t / (1 - t) * -math.expm1(math.log(S) / t)
    U = K * S ** (1 / t - 1) * pt
    V = np.full_like(U, K * S ** (1 / t))
    return value, U - V, GradientSplit(U, V)


def invariant_csiszar_tsallis_nominal_value(t: float, p, q) -> float:
    """``t/(1-t) [sum(p) - K0 sum(q)]`` with the Csiszar/Tsallis nominal factor K0."""
    return _composed_value(EntropyFamily.tsallis(t), Form.CSISZAR, t, p, q)


def invariant_csiszar_tsallis_nominal_neg_grad(t: float, p, q) -> np.ndarray:
    return _csiszar_nominal(t, p, q)[1]


# ---------------------------------------------------------------------------
# invariant dual Csiszar


def _csiszar_dual_ref(family, p, q):
    n = normalize(p, q)
    ab = _ab_or_none(family)
    if ab is None:
        return _composed(family, Form.CSISZAR_DUAL, n)
    a, b = ab
    r = n.p_bar / n.q_bar
    K = n.ratio
    s = 1.0 / r
    value = n.sum_p * float(np.sum(n.p_bar * ((s**a - s**b) / (a - b) - s + 1.0)))
    Ra, Rb = r ** (1 - a), r ** (1 - b)
    ma, mb = float(np.sum(n.q_bar * Ra)), float(np.sum(n.q_bar * Rb))
    c = K / (a - b)
    grad = c * (b * Rb - a * Ra - b * mb + a * ma)
    first = c * (b * Rb + a * ma)
    second = c * (a * Ra + b * mb)
    split = GradientSplit(first, second) if a > b else GradientSplit(-second, -first)
    return value, grad, split


def invariant_csiszar_dual_value(family: EntropyFamily, p, q) -> float:
    """Dual Csiszar divergence ``C(K q || p)`` with the reference factor."""
    return _composed_value(family, Form.CSISZAR_DUAL, None, p, q)


def invariant_csiszar_dual_neg_grad(family: EntropyFamily, p, q) -> np.ndarray:
    return _csiszar_dual_ref(family, p, q)[1]


def _csiszar_dual_nominal(t, p, q):
    _check_t(t)
    n = normalize(p, q)
    K = n.ratio
    r = n.p_bar / n.q_bar
    Sd = float(np.sum(n.q_bar**t * n.p_bar ** (1 - t)))
    lS = math.log(Sd)
    value = -n.sum_p * math.expm1(lS / (1 - t))
    c = K * t / (1 - t)
    first = c * math.exp(lS * t / (1 - t)) * r ** (1 - t)
    second = np.full_like(first, c * math.exp(lS / (1 - t)))
    split = GradientSplit(first, second) if t < 1 else GradientSplit(-second, -first)
    return value, first - second, split


def invariant_csiszar_dual_tsallis_nominal_value(t: float, p, q) -> float:
    """``sum(p) - K0 sum(q)`` with the dual Csiszar/Tsallis nominal factor."""
    return _composed_value(EntropyFamily.tsallis(t), Form.CSISZAR_DUAL, t, p, q)


def invariant_csiszar_dual_tsallis_nominal_neg_grad(t: float, p, q) -> np.ndarray:
    return _csiszar_dual_nominal(t, p, q)[1]


# ---------------------------------------------------------------------------
# invariant Bregman


def _bregman_ref(family, p, q):
    n = normalize(p, q)
    ab = _ab_or_none(family)
    if ab is None:
        return _composed(family, Form.BREGMAN, n)
    a, b = ab
    P, Q = n.sum_p, n.sum_q
    pb, qb = n.p_bar, n.q_bar
    Pa, Pb = P**a, P**b
    value = (
        Pa * float(np.sum(pb**a + (a - 1) * qb**a - a * pb * qb ** (a - 1)))
        - Pb * float(np.sum(pb**b + (b - 1) * qb**b - b * pb * qb ** (b - 1)))
    ) / (a - b)
    ca = a * (a - 1) / (a - b) * Pa / Q
    cb = b * (1 - b) / (a - b) * Pb / Q
    U = ca * (pb * qb ** (a - 2) + np.sum(qb**a)) + cb * (pb * qb ** (b - 2) + np.sum(qb**b))
    V = ca * (np.sum(pb * qb ** (a - 1)) + qb ** (a - 1)) + cb * (
        np.sum(pb * qb ** (b - 1)) + qb ** (b - 1)
    )
    return value, U - V, GradientSplit(U, V)


def invariant_bregman_value(family: EntropyFamily, p, q) -> float:
    """Bregman divergence ``B(p || K q)`` with the reference factor."""
    return _composed_value(family, Form.BREGMAN, None, p, q)


def invariant_bregman_neg_grad(family: EntropyFamily, p, q) -> np.ndarray:
    return _bregman_ref(family, p, q)[1]


def _bregman_nominal(t, p, q):
    _check_t(t)
    n = normalize(p, q)
    P, Q = n.sum_p, n.sum_q
    pb, qb = n.p_bar, n.q_bar
    A = float(np.sum(pb * qb ** (t - 1)))
    B = float(np.sum(qb**t))
    C = float(np.sum(pb**t))
    value = P**t / (1 - t) * (A**t * B ** (1 - t) - C)
    c = t * P**t / Q
    U = c * (A / B) ** (t - 1) * pb * qb ** (t - 2)
    V = c * (A / B) ** t * qb ** (t - 1)
    return value, U - V, GradientSplit(U, V)


def invariant_bregman_tsallis_nominal_value(t: float, p, q) -> float:
    """Bregman/Tsallis divergence at its nominal factor ``sum(p q^{t-1}) / sum(q^t)``."""
    return _composed_value(EntropyFamily.tsallis(t), Form.BREGMAN, t, p, q)


def invariant_bregman_tsallis_nominal_neg_grad(t: float, p, q) -> np.ndarray:
    return _bregman_nominal(t, p, q)[1]


# ---------------------------------------------------------------------------
# invariant dual Bregman


def _bregman_dual_ref(family, p, q):
    n = normalize(p, q)
    ab = _ab_or_none(family)
    if ab is None:
        return _composed(family, Form.BREGMAN_DUAL, n)
    a, b = ab
    P, Q = n.sum_p, n.sum_q
    pb, qb = n.p_bar, n.q_bar
    Pa, Pb = P**a, P**b
    value = (
        Pa * float(np.sum(qb**a + (a - 1) * pb**a - a * qb * pb ** (a - 1)))
        - Pb * float(np.sum(qb**b + (b - 1) * pb**b - b * qb * pb ** (b - 1)))
    ) / (a - b)
    ca = a * Pa / ((a - b) * Q)
    cb = b * Pb / ((a - b) * Q)
    first = ca * (pb ** (a - 1) + np.sum(qb**a)) + cb * (qb ** (b - 1) + np.sum(qb * pb ** (b - 1)))
    second = ca * (qb ** (a - 1) + np.sum(qb * pb ** (a - 1))) + cb * (pb ** (b - 1) + np.sum(qb**b))
    split = GradientSplit(first, second) if a > b else GradientSplit(-second, -first)
    return value, first - second, split


def invariant_bregman_dual_value(family: EntropyFamily, p, q) -> float:
    """Dual Bregman divergence ``B(K q || p)`` with the reference factor."""
    return _composed_value(family, Form.BREGMAN_DUAL, None, p, q)


def invariant_bregman_dual_neg_grad(family: EntropyFamily, p, q) -> np.ndarray:
    return _bregman_dual_ref(family, p, q)[1]


def _bregman_dual_nominal(t, p, q):
    _check_t(t)
    n = normalize(p, q)
    P, Q = n.sum_p, n.sum_q
    pb, qb = n.p_bar, n.q_bar
    B = float(np.sum(qb**t))
    C = float(np.sum(pb**t))
    E = float(np.sum(qb * pb ** (t - 1)))
    value = P**t * (C - B ** (1 / (1 - t)) * E ** (-t / (1 - t)))
    c = t / (t - 1) * P**t / Q * (B / E) ** (1 / (1 - t))
    first = c * pb ** (t - 1)
    second = c * (E / B) * qb ** (t - 1)
    split = GradientSplit(first, second) if t > 1 else GradientSplit(-second, -first)
    return value, first - second, split


def invariant_bregman_dual_tsallis_nominal_value(t: float, p, q) -> float:
    """``sum(p^t) - K0^t sum(q^t)`` with the dual Bregman/Tsallis nominal factor."""
    return _composed_value(EntropyFamily.tsallis(t), Form.BREGMAN_DUAL, t, p, q)


def invariant_bregman_dual_tsallis_nominal_neg_grad(t: float, p, q) -> np.ndarray:
    return _bregman_dual_nominal(t, p, q)[1]


# ---------------------------------------------------------------------------
# dispatch

_REF = {
    Form.CSISZAR: _csiszar_ref,
    Form.CSISZAR_DUAL: _csiszar_dual_ref,
    Form.BREGMAN: _bregman_ref,
    Form.BREGMAN_DUAL: _bregman_dual_ref,
}
_NOMINAL = {
    Form.CSISZAR: _csiszar_nominal,
    Form.CSISZAR_DUAL: _csiszar_dual_nominal,
    Form.BREGMAN: _bregman_nominal,
    Form.BREGMAN_DUAL: _bregman_dual_nominal,
}


def _evaluate(spec: DivergenceSpec, p, q):
    if spec.variant is not Variant.INVARIANT:
        raise Unsupported(f"{spec} is not an invariant divergence")
    if spec.factor is FactorChoice.NOMINAL:
        return _NOMINAL[spec.form](spec.family["t"], p, q)
    return _REF[spec.form](spec.family, p, q)


def invariant_value(spec: DivergenceSpec, p, q) -> float:
    if spec.variant is not Variant.INVARIANT:
        raise Unsupported(f"{spec} is not an invariant divergence")
    t = spec.family["t"] if spec.factor is FactorChoice.NOMINAL else None
    return _composed_value(spec.family, spec.form, t, p, q)


def closed_form_value(spec: DivergenceSpec, p, q) -> float:
    """The value from the normalized-variable closed forms.

    Mathematically equal to :func:`invariant_value`, which evaluates the
    plain divergence at the rescaled model and keeps more relative accuracy
    when the divergence is small.
    """
    return _evaluate(spec, p, q)[0]


def invariant_neg_grad(spec: DivergenceSpec, p, q) -> np.ndarray:
    return _evaluate(spec, p, q)[1]


def invariant_split(spec: DivergenceSpec, p, q) -> GradientSplit:
    return _evaluate(spec, p, q)[2]


def factor_for(spec: DivergenceSpec) -> InvarianceFactor:
    """The invariance factor an invariant spec is built on."""
    if spec.factor is FactorChoice.NOMINAL:
        return InvarianceFactor(nominal_kind(spec.form), spec.family["t"])
    return InvarianceFactor(FactorKind.REFERENCE_SUM_RATIO)


# re-exported for callers that only need the generic split fallback
__all__ += ["factor_for", "positive_part_split"]
