"""Family-specific synthetic gradient tables.

A second, independent route to the plain negative gradients, written with
each family's own parameters rather than the reduced (a, b) exponents:

* Csiszar:        ``r * X - 1``
* dual Csiszar:   ``r * T + 1``
* Bregman:        ``(r - 1) * Z``
* dual Bregman:   a difference ``P - Q`` of per-family terms

with ``r = p / q``.  The tables are used to cross-check the general path.
Every row, including the signs of the KLS ``Z``, Newton ``T`` and Tsallis
dual Bregman entries, is pinned by finite differences in the test suite.
"""

from __future__ import annotations

import numpy as np

from .divergences import DivergenceSpec, Form, Variant, as_pair
from .entropy import Tag
from .errors import Unsupported

__all__ = ["appendix_table_neg_grad", "table_X", "table_T", "table_Z", "table_dual_bregman"]

APPENDIX_FAMILIES = (
    Tag.SHANNON,
    Tag.TSALLIS,
    Tag.KANIADAKIS,
    Tag.ABE,
    Tag.GAMMA,
    Tag.KLS,
    Tag.GENERAL,
    Tag.NEWTON,
)


def table_X(family, r):
    tag, prm = family.tag, family.params
    if tag is Tag.SHANNON:
        return np.ones_like(r)
    if tag is Tag.TSALLIS:
        (t,) = prm
        return r ** (t - 1)
    if tag is Tag.KANIADAKIS:
        (K,) = prm
        return 0.5 * r**K + 0.5 * r**-K
    if tag is Tag.ABE:
        (z,) = prm
        return z / (z + 1) * r ** (z - 1) + 1 / (z + 1) * r ** (1 / z - 1)
    if tag is Tag.GAMMA:
        (g,) = prm
        return 2 / 3 * r ** (2 * g) + 1 / 3 * r**-g
    if tag is Tag.KLS:
        K, rr = prm
        return (K + rr) / (2 * K) * r ** (rr + K) + (K - rr) / (2 * K) * r ** (rr - K)
    if tag is Tag.GENERAL:
        a, b = prm
        return (a - 1) / (a - b) * r ** (a - 1) + (1 - b) / (a - b) * r ** (b - 1)
    if tag is Tag.NEWTON:
        return 0.5 * r + 0.5
    raise Unsupported(f"no Csiszar table row for {tag.value}")


def table_T(family, r):
    tag, prm = family.tag, family.params
    if tag is Tag.SHANNON:
        return np.log(r) / r - 1 / r
    if tag is Tag.TSALLIS:
        (t,) = prm
        return t / (1 - t) * r**-t - 1 / (1 - t) / r
    if tag is Tag.KANIADAKIS:
        (K,) = prm
        return (1 - K) / (2 * K) * r ** (K - 1) - (1 + K) / (2 * K) * r ** (-K - 1)
    if tag is Tag.ABE:
        (z,) = prm
        return z * z / (1 - z * z) * r**-z - 1 / (1 - z * z) * r ** (-1 / z)
    if tag is Tag.GAMMA:
        (g,) = prm
        return (1 - g) / (3 * g) * r ** (g - 1) - (1 + 2 * g) / (3 * g) * r ** (-2 * g - 1)
    if tag is Tag.KLS:
        K, rr = prm
        return (1 + rr - K) / (2 * K) * r ** (K - rr - 1) - (1 + rr + K) / (2 * K) * r ** (
            -K - rr - 1
        )
    if tag is Tag.GENERAL:
        a, b = prm
        return b / (a - b) * r**-b - a / (a - b) * r**-a
    if tag is Tag.NEWTON:
        # r*T + 1 = 0.5 log r + 1 - 1/r
        return 0.5 * np.log(r) / r - 1 / (r * r)
    raise Unsupported(f"no dual Csiszar table row for {tag.value}")


def table_Z(family, q):
    tag, prm = family.tag, family.params
    if tag is Tag.SHANNON:
        return np.ones_like(q)
    if tag is Tag.TSALLIS:
        (t,) = prm
        return t * q ** (t - 1)
    if tag is Tag.KANIADAKIS:
        (K,) = prm
        return (1 + K) / 2 * q**K + (1 - K) / 2 * q**-K
    if tag is Tag.ABE:
        (z,) = prm
        return z * z / (z + 1) * q ** (z - 1) + 1 / (z * (z + 1)) * q ** (1 / z - 1)
    if tag is Tag.GAMMA:
        (g,) = prm
        return 2 * (2 * g + 1) / 3 * q ** (2 * g) + (1 - g) / 3 * q**-g
    if tag is Tag.KLS:
        K, rr = prm
        return (rr + K) * (1 + rr + K) / (2 * K) * q ** (rr + K) - (rr - K) * (1 + rr - K) / (
            2 * K
        ) * q ** (rr - K)
    if tag is Tag.GENERAL:
        a, b = prm
        return (a * a - a) / (a - b) * q ** (a - 1) + (b - b * b) / (a - b) * q ** (b - 1)
    if tag is Tag.NEWTON:
        return 0.5 + q
    raise Unsupported(f"no Bregman table row for {tag.value}")


def table_dual_bregman(family, p, q):
    tag, prm = family.tag, family.params
    if tag is Tag.SHANNON:
        return np.log(p) - np.log(q)
    if tag is Tag.TSALLIS:
        (t,) = prm
        return t / (t - 1) * (p ** (t - 1) - q ** (t - 1))
    if tag is Tag.KANIADAKIS:
        (K,) = prm
        return (1 + K) / (2 * K) * (p**K - q**K) - (1 - K) / (2 * K) * (p**-K - q**-K)
    if tag is Tag.ABE:
        (z,) = prm
        return z * z / (z * z - 1) * (p ** (z - 1) - q ** (z - 1)) - 1 / (z * z - 1) * (
            p ** (1 / z - 1) - q ** (1 / z - 1)
        )
    if tag is Tag.GAMMA:
        (g,) = prm
        return (2 * g + 1) / (3 * g) * (p ** (2 * g) - q ** (2 * g)) - (1 - g) / (3 * g) * (
            p**-g - q**-g
        )
    if tag is Tag.KLS:
        K, rr = prm
        return (1 + rr + K) / (2 * K) * (p ** (rr + K) - q ** (rr + K)) - (1 + rr - K) / (
            2 * K
        ) * (p ** (rr - K) - q ** (rr - K))
    if tag is Tag.GENERAL:
        a, b = prm
        return a / (a - b) * (p ** (a - 1) - q ** (a - 1)) - b / (a - b) * (
            p ** (b - 1) - q ** (b - 1)
        )
    if tag is Tag.NEWTON:
        return (p + 0.5 * np.log(p)) - (q + 0.5 * np.log(q))
    raise Unsupported(f"no dual Bregman table row for {tag.value}")


def appendix_table_neg_grad(spec: DivergenceSpec, p, q) -> np.ndarray:
    """Negative gradient of a plain divergence through the per-family tables."""
    if spec.variant is not Variant.PLAIN:
        raise Unsupported("the tables cover plain divergences only")
    if spec.family.tag not in APPENDIX_FAMILIES:
        raise Unsupported(f"no table rows for the {spec.family.tag.value} family")
    dual = spec.form in (Form.CSISZAR_DUAL, Form.BREGMAN_DUAL)
    p, q = as_pair(p, q, p_positive=dual)
    r = p / q
    if spec.form is Form.CSISZAR:
        return r * table_X(spec.family, r) - 1.0
    if spec.form is Form.CSISZAR_DUAL:
        return r * table_T(spec.family, r) + 1.0
    if spec.form is Form.BREGMAN:
        return (r - 1.0) * table_Z(spec.family, q)
    return table_dual_bregman(spec.family, p, q)
