"""Entropy families, their parameter domains and deformed logarithms.

Every family is described by its base convex function ``f`` (so that the
trace-form entropy is ``S(p) = -sum f(p_i)``), the standard convex function
``f_c(x) = f(x) - x + 1`` and the deformed logarithm ``f(x) / x``.  Six of the
families are special cases of the two-exponent form

    f(x) = (x**a - x**b) / (a - b)

and can be reduced to it with :func:`to_ab`.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, EvalError, NotReducible

__all__ = [
    "Tag",
    "EntropyFamily",
    "ABPair",
    "DEGENERACY_THRESHOLD",
    "validate",
    "diagnostics",
    "to_ab",
    "f",
    "f_c",
    "df",
    "d2f",
    "deformed_log",
    "param_names",
    "parse_family",
    "powz",
]

#: |a - b| at or below which the ratio form is replaced by its analytic limit.
DEGENERACY_THRESHOLD = 1e-8


class Tag(str, enum.Enum):
    SHANNON = "shannon"
    TSALLIS = "tsallis"
    KANIADAKIS = "kaniadakis"
    ABE = "abe"
    GAMMA = "gamma"
    KLS = "kls"
    GENERAL = "general"
    NEWTON = "newton"
    ALPHA = "alpha"


_PARAM_NAMES = {
    Tag.SHANNON: (),
    Tag.TSALLIS: ("t",),
    Tag.KANIADAKIS: ("K",),
    Tag.ABE: ("z",),
    Tag.GAMMA: ("g",),
    Tag.KLS: ("K", "r"),
    Tag.GENERAL: ("a", "b"),
    Tag.NEWTON: (),
    Tag.ALPHA: ("alpha",),
}

# accepted spellings on the text/CLI side
_PARAM_ALIASES = {"k": "K", "kappa": "K", "gamma": "g", "q": "t"}


class ABPair(NamedTuple):
    a: float
    b: float


@dataclass(frozen=True)
class EntropyFamily:
    """A tagged, validated parameter set identifying one entropy.

    Construction validates the parameters; an out-of-domain family cannot
    exist.  Use the classmethod constructors (``EntropyFamily.tsallis(1.5)``)
    or :func:`parse_family` for text keys.
    """

    tag: Tag
    params: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "tag", Tag(self.tag))
        params = tuple(float(v) for v in self.params)
        object.__setattr__(self, "params", params)
        names = _PARAM_NAMES[self.tag]
        if len(params) != len(names):
            raise DomainError(
                f"{self.tag.value} takes parameters {names or '()'}, got {len(params)} values"
            )
        validate(self)

    def __getitem__(self, name: str) -> float:
        try:
            return self.params[_PARAM_NAMES[self.tag].index(name)]
        except ValueError:
            raise KeyError(name) from None

    def __str__(self):
        args = " ".join(f"{n}={v:g}" for n, v in zip(_PARAM_NAMES[self.tag], self.params))
        return f"{self.tag.value} {args}".strip()

    @property
    def param_dict(self) -> dict[str, float]:
        return dict(zip(_PARAM_NAMES[self.tag], self.params))

    @classmethod
    def shannon(cls):
        return cls(Tag.SHANNON)

    @classmethod
    def tsallis(cls, t):
        return cls(Tag.TSALLIS, (t,))

    @classmethod
    def kaniadakis(cls, K):
        return cls(Tag.KANIADAKIS, (K,))

    @classmethod
    def abe(cls, z):
        return cls(Tag.ABE, (z,))

    @classmethod
    def gamma(cls, g):
        return cls(Tag.GAMMA, (g,))

    @classmethod
    def kls(cls, K, r):
        return cls(Tag.KLS, (K, r))

    @classmethod
    def general(cls, a, b):
        return cls(Tag.GENERAL, (a, b))

    @classmethod
    def newton(cls):
        return cls(Tag.NEWTON)

    @classmethod
    def alpha(cls, alpha):
        return cls(Tag.ALPHA, (alpha,))


def _ab_in_domain(a, b):
    return (0.0 <= a <= 1.0 <= b) or (0.0 <= b <= 1.0 <= a)


def validate(family: EntropyFamily) -> None:
    """Raise :class:`DomainError` unless every parameter constraint holds."""
    tag, p = family.tag, family.params
    if not all(math.isfinite(v) for v in p):
        raise DomainError(f"{tag.value}: parameters must be finite, got {p}")
    if tag is Tag.TSALLIS:
        (t,) = p
        if not t > 0:
            raise DomainError(f"tsallis requires t > 0, got t={t}")
    elif tag is Tag.KANIADAKIS:
        (K,) = p
        if not 0 < abs(K) < 1:
            raise DomainError(f"kaniadakis requires 0 < |K| < 1, got K={K}")
    elif tag is Tag.ABE:
        (z,) = p
        if not z > 0:
            raise DomainError(f"abe requires z > 0, got z={z}")
        if z == 1:
            raise DomainError("abe with z=1 is the shannon entropy; use the shannon family")
    elif tag is Tag.GAMMA:
        (g,) = p
        if not -0.5 <= g <= 1:
            raise DomainError(f"gamma requires -0.5 <= g <= 1, got g={g}")
        if g == 0:
            raise DomainError("gamma with g=0 is the shannon entropy; use the shannon family")
    elif tag is Tag.KLS:
        K, r = p
        if K == 0:
            raise DomainError("kls requires K != 0")
        if not -abs(K) <= r <= abs(K):
            raise DomainError(f"kls requires -|K| <= r <= |K|, got K={K}, r={r}")
        a, b = 1 + r + K, 1 + r - K
        if not _ab_in_domain(a, b):
            raise DomainError(
                f"kls (K={K}, r={r}) maps to a={a:g}, b={b:g}, which has a negative exponent"
            )
    elif tag is Tag.GENERAL:
        a, b = p
        if a == b:
            raise DomainError(f"general requires a != b, got a=b={a}")
        if not _ab_in_domain(a, b):
            raise DomainError(
                f"general requires 0 <= a <= 1 <= b or 0 <= b <= 1 <= a, got a={a}, b={b}"
            )
    elif tag is Tag.ALPHA:
        (al,) = p
        if not -0.5 <= al <= 0.5:
            raise DomainError(f"alpha requires -0.5 <= alpha <= 0.5, got alpha={al}")
        if al == 0:
            raise DomainError("alpha=0 is the shannon entropy; use the shannon family")


def diagnostics(family: EntropyFamily) -> list[str]:
    """Non-fatal remarks about parameters outside the deformed-log concavity range."""
    out = []
    tag, p = family.tag, family.params
    if tag is Tag.TSALLIS and p[0] >= 2:
        out.append(f"tsallis t={p[0]:g}: deformed logarithm is not concave for t >= 2")
    elif tag is Tag.ABE and not 0.5 < p[0] < 2:
        out.append(f"abe z={p[0]:g}: deformed logarithm concave only for 0.5 < z < 2")
    elif tag is Tag.GAMMA and not -0.5 < p[0] < 0.5:
        out.append(f"gamma g={p[0]:g}: deformed logarithm concave only for -0.5 < g < 0.5")
    elif tag is Tag.KLS:
        K, r = abs(p[0]), p[1]
        if K >= 0.5 and r > 1 - K:
            out.append(f"kls K={p[0]:g}, r={r:g}: outside the concavity branch r <= 1-|K|")
    elif tag is Tag.GENERAL and max(p) > 2:
        out.append(f"general a={p[0]:g}, b={p[1]:g}: deformed logarithm concave only up to 2")
    return out


def to_ab(family: EntropyFamily) -> ABPair:
    """Map a reducible family onto its (a, b) exponents.

    Shannon maps to the sentinel (1, 1), whose divergences are evaluated via
    the logarithmic limit rather than the ratio.
    """
    tag, p = family.tag, family.params
    if tag is Tag.SHANNON:
        return ABPair(1.0, 1.0)
    if tag is Tag.TSALLIS:
        return ABPair(p[0], 1.0)
    if tag is Tag.KANIADAKIS:
        return ABPair(1 + p[0], 1 - p[0])
    if tag is Tag.ABE:
        return ABPair(p[0], 1 / p[0])
    if tag is Tag.GAMMA:
        return ABPair(2 * p[0] + 1, 1 - p[0])
    if tag is Tag.KLS:
        K, r = p
        return ABPair(1 + r + K, 1 + r - K)
    if tag is Tag.GENERAL:
        return ABPair(*p)
    raise NotReducible(f"{tag.value} has no (a, b) form")


def is_degenerate(a: float, b: float) -> bool:
    return abs(a - b) <= DEGENERACY_THRESHOLD


# ---------------------------------------------------------------------------
# elementwise helpers


def powz(x, e):
    """``x ** e`` for ``x >= 0`` with the continuity convention at zero.

    ``0 ** e`` is 0 for ``e > 0`` and 1 for ``e == 0``; a zero raised to a
    negative power raises :class:`EvalError`.
    """
    x = np.asarray(x, dtype=float)
    if e < 0 and np.any(x == 0):
        raise EvalError(f"0 raised to negative power {e:g}")
    with np.errstate(divide="ignore"):
        return np.power(x, e)


def _xlogx(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = x[pos] * np.log(x[pos])
    return out


def _log(x):
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise EvalError("logarithm of a non-positive value")
    return np.log(x)


def _check_nonneg(x):
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)):
        raise EvalError("non-finite argument")
    if np.any(x < 0):
        raise EvalError("negative argument")
    return x


def _scalarize(out, x):
    return float(out) if np.ndim(x) == 0 else out


# ---------------------------------------------------------------------------
# base convex function and derivatives


def f(family: EntropyFamily, x):
    """Base convex function ``f`` of *family*, evaluated elementwise."""
    x0 = x
    x = _check_nonneg(x)
    tag, p = family.tag, family.params
    if tag is Tag.SHANNON:
        out = _xlogx(x)
    elif tag is Tag.NEWTON:
        out = 0.5 * (x * x - x + _xlogx(x))
    elif tag is Tag.ALPHA:
        (al,) = p
        out = np.zeros_like(x)
        pos = x > 0
        out[pos] = x[pos] * np.tanh(al * np.log(x[pos])) / al
    elif tag is Tag.TSALLIS:
        (t,) = p
        out = _ab_f(x, t, 1.0) if is_degenerate(t, 1.0) else (powz(x, t) - x) / (t - 1)
    elif tag is Tag.KANIADAKIS:
        (K,) = p
        out = (
            _ab_f(x, 1 + K, 1 - K)
            if is_degenerate(1 + K, 1 - K)
            else (powz(x, 1 + K) - powz(x, 1 - K)) / (2 * K)
        )
    elif tag is Tag.ABE:
        (z,) = p
        out = (
            _ab_f(x, z, 1 / z)
            if is_degenerate(z, 1 / z)
            else (powz(x, z) - powz(x, 1 / z)) / (z - 1 / z)
        )
    elif tag is Tag.GAMMA:
        (g,) = p
        out = (
            _ab_f(x, 1 + 2 * g, 1 - g)
            if is_degenerate(1 + 2 * g, 1 - g)
            else (powz(x, 1 + 2 * g) - powz(x, 1 - g)) / (3 * g)
        )
    elif tag is Tag.KLS:
        K, r = p
        out = (
            _ab_f(x, 1 + r + K, 1 + r - K)
            if is_degenerate(1 + r + K, 1 + r - K)
            else (powz(x, 1 + r + K) - powz(x, 1 + r - K)) / (2 * K)
        )
    else:
        out = _ab_f(x, *p)
    return _scalarize(out, x0)


def _ab_f(x, a, b):
    if is_degenerate(a, b):
        c = 0.5 * (a + b)
        return np.where(x > 0, powz(x, c) * np.log(np.where(x > 0, x, 1.0)), 0.0)
    return (powz(x, a) - powz(x, b)) / (a - b)


def f_c(family: EntropyFamily, x):
    """Standard convex function ``f(x) - x + 1`` (``f(1) = 0`` and ``f'(1) = 1``)."""
    x = np.asarray(x, dtype=float) if np.ndim(x) else float(x)
    return f(family, x) - x + 1.0


def df(family: EntropyFamily, x):
    """First derivative of ``f``; requires ``x > 0`` where a log or negative power appears."""
    x0 = x
    x = _check_nonneg(x)
    tag, p = family.tag, family.params
    if tag is Tag.SHANNON:
        out = _log(x) + 1.0
    elif tag is Tag.NEWTON:
        out = x + 0.5 * _log(x)
    elif tag is Tag.ALPHA:
        (al,) = p
        th = np.tanh(al * _log(x))
        out = th / al + (1.0 - th * th)
    else:
        a, b = to_ab(family)
        if is_degenerate(a, b):
            c = 0.5 * (a + b)
            lx = _log(x)
            out = powz(x, c - 1) * (c * lx + 1.0)
        else:
            out = (a * powz(x, a - 1) - b * powz(x, b - 1)) / (a - b)
    return _scalarize(out, x0)


def d2f(family: EntropyFamily, x):
    """Second derivative of ``f``."""
    x0 = x
    x = _check_nonneg(x)
    tag, p = family.tag, family.params
    if tag is Tag.SHANNON:
        out = 1.0 / x if np.all(x > 0) else _raise_zero()
    elif tag is Tag.NEWTON:
        out = 1.0 + 0.5 / x if np.all(x > 0) else _raise_zero()
    elif tag is Tag.ALPHA:
        (al,) = p
        lx = _log(x)
        th = np.tanh(al * lx)
        sech2 = 1.0 - th * th
        out = sech2 * (1.0 - 2.0 * al * th) / x
    else:
        a, b = to_ab(family)
        if is_degenerate(a, b):
            c = 0.5 * (a + b)
            lx = _log(x)
            out = powz(x, c - 2) * (c * (c - 1) * lx + 2 * c - 1)
        else:
            out = (a * (a - 1) * powz(x, a - 2) - b * (b - 1) * powz(x, b - 2)) / (a - b)
    return _scalarize(out, x0)


def _raise_zero():
    raise EvalError("second derivative is singular at 0")


def deformed_log(family: EntropyFamily, x):
    """Deformed logarithm ``Lambda(x) = f(x) / x`` with ``Lambda(1) = 0``."""
    x0 = x
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise EvalError("deformed logarithm requires x > 0")
    tag, p = family.tag, family.params
    if tag is Tag.SHANNON:
        out = np.log(x)
    elif tag is Tag.NEWTON:
        out = 0.5 * (x - 1.0 + np.log(x))
    elif tag is Tag.ALPHA:
        (al,) = p
        xa, xma = x**al, x**-al
        out = (xa - xma) / (xa + xma) / al
    else:
        a, b = to_ab(family)
        if is_degenerate(a, b):
            out = x ** (0.5 * (a + b) - 1) * np.log(x)
        else:
            out = (x ** (a - 1) - x ** (b - 1)) / (a - b)
    return _scalarize(out, x0)


# ---------------------------------------------------------------------------
# text keys

_KEY_RE = re.compile(r"^\s*([A-Za-z_]+)\s*=\s*(\S+)\s*$")


def param_names(key: str) -> tuple[str, ...]:
    """Parameter names of the family with text key ``key`` (empty if unknown)."""
    try:
        return _PARAM_NAMES[Tag(key.strip().lower())]
    except ValueError:
        return ()


def make_family(key: str, **params: float) -> EntropyFamily:
    """Build a family from its lower-case key and named parameters."""
    try:
        tag = Tag(key.strip().lower())
    except ValueError:
        known = ", ".join(t.value for t in Tag)
        raise DomainError(f"unknown entropy family {key!r} (known: {known})") from None
    norm = {}
    for name, value in params.items():
        name = _PARAM_ALIASES.get(name, name)
        if name == "k":
            name = "K"
        norm[name] = float(value)
    names = _PARAM_NAMES[tag]
    missing = [n for n in names if n not in norm]
    extra = [n for n in norm if n not in names]
    if missing:
        raise DomainError(f"{tag.value} is missing parameter(s) {', '.join(missing)}")
    if extra:
        raise DomainError(f"{tag.value} does not take parameter(s) {', '.join(extra)}")
    return EntropyFamily(tag, tuple(norm[n] for n in names))


def parse_family(text: str) -> EntropyFamily:
    """Parse ``"tsallis t=1.5"`` or ``"general a=1.5 b=0.5"`` into a family."""
    tokens = text.split()
    if not tokens:
        raise DomainError("empty entropy family text")
    params = {}
    for tok in tokens[1:]:
        m = _KEY_RE.match(tok)
        if not m:
            raise DomainError(f"cannot parse family parameter {tok!r}; expected name=value")
        try:
            params[m.group(1)] = float(m.group(2))
        except ValueError:
            raise DomainError(f"parameter {m.group(1)} is not a number: {m.group(2)!r}") from None
    return make_family(tokens[0], **params)
