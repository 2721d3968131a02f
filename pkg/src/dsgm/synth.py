"""Seeded synthetic 1-D deconvolution problems."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .operators import Convolution1D

__all__ = ["SynthProblem", "gaussian_kernel", "ground_truth", "poisson_sample", "generate"]


@dataclass(frozen=True)
class SynthProblem:
    x_true: np.ndarray
    kernel: np.ndarray
    p: np.ndarray
    x0: np.ndarray
    seed: int

    def operator(self, boundary="periodic") -> Convolution1D:
        return Convolution1D(self.kernel, self.x_true.size, boundary)


def gaussian_kernel(width: int = 5, sigma: float = 0.7) -> np.ndarray:
    """Odd-width sampled Gaussian, normalised to unit sum."""
    if width < 1 or width % 2 == 0:
        raise DomainError(f"kernel width must be a positive odd integer, got {width}")
    if not sigma > 0:
        raise DomainError("kernel sigma must be positive")
    k = np.arange(width) - width // 2
    w = np.exp(-0.5 * (k / sigma) ** 2)
    return w / w.sum()


def ground_truth(n: int, rng: np.random.Generator, n_spikes: int = 3, floor: float = 0.2):
    """A positive floor, one smooth bump and a few isolated spikes."""
    i = np.arange(n)
    centre = rng.uniform(0.25, 0.75) * n
    bump = np.exp(-0.5 * ((i - centre) / (n / 10)) ** 2)
    x = floor + bump
    pos = rng.choice(n, size=min(n_spikes, n), replace=False)
    x[pos] += rng.uniform(1.0, 3.0, size=pos.size)
    return x


def poisson_sample(lam, rng: np.random.Generator) -> np.ndarray:
    """Poisson draws by inverse-transform sampling, one uniform per component."""
    lam = np.asarray(lam, dtype=float)
    out = np.empty(lam.shape)
    for idx, (m, u) in enumerate(zip(lam.ravel(), rng.random(lam.size))):
        out.flat[idx] = _poisson_inverse(m, u)
    return out


def _poisson_inverse(m, u):
    if m < 0:
        raise DomainError("Poisson mean must be non-negative")
    if m == 0:
        return 0.0
    logm = math.log(m)
    kmax = int(m + 40 * math.sqrt(m) + 40)
    cdf = 0.0
    for k in range(kmax + 1):
        cdf += math.exp(k * logm - m - math.lgamma(k + 1))
        if u <= cdf:
            return float(k)
    return float(kmax)


def generate(
    n: int = 32,
    seed: int = 1,
    width: int = 5,
    sigma: float = 0.7,
    noise: bool = False,
    photons: float = 1000.0,
) -> SynthProblem:
    """Build ``x*``, a periodic Gaussian blur ``H`` and data ``p = H x*``.

    With ``noise`` the data are Poisson counts of mean ``photons * H x* / sum(x*)``
    rescaled back to the noiseless total.  The start ``x0`` is uniform with
    ``sum(x0) = sum(x*)``.
    """
    if n < width:
        raise DomainError(f"n={n} is smaller than the kernel width {width}")
    if seed < 0:
        raise DomainError("seed must be a non-negative integer")
    rng = np.random.default_rng(seed)
    x_true = ground_truth(n, rng)
    kernel = gaussian_kernel(width, sigma)
    p = Convolution1D(kernel, n).apply(x_true)
    if noise:
        if not photons > 0:
            raise DomainError("photons must be positive")
        scale = photons / x_true.sum()
        p = poisson_sample(scale * p, rng) / scale
    x0 = np.full(n, x_true.sum() / n)
    return SynthProblem(x_true, kernel, p, x0, seed)
