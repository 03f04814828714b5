"""Rigorous finite-r lower bounds on the small-deviation function.

The bound replaces the process by a spectral minorant whose values on an
arithmetic grid of step Delta are uncorrelated (Dirichlet-kernel zeros),
hence independent Gaussians of variance sigma^2, so

    P(||X|| <= r)  <=  P(sigma |N| <= r) ** (#grid points).

Two exponent variants are shipped and never mixed:

* ``paper-exponent`` -- the asymptotic form E(l) * (|log r| - l^nu) whose
  optimized envelope reproduces the constant nu / (pi (nu+1)^{1+1/nu});
* ``rigorous-grid-count`` -- the literal count N of independent grid points
  inside [0, 1] with the sharp per-point factor -log(sqrt(2/pi) r / sigma),
  a certified bound for the simulated paths.

Two grid conventions are shipped for atomic spectra: ``paper-2pi`` (atoms
at integer frequencies, period-2pi paths) and ``period-1`` (atoms at
2 pi k, period-1 paths); they differ by the factor 2 pi in the exponent.
Continuous-spectrum grids always use Delta = 2 pi / l, which sits on a
Dirichlet zero of the flat-density minorant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CertificateError, PreconditionError

DISCRETE = "discrete"
CONTINUOUS = "continuous"
PAPER_2PI = "paper-2pi"
PERIOD_1 = "period-1"
PAPER_EXPONENT = "paper-exponent"
RIGOROUS_GRID_COUNT = "rigorous-grid-count"

_HALF_LOG_2_OVER_PI = 0.5 * math.log(2.0 / math.pi)


@dataclass(frozen=True)
class TsirelsonConfig:
    nu: float
    spectrum: str = DISCRETE
    l: float = 1
    convention: str = PAPER_2PI

    def __post_init__(self):
        if self.nu <= 0:
            raise PreconditionError("nu must be positive")
        if self.spectrum not in (DISCRETE, CONTINUOUS):
            raise PreconditionError(f"unknown spectrum {self.spectrum!r}")
        if self.convention not in (PAPER_2PI, PERIOD_1):
            raise PreconditionError(f"unknown convention {self.convention!r}")
        if self.l < 1:
            raise PreconditionError("l must be >= 1")
        if self.spectrum == DISCRETE and self.l != int(self.l):
            raise PreconditionError("discrete spectrum requires integer l")

    @property
    def delta(self) -> float:
        if self.spectrum == DISCRETE:
            n = 2 * int(self.l) + 1
            return 2.0 * math.pi / n if self.convention == PAPER_2PI else 1.0 / n
        return 2.0 * math.pi / self.l

    @property
    def sigma2(self) -> float:
        if self.spectrum == DISCRETE:
            return math.exp(-self.l ** self.nu) * (2 * int(self.l) + 1)
        return 2.0 * self.l * math.exp(-self.l ** self.nu)


@dataclass(frozen=True)
class LowerBoundResult:
    r: float
    l_used: float
    phi_lower: float
    valid: bool
    variant: str
    convention: str
    spectrum: str
    sigma2: float


def _paper_exponent_factor(cfg: TsirelsonConfig) -> float:
    """Grid-count factor E(l) of the asymptotic variant."""
    if cfg.spectrum == DISCRETE:
        if cfg.convention == PAPER_2PI:
            return cfg.l / math.pi
        return 2.0 * cfg.l
    return cfg.l / (2.0 * math.pi)


def _grid_count(cfg: TsirelsonConfig) -> int:
    """Independent grid points of step delta inside [0, 1]."""
    n = int(math.floor(1.0 / cfg.delta)) + 1
    if cfg.spectrum == DISCRETE and cfg.convention == PERIOD_1:
        # t = 0 and t = 1 are the same point of a period-1 path
        n = min(n, 2 * int(cfg.l) + 1)
    return n


def bound_at(cfg: TsirelsonConfig, r: float,
             variant: str = PAPER_EXPONENT) -> LowerBoundResult:
    if r <= 0:
        raise PreconditionError("r must be positive")
    sigma = math.sqrt(cfg.sigma2)
    if variant == PAPER_EXPONENT:
        gap = -math.log(r) - cfg.l ** cfg.nu
        valid = gap > 0.0
        phi = _paper_exponent_factor(cfg) * gap if valid else 0.0
    elif variant == RIGOROUS_GRID_COUNT:
        per_point = -(_HALF_LOG_2_OVER_PI + math.log(r / sigma))
        valid = per_point > 1e-12  # exact boundary counts as invalid
        phi = _grid_count(cfg) * per_point if valid else 0.0
    else:
        raise PreconditionError(f"unknown variant {variant!r}")
    return LowerBoundResult(r=r, l_used=cfg.l, phi_lower=phi, valid=valid,
                            variant=variant, convention=cfg.convention,
                            spectrum=cfg.spectrum, sigma2=cfg.sigma2)


def bound_opt(nu: float, spectrum: str, r: float,
              convention: str = PAPER_2PI,
              variant: str = PAPER_EXPONENT) -> LowerBoundResult:
    """Best bound over l in a window around the asymptotically optimal l."""
    if not 0 < r < 1:
        raise PreconditionError("bound_opt requires 0 < r < 1")
    seed = (abs(math.log(r)) / (nu + 1.0)) ** (1.0 / nu)
    l_max = 4.0 * math.ceil(seed)
    if spectrum == DISCRETE:
        candidates = range(1, max(int(l_max), 1) + 1)
    else:
        candidates = np.arange(1.0, max(l_max, 1.0) + 0.25, 0.25)
    best = None
    for l in candidates:
        res = bound_at(TsirelsonConfig(nu, spectrum, float(l), convention), r,
                       variant)
        if best is None or res.phi_lower > best.phi_lower:
            best = res
    return best


def asymptotic_constant(nu: float) -> float:
    """Limit of bound_opt(r) / |log r|^{1 + 1/nu} as r -> 0 (atomic case)."""
    if nu <= 0:
        raise PreconditionError("nu must be positive")
    return nu / (math.pi * (nu + 1.0) ** (1.0 + 1.0 / nu))


def minorant_covariance(cfg: TsirelsonConfig, t: float) -> float:
    """Closed-form covariance of the grid minorant at lag t."""
    l, nu = cfg.l, cfg.nu
    scale = math.exp(-(l ** nu))
    if cfg.spectrum == DISCRETE:
        m = 2 * int(l) + 1
        # Dirichlet kernel; argument scaled by the period convention
        x = t if cfg.convention == PAPER_2PI else 2.0 * math.pi * t
        if abs(math.sin(x / 2.0)) < 1e-14:
            return scale * m * math.cos((m - 1) / 2.0 * x)
        return scale * math.sin(m * x / 2.0) / math.sin(x / 2.0)
    if t == 0.0:
        return 2.0 * l * scale
    return 2.0 * scale * math.sin(l * t) / t


@dataclass(frozen=True)
class CertificateReport:
    cfg: TsirelsonConfig
    lags: np.ndarray
    values: np.ndarray
    sigma2: float
    max_abs: float
    passed: bool


def uncorrelated_certificate(cfg: TsirelsonConfig,
                             delta: float | None = None) -> CertificateReport:
    """Verify that the minorant is uncorrelated across the grid.

    Evaluates the closed-form covariance at every lag k * delta and asserts
    |R| <= 1e-10 * sigma^2; a failure indicates a grid/convention mismatch.
    """
    d = cfg.delta if delta is None else delta
    if cfg.spectrum == DISCRETE:
        ks = np.arange(1, 2 * int(cfg.l) + 1)
    else:
        ks = np.arange(1, max(int(math.floor(1.0 / d)), 1) + 1)
    lags = ks * d
    vals = np.array([minorant_covariance(cfg, t) for t in lags])
    max_abs = float(np.max(np.abs(vals))) if len(vals) else 0.0
    passed = max_abs <= 1e-10 * cfg.sigma2
    report = CertificateReport(cfg=cfg, lags=lags, values=vals,
                               sigma2=cfg.sigma2, max_abs=max_abs,
                               passed=passed)
    if not passed:
        raise CertificateError(
            f"minorant covariance {max_abs:.3e} exceeds 1e-10 * sigma^2 "
            f"= {1e-10 * cfg.sigma2:.3e} on the grid (step {d})"
        )
    return report
