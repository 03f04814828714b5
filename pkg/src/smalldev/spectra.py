"""Spectral measures of the studied processes and their derived quantities.

Five families are supported: the continuous densities exp(-|u|^nu), the
discrete measures with atoms exp(-|k|^nu) at frequency 2*pi*k, the
bandlimited flat density on [-cutoff, cutoff], the slowly decaying test
family exp(-(log+ |u|)^alpha), and the truncated continuous density
exp(-|u|^nu) restricted to |u| <= cutoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import gamma as gamma_fn

from .errors import DomainError, NumericFailure, PreconditionError, UnsupportedOperation

CONTINUOUS_NU = "continuous-nu"
DISCRETE_NU = "discrete-nu"
BANDLIMITED = "bandlimited"
LOG_POWER_ALPHA = "log-power-alpha"
TRUNCATED_CONTINUOUS_NU = "truncated-continuous-nu"

_CONTINUOUS_KINDS = (CONTINUOUS_NU, BANDLIMITED, LOG_POWER_ALPHA, TRUNCATED_CONTINUOUS_NU)

#: atom mass below which discrete sums are truncated
_ATOM_TOL = 1e-18

#: relative tail mass allowed when truncating quadrature domains
_TAIL_REL = 1e-15

#: absolute tolerance for covariance quadrature
_COV_ATOL = 1e-10


@dataclass(frozen=True)
class SpectralModel:
    kind: str
    nu: float | None = None
    alpha: float | None = None
    cutoff: float | None = None

    def __post_init__(self):
        if self.kind in (CONTINUOUS_NU, DISCRETE_NU, TRUNCATED_CONTINUOUS_NU):
            if self.nu is None or self.nu <= 0:
                raise PreconditionError(f"{self.kind} requires nu > 0, got {self.nu}")
        if self.kind == LOG_POWER_ALPHA:
            if self.alpha is None or self.alpha <= 1:
                raise PreconditionError(f"{self.kind} requires alpha > 1, got {self.alpha}")
        if self.kind in (BANDLIMITED, TRUNCATED_CONTINUOUS_NU):
            if self.cutoff is None or self.cutoff <= 0:
                raise PreconditionError(f"{self.kind} requires cutoff > 0, got {self.cutoff}")
        if self.kind not in _CONTINUOUS_KINDS + (DISCRETE_NU,):
            raise PreconditionError(f"unknown spectral model kind {self.kind!r}")

    @property
    def is_continuous(self) -> bool:
        return self.kind in _CONTINUOUS_KINDS


def continuous_nu(nu: float) -> SpectralModel:
    return SpectralModel(CONTINUOUS_NU, nu=float(nu))


def discrete_nu(nu: float) -> SpectralModel:
    return SpectralModel(DISCRETE_NU, nu=float(nu))


def bandlimited(cutoff: float = 1.0) -> SpectralModel:
    return SpectralModel(BANDLIMITED, cutoff=float(cutoff))


def log_power_alpha(alpha: float) -> SpectralModel:
    return SpectralModel(LOG_POWER_ALPHA, alpha=float(alpha))


def truncated_continuous_nu(nu: float, cutoff: float) -> SpectralModel:
    return SpectralModel(TRUNCATED_CONTINUOUS_NU, nu=float(nu), cutoff=float(cutoff))


@dataclass(frozen=True)
class CovarianceValue:
    lag: float
    value: float


def density_eval(model: SpectralModel, u: float) -> float:
    """Spectral density f(u); even in u."""
    if not model.is_continuous:
        raise UnsupportedOperation("density_eval needs a continuous spectral measure")
    a = abs(float(u))
    if model.kind == CONTINUOUS_NU:
        return math.exp(-a ** model.nu)
    if model.kind == BANDLIMITED:
        return 1.0 if a <= model.cutoff else 0.0
    if model.kind == TRUNCATED_CONTINUOUS_NU:
        return math.exp(-a ** model.nu) if a <= model.cutoff else 0.0
    # log-power family, log+ is max(log, 0)
    lp = max(math.log(a), 0.0) if a > 0 else 0.0
    return math.exp(-lp ** model.alpha)


def atom_mass(model: SpectralModel, k: int) -> float:
    """Mass of the atom at frequency 2*pi*k."""
    if model.kind != DISCRETE_NU:
        raise UnsupportedOperation("atom_mass needs a discrete spectral measure")
    return math.exp(-abs(int(k)) ** model.nu)


def _discrete_truncation_order(nu: float) -> int:
    k = 1
    while math.exp(-k ** nu) > _ATOM_TOL:
        k += 1
    return k


def _quad_upper_limit(model: SpectralModel) -> float:
    """U such that the density tail beyond U is < _TAIL_REL of the total."""
    if model.kind == BANDLIMITED:
        return model.cutoff
    if model.kind == TRUNCATED_CONTINUOUS_NU:
        return model.cutoff
    if model.kind == CONTINUOUS_NU:
        # exp(-U^nu) * max(U, 1) <= 1e-16  (tail of a super-polynomially
        # decaying density is below its value times one unit of length scale)
        U = 1.0
        while density_eval(model, U) * max(U, 1.0) > 1e-16:
            U *= 1.5
        return U
    # log-power family: density * u eventually decreasing; double until small
    U = math.e
    while density_eval(model, U) * U > 1e-17:
        U *= 2.0
    return U


def total_mass(model: SpectralModel) -> float:
    """Total spectral mass (integral of the density or sum of atoms)."""
    if model.kind == CONTINUOUS_NU:
        return 2.0 * gamma_fn(1.0 + 1.0 / model.nu)
    if model.kind == BANDLIMITED:
        return 2.0 * model.cutoff
    if model.kind == DISCRETE_NU:
        K = _discrete_truncation_order(model.nu)
        k = np.arange(1, K + 1)
        return 1.0 + 2.0 * float(np.sum(np.exp(-k ** model.nu)))
    U = _quad_upper_limit(model)
    val, err = quad(lambda u: density_eval(model, u), 0.0, U, limit=400)
    return 2.0 * val


def covariance(model: SpectralModel, t: float) -> CovarianceValue:
    """R(t) = integral of exp(i u t) against the spectral measure.

    Real by symmetry; computed by cosine-weighted adaptive quadrature for
    continuous measures and by truncated summation for discrete ones.
    """
    t = float(t)
    if model.kind == DISCRETE_NU:
        # atoms at 2*pi*k give period-1 covariance
        K = _discrete_truncation_order(model.nu)
        k = np.arange(1, K + 1)
        val = 1.0 + 2.0 * float(np.sum(np.exp(-k ** model.nu) * np.cos(2.0 * np.pi * k * t)))
        return CovarianceValue(t, val)
    U = _quad_upper_limit(model)
    if t == 0.0:
        return CovarianceValue(0.0, total_mass(model))
    val, err = quad(
        lambda u: density_eval(model, u), 0.0, U, weight="cos", wvar=t,
        epsabs=1e-13, epsrel=1e-13, limit=400,
    )
    if err > _COV_ATOL:
        raise NumericFailure(
            f"covariance quadrature reached tolerance {err:.3e} > {_COV_ATOL:.1e}"
        )
    return CovarianceValue(t, 2.0 * val)


def closed_form_covariance(model: SpectralModel, t: float) -> float | None:
    """Closed covariance for nu in {1, 2} and the bandlimited family.

    Used as an independent cross-check of the quadrature path; returns None
    when no closed form is available.
    """
    t = float(t)
    if model.kind == CONTINUOUS_NU and model.nu == 1.0:
        return 2.0 / (1.0 + t * t)
    if model.kind == CONTINUOUS_NU and model.nu == 2.0:
        return math.sqrt(math.pi) * math.exp(-t * t / 4.0)
    if model.kind == BANDLIMITED:
        c = model.cutoff
        if t == 0.0:
            return 2.0 * c
        return 2.0 * math.sin(c * t) / t
    return None


def _moment_diverges(model: SpectralModel, rate: float) -> bool:
    if model.kind in (BANDLIMITED, TRUNCATED_CONTINUOUS_NU):
        return False
    if rate == 0.0:
        return False
    if model.kind == LOG_POWER_ALPHA:
        return True
    nu = model.nu
    if nu > 1.0:
        return False
    if nu == 1.0:
        return rate >= 1.0
    return True  # nu < 1: any positive rate diverges


def exp_moment(model: SpectralModel, rate: float) -> float:
    """M(rate) = (integral of exp(rate * |u|) dF(u)) ** (1/2)."""
    rate = float(rate)
    if rate < 0:
        raise PreconditionError("rate must be nonnegative")
    if _moment_diverges(model, rate):
        raise DomainError(f"exponential moment diverges for {model.kind} at rate {rate}")
    if model.kind == DISCRETE_NU:
        nu = model.nu
        total = 1.0
        k = 1
        while True:
            term = math.exp(rate * k - k ** nu)
            total += 2.0 * term
            if term < _ATOM_TOL * total and k ** nu > rate * k:
                break
            k += 1
        return math.sqrt(total)
    if model.kind == CONTINUOUS_NU and rate > 0:
        # extend the domain so that the tilted tail is negligible
        U = 1.0
        while rate * U - U ** model.nu + math.log(max(U, 1.0)) > math.log(1e-16):
            U *= 1.5
        # shift by the exponent maximum so the integrand stays in range
        nu = model.nu
        ustar = (rate / nu) ** (1.0 / (nu - 1.0)) if nu > 1.0 else U
        ustar = min(max(ustar, 0.0), U)
        m = rate * ustar - ustar ** nu
        val, _ = quad(
            lambda u: math.exp(rate * u - u ** nu - m), 0.0, U, limit=400
        )
        return math.exp(0.5 * (m + math.log(2.0 * val)))
    U = _quad_upper_limit(model)
    val, _ = quad(lambda u: math.exp(rate * u) * density_eval(model, u), 0.0, U, limit=400)
    return math.sqrt(2.0 * val)


def log_moment_asym(nu: float, rate: float) -> float:
    """Leading asymptotic of log M_nu(rate) as rate -> infinity, for nu > 1."""
    if nu <= 1.0:
        raise PreconditionError("asymptotic form requires nu > 1")
    p = nu / (nu - 1.0)
    return (nu - 1.0) * rate ** p / (2.0 * nu ** p)
