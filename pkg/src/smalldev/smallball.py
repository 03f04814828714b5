"""Small-ball probability estimation and the exact L2-norm distribution.

Monte Carlo estimates use common random numbers across the radius list, so
hit counts are monotone in r by construction, and report Wilson 95%
intervals.  The squared L2 norm of the periodic process is a weighted sum
of independent chi-square variables; its CDF is computed exactly by
saddle-point contour inversion of the Laplace transform, in the log domain
so deep tails remain representable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import dawsn, erf

from . import pathgen
from .curves import BoundCurve
from .errors import NumericFailure, PreconditionError

#: 97.5% standard normal quantile for Wilson intervals
_Z95 = 1.959963984540054

#: relative tolerance of the contour inversion refinement
_INV_RTOL = 1e-10


@dataclass(frozen=True)
class SmallBallEstimate:
    r: float
    norm: str
    n_samples: int
    hits: int
    p_hat: float
    ci_low: float
    ci_high: float
    phi_hat: float
    phi_lo: float
    phi_hi: float
    seed: int
    grid_points: int
    config: dict


def wilson_interval(hits: int, n: int, z: float = _Z95) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if n <= 0:
        raise PreconditionError("n must be positive")
    p = hits / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = (z / denom) * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    return max(center - half, 0.0), min(center + half, 1.0)


def _resolve_amplitudes(cfg) -> tuple[np.ndarray, dict]:
    if isinstance(cfg, pathgen.PeriodicGenConfig):
        return cfg.amplitudes(), {"kind": "periodic", "nu": cfg.nu, "K": cfg.K}
    if isinstance(cfg, np.ndarray):
        return cfg, {"kind": "amplitudes", "K": len(cfg) - 1}
    if isinstance(cfg, dict) and cfg.get("kind") == "minorant-discrete":
        amp = pathgen.minorant_discrete_amplitudes(cfg["l"], cfg["nu"])
        return amp, dict(cfg)
    raise PreconditionError(f"unsupported generator config {cfg!r}")


def estimate(cfg, grid: pathgen.GridSpec, norm: str, r_list, n_samples: int,
             seed: int) -> list[SmallBallEstimate]:
    """Monte Carlo small-ball estimates on common random numbers.

    One batch of paths serves every radius, so p_hat is nondecreasing in r
    exactly, not just statistically.
    """
    if n_samples < 100:
        raise PreconditionError("n_samples must be >= 100")
    r_arr = np.asarray(list(r_list), dtype=float)
    if np.any(r_arr <= 0):
        raise PreconditionError("radii must be positive")
    amps, cfg_desc = _resolve_amplitudes(cfg)
    norms = pathgen.batch_norms(amps, grid, seed, n_samples, norm)
    out = []
    for r in r_arr:
        hits = int(np.count_nonzero(norms <= r))
        p = hits / n_samples
        lo, hi = wilson_interval(hits, n_samples)
        phi = -math.log(p) if hits > 0 else math.inf
        phi_lo = -math.log(hi)
        phi_hi = -math.log(lo) if lo > 0 else math.inf
        out.append(SmallBallEstimate(
            r=float(r), norm=norm, n_samples=n_samples, hits=hits, p_hat=p,
            ci_low=lo, ci_high=hi, phi_hat=phi, phi_lo=phi_lo, phi_hi=phi_hi,
            seed=seed, grid_points=grid.n_points, config=cfg_desc,
        ))
    return out


@dataclass(frozen=True)
class WeightedChiSquareSpec:
    """Weights of the quadratic form sum_j lambda_j Z_j^2.

    weights[j] with multiplicity mults[j]; the periodic-process L2 norm
    squared has lambda_0 = 1 (multiplicity 1) and lambda_k = exp(-k^nu)
    with multiplicity 2 for k = 1..K.
    """

    weights: tuple
    mults: tuple

    def __post_init__(self):
        w = np.asarray(self.weights, float)
        if len(w) == 0 or np.any(w <= 0):
            raise PreconditionError("weights must be positive and nonempty")
        if np.any(np.diff(w) > 0):
            raise PreconditionError("weights must be sorted descending")
        if len(self.mults) != len(w):
            raise PreconditionError("weights and mults must align")

    @classmethod
    def periodic(cls, nu: float, K: int) -> "WeightedChiSquareSpec":
        w = [1.0] + [math.exp(-k ** nu) for k in range(1, K + 1)]
        m = [1] + [2] * K
        return cls(tuple(w), tuple(m))


def _log_cdf_contour(w: np.ndarray, h: np.ndarray, x: float,
                     rtol: float = _INV_RTOL) -> float:
    """log P(sum h_j-fold lambda_j chi-squares <= x) by saddle-point contour.

    Bromwich integrand exp(g(z)) with g(z) = x z - log z
    - (1/2) sum h_j log(1 + 2 lambda_j z), integrated along the vertical
    line through the real saddle; trapezoid steps are halved until two
    refinements agree to rtol, truncation controlled by the polynomial
    decay of the integrand modulus.
    """

    def gprime(s):
        return x - 1.0 / s - np.sum(h * w / (1.0 + 2.0 * w * s))

    hi = 1.0
    while gprime(hi) < 0.0:
        hi *= 4.0
        if hi > 1e300:
            raise NumericFailure("saddle search diverged")
    s0 = brentq(gprime, 1e-300, hi, rtol=8.9e-16)
    g0 = x * s0 - math.log(s0) - 0.5 * float(np.sum(h * np.log1p(2.0 * w * s0)))
    gpp = 1.0 / s0 ** 2 + float(np.sum(2.0 * h * w ** 2 / (1.0 + 2.0 * w * s0) ** 2))
    p_decay = 1.0 + float(np.sum(h)) / 2.0

    def contour_integral(step: float) -> float:
        # trapezoid of Re exp(g(s0+it) - g0) over t >= 0, in 4096-point chunks
        total = 0.5  # t = 0 contributes exp(0) = 1, half weight
        t_hi = 0.0
        chunk = 4096
        while True:
            t = t_hi + step * np.arange(1, chunk + 1)
            z = s0 + 1j * t
            gz = x * z - np.log(z) - 0.5 * np.sum(
                h[:, None] * np.log1p(2.0 * w[:, None] * z[None, :]), axis=0
            )
            vals = np.exp(gz - g0)
            total += float(np.sum(vals.real))
            t_hi = t[-1]
            mag = abs(vals[-1])
            # |integrand| <= mag * (t_hi/t)^p for t > t_hi
            tail = mag * t_hi / ((p_decay - 1.0) * step)
            if tail < 1e-13 * abs(total) + 1e-300:
                break
            if t_hi > 1e12 / max(step, 1e-12):
                raise NumericFailure("contour truncation did not converge")
        return total * step / math.pi

    step = 0.5 / math.sqrt(gpp)
    prev = contour_integral(step)
    for _ in range(40):
        step /= 2.0
        cur = contour_integral(step)
        if abs(cur - prev) <= rtol * abs(cur):
            if cur <= 0:
                raise NumericFailure("contour inversion returned nonpositive mass")
            return g0 + math.log(cur)
        prev = cur
    raise NumericFailure("contour inversion did not reach tolerance")


def log_exact_l2(spec: WeightedChiSquareSpec, r: float) -> float:
    """log P(sum lambda_j Z_j^2 <= r^2), exact up to quadrature tolerance."""
    if r <= 0:
        raise PreconditionError("r must be positive")
    w = np.asarray(spec.weights, float)
    h = np.asarray(spec.mults, float)
    x = r * r
    if len(w) == 1 and h[0] == 1:
        # single chi-square: P(Z^2 <= x/lambda) = erf(sqrt(x/(2 lambda)))
        return math.log(erf(math.sqrt(x / (2.0 * w[0]))))
    if len(w) == 2 and h[0] == 1 and h[1] == 2:
        # chi^2_1 + lambda chi^2_2 in closed form via Dawson's integral
        lam = w[1] / w[0]
        y = x / w[0]
        a = 1.0 / (2.0 * lam) - 0.5
        base = erf(math.sqrt(y / 2.0))
        corr = math.sqrt(2.0 / (math.pi * a)) * math.exp(-y / 2.0) \
            * dawsn(math.sqrt(a * y))
        val = base - corr
        if val > 1e-280:
            return math.log(val)
        # fall through to the contour in the extreme tail
    return _log_cdf_contour(w, h, x)


def exact_l2(spec: WeightedChiSquareSpec, r: float) -> float:
    """P(sum lambda_j Z_j^2 <= r^2)."""
    return math.exp(log_exact_l2(spec, r))


def phi_l2_curve(nu: float, K: int, r_list) -> BoundCurve:
    """phi(r) = -log P(L2 norm <= r) for the periodic process, exact."""
    spec = WeightedChiSquareSpec.periodic(nu, K)
    r_arr = np.asarray(list(r_list), float)
    phi = np.array([-log_exact_l2(spec, r) for r in r_arr])
    with np.errstate(divide="ignore"):
        ratio = phi / np.log(r_arr) ** 2  # infinite at r = 1 by convention
    return BoundCurve(x=r_arr, lower=phi, upper=phi, label="l2-exact",
                      extra={"nu": nu, "K": K, "phi_over_log2": ratio})
