"""Sampling distribution of the sample coefficient of variation and its
square, plus second-moment approximations for the squared CV.

For a normal sample of size n with true CV gamma, the sample CV relates
to a noncentral t variate and its square to a noncentral F variate:

    F_cv(x)   = 1 - F_t(sqrt(n)/x | n-1, sqrt(n)/gamma)
    F_cv2(x)  = 1 - F_F(n/x | 1, n-1, n/gamma^2)
    f_cv2(x)  = (n/x^2) f_F(n/x | 1, n-1, n/gamma^2)

These forms are only trustworthy for gamma < 0.5; larger values are
rejected unless explicitly forced (out-of-control evaluations can push
the effective CV past the window and callers opt in knowingly).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import sqrt

from . import specfun
from .errors import DomainError, GammaDomainError
from .specfun import NoncentralParams

__all__ = [
    "GAMMA_VALIDITY_LIMIT",
    "ProcessModel",
    "Cv2Moments",
    "cv_cdf",
    "cv2_cdf",
    "cv2_pdf",
    "cv2_moments",
]

GAMMA_VALIDITY_LIMIT = 0.5

# CDF evaluation profiles: "exact" is the tight-tolerance kernel;
# "cdflib" reproduces legacy library truncation (see specfun).
_PROFILES = ("exact", "cdflib")


def _check_gamma(gamma: float, force: bool) -> None:
    if not gamma > 0.0:
        raise GammaDomainError(f"gamma must be positive, got {gamma}")
    if gamma >= GAMMA_VALIDITY_LIMIT and not force:
        raise GammaDomainError(
            f"gamma = {gamma} is outside the validity window (0, {GAMMA_VALIDITY_LIMIT}); "
            "pass force=True to evaluate anyway"
        )


def _check_n(n: int) -> None:
    if not (isinstance(n, (int,)) and n >= 2):
        raise DomainError(f"subgroup size n must be an integer >= 2, got {n}")


def _f_params(n: int, gamma: float) -> NoncentralParams:
    return NoncentralParams(1.0, float(n - 1), n / (gamma * gamma))


@dataclass(frozen=True)
class ProcessModel:
    """In-control CV gamma0 and subgroup size n of the monitored process."""

    gamma0: float
    n: int

    def __post_init__(self) -> None:
        _check_n(self.n)
        _check_gamma(self.gamma0, force=False)


@dataclass(frozen=True)
class Cv2Moments:
    """Approximate mean and standard deviation of the squared sample CV."""

    mean: float
    std: float

    def __post_init__(self) -> None:
        if not (self.mean > 0 and self.std > 0):
            raise DomainError(f"moments must be positive, got mean={self.mean}, std={self.std}")


def cv_cdf(x: float, n: int, gamma: float, *, force: bool = False) -> float:
    """P(sample CV <= x) for x > 0."""
    _check_n(n)
    _check_gamma(gamma, force)
    if not x > 0.0:
        raise DomainError(f"x must be positive, got {x}")
    return 1.0 - specfun.noncentral_t_cdf(sqrt(n) / x, n - 1, sqrt(n) / gamma)


def cv2_cdf(x: float, n: int, gamma: float, *, force: bool = False, profile: str = "exact") -> float:
    """P(squared sample CV <= x); returns 0 for x <= 0."""
    _check_n(n)
    _check_gamma(gamma, force)
    if profile not in _PROFILES:
        raise DomainError(f"unknown profile {profile!r}, expected one of {_PROFILES}")
    if x <= 0.0:
        return 0.0
    params = _f_params(n, gamma)
    if profile == "cdflib":
        return 1.0 - specfun.noncentral_f_cdf_cdflib(n / x, params)
    return 1.0 - specfun.noncentral_f_cdf(n / x, params)


def cv2_pdf(x: float, n: int, gamma: float, *, force: bool = False) -> float:
    """Density of the squared sample CV at x > 0."""
    _check_n(n)
    _check_gamma(gamma, force)
    if not x > 0.0:
        raise DomainError(f"x must be positive, got {x}")
    return (n / (x * x)) * specfun.noncentral_f_pdf(n / x, _f_params(n, gamma))


def moments_for_gamma(gamma: float, n: int, *, force: bool = False) -> Cv2Moments:
    """Second-moment approximation of the squared sample CV at an
    arbitrary CV level (bias-corrected mean, matched variance)."""
    _check_n(n)
    _check_gamma(gamma, force)
    g2 = gamma * gamma
    mean = g2 * (1.0 - 3.0 * g2 / n)
    mse = g2 * g2 * (2.0 / (n - 1) + g2 * (4.0 / n + 20.0 / (n * (n - 1)) + 75.0 * g2 / (n * n)))
    radicand = mse - (mean - g2) ** 2
    if not radicand > 0.0:
        raise DomainError(f"variance radicand is non-positive ({radicand}) at gamma={gamma}, n={n}")
    return Cv2Moments(mean, math.sqrt(radicand))


def cv2_moments(pm: ProcessModel) -> Cv2Moments:
    """In-control mean and standard deviation of the squared sample CV."""
    return moments_for_gamma(pm.gamma0, pm.n)
