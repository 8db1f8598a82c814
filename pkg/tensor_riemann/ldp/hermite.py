"""
Hermite polynomials and their expectations under a correlated Gaussian.
"""

import logging
from typing import List, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, model_validator
from scipy.special import gammaln

from ..core.exceptions import InvalidArgumentError, OutOfRangeError

logger = logging.getLogger(__name__)

MAX_DEGREE = 170
MIN_MC_SAMPLES = 1000
MC_CHUNK = 100_000
COVARIANCE_SLACK = 1e-12

ArrayLike = Union[float, np.ndarray]


def _check_degree(k: int, operation: str) -> None:
    if k < 0:
        raise InvalidArgumentError(
            f"degree must be non-negative, got {k}", operation=operation, field="k"
        )
    if k > MAX_DEGREE:
        raise OutOfRangeError(
            f"degree {k} above supported maximum {MAX_DEGREE}",
            operation=operation,
            field="k",
        )


def _unwrap(values: np.ndarray, x) -> ArrayLike:
    return float(values) if np.ndim(x) == 0 else values


def hermite(k: int, x: ArrayLike) -> ArrayLike:
    """Probabilists' Hermite polynomial ``H_k(x)`` by the three-term recurrence."""
    _check_degree(k, "hermite")
    xs = np.asarray(x, dtype=np.float64)
    prev, cur = np.ones_like(xs), xs.copy()
    if k == 0:
        return _unwrap(prev, x)
    for j in range(1, k):
        prev, cur = cur, xs * cur - j * prev
    return _unwrap(cur, x)


def normalized_hermite(k: int, x: ArrayLike) -> ArrayLike:
    """``h_k = H_k / sqrt(k!)``, with the normalization folded into the recurrence."""
    _check_degree(k, "normalized_hermite")
    xs = np.asarray(x, dtype=np.float64)
    prev, cur = np.ones_like(xs), xs.copy()
    if k == 0:
        return _unwrap(prev, x)
    for j in range(1, k):
        prev, cur = cur, (xs * cur - np.sqrt(j) * prev) / np.sqrt(j + 1)
    return _unwrap(cur, x)


class HermiteDegreeProfile(BaseModel):
    """Degrees ``(alpha, beta)`` and correlations ``u`` of ``E[h_alpha(Y) prod h_beta_j(X_j)]``.

    ``(Y, X)`` is Gaussian with unit variances, ``Cov(Y, X_j) = u_j`` and
    independent ``X_j``; this needs ``sum u_j^2 <= 1``.
    """

    alpha: int = Field(..., ge=0, le=MAX_DEGREE)
    beta: List[int] = Field(..., min_length=1)
    u: List[float] = Field(..., min_length=1)

    @model_validator(mode="after")
    def _check_shapes(self) -> "HermiteDegreeProfile":
        if len(self.beta) != len(self.u):
            raise ValueError("beta and u must have the same length")
        if any(b < 0 or b > MAX_DEGREE for b in self.beta):
            raise ValueError(f"beta entries must lie in [0, {MAX_DEGREE}]")
        if sum(v * v for v in self.u) > 1.0 + COVARIANCE_SLACK:
            raise ValueError("sum of squared correlations exceeds 1")
        return self

    @property
    def w(self) -> int:
        return len(self.beta)

    @property
    def u_norm_sq(self) -> float:
        return float(np.sum(np.square(self.u)))


def correlated_expectation(profile: HermiteDegreeProfile) -> float:
    """``sqrt(alpha! / prod beta_j!) * prod u_j^beta_j`` if ``alpha == sum beta``, else 0."""
    if profile.alpha != sum(profile.beta):
        return 0.0
    u = np.asarray(profile.u, dtype=np.float64)
    beta = np.asarray(profile.beta)
    if np.any((u == 0.0) & (beta > 0)):
        return 0.0
    log_coef = 0.5 * (gammaln(profile.alpha + 1) - np.sum(gammaln(beta + 1)))
    active = beta > 0
    log_mag = log_coef + np.sum(beta[active] * np.log(np.abs(u[active])))
    sign = np.prod(np.sign(u[active]) ** beta[active])
    return float(sign * np.exp(log_mag))


def mc_verify_expectation(
    profile: HermiteDegreeProfile, samples: int, seed: int
) -> Tuple[float, float]:
    """Monte Carlo estimate and standard error of the correlated expectation.

    ``Y`` is drawn as ``sum u_j X_j + sqrt(1 - sum u_j^2) Z`` with independent
    standard normals ``X_j`` and ``Z``.

    Raises:
        InvalidArgumentError: If ``samples < 1000`` or ``sum u_j^2 > 1``.
    """
    if samples < MIN_MC_SAMPLES:
        raise InvalidArgumentError(
            f"need at least {MIN_MC_SAMPLES} samples, got {samples}",
            operation="mc_verify_expectation",
            field="samples",
        )
    u = np.asarray(profile.u, dtype=np.float64)
    norm_sq = float(u @ u)
    if norm_sq > 1.0 + COVARIANCE_SLACK:
        raise InvalidArgumentError(
            f"sum of squared correlations {norm_sq} exceeds 1",
            operation="mc_verify_expectation",
            field="u",
        )
    residual_scale = np.sqrt(max(1.0 - norm_sq, 0.0))
    rng = np.random.Generator(np.random.PCG64(seed))
    total, total_sq, drawn = 0.0, 0.0, 0
    while drawn < samples:
        size = min(MC_CHUNK, samples - drawn)
        x = rng.standard_normal((size, u.shape[0]))
        y = x @ u + residual_scale * rng.standard_normal(size)
        values = normalized_hermite(profile.alpha, y)
        for j, b in enumerate(profile.beta):
            if b:
                values = values * normalized_hermite(b, x[:, j])
        total += float(np.sum(values))
        total_sq += float(np.sum(values * values))
        drawn += size
    mean = total / samples
    variance = max(total_sq / samples - mean * mean, 0.0) * samples / (samples - 1)
    return mean, float(np.sqrt(variance / samples))


def random_profile(
    rng: np.random.Generator, max_degree: int, w: int, u_budget: float = 0.9
) -> HermiteDegreeProfile:
    """Random profile with degrees up to ``max_degree`` and ``sum u_j^2 <= u_budget``.

    Three draws in four split ``alpha`` exactly across ``beta`` so the
    expectation is nonzero; the rest draw ``beta`` freely.
    """
    if w < 1 or max_degree < 0 or not 0 <= u_budget <= 1:
        raise InvalidArgumentError(
            "need w >= 1, max_degree >= 0 and u_budget in [0, 1]",
            operation="random_profile",
        )
    alpha = int(rng.integers(0, max_degree + 1))
    if rng.random() < 0.75:
        beta = [0] * w
        for _ in range(alpha):
            beta[int(rng.integers(0, w))] += 1
    else:
        beta = [int(b) for b in rng.integers(0, max_degree + 1, size=w)]
    direction = rng.standard_normal(w)
    direction /= np.linalg.norm(direction)
    radius = np.sqrt(u_budget * rng.random())
    return HermiteDegreeProfile(alpha=alpha, beta=beta, u=list(radius * direction))
