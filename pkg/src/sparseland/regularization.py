"""Penalty-multiplier schedules and reconstruction error bounds.

With noisy data at level epsilon and a prior radius rho on the weighted
penalty norm of the truth, the multiplier schedule mu(eps) = eps^2 /
rho^p balances the two terms. The calculators here check the vanishing
conditions a schedule must satisfy, propagate (eps, rho) through one
minimization, and bound the worst-case reconstruction error (the modulus
of the constraint set) from a two-sided spectral envelope of the
operator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Sequence, Tuple, Union

import numpy as np

from .core import WeightSequence
from .errors import AlignmentError, ParameterError

__all__ = [
    "NoisePrior",
    "SpectralEnvelope",
    "MuScheduleReport",
    "mu_schedule",
    "check_mu_requirements",
    "primed_radii",
    "modulus_bounds",
    "empirical_diagonal_modulus",
    "besov_modulus_rate",
]


@dataclass(frozen=True)
class NoisePrior:
    """Noise level epsilon >= 0 and penalty-norm radius rho > 0."""

    epsilon: float
    rho: float

    def __post_init__(self):
        eps = float(self.epsilon)
        rho = float(self.rho)
        if not np.isfinite(eps) or eps < 0.0:
            raise ParameterError(f"noise level epsilon must be >= 0, got {eps}")
        if not np.isfinite(rho) or rho <= 0.0:
            raise ParameterError(f"prior radius rho must be > 0, got {rho}")
        object.__setattr__(self, "epsilon", eps)
        object.__setattr__(self, "rho", rho)


@dataclass(frozen=True)
class SpectralEnvelope:
    """Componentwise two-sided bounds b <= B on the operator's action.

    b_gamma |h_gamma|^2 <= ||K h||^2 <= B_gamma |h_gamma|^2 for
    one-component vectors h; equality b = B describes a diagonal
    operator with entries sqrt(b).
    """

    b: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.b, dtype=np.float64)
        B = np.asarray(self.B, dtype=np.float64)
        if b.ndim != 1 or b.size == 0 or b.shape != B.shape:
            raise AlignmentError("envelope bounds must be matching nonempty 1-d sequences")
        if not (np.all(np.isfinite(b)) and np.all(np.isfinite(B))):
            raise ParameterError("envelope bounds must be finite")
        if np.any(b <= 0.0) or np.any(B <= 0.0):
            raise ParameterError("envelope bounds must be strictly positive")
        if np.any(b > B * (1.0 + 1e-12)):
            raise ParameterError("lower envelope b must not exceed upper envelope B")
        b = b.copy()
        B = B.copy()
        b.flags.writeable = False
        B.flags.writeable = False
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "B", B)

    def __len__(self) -> int:
        return self.b.size


@dataclass(frozen=True)
class MuScheduleReport:
    """Outcome of the vanishing-conditions check for a schedule mu(eps)."""

    eps_grid: np.ndarray
    mu_values: np.ndarray
    ratio_values: np.ndarray
    mu_decreasing: bool
    ratio_decreasing: bool
    passed: bool
    notes: Tuple[str, ...] = field(default=())


def _check_p(p: float) -> float:
    p = float(p)
    if not (1.0 <= p <= 2.0):
        raise ParameterError(f"exponent p must lie in [1, 2], got {p}")
    return p


def mu_schedule(noise: NoisePrior, p: float) -> float:
    """Balanced multiplier mu = epsilon^2 / rho^p."""
    p = _check_p(p)
    return noise.epsilon**2 / noise.rho**p


def check_mu_requirements(schedule: Union[Callable[[float], float], Sequence[float]],
                          eps_grid) -> MuScheduleReport:
    """Empirically check that mu(eps) -> 0 and eps^2/mu(eps) -> 0.

    Both sequences must strictly decrease across the (strictly
    decreasing, positive) epsilon grid. The balanced schedule
    mu = eps^2/rho^p keeps the second ratio constant, which fails the
    check and is flagged in the notes: convergence guarantees need mu to
    vanish slower than eps^2.
    """
    eps = np.asarray(eps_grid, dtype=np.float64)
    if eps.ndim != 1 or eps.size < 2:
        raise ParameterError("epsilon grid needs at least two values")
    if np.any(eps <= 0.0) or not np.all(np.isfinite(eps)):
        raise ParameterError("epsilon grid must be positive and finite")
    if np.any(np.diff(eps) >= 0.0):
        raise ParameterError("epsilon grid must be strictly decreasing")

    if callable(schedule):
        mu = np.array([float(schedule(e)) for e in eps])
    else:
        mu = np.asarray(schedule, dtype=np.float64)
        if mu.shape != eps.shape:
            raise AlignmentError("schedule values must align with the epsilon grid")
    if np.any(mu <= 0.0) or not np.all(np.isfinite(mu)):
        raise ParameterError("schedule values must be positive and finite")

    ratio = eps**2 / mu

    def strictly_decreasing(seq: np.ndarray) -> bool:
        return bool(np.all(seq[1:] < seq[:-1] * (1.0 - 1e-12)))

    def roughly_constant(seq: np.ndarray) -> bool:
        return bool(seq.max() - seq.min() <= 1e-12 * seq.max())

    mu_dec = strictly_decreasing(mu)
    ratio_dec = strictly_decreasing(ratio)
    notes: List[str] = []
    if not mu_dec:
        notes.append("mu(eps) does not decrease toward 0 across the grid")
    if roughly_constant(ratio):
        notes.append(
            "eps^2/mu is constant (mu proportional to eps^2); it must vanish"
        )
    elif not ratio_dec:
        notes.append("eps^2/mu does not decrease toward 0 across the grid")
    return MuScheduleReport(
        eps_grid=eps,
        mu_values=mu,
        ratio_values=ratio,
        mu_decreasing=mu_dec,
        ratio_decreasing=ratio_dec,
        passed=mu_dec and ratio_dec,
        notes=tuple(notes),
    )


def primed_radii(noise: NoisePrior, mu: float, p: float) -> Tuple[float, float]:
    """Propagated pair (eps', rho') after one penalized minimization.

    eps' = sqrt(eps^2 + mu rho^p), rho' = (rho^p + eps^2/mu)^(1/p). At
    the balanced mu = eps^2/rho^p these are sqrt(2) eps and 2^(1/p) rho:
    the minimizer is again an (eps', rho')-admissible reconstruction, at
    radii only a constant factor worse.
    """
    p = _check_p(p)
    mu = float(mu)
    if not np.isfinite(mu) or mu <= 0.0:
        raise ParameterError(f"mu must be positive, got {mu}")
    eps_primed = float(np.sqrt(noise.epsilon**2 + mu * noise.rho**p))
    rho_primed = float((noise.rho**p + noise.epsilon**2 / mu) ** (1.0 / p))
    return eps_primed, rho_primed


def modulus_bounds(env: SpectralEnvelope, weights: WeightSequence, p: float,
                   noise: NoisePrior) -> Tuple[float, float]:
    """Two-sided bounds on the worst-case reconstruction error.

    The modulus is the largest ||h|| over vectors obeying both
    ||K h|| <= eps (via the spectral envelope) and triple_norm(h) <= rho.
    The lower bound is the best single-component admissible vector; the
    upper bound splits the index set into a data-controlled part and a
    penalty-controlled part and takes the best split among those induced
    by sorting the indices by their lower envelope b.
    """
    p = _check_p(p)
    if len(env) != len(weights):
        raise AlignmentError("spectral envelope and weights must have equal length")
    eps, rho = noise.epsilon, noise.rho
    w = weights.w

    lower = float(np.max(np.minimum(rho * w ** (-1.0 / p), eps / np.sqrt(env.B))))

    order = np.argsort(env.b, kind="stable")
    b_sorted = env.b[order]
    wq_sorted = (w ** (2.0 / p))[order]
    prefix_min_w = np.minimum.accumulate(wq_sorted)
    n = len(env)
    best = np.inf
    for k in range(n + 1):
        # Gamma_1 = the k indices with the largest b; empty parts
        # contribute nothing to their term
        term_data = eps**2 / b_sorted[n - k] if k >= 1 else 0.0
        term_prior = rho**2 / prefix_min_w[n - k - 1] if k < n else 0.0
        best = min(best, term_data + term_prior)
    upper = float(np.sqrt(best))
    return lower, upper


def empirical_diagonal_modulus(env: SpectralEnvelope, weights: WeightSequence,
                               p: float, noise: NoisePrior) -> float:
    """Exact best single-component vector for a diagonal operator (b = B).

    Maximizing |h_gamma| under sqrt(b_gamma) |h_gamma| <= eps and
    w_gamma^(1/p) |h_gamma| <= rho separately per component gives a
    feasible point of the full constraint set, hence a certified lower
    probe of the true modulus.
    """
    p = _check_p(p)
    if len(env) != len(weights):
        raise AlignmentError("spectral envelope and weights must have equal length")
    if np.any(env.b != env.B):
        raise ParameterError("empirical probe expects a diagonal envelope (b == B)")
    amp = np.minimum(noise.rho * weights.w ** (-1.0 / p),
                     noise.epsilon / np.sqrt(env.b))
    return float(np.max(amp))


def besov_modulus_rate(alpha: float, sigma: float, A_lower: float, A_upper: float,
                       noise: NoisePrior) -> Tuple[float, float]:
    """Rate-only modulus bounds for dyadic smoothing envelopes.

    For an operator whose envelope decays like A^2 * 2^(-2 alpha |lambda|)
    with A in [A_lower, A_upper], and weights 2^(sigma p |lambda|), the
    modulus scales as eps^(sigma/(sigma+alpha)) * rho^(alpha/(sigma+alpha)).
    Returned with unit leading constants: the pair brackets the rate, not
    the constant.
    """
    alpha = float(alpha)
    sigma = float(sigma)
    if not np.isfinite(alpha) or alpha <= 0.0:
        raise ParameterError(f"smoothing order alpha must be > 0, got {alpha}")
    if not np.isfinite(sigma) or sigma < 0.0:
        raise ParameterError(f"weight order sigma must be >= 0, got {sigma}")
    A_lower = float(A_lower)
    A_upper = float(A_upper)
    if not (0.0 < A_lower <= A_upper) or not np.isfinite(A_upper):
        raise ParameterError("envelope amplitudes must satisfy 0 < A_lower <= A_upper")
    theta = sigma / (sigma + alpha)
    lower = (noise.epsilon / A_upper) ** theta * noise.rho ** (1.0 - theta)
    upper = (noise.epsilon / A_lower) ** theta * noise.rho ** (1.0 - theta)
    return float(lower), float(upper)
