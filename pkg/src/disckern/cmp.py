"""Mean-parametrized Conway-Maxwell-Poisson kernel.

The kernel at target ``x`` with bandwidth ``h`` is the count distribution
with mass proportional to ``rate**z / (z!)**(1/h)``, where ``rate`` is
solved so that the distribution's mean equals ``x`` exactly.  All series
are evaluated in log space: for dispersions ``nu = 1/h`` in the hundreds,
the solved rate is far beyond linear float range while ``log(rate)``
stays small.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .numeric import (
    DEFAULT_POLICY,
    NumericPolicy,
    SeriesTruncationError,
    TailCertificationError,
    guarded_log_series,
    log_factorials,
)

_MAX_BRACKET_EXPANSIONS = 200
_MAX_SOLVE_ITERATIONS = 300


@dataclass(frozen=True)
class SeriesValue:
    """A truncated-series value with its convergence certificate.

    ``value`` may overflow to ``inf`` for extreme inputs; ``log_value``
    is always finite and is what downstream log-space formulas consume.
    ``tail_bound`` bounds the neglected tail relative to the sum.
    """

    value: float
    log_value: float
    terms_used: int
    tail_bound: float


@dataclass(frozen=True)
class KernelParams:
    """Solved parameters of the mean-parametrized kernel.

    ``rate`` is ``exp(log_rate)`` and may saturate to ``inf`` when the
    dispersion is large; ``log_rate`` is authoritative.
    """

    rate: float
    log_rate: float
    dispersion: float
    mean: float
    truncation_z: int
    tail_bound: float


def _term_cap(mode: float, nu: float, max_terms: int) -> int:
    # Generous headroom past the mode; overdispersed (nu < 1) widened.
    cap = 10.0 * (mode + 10.0) * max(1.0, 1.0 / math.sqrt(nu))
    return int(min(max_terms, max(32.0, math.ceil(cap))))


def _log_weights(log_rate: float, nu: float, z_hi: int) -> np.ndarray:
    z = np.arange(z_hi + 1)
    return z * log_rate - nu * log_factorials(z_hi)[: z_hi + 1]


def _log_series(log_rate: float, nu: float, policy: NumericPolicy):
    """Sum the kernel weight series; returns (log_sum, log_weights, used, tail)."""
    mode = math.exp(min(log_rate / nu, math.log(policy.max_terms) + 1))
    if mode >= policy.max_terms:
        raise SeriesTruncationError(
            f"series mode ~{mode:.3g} exceeds the max term bound {policy.max_terms}"
        )
    z_hi = _term_cap(mode, nu, policy.max_terms)
    lw = _log_weights(log_rate, nu, z_hi)
    log_sum, used, stopped = guarded_log_series(lw)
    if not stopped:
        raise SeriesTruncationError(
            f"weight series did not converge within {z_hi + 1} terms "
            f"(log_rate={log_rate:.6g}, nu={nu:.6g})"
        )
    # Term ratios rate/(z+1)^nu are strictly decreasing, so the remainder
    # is bounded by the geometric series in the first neglected ratio.
    log_next = used * log_rate - nu * float(log_factorials(used)[used])
    ratio = math.exp(min(log_rate - nu * math.log(used + 1), 700.0))
    if ratio >= 1.0:
        raise TailCertificationError(
            f"stopping rule triggered before the series mode "
            f"(log_rate={log_rate:.6g}, nu={nu:.6g})"
        )
    tail = math.exp(log_next - log_sum) / (1.0 - ratio)
    if tail > policy.eps_tail:
        raise TailCertificationError(
            f"series tail bound {tail:.3g} exceeds eps_tail={policy.eps_tail:.3g}"
        )
    return log_sum, lw[:used], used, tail


def _moments(lw: np.ndarray, log_sum: float):
    p = np.exp(lw - log_sum)
    z = np.arange(lw.size)
    mean = float(p @ z)
    var = float(p @ (z - mean) ** 2)
    return mean, var


def moments_at_log_rate(log_rate: float, nu: float, policy: NumericPolicy = DEFAULT_POLICY):
    """Exact (mean, variance) of the kernel weights at a given log rate."""
    if log_rate == -math.inf:
        return 0.0, 0.0
    log_sum, lw, _, _ = _log_series(log_rate, nu, policy)
    return _moments(lw, log_sum)


def normalizing_constant(
    rate: float, nu: float, policy: NumericPolicy = DEFAULT_POLICY
) -> SeriesValue:
    """Sum of ``rate**z / (z!)**nu`` over all non-negative integers ``z``.

    Summation runs in log space until the term-to-partial-sum ratio stays
    below 1e-16 for three consecutive terms; the neglected tail is bounded
    by a geometric series and recorded on the result.
    """
    if not (rate >= 0 and math.isfinite(rate)):
        raise ValueError(f"rate must be a finite non-negative real, got {rate}")
    if not nu > 0:
        raise ValueError(f"nu must be positive, got {nu}")
    if rate == 0:
        return SeriesValue(value=1.0, log_value=0.0, terms_used=1, tail_bound=0.0)
    log_sum, _, used, tail = _log_series(math.log(rate), nu, policy)
    return SeriesValue(
        value=float(np.exp(log_sum)), log_value=log_sum, terms_used=used, tail_bound=tail
    )


@lru_cache(maxsize=None)
def _solve_log_rate(x: int, nu: float, eps_solve: float, eps_tail: float, max_terms: int):
    """Root of mean(log_rate) = x; returns (log_rate, log_norm, used, tail).

    The mean is strictly increasing in the rate (its log-rate derivative
    equals the variance), so a bracketing safeguarded Newton iteration is
    globally convergent.
    """
    policy = NumericPolicy(eps_tail=eps_tail, eps_solve=eps_solve, max_terms=max_terms)
    if x == 0:
        return -math.inf, 0.0, 1, 0.0

    def evaluate(u):
        log_sum, lw, _, _ = _log_series(u, nu, policy)
        return _moments(lw, log_sum)

    u_hi = nu * math.log(x + 1.0)
    for _ in range(_MAX_BRACKET_EXPANSIONS):
        if evaluate(u_hi)[0] > x:
            break
        u_hi += nu * math.log(2.0)
    else:
        raise SeriesTruncationError(
            f"bracket expansion failed: mean never exceeded {x} (nu={nu:.6g})"
        )
    u_lo = nu * math.log(max(x, 1) / 2.0)
    for _ in range(_MAX_BRACKET_EXPANSIONS):
        if evaluate(u_lo)[0] < x:
            break
        u_lo -= nu * math.log(2.0)
    else:
        raise SeriesTruncationError(
            f"bracket expansion failed: mean never fell below {x} (nu={nu:.6g})"
        )

    guess = x + (nu - 1.0) / (2.0 * nu)
    u = nu * math.log(guess) if guess > 0 else 0.5 * (u_lo + u_hi)
    u = min(max(u, u_lo), u_hi)
    for _ in range(_MAX_SOLVE_ITERATIONS):
        mean, var = evaluate(u)
        f = mean - x
        if abs(f) <= eps_solve:
            break
        if f > 0:
            u_hi = u
        else:
            u_lo = u
        step = u - f / var if var > 0 else math.nan
        u = step if u_lo < step < u_hi else 0.5 * (u_lo + u_hi)
        if u_hi - u_lo <= 1e-15 * max(1.0, abs(u)):
            mean, _ = evaluate(u)
            if abs(mean - x) > eps_solve:
                raise SeriesTruncationError(
                    f"mean solve stalled at |mean - {x}| = {abs(mean - x):.3g} (nu={nu:.6g})"
                )
            break
    else:
        raise SeriesTruncationError(f"mean solve did not converge (x={x}, nu={nu:.6g})")

    log_sum, _, used, tail = _log_series(u, nu, policy)
    return u, log_sum, used, tail


def solve_rate(x: int, nu: float, policy: NumericPolicy = DEFAULT_POLICY) -> KernelParams:
    """Solve for the rate whose kernel mean equals the target ``x``.

    The solved distribution satisfies ``sum_z weight(z) * (z - x) = 0``,
    i.e. its mean matches ``x`` within ``policy.eps_solve``.
    """
    if x < 0 or x != int(x):
        raise ValueError(f"target must be a non-negative integer, got {x}")
    if not nu > 0:
        raise ValueError(f"nu must be positive, got {nu}")
    log_rate, _, used, tail = _solve_log_rate(
        int(x), float(nu), policy.eps_solve, policy.eps_tail, policy.max_terms
    )
    return KernelParams(
        rate=float(np.exp(log_rate)),
        log_rate=log_rate,
        dispersion=float(nu),
        mean=float(x),
        truncation_z=used - 1,
        tail_bound=tail,
    )


def clear_rate_cache():
    """Drop all memoized rate solves (mainly for tests and benchmarks)."""
    _solve_log_rate.cache_clear()


def pmf(x: int, h: float, z, policy: NumericPolicy = DEFAULT_POLICY):
    """Kernel mass at count(s) ``z`` for target ``x`` and bandwidth ``h``.

    Accepts a scalar or array ``z``; entries outside the non-negative
    integers get mass 0.
    """
    if not h > 0:
        raise ValueError(f"bandwidth must be positive, got {h}")
    nu = 1.0 / h
    log_rate, log_norm, _, _ = _solve_log_rate(
        int(x), nu, policy.eps_solve, policy.eps_tail, policy.max_terms
    )
    z_arr = np.asarray(z)
    scalar = z_arr.ndim == 0
    z_flat = np.atleast_1d(z_arr).astype(np.int64)
    out = np.zeros(z_flat.shape, dtype=float)
    valid = z_flat >= 0
    if log_rate == -math.inf:
        out[valid & (z_flat == 0)] = 1.0
    elif valid.any():
        zv = z_flat[valid]
        lf = log_factorials(int(zv.max()))
        out[valid] = np.exp(zv * log_rate - nu * lf[zv] - log_norm)
    return float(out[0]) if scalar else out


def mean_variance(x: int, h: float, policy: NumericPolicy = DEFAULT_POLICY):
    """Exact (mean, variance) of the kernel by truncated summation."""
    if not h > 0:
        raise ValueError(f"bandwidth must be positive, got {h}")
    nu = 1.0 / h
    log_rate, _, _, _ = _solve_log_rate(
        int(x), nu, policy.eps_solve, policy.eps_tail, policy.max_terms
    )
    return moments_at_log_rate(log_rate, nu, policy)


def variance(x: int, h: float, policy: NumericPolicy = DEFAULT_POLICY) -> float:
    """Exact kernel variance at target ``x`` and bandwidth ``h``."""
    return mean_variance(x, h, policy)[1]


def variance_small_h(x: int, h: float, policy: NumericPolicy = DEFAULT_POLICY) -> float:
    """Leading term ``h * rate**h`` of the small-bandwidth variance expansion."""
    if not h > 0:
        raise ValueError(f"bandwidth must be positive, got {h}")
    nu = 1.0 / h
    log_rate, _, _, _ = _solve_log_rate(
        int(x), nu, policy.eps_solve, policy.eps_tail, policy.max_terms
    )
    if log_rate == -math.inf:
        return 0.0
    return h * math.exp(h * log_rate)


def log_normalizer_expansion(rate: float, nu: float) -> float:
    """Large-rate asymptotic expansion of ``log(normalizing_constant)``.

    Valid as ``rate**(1/nu)`` grows; the neglected remainder is of order
    ``rate**(-3/nu)``.
    """
    if not rate > 0:
        raise ValueError(f"rate must be positive, got {rate}")
    if not nu > 0:
        raise ValueError(f"nu must be positive, got {nu}")
    log_rate = math.log(rate)
    root = math.exp(log_rate / nu)
    return (
        nu * root
        - (nu - 1.0) / (2.0 * nu) * log_rate
        - ((nu - 1.0) / 2.0 * math.log(2.0 * math.pi) + 0.5 * math.log(nu))
        + (nu * nu - 1.0) / (24.0 * nu) / root
        + (nu * nu - 1.0) / (48.0 * nu * nu) / root**2
    )


def dispersion_regime(h: float) -> str:
    """Classify the kernel's dispersion relative to Poisson at bandwidth ``h``."""
    if h < 1.0:
        return "underdispersed"
    if h == 1.0:
        return "poisson"
    return "overdispersed"
