"""Numeric policy and shared low-level series utilities."""

from dataclasses import dataclass

import numpy as np

# A term is considered negligible once term / partial_sum drops below this
# ratio for THREE consecutive terms.
TERM_RATIO_TOL = 1e-16
_CONSECUTIVE = 3


class SeriesTruncationError(RuntimeError):
    """A truncated series failed to converge within the allowed term count."""


class TailCertificationError(RuntimeError):
    """A tail mass bound could not be certified within the allowed range."""


@dataclass(frozen=True)
class NumericPolicy:
    """Tolerances governing series truncation and mean-matching solves.

    Parameters
    ----------
    eps_tail : float
        Maximum tolerated (relative) mass excluded by truncating an
        infinite-support pmf or series.
    eps_solve : float
        Absolute tolerance on the kernel mean when solving for the
        rate parameter of the mean-parametrized CoM-Poisson kernel.
    max_terms : int
        Hard cap on the number of series terms; exceeding it raises
        ``SeriesTruncationError`` instead of silently truncating.
    """

    eps_tail: float = 1e-10
    eps_solve: float = 1e-10
    max_terms: int = 10**6

    def __post_init__(self):
        if not (self.eps_tail > 0 and np.isfinite(self.eps_tail)):
            raise ValueError(f"eps_tail must be a positive finite real, got {self.eps_tail}")
        if not (self.eps_solve > 0 and np.isfinite(self.eps_solve)):
            raise ValueError(f"eps_solve must be a positive finite real, got {self.eps_solve}")
        if self.max_terms < 1:
            raise ValueError(f"max_terms must be >= 1, got {self.max_terms}")


DEFAULT_POLICY = NumericPolicy()

# Grow-only table of log(z!); readers keep a local reference, so concurrent
# extension is safe under the GIL.
_LOG_FACT = np.zeros(1)


def log_factorials(n: int) -> np.ndarray:
    """Return an array whose entry ``z`` is ``log(z!)`` for ``z = 0..n``."""
    global _LOG_FACT
    table = _LOG_FACT
    if table.size <= n:
        size = max(n + 1, 2 * table.size, 1024)
        grown = np.empty(size)
        grown[: table.size] = table
        grown[table.size:] = table[-1] + np.cumsum(
            np.log(np.arange(table.size, size, dtype=float))
        )
        _LOG_FACT = table = grown
    return table


def guarded_log_series(log_terms: np.ndarray):
    """Sum ``exp(log_terms)`` in log space with the spec'd stopping rule.

    Accumulates running log partial sums and stops at the first position
    where the term-to-partial-sum ratio has been below ``TERM_RATIO_TOL``
    for three consecutive terms.

    Returns
    -------
    (log_sum, terms_used, stopped) : tuple
        ``log_sum`` is the log of the partial sum through ``terms_used``
        terms; ``stopped`` is False when the rule never triggered within
        the supplied terms.
    """
    log_partials = np.logaddexp.accumulate(log_terms)
    small = (log_terms - log_partials) < np.log(TERM_RATIO_TOL)
    run = small.copy()
    for k in range(1, _CONSECUTIVE):
        run[k:] &= small[:-k]
        run[:k] = False
    hits = np.flatnonzero(run)
    if hits.size == 0:
        return float(log_partials[-1]), log_terms.size, False
    stop = int(hits[0])
    return float(log_partials[stop]), stop + 1, True


def fit_loglog_slope(x: np.ndarray, y: np.ndarray) -> float:
    """Least-squares slope of ``log y`` against ``log x``, dropping exact zeros."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = (y > 0) & (x > 0)
    if keep.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)[0])
