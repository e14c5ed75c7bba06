"""Discrete associated kernels on count supports.

A discrete associated kernel for a target count ``x`` and bandwidth
``h > 0`` is a pmf on a count support containing ``x`` whose mean tends
to ``x`` and whose variance tends to a limit in ``[0, 1)`` as ``h -> 0``.
Kernels whose limit variance is 0 are second-order (Dirac, CoM-Poisson);
the binomial kernel is first-order with limit variance ``x / (x + 1)``.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import cmp
from .numeric import DEFAULT_POLICY, NumericPolicy, fit_loglog_slope

DIRAC = "dirac"
BINOMIAL = "binomial"
CMP = "cmp"
KERNEL_FAMILIES = (DIRAC, BINOMIAL, CMP)


@dataclass(frozen=True)
class KernelSpec:
    """A kernel family together with its numeric policy."""

    family: str = CMP
    policy: NumericPolicy = field(default_factory=NumericPolicy)

    def __post_init__(self):
        if self.family not in KERNEL_FAMILIES:
            raise ValueError(
                f"unknown kernel family {self.family!r}; expected one of {KERNEL_FAMILIES}"
            )

    def check_bandwidth(self, h: float):
        """Validate ``h`` for this family; binomial requires ``h`` in (0, 1)."""
        if not (np.isfinite(h) and h > 0):
            raise ValueError(f"bandwidth must be a positive finite real, got {h}")
        if self.family == BINOMIAL and not h < 1:
            raise ValueError(f"binomial kernel requires bandwidth in (0, 1), got {h}")

    def bandwidth_admissible(self, h: float) -> bool:
        try:
            self.check_bandwidth(h)
        except ValueError:
            return False
        return True


@dataclass(frozen=True, eq=False)
class KernelEval:
    """A kernel materialized as a finite pmf over an explicit support."""

    target: int
    bandwidth: float
    support: np.ndarray
    probabilities: np.ndarray
    tail_bound: float


@dataclass
class ProbeReport:
    """Empirical kernel diagnostics along a decreasing bandwidth sequence.

    ``sup_mean_dev[k]`` and ``sup_var[k]`` are the suprema over the probed
    targets of ``|mean - x|`` and of the variance at ``h_values[k]``;
    ``delta_estimate`` is the limit-variance estimate (the supremum at the
    smallest probed bandwidth) and the rate exponents are log-log slopes
    of the two suprema against the bandwidth.
    """

    h_values: list
    sup_mean_dev: list
    sup_var: list
    delta_estimate: float
    mean_rate_exponent: float
    var_rate_exponent: float

    def to_json_dict(self):
        return {
            "h_values": list(map(float, self.h_values)),
            "sup_mean_dev": list(map(float, self.sup_mean_dev)),
            "sup_var": list(map(float, self.sup_var)),
            "delta_estimate": float(self.delta_estimate),
            "mean_rate_exponent": _json_float(self.mean_rate_exponent),
            "var_rate_exponent": _json_float(self.var_rate_exponent),
        }


def _json_float(v):
    return None if (v is None or not math.isfinite(v)) else float(v)


def dirac_kernel_pmf(x: int, z) -> float:
    """Point mass at the target: 1 if ``z == x`` else 0."""
    z_arr = np.asarray(z)
    out = (z_arr == x).astype(float)
    return float(out) if z_arr.ndim == 0 else out


def binomial_kernel_pmf(x: int, h: float, z) -> float:
    """Binomial(``x + 1``, ``(x + h)/(x + 1)``) mass at ``z``; 0 off-support."""
    if not 0 < h < 1:
        raise ValueError(f"binomial kernel requires bandwidth in (0, 1), got {h}")
    out = stats.binom.pmf(z, x + 1, (x + h) / (x + 1))
    return float(out) if np.asarray(z).ndim == 0 else np.asarray(out)


def kernel_pmf(spec: KernelSpec, x: int, h: float, z):
    """Kernel mass at count(s) ``z``; scalar in, scalar out."""
    spec.check_bandwidth(h)
    if spec.family == DIRAC:
        return dirac_kernel_pmf(x, z)
    if spec.family == BINOMIAL:
        return binomial_kernel_pmf(x, h, z)
    return cmp.pmf(x, h, z, spec.policy)


def kernel_eval(spec: KernelSpec, x: int, h: float) -> KernelEval:
    """Materialize the kernel as a finite pmf with a certified tail bound."""
    spec.check_bandwidth(h)
    if x < 0 or x != int(x):
        raise ValueError(f"target must be a non-negative integer, got {x}")
    x = int(x)
    if spec.family == DIRAC:
        return KernelEval(x, h, np.array([x]), np.array([1.0]), 0.0)
    if spec.family == BINOMIAL:
        support = np.arange(x + 2)
        probs = binomial_kernel_pmf(x, h, support)
        return KernelEval(x, h, support, probs, 0.0)
    params = cmp.solve_rate(x, 1.0 / h, spec.policy)
    support = np.arange(params.truncation_z + 1)
    probs = cmp.pmf(x, h, support, spec.policy)
    return KernelEval(x, h, support, probs, params.tail_bound)


def kernel_mean_variance(spec: KernelSpec, x: int, h: float):
    """Kernel (mean, variance) by direct summation over the finite support."""
    ev = kernel_eval(spec, x, h)
    mean = math.fsum(ev.probabilities * ev.support)
    var = math.fsum(ev.probabilities * (ev.support - mean) ** 2)
    return mean, var


def assumption_probe(spec: KernelSpec, targets, h_values) -> ProbeReport:
    """Probe the kernel's uniform mean/variance convergence empirically.

    For each bandwidth, reports the supremum over ``targets`` of
    ``|mean - x|`` and of the variance, both by direct summation.  A
    second-order kernel drives the variance supremum to 0; a first-order
    kernel leaves a positive limit, reported as ``delta_estimate``.
    """
    targets = [int(t) for t in targets]
    if not targets:
        raise ValueError("targets must be a non-empty integer range")
    h_values = [float(h) for h in h_values]
    if len(h_values) == 0:
        raise ValueError("h_values must be non-empty")
    if any(hb >= ha for ha, hb in zip(h_values, h_values[1:])):
        raise ValueError("h_values must be strictly decreasing")
    sup_mean_dev, sup_var = [], []
    for h in h_values:
        devs, varis = [], []
        for x in targets:
            mean, var = kernel_mean_variance(spec, x, h)
            devs.append(abs(mean - x))
            varis.append(var)
        sup_mean_dev.append(max(devs))
        sup_var.append(max(varis))
    return ProbeReport(
        h_values=h_values,
        sup_mean_dev=sup_mean_dev,
        sup_var=sup_var,
        delta_estimate=sup_var[-1],
        mean_rate_exponent=fit_loglog_slope(h_values, sup_mean_dev),
        var_rate_exponent=fit_loglog_slope(h_values, sup_var),
    )
