"""Critical exponents, critical curves, and blow-up condition checks.

The two condition checks mirror the dichotomy driven by kernel decay: when
both kernels decay slower than 1/t the condition couples the kernels, the
powers, and a slowly growing log-iterate; when both decay faster than 1/t the
condition collapses to the classical critical-curve inequality for coupled
wave systems.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError, UnsupportedError
from .kernels import DecayTag, MemoryKernel, classify_decay

__all__ = [
    "ProblemParams",
    "Branch",
    "ConditionVerdict",
    "RegionMap",
    "strauss_exponent",
    "generalized_strauss",
    "alpha_w",
    "alpha_wm",
    "log_iterate",
    "default_condition_times",
    "check_condition_slow",
    "check_condition_fast",
    "sweep_region",
    "region_from_grids",
    "experimental_mixed_condition",
]

MAX_LOG_DEPTH = 4

# Slack (in log units) tolerated when testing an asymptotic lower bound on a
# finite time grid; stands in for the unspecified constant in the condition.
MARGIN_TOLERANCE = 0.5


@dataclass
class ProblemParams:
    """Dimension, powers, optional fractional orders, log-iterate depth."""

    n: int
    p: float
    q: float
    gamma1: float | None = None
    gamma2: float | None = None
    r_depth: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError(f"dimension must be >= 1, got {self.n}")
        if self.p <= 1.0 or self.q <= 1.0:
            raise ConfigError("powers p, q must exceed 1")
        if not 0 <= self.r_depth <= MAX_LOG_DEPTH:
            raise ConfigError(f"r_depth must be in 0..{MAX_LOG_DEPTH}")
        for g in (self.gamma1, self.gamma2):
            if g is not None and not 0.0 < g < 1.0:
                raise ConfigError(f"fractional order must be in (0, 1), got {g}")

    @property
    def sobolev_violated(self) -> bool:
        """True when (p, q) exceed the n/(n-2) admissibility bound (n >= 3)."""
        if self.n < 3:
            return False
        bound = self.n / (self.n - 2)
        return self.p > bound or self.q > bound


class Branch(enum.Enum):
    SLOW_SLOW = "slow-slow"
    FAST_FAST = "fast-fast"
    UNSUPPORTED = "unsupported"


@dataclass
class ConditionVerdict:
    satisfied: bool
    branch: Branch
    witness_times: list = field(default_factory=list)
    margin: float = math.nan
    critical: bool = False


def strauss_exponent(n: int) -> float:
    """Critical power for the memoryless semilinear wave equation.

    Positive root of (n-1)p^2 - (n+1)p - 2 = 0 for n >= 2; infinite for n = 1.
    """
    if n < 1:
        raise DomainError(f"dimension must be positive, got {n}")
    if n == 1:
        return math.inf
    return (n + 1 + math.sqrt(n * n + 10 * n - 7)) / (2 * (n - 1))


def generalized_strauss(n: int, gamma: float) -> float:
    """Critical power with a fractional-integral memory term of order 1-gamma.

    Positive root of (n-1)p^2 - (n+3-2*gamma)p - 2 = 0; tends to the plain
    critical power as gamma -> 1.
    """
    if not 0.0 < gamma < 1.0:
        raise DomainError(f"gamma must lie in (0, 1), got {gamma}")
    if n < 1:
        raise DomainError(f"dimension must be positive, got {n}")
    if n == 1:
        return math.inf
    b = n + 3.0 - 2.0 * gamma
    return (b + math.sqrt(b * b + 8.0 * (n - 1))) / (2.0 * (n - 1))


def alpha_w(p, q):
    """Critical-curve quantity for the coupled system without memory."""
    pq1 = p * q - 1.0
    return np.maximum((p + 2.0 + 1.0 / q) / pq1, (q + 2.0 + 1.0 / p) / pq1)


def alpha_wm(p, q, gamma1, gamma2):
    """Critical-curve quantity with fractional memory of orders gamma1, gamma2.

    Reduces exactly to alpha_w at gamma1 = gamma2 = 1 (admitted here as a
    formula boundary for limit checks).
    """
    pq1 = p * q - 1.0
    first = ((2.0 - gamma2) * p + (3.0 - gamma1) + 1.0 / q) / pq1
    second = ((2.0 - gamma1) * q + (3.0 - gamma2) + 1.0 / p) / pq1
    return np.maximum(first, second)


# exp towers exp^(j)(1); the last entry overflows to inf, which makes the
# depth-4 log-iterate numerically flat (its true increment underflows doubles).
def _exp_tower(j: int) -> float:
    x = 1.0
    for _ in range(j):
        x = math.exp(min(x, 700.0))
        if x > 1e308:
            return math.inf
    return x


def log_iterate(t, r: int = 0):
    """Slowly growing unbounded function with value 0 at t = 0.

    (r+1)-fold logarithm of (exp tower of height r at 1, plus t), evaluated
    through nested log1p so the zero at t = 0 is exact.
    """
    if r < 0 or r > MAX_LOG_DEPTH:
        raise UnsupportedError(f"log-iterate depth must be in 0..{MAX_LOG_DEPTH}")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0):
        raise DomainError("log_iterate requires t >= 0")
    delta = t
    for k in range(1, r + 1):
        delta = np.log1p(delta / _exp_tower(r - k + 1))
    out = np.log1p(delta)
    return float(out) if out.ndim == 0 else out


def default_condition_times(num: int = 121) -> np.ndarray:
    """Log-spaced grid on [1, 1e6] used to probe asymptotic conditions."""
    return np.geomspace(1.0, 1e6, num)


def _require_class(kernel: MemoryKernel, tag: DecayTag, role: str) -> None:
    cls = classify_decay(kernel)
    if cls.tag is not tag:
        raise ConfigError(
            f"{role} kernel classified {cls.tag.value}, expected {tag.value}"
        )


def check_condition_slow(
    params: ProblemParams,
    g1: MemoryKernel,
    g2: MemoryKernel,
    times=None,
) -> ConditionVerdict:
    """Blow-up condition for two slow-decay kernels, tested on a time grid.

    Compares log LHS(t) = log(g1 g2 max{g1^(q-1) t^(2q+1/p), g2^(p-1) t^(2p+1/q)})
    against log RHS(t) = ((n-1)(pq-1)/2 - 3) log t + log of the log-iterate.
    Satisfied when the gap stays above -MARGIN_TOLERANCE over the last half of
    the grid; the reported margin is the gap at the largest time.
    """
    _require_class(g1, DecayTag.SLOW, "first")
    _require_class(g2, DecayTag.SLOW, "second")
    if times is None:
        times = default_condition_times()
    times = np.asarray(times, dtype=float)
    if times.size == 0 or np.any(times <= 0.0) or np.any(np.diff(times) <= 0.0):
        raise ConfigError("times must be a nonempty increasing positive grid")

    n, p, q = params.n, params.p, params.q
    logt = np.log(times)
    logg1 = np.log(np.asarray(g1(times), dtype=float))
    logg2 = np.log(np.asarray(g2(times), dtype=float))
    lhs = logg1 + logg2 + np.maximum(
        (q - 1.0) * logg1 + (2.0 * q + 1.0 / p) * logt,
        (p - 1.0) * logg2 + (2.0 * p + 1.0 / q) * logt,
    )
    rhs = ((n - 1) * (p * q - 1.0) / 2.0 - 3.0) * logt + np.log(
        log_iterate(times, params.r_depth)
    )
    gap = lhs - rhs
    tail = gap[times.size // 2 :]
    return ConditionVerdict(
        satisfied=bool(np.min(tail) >= -MARGIN_TOLERANCE),
        branch=Branch.SLOW_SLOW,
        witness_times=list(times),
        margin=float(gap[-1]),
    )


def check_condition_fast(params: ProblemParams) -> ConditionVerdict:
    """Blow-up condition for two fast-decay kernels: alpha_w(p,q) > (n-1)/2.

    Strict inequality; equality is the open critical case and is reported as
    not satisfied with the critical flag set.
    """
    value = float(alpha_w(params.p, params.q))
    threshold = (params.n - 1) / 2.0
    return ConditionVerdict(
        satisfied=value > threshold,
        branch=Branch.FAST_FAST,
        margin=value - threshold,
        critical=value == threshold,
    )


@dataclass
class RegionMap:
    """Grid of condition verdicts over the (p, q) plane."""

    p_values: np.ndarray
    q_values: np.ndarray
    branch: Branch
    satisfied: np.ndarray  # bool, shape (len(p), len(q))
    margin: np.ndarray  # float, alpha - (n-1)/2

    def rows(self):
        """Yield (p, q, branch, satisfied, margin) row tuples, p-major."""
        for i, p in enumerate(self.p_values):
            for j, q in enumerate(self.q_values):
                yield (
                    float(p),
                    float(q),
                    self.branch.value,
                    bool(self.satisfied[i, j]),
                    float(self.margin[i, j]),
                )


def sweep_region(
    n: int,
    gamma1: float | None,
    gamma2: float | None,
    p_range,
    q_range,
    resolution: int,
) -> RegionMap:
    """Evaluate the blow-up condition on a (p, q) grid.

    With fractional orders given the slow-slow critical curve is used; with
    both None the fast-fast inequality applies.  gamma = 1 is accepted as the
    formula boundary (the two then coincide).
    """
    p_lo, p_hi = map(float, p_range)
    q_lo, q_hi = map(float, q_range)
    if resolution < 1 or p_hi < p_lo or q_hi < q_lo:
        raise ConfigError("empty sweep range")
    if p_lo <= 1.0 or q_lo <= 1.0:
        raise ConfigError("sweep powers must exceed 1")
    ps = np.linspace(p_lo, p_hi, resolution)
    qs = np.linspace(q_lo, q_hi, resolution)
    return region_from_grids(n, gamma1, gamma2, ps, qs)


def region_from_grids(
    n: int,
    gamma1: float | None,
    gamma2: float | None,
    ps,
    qs,
) -> RegionMap:
    """Evaluate the blow-up condition on explicitly given p and q grids."""
    ps = np.asarray(ps, dtype=float)
    qs = np.asarray(qs, dtype=float)
    P, Q = np.meshgrid(ps, qs, indexing="ij")
    threshold = (n - 1) / 2.0
    if gamma1 is None and gamma2 is None:
        alpha = alpha_w(P, Q)
        branch = Branch.FAST_FAST
    elif gamma1 is not None and gamma2 is not None:
        if not (0.0 < gamma1 <= 1.0 and 0.0 < gamma2 <= 1.0):
            raise ConfigError("fractional orders must lie in (0, 1]")
        alpha = alpha_wm(P, Q, gamma1, gamma2)
        branch = Branch.SLOW_SLOW
    else:
        raise ConfigError("give both fractional orders or neither")
    margin = alpha - threshold
    return RegionMap(ps, qs, branch, margin > 0.0, margin)


def experimental_mixed_condition(
    params: ProblemParams,
    g1: MemoryKernel,
    g2: MemoryKernel,
    slow_index: int,
    times=None,
):
    """EXPERIMENTAL: raw terms of the conjectural mixed slow/fast condition.

    One kernel decays slower and one faster than 1/t; the blow-up condition in
    this regime is a conjecture, so no verdict is produced.  Returns
    (times, log_lhs, log_rhs) for inspection only.
    """
    if slow_index not in (1, 2):
        raise ConfigError("slow_index must be 1 or 2")
    if times is None:
        times = default_condition_times()
    times = np.asarray(times, dtype=float)
    n, p, q = params.n, params.p, params.q
    logt = np.log(times)
    logL = np.log(log_iterate(times, params.r_depth))
    rhs = ((n - 1) * (p * q - 1.0) / 2.0 - 2.0) * logt + logL
    if slow_index == 1:
        logg = np.log(np.asarray(g1(times), dtype=float))
        lhs = logg + np.maximum(
            (q - 1.0) * logg + (2.0 * q + 1.0 / p) * logt,
            (p + 1.0 + 1.0 / q) * logt,
        )
    else:
        logg = np.log(np.asarray(g2(times), dtype=float))
        lhs = logg + np.maximum(
            (q + 1.0 + 1.0 / p) * logt,
            (p - 1.0) * logg + (2.0 * p + 1.0 / q) * logt,
        )
    return times, lhs, rhs
