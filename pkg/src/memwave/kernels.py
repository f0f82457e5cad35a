"""Memory kernels g(t), their antiderivatives, and decay classification.

Every kernel is positive on t > 0, integrable near t = 0 (singularity order
strictly below 1), and immutable after construction.  The decay classification
compares the large-time behaviour of g against the reference rate 1/t: kernels
bounded below by c/t are Slow, kernels bounded above by c/t are Fast.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import ConfigError, DomainError, InsufficientDataError, UnsupportedError

__all__ = [
    "MemoryKernel",
    "RiemannLiouville",
    "PolynomialShifted",
    "Exponential",
    "IteratedExponential",
    "OscillatingPolynomial",
    "Constant",
    "Custom",
    "DecayTag",
    "DecayClass",
    "classify_decay",
    "minorant",
]

# Floor used when a very fast kernel underflows double precision; keeps g > 0.
_TINY = 1e-300

# Band (in log-log slope units) around -1 inside which a tabulated kernel is
# reported as Indeterminate rather than Slow/Fast.
_SLOPE_BAND = 0.05


class DecayTag(enum.Enum):
    SLOW = "slow"
    FAST = "fast"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class DecayClass:
    """Decay verdict plus the onset time of the asymptotic bound."""

    tag: DecayTag
    t0: float = 0.0


class MemoryKernel:
    """Base class: evaluator g(t) with antiderivatives G and ∫G.

    Subclasses set ``singularity_order`` (the s in g ~ t^-s near 0) and
    ``monotone`` (True when g is non-increasing on (0, ∞)).
    """

    singularity_order: float = 0.0
    monotone: bool = True

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0.0):
            raise DomainError("kernel argument must be nonnegative")
        if self.singularity_order > 0.0 and np.any(t == 0.0):
            raise DomainError("kernel is singular at t = 0")
        out = self._eval(t)
        return float(out) if np.isscalar(out) or out.ndim == 0 else out

    def _eval(self, t):
        raise NotImplementedError

    def antiderivative(self, t: float) -> float:
        """G(t) = ∫_0^t g, with G(0) = 0."""
        if t < 0.0:
            raise DomainError("antiderivative argument must be nonnegative")
        if t == 0.0:
            return 0.0
        return self._antiderivative(t)

    def _antiderivative(self, t: float) -> float:
        val, _ = integrate.quad(lambda s: self(s), 0.0, t, epsrel=1e-12, limit=200)
        return val

    def second_antiderivative(self, t: float) -> float:
        """∫_0^t G(τ) dτ; smooth even for singular kernels."""
        if t < 0.0:
            raise DomainError("argument must be nonnegative")
        if t == 0.0:
            return 0.0
        val, _ = integrate.quad(self.antiderivative, 0.0, t, epsrel=1e-12, limit=200)
        return val

    def value_at_zero(self) -> float:
        if self.singularity_order > 0.0:
            raise UnsupportedError("kernel is singular at t = 0")
        return self(0.0)

    def derivative_at_zero(self) -> float:
        raise UnsupportedError(f"{type(self).__name__} has no C^1 extension to t = 0")


class RiemannLiouville(MemoryKernel):
    """g(t) = scale * t^-gamma / Gamma(1 - gamma), gamma in (0, 1).

    The default scale 1 is the Riemann-Liouville fractional-integral kernel of
    order 1 - gamma; scale = Gamma(1 - gamma) gives the bare power law t^-gamma.
    """

    def __init__(self, gamma: float, scale: float = 1.0):
        if not 0.0 < gamma < 1.0:
            raise ConfigError(f"RiemannLiouville requires gamma in (0, 1), got {gamma}")
        if scale <= 0.0:
            raise ConfigError("scale must be positive")
        self.gamma = gamma
        self.scale = scale
        self.singularity_order = gamma
        self._norm = scale / math.gamma(1.0 - gamma)

    def _eval(self, t):
        return self._norm * t ** (-self.gamma)

    def _antiderivative(self, t):
        return self._norm * t ** (1.0 - self.gamma) / (1.0 - self.gamma)

    def second_antiderivative(self, t):
        g = self.gamma
        return self._norm * t ** (2.0 - g) / ((1.0 - g) * (2.0 - g))


class PolynomialShifted(MemoryKernel):
    """g(t) = (1 + t)^-gamma with gamma >= 0; no singularity at t = 0."""

    def __init__(self, gamma: float):
        if gamma < 0.0:
            raise ConfigError(f"PolynomialShifted requires gamma >= 0, got {gamma}")
        self.gamma = gamma

    def _eval(self, t):
        return (1.0 + t) ** (-self.gamma)

    def _antiderivative(self, t):
        g = self.gamma
        if g == 1.0:
            return math.log1p(t)
        return (((1.0 + t) ** (1.0 - g)) - 1.0) / (1.0 - g)

    def second_antiderivative(self, t):
        g = self.gamma
        if g == 1.0:
            return (1.0 + t) * math.log1p(t) - t
        if g == 2.0:
            return t - math.log1p(t)
        return ((((1.0 + t) ** (2.0 - g)) - 1.0) / (2.0 - g) - t) / (1.0 - g)

    def value_at_zero(self):
        return 1.0

    def derivative_at_zero(self):
        return -self.gamma


class Exponential(MemoryKernel):
    """g(t) = exp(-t / beta) with beta > 0."""

    def __init__(self, beta: float):
        if beta <= 0.0:
            raise ConfigError(f"Exponential requires beta > 0, got {beta}")
        self.beta = beta

    def _eval(self, t):
        return np.exp(-t / self.beta)

    def _antiderivative(self, t):
        return self.beta * -math.expm1(-t / self.beta)

    def second_antiderivative(self, t):
        return self.beta * t + self.beta**2 * math.expm1(-t / self.beta)

    def value_at_zero(self):
        return 1.0

    def derivative_at_zero(self):
        return -1.0 / self.beta


class IteratedExponential(MemoryKernel):
    """Very fast decay: log g(t) = -exp^(depth-1)(c t), depth in 1..4.

    depth = 1 reduces to exp(-c t); each extra level composes another
    exponential inside, so the decay is super-exponential.  Evaluation happens
    in log-space and underflows to a positive floor instead of to zero.
    """

    MAX_DEPTH = 4

    def __init__(self, depth: int, c: float):
        if not 1 <= depth <= self.MAX_DEPTH:
            raise ConfigError(f"depth must be in 1..{self.MAX_DEPTH}, got {depth}")
        if c <= 0.0:
            raise ConfigError(f"IteratedExponential requires c > 0, got {c}")
        self.depth = depth
        self.c = c

    def _log_g(self, t):
        tower = self.c * np.asarray(t, dtype=float)
        for _ in range(self.depth - 1):
            tower = np.exp(np.minimum(tower, 700.0))
        return -tower

    def _eval(self, t):
        return np.maximum(np.exp(np.maximum(self._log_g(t), -700.0)), _TINY)

    def _antiderivative(self, t):
        # g decays so fast that the integral saturates quickly; cap the domain
        # at the point where log g drops below the underflow threshold.
        val, _ = integrate.quad(
            lambda s: self._eval(s), 0.0, t, epsrel=1e-12, limit=200
        )
        return val

    def value_at_zero(self):
        return float(self._eval(0.0))

    def derivative_at_zero(self):
        # d/dx exp^(k)(x) at 0 is the product of the partial towers.
        slope = 1.0
        x = 0.0
        for _ in range(self.depth - 1):
            x = math.exp(x)
            slope *= x
        return -self.c * slope * self.value_at_zero()


class OscillatingPolynomial(MemoryKernel):
    """g(t) = (3 + 2 sin t) t^-gamma, gamma in [0, 1); oscillating but Slow.

    Bounded below by the bare power law t^-gamma, which serves as its
    non-increasing minorant.
    """

    monotone = False

    def __init__(self, gamma: float):
        if not 0.0 <= gamma < 1.0:
            raise ConfigError(f"OscillatingPolynomial requires gamma in [0, 1), got {gamma}")
        self.gamma = gamma
        self.singularity_order = gamma

    def _eval(self, t):
        if self.gamma == 0.0:
            return 3.0 + 2.0 * np.sin(t)
        return (3.0 + 2.0 * np.sin(t)) * t ** (-self.gamma)

    def _antiderivative(self, t):
        if self.gamma == 0.0:
            return 3.0 * t + 2.0 * (1.0 - math.cos(t))
        # Algebraic endpoint weight t^-gamma handled by the quadrature rule.
        val, _ = integrate.quad(
            lambda s: 3.0 + 2.0 * math.sin(s),
            0.0,
            t,
            weight="alg",
            wvar=(-self.gamma, 0.0),
            epsrel=1e-12,
            limit=200,
        )
        return val


class Constant(MemoryKernel):
    """g(t) = c > 0."""

    def __init__(self, c: float):
        if c <= 0.0:
            raise ConfigError(f"Constant requires c > 0, got {c}")
        self.c = c

    def _eval(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.c) if np.ndim(t) else self.c

    def _antiderivative(self, t):
        return self.c * t

    def second_antiderivative(self, t):
        return 0.5 * self.c * t * t

    def value_at_zero(self):
        return self.c

    def derivative_at_zero(self):
        return 0.0


class Custom(MemoryKernel):
    """Tabulated kernel with log-linear (power-law) interpolation.

    Samples must have strictly increasing positive times and positive values.
    Outside the tabulated range the first/last segment's power law is
    extended.
    """

    monotone = False

    def __init__(self, times, values):
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape:
            raise ConfigError("times and values must be 1-d arrays of equal length")
        if len(times) < 2:
            raise ConfigError("need at least two samples")
        if np.any(times <= 0.0) or np.any(np.diff(times) <= 0.0):
            raise ConfigError("sample times must be positive and strictly increasing")
        if np.any(values <= 0.0):
            raise ConfigError("sample values must be positive")
        self.times = times
        self.values = values
        self._logt = np.log(times)
        self._logg = np.log(values)
        slopes = np.diff(self._logg) / np.diff(self._logt)
        # Extrapolation below the first sample uses the first segment slope;
        # that slope also defines the reported singularity order.
        self.singularity_order = max(0.0, -slopes[0])
        self._slopes = slopes

    def _eval(self, t):
        t = np.asarray(t, dtype=float)
        logt = np.log(np.where(t > 0.0, t, _TINY))
        out = np.exp(np.interp(logt, self._logt, self._logg))
        # extend end segments as power laws
        lo = logt < self._logt[0]
        hi = logt > self._logt[-1]
        if np.any(lo):
            out = np.where(
                lo, np.exp(self._logg[0] + self._slopes[0] * (logt - self._logt[0])), out
            )
        if np.any(hi):
            out = np.where(
                hi, np.exp(self._logg[-1] + self._slopes[-1] * (logt - self._logt[-1])), out
            )
        return np.maximum(out, _TINY)


def classify_decay(kernel: MemoryKernel) -> DecayClass:
    """Classify a kernel against the 1/t threshold.

    Analytic families are classified in closed form; tabulated kernels get a
    log-log slope fit over their last decade of samples, with a +-0.05 band
    around slope -1 reported as Indeterminate.
    """
    if isinstance(kernel, (RiemannLiouville, OscillatingPolynomial)):
        return DecayClass(DecayTag.SLOW, 0.0)
    if isinstance(kernel, Constant):
        return DecayClass(DecayTag.SLOW, 0.0)
    if isinstance(kernel, PolynomialShifted):
        if kernel.gamma >= 1.0:
            return DecayClass(DecayTag.FAST, 0.0)
        return DecayClass(DecayTag.SLOW, 1.0)
    if isinstance(kernel, Exponential):
        return DecayClass(DecayTag.FAST, 0.0)
    if isinstance(kernel, IteratedExponential):
        return DecayClass(DecayTag.FAST, 0.0)
    if isinstance(kernel, Custom):
        return _classify_tabulated(kernel)
    raise ConfigError(f"unknown kernel family {type(kernel).__name__}")


def _classify_tabulated(kernel: Custom) -> DecayClass:
    if len(kernel.times) < 16:
        raise InsufficientDataError(
            f"need at least 16 samples to classify, got {len(kernel.times)}"
        )
    t_max = kernel.times[-1]
    window = kernel.times >= t_max / 10.0
    if window.sum() < 3:
        window = np.zeros_like(window, dtype=bool)
        window[-3:] = True
    logt = kernel._logt[window]
    logg = kernel._logg[window]
    slope = np.polyfit(logt, logg, 1)[0]
    t0 = float(kernel.times[window][0])
    if abs(slope + 1.0) <= _SLOPE_BAND:
        return DecayClass(DecayTag.INDETERMINATE, t0)
    if slope > -1.0:
        return DecayClass(DecayTag.SLOW, t0)
    return DecayClass(DecayTag.FAST, t0)


def minorant(kernel: MemoryKernel) -> MemoryKernel:
    """Return a non-increasing kernel bounded above by g everywhere.

    Identity for already monotone Slow kernels; strips the oscillating factor
    of OscillatingPolynomial; running right-minimum envelope for tabulated
    kernels.  Fast kernels are rejected.
    """
    cls = classify_decay(kernel)
    if cls.tag is DecayTag.FAST:
        raise UnsupportedError("minorant is defined only for Slow-class kernels")
    if isinstance(kernel, OscillatingPolynomial):
        if kernel.gamma == 0.0:
            return Constant(1.0)
        # bare power law t^-gamma, i.e. the fractional kernel rescaled
        return RiemannLiouville(kernel.gamma, scale=math.gamma(1.0 - kernel.gamma))
    if isinstance(kernel, Custom):
        # greatest nonincreasing minorant of the samples: running minimum
        envelope = np.minimum.accumulate(kernel.values)
        return Custom(kernel.times, envelope)
    return kernel
