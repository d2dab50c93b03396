"""Finite-SNR diversity and multiplexing analysis.

Multiplexing-gain definitions, numeric and closed-form diversity gains,
SNR (outage) offsets, the asymptotic reference tradeoff curves, and the
SNR thresholds above which the asymptotic curves become accurate.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .channels import ChannelDims, ChannelModel, CorrelationMatrix, KeyholeMode, norms
from .errors import ParameterError, PrecisionError, RegimeError
from .moments import (
    CapacityMoments,
    gaussian_outage_ln,
    iid_power_offset,
    moments_for,
)

DEFAULT_LOG_STEP = 0.05


class MuxGainDef(enum.Enum):
    """How the multiplexing gain maps to a rate at finite SNR."""

    RAW_LOG = "rawlog"          # R = r ln(gamma)
    OFFSET_LOG = "offsetlog"    # R = r ln(gamma / a)
    MEAN_CAPACITY = "meancap"   # R = r * mean_capacity / m_star

    @classmethod
    def parse(cls, tag: str) -> "MuxGainDef":
        for member in cls:
            if member.value == tag:
                return member
        raise ParameterError(f"unknown multiplexing-gain definition {tag!r}")


@dataclass(frozen=True)
class DmtPoint:
    """One (SNR, r) evaluation of the finite-SNR tradeoff."""

    gamma: float
    r: float
    rate_nats: float
    p_out: float
    d_gamma: float
    d_prime: float
    c_gamma: float


def rate_from_mux(
    r: float,
    mux: MuxGainDef,
    gamma: float,
    moments: CapacityMoments,
    m_star: int,
    a: Optional[float] = None,
) -> float:
    """Rate in nats implied by multiplexing gain r under the chosen definition."""
    if not 0 <= r <= m_star:
        raise ParameterError(f"r must be in [0, {m_star}], got {r}")
    if r == 0:
        return 0.0
    if mux is MuxGainDef.RAW_LOG:
        if gamma <= 1:
            raise RegimeError(f"r ln(gamma) needs gamma > 1, got {gamma}")
        return r * math.log(gamma)
    if mux is MuxGainDef.OFFSET_LOG:
        if a is None:
            raise ParameterError("offset-log definition requires the power offset a")
        if not a > 0:
            raise ParameterError(f"power offset must be > 0, got {a}")
        if gamma <= a:
            raise RegimeError(f"r ln(gamma/a) needs gamma > a = {a}, got {gamma}")
        return r * math.log(gamma / a)
    return r * moments.mean_nats / m_star


def d_gamma_from_outage(p_out: float, gamma: float) -> float:
    """Plain finite-SNR diversity gain -ln(P_out)/ln(gamma)."""
    if gamma <= 1:
        raise RegimeError(f"diversity gain needs gamma > 1, got {gamma}")
    if not 0 <= p_out <= 1:
        raise ParameterError(f"p_out must be a probability, got {p_out}")
    if p_out == 0:
        return math.inf
    return -math.log(p_out) / math.log(gamma)


def d_prime_numeric(
    p_out_fn: Callable[[float], float],
    gamma: float,
    step: float = DEFAULT_LOG_STEP,
    log_domain: bool = False,
) -> float:
    """Differential diversity gain -d ln(P_out)/d ln(gamma), central difference.

    With log_domain=True, p_out_fn is expected to return ln P_out directly,
    which is the only safe option deep in the outage tail.
    """
    hi = p_out_fn(gamma * math.exp(step))
    lo = p_out_fn(gamma * math.exp(-step))
    if not log_domain:
        if hi <= 0 or lo <= 0:
            raise PrecisionError(
                "outage underflowed to zero inside the stencil; "
                "use a log-domain outage function"
            )
        hi, lo = math.log(hi), math.log(lo)
    if not (math.isfinite(hi) and math.isfinite(lo)):
        raise PrecisionError("log-outage is not finite inside the stencil")
    return -(hi - lo) / (2 * step)


def snr_offset_c(p_out: float, d_prime: float, gamma: float) -> float:
    """SNR offset c with P_out = c * gamma^(-d'), evaluated in log domain."""
    if p_out <= 0:
        raise ParameterError(f"p_out must be > 0, got {p_out}")
    return math.exp(math.log(p_out) + d_prime * math.log(gamma))


def snr_offset_c_ln(ln_p_out: float, d_prime: float, gamma: float) -> float:
    """ln of the SNR offset, from a log-domain outage value."""
    return ln_p_out + d_prime * math.log(gamma)


def zheng_tse_dmt(dims: ChannelDims, r: float) -> float:
    """SNR-asymptotic tradeoff (n-r)(m-r) at integer r, linear in between."""
    m, n = dims.m, dims.n
    if not 0 <= r <= min(m, n):
        raise ParameterError(f"r must be in [0, {min(m, n)}], got {r}")
    k = math.floor(r)
    if k == r:
        return float((n - k) * (m - k))
    lo = (n - k) * (m - k)
    hi = (n - k - 1) * (m - k - 1)
    return lo + (r - k) * (hi - lo)


def keyhole_dmt_asymptotic(dims: ChannelDims, r: float) -> float:
    """SNR-asymptotic tradeoff of the single-keyhole channel: min(m,n)(1-r)."""
    if not 0 <= r <= 1:
        raise ParameterError(f"r must be in [0, 1], got {r}")
    return min(dims.m, dims.n) * (1 - r)


class DiversityPair(NamedTuple):
    d_gamma: float
    d_prime: float


def prop2_dmt(
    moments_fn: Callable[[float], CapacityMoments],
    gamma: float,
    r: float,
    m_star: int,
    step: float = DEFAULT_LOG_STEP,
) -> DiversityPair:
    """Generic size-asymptotic diversity gains from any Gaussian moment model.

    Uses the mean-capacity multiplexing-gain definition; the SNR derivative of
    (mean-per-dof / sigma)^2 is taken with the same central-difference stencil
    as d_prime_numeric.
    """
    if gamma <= 1:
        raise RegimeError(f"needs gamma > 1, got {gamma}")
    if not 0 <= r <= m_star:
        raise ParameterError(f"r must be in [0, {m_star}], got {r}")

    def ratio2(g: float) -> float:
        mom = moments_fn(g)
        if mom.var_nats2 == 0:
            raise RegimeError("degenerate zero-variance capacity distribution")
        return (mom.mean_nats / m_star) ** 2 / mom.var_nats2

    d_star = (m_star - r) ** 2
    d_gamma = ratio2(gamma) / (2 * math.log(gamma)) * d_star
    deriv = (ratio2(gamma * math.exp(step)) - ratio2(gamma * math.exp(-step))) / (2 * step)
    return DiversityPair(d_gamma=d_gamma, d_prime=0.5 * deriv * d_star)


class Th4Result(NamedTuple):
    d_prime: float
    d_gamma: float
    c_gamma: float
    reliable: bool


def th4_dmt(n: int, r: float, gamma: float) -> Th4Result:
    """Closed-form finite-SNR DMT and SNR offset for the square i.i.d. channel.

    Mean-capacity multiplexing-gain definition. The offset approximation needs
    d_gamma * ln(gamma/e) > 1 and 0 < r < n; outside that, or at r = 0 where
    the true offset collapses to zero, the value is returned flagged.
    """
    if not 0 <= r <= n:
        raise ParameterError(f"r must be in [0, {n}], got {r}")
    if gamma < 1:
        raise RegimeError(f"approximation regime needs gamma >= 1, got {gamma}")
    if r == n:
        return Th4Result(d_prime=0.0, d_gamma=0.0, c_gamma=0.5, reliable=True)
    sq = math.sqrt(gamma)
    lge = math.log(gamma / math.e)
    d_prime = (n - r) ** 2 * (1 - 1 / (2 * sq))
    d_gamma = (n - r) ** 2 * (1 + 2 / (sq * lge)) if lge != 0 else math.inf
    reliable = d_gamma * lge > 1 and 0 < r < n
    if d_gamma > 0 and d_gamma * lge > 0:
        c_gamma = math.exp(d_gamma) / math.sqrt(4 * math.pi * d_gamma * lge)
    else:
        c_gamma = math.nan
    return Th4Result(d_prime=d_prime, d_gamma=d_gamma, c_gamma=c_gamma, reliable=reliable)


class Prop3Result(NamedTuple):
    d_prime: float
    c_gamma_limit: float


def prop3_dmt(n: int, r: float, gamma: float, mux: MuxGainDef) -> Prop3Result:
    """Closed-form finite-SNR DMT for the raw-log and offset-log definitions."""
    if mux not in (MuxGainDef.RAW_LOG, MuxGainDef.OFFSET_LOG):
        raise ParameterError("prop3_dmt covers the rawlog and offsetlog definitions")
    if not 0 <= r <= n:
        raise ParameterError(f"r must be in [0, {n}], got {r}")
    if r == n:
        return Prop3Result(d_prime=0.0, c_gamma_limit=math.nan)
    lge = math.log(gamma / math.e)
    core = 1 - (n + r) / (n - r) / math.sqrt(gamma)
    if mux is MuxGainDef.RAW_LOG:
        core -= (r / (n - r)) ** 2 / lge**2
    d_prime = (n - r) ** 2 * core
    d_asym = (n - r) ** 2
    if lge > 0:
        log_c = d_asym - 0.5 * math.log(4 * math.pi * d_asym * lge)
        if mux is MuxGainDef.RAW_LOG:
            log_c += 2 * r * (n - r)
        c_limit = math.exp(log_c)
    else:
        c_limit = math.nan
    return Prop3Result(d_prime=d_prime, c_gamma_limit=c_limit)


def convergence_threshold(
    mux: MuxGainDef, n: int, r: float, accuracy: float = 0.1
) -> float:
    """Linear SNR above which the closed-form DMT is within `accuracy` of (n-r)^2.

    The default accuracy 0.1 gives the familiar thresholds 25,
    (10(n+r)/(n-r))^2 and max of the latter with exp(1 + 3r/(n-r)).
    """
    if not 0 < accuracy < 1:
        raise ParameterError(f"accuracy must be in (0, 1), got {accuracy}")
    if r == n:
        return math.inf
    if mux is MuxGainDef.MEAN_CAPACITY:
        return (0.5 / accuracy) ** 2
    offset_log = ((n + r) / (accuracy * (n - r))) ** 2
    if mux is MuxGainDef.OFFSET_LOG:
        return offset_log
    return max(offset_log, math.exp(1 + 3 * r / (n - r)))


def prop4_dmt(dims: ChannelDims, r: float, gamma: float) -> DiversityPair:
    """Closed-form finite-SNR DMT for the non-square i.i.d. channel.

    Mean-capacity definition; uses the power offset a for beta = m/n.
    """
    if dims.m == dims.n:
        raise RegimeError("square channel: use th4_dmt")
    m_star = min(dims.m, dims.n)
    if not 0 <= r <= m_star:
        raise ParameterError(f"r must be in [0, {m_star}], got {r}")
    a = iid_power_offset(dims.beta)
    if gamma <= a:
        raise RegimeError(f"needs gamma > a = {a:.4g}, got {gamma}")
    d_prime = (m_star - r) ** 2 * math.log(gamma / a) / (-math.log(1 - dims.beta_star))
    return DiversityPair(d_gamma=d_prime / 2, d_prime=d_prime)


def combined_dmt(dims: ChannelDims, r: float, gamma: float) -> float:
    """Whole-SNR-range estimate: min of prop4_dmt and the asymptotic curve."""
    return min(prop4_dmt(dims, r, gamma).d_prime, zheng_tse_dmt(dims, r))


def th5_dmt(
    dims: ChannelDims,
    r: float,
    gamma: float,
    rt: CorrelationMatrix,
    rr: CorrelationMatrix,
) -> float:
    """Finite-SNR DMT of the Kronecker-correlated channel (n << m regime)."""
    n = dims.n
    if not 0 <= r <= n:
        raise ParameterError(f"r must be in [0, {n}], got {r}")
    lam_r = rr.eigenvalues
    if lam_r[0] <= 0:
        raise RegimeError("receive correlation matrix must be full rank")
    a = float(np.exp(-np.mean(np.log(lam_r))))
    if gamma <= a:
        raise RegimeError(f"needs gamma > a = {a:.4g}, got {gamma}")
    tx_measure2 = (norms(rt).frobenius / dims.m) ** 2
    return (n - r) ** 2 * math.log(gamma / a) / (n * tx_measure2)


def th6_dmt(
    dims: ChannelDims,
    r: float,
    gamma: float,
    modes: Sequence[KeyholeMode],
) -> float:
    """Finite-SNR DMT of the rank-deficient multi-keyhole channel."""
    n_modes = len(modes)
    if n_modes < 1:
        raise ParameterError("at least one keyhole mode is required")
    if not 0 <= r <= n_modes:
        raise ParameterError(f"r must be in [0, {n_modes}], got {r}")
    log_a = -sum(math.log(abs(mode.b) ** 2) for mode in modes) / n_modes
    a = math.exp(log_a)
    if gamma <= a:
        raise RegimeError(f"needs gamma > a = {a:.4g}, got {gamma}")
    denom = sum(
        mode.beta_t * norms(mode.rt).frobenius ** 2 / dims.m**2
        + mode.beta_r * norms(mode.rr).frobenius ** 2 / dims.n**2
        for mode in modes
    )
    return (n_modes - r) ** 2 * math.log(gamma / a) / denom


def outage_from_dmt(c: float, d_prime: float, gamma: float) -> float:
    """Power-law outage estimate min(1, c * gamma^(-d')), in log domain."""
    if c <= 0:
        raise ParameterError(f"offset c must be > 0, got {c}")
    ln_p = math.log(c) - d_prime * math.log(gamma)
    return min(1.0, math.exp(min(ln_p, 0.0)))


# --- Gaussian-model curves ------------------------------------------------
#
# The observable plotted against the closed forms above: outage and its
# log-SNR slope computed numerically from the asymptotic moment formulas.


def model_outage_ln(model: ChannelModel, mux: MuxGainDef, r: float, gamma: float) -> float:
    """ln P_out of the Gaussian capacity model at multiplexing gain r.

    The rate is re-derived at each SNR per the chosen definition, so the
    result is a pure function of gamma suitable for differentiation.
    """
    moments, a = moments_for(model, gamma)
    rate = rate_from_mux(r, mux, gamma, moments, model.m_star, a=a)
    return gaussian_outage_ln(moments, rate)


def model_dprime(
    model: ChannelModel,
    mux: MuxGainDef,
    r: float,
    gamma: float,
    step: float = DEFAULT_LOG_STEP,
) -> float:
    """Numeric differential diversity gain of the Gaussian capacity model."""
    return d_prime_numeric(
        lambda g: model_outage_ln(model, mux, r, g), gamma, step=step, log_domain=True
    )


def model_dmt_point(
    model: ChannelModel,
    mux: MuxGainDef,
    r: float,
    gamma: float,
    step: float = DEFAULT_LOG_STEP,
) -> DmtPoint:
    """Full finite-SNR evaluation at one (SNR, r): rate, outage, gains, offset."""
    moments, a = moments_for(model, gamma)
    rate = rate_from_mux(r, mux, gamma, moments, model.m_star, a=a)
    ln_p = gaussian_outage_ln(moments, rate)
    d_prime = model_dprime(model, mux, r, gamma, step=step)
    return DmtPoint(
        gamma=gamma,
        r=r,
        rate_nats=rate,
        p_out=math.exp(ln_p),
        d_gamma=-ln_p / math.log(gamma),
        d_prime=d_prime,
        c_gamma=math.exp(snr_offset_c_ln(ln_p, d_prime, gamma)),
    )
