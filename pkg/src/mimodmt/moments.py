"""Closed-form asymptotic capacity moments and the Gaussian outage model.

The instantaneous log-det capacity of a large MIMO channel is asymptotically
Gaussian; this module provides its mean and variance for the three supported
ensembles, the high-SNR simplifications with their power offsets, and the
Q-function outage evaluator (including a log-domain variant, since the DMT
layer differentiates ln P_out).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.special import erfc, log_ndtr

from .channels import (
    ChannelDims,
    ChannelModel,
    CorrelationMatrix,
    IidChannel,
    KeyholeMode,
    KroneckerChannel,
    MultiKeyholeChannel,
    norms,
)
from .errors import ParameterError

log = logging.getLogger(__name__)

LN2 = math.log(2.0)

# outside this aspect-ratio band the size-asymptotic formulas are untested
BETA_FLAG_LO = 0.05
BETA_FLAG_HI = 20.0


def db_to_gamma(snr_db: float) -> float:
    return 10.0 ** (snr_db / 10.0)


def gamma_to_db(gamma: float) -> float:
    return 10.0 * math.log10(gamma)


def nats_to_bits(x: float) -> float:
    return x / LN2


@dataclass(frozen=True)
class CapacityMoments:
    """Mean and variance (nats, nats^2) of instantaneous capacity at one SNR."""

    mean_nats: float
    var_nats2: float
    gamma: float

    def __post_init__(self):
        if self.var_nats2 < 0:
            raise ParameterError(f"variance must be >= 0, got {self.var_nats2}")

    @property
    def std_nats(self) -> float:
        return math.sqrt(self.var_nats2)


class MomentsWithOffset(NamedTuple):
    moments: CapacityMoments
    offset: float  # power offset a in mean ~ m* ln(gamma/a); may be inf


def f_tulino(x: float, z: float) -> float:
    """F(x, z) = (sqrt(x(1+sqrt(z))^2 + 1) - sqrt(x(1-sqrt(z))^2 + 1))^2."""
    if x < 0:
        raise ParameterError(f"x must be >= 0, got {x}")
    if z <= 0:
        raise ParameterError(f"z must be > 0, got {z}")
    sz = math.sqrt(z)
    return (math.sqrt(x * (1 + sz) ** 2 + 1) - math.sqrt(x * (1 - sz) ** 2 + 1)) ** 2


def _check_gamma(gamma: float):
    if gamma <= 0:
        raise ParameterError(f"gamma must be > 0, got {gamma}")


def iid_moments(gamma: float, dims: ChannelDims) -> CapacityMoments:
    """Size-asymptotic capacity mean and variance of the i.i.d. channel."""
    _check_gamma(gamma)
    beta = dims.beta
    if not BETA_FLAG_LO <= beta <= BETA_FLAG_HI:
        log.warning("aspect ratio beta=%.3g is outside the tested range", beta)
    n = dims.n
    f = f_tulino(gamma / beta, beta)
    mean = n * (
        beta * math.log(1 + gamma / beta - f / 4)
        + math.log(1 + gamma - f / 4)
        - beta / (4 * gamma) * f
    )
    arg = 1 - beta * (f / (4 * gamma)) ** 2
    var = -math.log(arg) if arg > 0 else math.inf
    return CapacityMoments(mean_nats=max(mean, 0.0), var_nats2=max(var, 0.0), gamma=gamma)


def iid_power_offset(beta: float) -> float:
    """High-SNR power offset a of the i.i.d. channel as a function of m/n."""
    if beta < 1:
        return math.e * beta * (1 - beta) ** (1 / beta - 1)
    if beta == 1:
        return math.e
    return math.e * (1 - 1 / beta) ** (beta - 1)


def iid_moments_highsnr(gamma: float, dims: ChannelDims) -> MomentsWithOffset:
    """High-SNR approximation of the i.i.d. moments, with the power offset."""
    _check_gamma(gamma)
    beta = dims.beta
    a = iid_power_offset(beta)
    mean = min(dims.m, dims.n) * math.log(gamma / a)
    if beta < 1:
        var = -math.log(1 - beta)
    elif beta == 1:
        var = 0.5 * (math.log(gamma / 4) + 2 / math.sqrt(gamma))
    else:
        var = -math.log(1 - 1 / beta)
    return MomentsWithOffset(
        CapacityMoments(mean_nats=max(mean, 0.0), var_nats2=max(var, 0.0), gamma=gamma),
        a,
    )


def square_expansion_moments(gamma: float, n: int) -> CapacityMoments:
    """Two-term high-SNR expansion for the square (m = n) i.i.d. channel."""
    _check_gamma(gamma)
    mean = n * (math.log(gamma / math.e) + 2 / math.sqrt(gamma))
    var = 0.5 * math.log(gamma / 4) + 1 / math.sqrt(gamma)
    return CapacityMoments(mean_nats=max(mean, 0.0), var_nats2=max(var, 0.0), gamma=gamma)


def kronecker_moments(
    gamma: float,
    dims: ChannelDims,
    rt: CorrelationMatrix,
    rr: CorrelationMatrix,
) -> MomentsWithOffset:
    """Capacity moments of the Kronecker-correlated Rayleigh channel.

    Derived in the m -> infinity, fixed-n regime; a warning is logged when
    m < 4n. A singular receive correlation only affects the offset (reported
    as +inf), not the moments.
    """
    _check_gamma(gamma)
    if dims.m < 4 * dims.n:
        log.warning("kronecker moments assume n << m; got m=%d, n=%d", dims.m, dims.n)
    lam_r = rr.eigenvalues
    mean = float(np.sum(np.log1p(gamma * lam_r)))
    fro_t2 = norms(rt).frobenius ** 2
    ratio = gamma * lam_r / (1 + gamma * lam_r)
    var = fro_t2 / dims.m**2 * float(np.sum(ratio**2))
    if np.all(lam_r > 0):
        a = float(np.exp(-np.mean(np.log(lam_r))))
    else:
        a = math.inf
    return MomentsWithOffset(
        CapacityMoments(mean_nats=mean, var_nats2=var, gamma=gamma), a
    )


def keyhole_moments(
    gamma: float, dims: ChannelDims, modes: Sequence[KeyholeMode]
) -> MomentsWithOffset:
    """Capacity moments of the multi-keyhole channel (gamma is total SNR)."""
    _check_gamma(gamma)
    if not modes:
        raise ParameterError("at least one keyhole mode is required")
    mean = 0.0
    var = 0.0
    log_a = 0.0
    for mode in modes:
        b2 = abs(mode.b) ** 2
        snr_term = b2 * gamma / (1 + b2 * gamma)
        mean += math.log1p(b2 * gamma)
        var += snr_term**2 * (
            mode.beta_t * norms(mode.rt).frobenius ** 2 / dims.m**2
            + mode.beta_r * norms(mode.rr).frobenius ** 2 / dims.n**2
        )
        log_a += -math.log(b2) / len(modes)
    return MomentsWithOffset(
        CapacityMoments(mean_nats=mean, var_nats2=var, gamma=gamma), math.exp(log_a)
    )


def moments_for(model: ChannelModel, gamma: float) -> MomentsWithOffset:
    """Dispatch to the asymptotic moment formula matching the model."""
    if isinstance(model, IidChannel):
        return MomentsWithOffset(iid_moments(gamma, model.dims), iid_power_offset(model.dims.beta))
    if isinstance(model, KroneckerChannel):
        return kronecker_moments(gamma, model.dims, model.rt, model.rr)
    if isinstance(model, MultiKeyholeChannel):
        return keyhole_moments(gamma, model.dims, model.modes)
    raise ParameterError(f"unknown channel model {type(model).__name__}")


def q_function(z: float) -> float:
    """Standard normal tail probability, accurate into the deep tail."""
    return 0.5 * erfc(z / math.sqrt(2.0))


def q_function_ln(z: float) -> float:
    """ln Q(z), usable far beyond double-precision underflow of Q itself."""
    return float(log_ndtr(-z))


def q_upper_bound(z: float) -> float:
    """Chernoff bound (1/2) exp(-z^2/2), valid for z >= 0."""
    return 0.5 * math.exp(-(z**2) / 2)


def q_tail_approx(z: float) -> float:
    """Leading tail term exp(-z^2/2) / (sqrt(2 pi) z), for z > 0."""
    if z <= 0:
        raise ParameterError(f"tail approximation requires z > 0, got {z}")
    return math.exp(-(z**2) / 2) / (math.sqrt(2 * math.pi) * z)


def gaussian_outage(moments: CapacityMoments, rate: float) -> float:
    """Outage probability Q((mean - R)/sigma) under the Gaussian model.

    With zero variance the capacity is deterministic: 0 below the mean,
    1 above it, 1/2 at the mean.
    """
    sigma = moments.std_nats
    if sigma == 0:
        if rate < moments.mean_nats:
            return 0.0
        if rate > moments.mean_nats:
            return 1.0
        return 0.5
    return q_function((moments.mean_nats - rate) / sigma)


def gaussian_outage_ln(moments: CapacityMoments, rate: float) -> float:
    """ln of the Gaussian-model outage probability (log-domain)."""
    sigma = moments.std_nats
    if sigma == 0:
        if rate < moments.mean_nats:
            return -math.inf
        if rate > moments.mean_nats:
            return 0.0
        return math.log(0.5)
    return q_function_ln((moments.mean_nats - rate) / sigma)
