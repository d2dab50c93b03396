"""Exact outage probabilities for small systems.

Ground truth for validating the Gaussian capacity model and the Monte-Carlo
engine: closed forms for single-antenna-side Rayleigh channels, numeric
integration of the 2x2 Wishart eigenvalue density, and a 1-D product-of-
gammas integral for the single-keyhole channel.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import gammainc
from scipy.stats import gamma as gamma_dist

from .channels import ChannelDims
from .errors import ParameterError, PrecisionError


@dataclass(frozen=True)
class QuadratureSpec:
    rtol: float = 1e-8
    limit: int = 200

    def __post_init__(self):
        if not 0 < self.rtol <= 1e-2:
            raise ParameterError(f"rtol must be in (0, 1e-2], got {self.rtol}")

    @property
    def tail_cut(self) -> float:
        """Truncation point where the exp(-x) tail is below tolerance."""
        return 50.0 + 10.0 * math.log(1.0 / self.rtol)


DEFAULT_QUAD = QuadratureSpec()


def siso_rayleigh_outage(gamma: float, rate: float) -> float:
    """Exact outage of the 1x1 Rayleigh channel: 1 - exp(-(e^R - 1)/gamma)."""
    if gamma <= 0:
        raise ParameterError(f"gamma must be > 0, got {gamma}")
    return -math.expm1(-math.expm1(rate) / gamma)


def vector_rayleigh_outage(gamma: float, rate: float, dims: ChannelDims) -> float:
    """Exact outage when min(m, n) = 1: chi-square channel power."""
    if min(dims.m, dims.n) != 1:
        raise ParameterError("closed form requires min(m, n) = 1")
    if gamma <= 0:
        raise ParameterError(f"gamma must be > 0, got {gamma}")
    order = max(dims.m, dims.n)
    return float(gammainc(order, dims.m * math.expm1(rate) / gamma))


def wishart2x2_outage(
    gamma: float, rate: float, quad: QuadratureSpec = DEFAULT_QUAD
) -> float:
    """Exact outage of the 2x2 i.i.d. complex Gaussian channel.

    Integrates the unordered Wishart eigenvalue density
    K (l1 - l2)^2 exp(-l1 - l2) over the outage region
    ln((1 + s l1)(1 + s l2)) < R with s = gamma/2. The constant K is fixed
    by numerically normalizing the density over the full quadrant, which
    doubles as a quadrature self-check.
    """
    if rate <= 0:
        return 0.0
    s = gamma / 2.0
    cut = quad.tail_cut

    def density(l2, l1):
        return (l1 - l2) ** 2 * math.exp(-l1 - l2)

    total, total_err = integrate.dblquad(
        density, 0.0, cut, 0.0, cut, epsabs=0.0, epsrel=quad.rtol
    )
    if not math.isfinite(total) or total <= 0 or total_err / total > 10 * quad.rtol:
        raise PrecisionError(
            f"density normalization did not converge (got {total} +- {total_err})"
        )

    target = math.exp(rate)
    l1_max = min(math.expm1(rate) / s, cut)

    def upper(l1):
        # boundary: (1 + s*l1)(1 + s*l2) = e^R
        return min((target / (1 + s * l1) - 1) / s, cut)

    mass, mass_err = integrate.dblquad(
        density, 0.0, l1_max, 0.0, upper, epsabs=total * quad.rtol * 1e-3, epsrel=quad.rtol
    )
    return min(max(mass / total, 0.0), 1.0)


def single_keyhole_outage(
    gamma: float,
    rate: float,
    dims: ChannelDims,
    b: complex = 1.0,
    quad: QuadratureSpec = DEFAULT_QUAD,
) -> float:
    """Exact outage of a single-keyhole channel with uncorrelated Gaussian modes.

    The channel power is a product of independent Gamma(m, 1) and Gamma(n, 1)
    variables; outage is Pr[x y < c] with c = m n (e^R - 1)/(gamma |b|^2),
    computed as a 1-D integral of the Gamma CDF against the Gamma density.
    """
    if rate <= 0:
        return 0.0
    if gamma <= 0:
        raise ParameterError(f"gamma must be > 0, got {gamma}")
    m, n = dims.m, dims.n
    c = m * n * math.expm1(rate) / (gamma * abs(b) ** 2)
    cut = m + quad.tail_cut + 10 * math.sqrt(m)

    def integrand(t):
        return gamma_dist.pdf(t, m) * gammainc(n, c / t)

    val, err = integrate.quad(
        integrand, 0.0, cut, epsabs=1e-14, epsrel=quad.rtol, limit=quad.limit
    )
    if err > 10 * quad.rtol * max(val, 1e-12):
        raise PrecisionError(f"keyhole quadrature did not converge ({val} +- {err})")
    return min(max(val, 0.0), 1.0)
