"""Channel ensembles, correlation matrices and their scalar summaries.

Three fading models are supported: i.i.d. entries (Gaussian or a two-point
test distribution), Kronecker-correlated Rayleigh, and multi-keyhole
(rank-deficient) channels built from rank-1 modal products.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence, Union

import numpy as np

from .errors import DataError, ParameterError

log = logging.getLogger(__name__)

HERMITIAN_ATOL = 1e-12
PSD_EIG_RTOL = 1e-10
TRACE_NORM_RTOL = 1e-9


@dataclass(frozen=True)
class ChannelDims:
    """Antenna counts: m transmit, n receive."""

    m: int
    n: int

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ParameterError(f"antenna counts must be >= 1, got m={self.m}, n={self.n}")

    @property
    def beta(self) -> float:
        return self.m / self.n

    @property
    def beta_star(self) -> float:
        return min(self.m, self.n) / max(self.m, self.n)


class CorrelationMatrix:
    """Hermitian positive semidefinite correlation matrix.

    Validates Hermitian symmetry and positive semidefiniteness on
    construction; eigenvalues are computed once and cached.
    """

    def __init__(self, entries: np.ndarray):
        entries = np.asarray(entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ParameterError(f"correlation matrix must be square, got shape {entries.shape}")
        if not np.all(np.isfinite(entries)):
            raise DataError("correlation matrix has non-finite entries")
        scale = np.max(np.abs(entries))
        if scale == 0:
            raise DataError("correlation matrix is identically zero")
        if np.max(np.abs(entries - entries.conj().T)) > HERMITIAN_ATOL * scale:
            raise DataError("correlation matrix is not Hermitian within tolerance")
        # symmetrize to kill round-off before the eigendecomposition
        entries = 0.5 * (entries + entries.conj().T)
        eig = np.linalg.eigvalsh(entries)
        lam_max = eig[-1]
        if eig[0] < -PSD_EIG_RTOL * lam_max:
            raise DataError(
                f"correlation matrix is not PSD: min eigenvalue {eig[0]:.3e} "
                f"vs largest {lam_max:.3e}"
            )
        tr = float(np.real(np.trace(entries)))
        if not np.isfinite(tr) or tr <= 0:
            raise DataError(f"correlation matrix trace must be finite and positive, got {tr}")
        self._entries = entries
        self._eigenvalues = np.clip(eig, 0.0, None)

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def size(self) -> int:
        return self._entries.shape[0]

    @property
    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues in ascending order, negatives clipped to zero."""
        return self._eigenvalues

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self._entries)))

    @property
    def is_identity(self) -> bool:
        return bool(np.allclose(self._entries, np.eye(self.size), atol=1e-12))

    def __repr__(self):
        return f"CorrelationMatrix(size={self.size}, trace={self.trace:.6g})"


class MatrixNorms(NamedTuple):
    frobenius: float
    spectral: float
    ratio: float


class NormMoments(NamedTuple):
    mean: float
    variance: float


def make_exponential_correlation(size: int, rho: float) -> CorrelationMatrix:
    """Exponential correlation model: entry (i, j) = rho^|i-j|."""
    if size < 1:
        raise ParameterError(f"size must be >= 1, got {size}")
    if not 0 <= rho < 1:
        raise ParameterError(f"rho must be in [0, 1), got {rho}")
    idx = np.arange(size)
    return CorrelationMatrix(rho ** np.abs(idx[:, None] - idx[None, :]))


def matrix_sqrt_psd(r: CorrelationMatrix) -> np.ndarray:
    """Hermitian PSD square root S with S @ S == R.

    Computed by eigendecomposition; eigenvalues in [-1e-10*lam_max, 0) are
    clipped to zero.
    """
    eig, vec = np.linalg.eigh(r.entries)
    lam_max = eig[-1]
    if eig[0] < -PSD_EIG_RTOL * lam_max:
        raise DataError("matrix is not PSD within tolerance")
    eig = np.clip(eig, 0.0, None)
    return (vec * np.sqrt(eig)) @ vec.conj().T


def norms(r: CorrelationMatrix) -> MatrixNorms:
    """Frobenius norm, spectral norm, and their ratio (spectral/frobenius)."""
    lam = r.eigenvalues
    fro = float(np.sqrt(np.sum(lam**2)))
    spec = float(lam[-1])
    return MatrixNorms(frobenius=fro, spectral=spec, ratio=spec / fro)


def correlation_measure(r: CorrelationMatrix) -> float:
    """Scalar correlation / power-imbalance measure: Frobenius norm over size.

    Ranges from 1/sqrt(size) (identity, no correlation) to 1 (rank one).
    """
    return norms(r).frobenius / r.size


def vector_norm_moments(r: CorrelationMatrix, m2_g: float) -> NormMoments:
    """Mean and variance of ||R^(1/2) g||^2 for i.i.d. unit-variance g.

    m2_g is the central second moment of |g|^2 (1 for complex Gaussian g).
    """
    if m2_g < 0:
        raise ParameterError(f"m2_g must be >= 0, got {m2_g}")
    return NormMoments(mean=r.trace, variance=norms(r).frobenius ** 2 * m2_g)


def trace_normalized(r: CorrelationMatrix, target: float) -> CorrelationMatrix:
    """Rescale so that the trace equals target; logs the applied factor."""
    scale = target / r.trace
    if abs(scale - 1.0) > TRACE_NORM_RTOL:
        log.info("trace-normalizing correlation matrix by factor %.6g", scale)
        return CorrelationMatrix(r.entries * scale)
    return r


@dataclass(frozen=True)
class KeyholeMode:
    """One rank-1 propagation mode of a multi-keyhole channel."""

    b: complex
    rt: CorrelationMatrix
    rr: CorrelationMatrix
    beta_t: float = 1.0
    beta_r: float = 1.0

    def __post_init__(self):
        if abs(self.b) ** 2 <= 0:
            raise ParameterError("modal amplitude must be nonzero")
        if self.beta_t < 0 or self.beta_r < 0:
            raise ParameterError("fourth-moment parameters must be >= 0")
        for name, r in (("rt", self.rt), ("rr", self.rr)):
            if abs(r.trace / r.size - 1.0) > TRACE_NORM_RTOL:
                raise ParameterError(
                    f"{name} must be trace-normalized to its size "
                    f"(trace {r.trace:.6g}, size {r.size})"
                )


GAUSSIAN = "gaussian"
TWO_POINT = "two_point"
ENTRY_DISTS = (GAUSSIAN, TWO_POINT)


@dataclass(frozen=True)
class IidChannel:
    """Channel with i.i.d. zero-mean, unit-variance entries, E|H|^4 = 2."""

    dims: ChannelDims
    entry_dist: str = GAUSSIAN

    def __post_init__(self):
        if self.entry_dist not in ENTRY_DISTS:
            raise ParameterError(f"unknown entry distribution {self.entry_dist!r}")

    @property
    def m_star(self) -> int:
        return min(self.dims.m, self.dims.n)


@dataclass(frozen=True)
class KroneckerChannel:
    """Rayleigh channel with separable (transmit x receive) correlation."""

    dims: ChannelDims
    rt: CorrelationMatrix
    rr: CorrelationMatrix

    def __post_init__(self):
        if self.rt.size != self.dims.m:
            raise ParameterError(f"rt size {self.rt.size} != m {self.dims.m}")
        if self.rr.size != self.dims.n:
            raise ParameterError(f"rr size {self.rr.size} != n {self.dims.n}")

    @property
    def m_star(self) -> int:
        return min(self.dims.m, self.dims.n)


@dataclass(frozen=True)
class MultiKeyholeChannel:
    """Rank-deficient channel: sum of M independent rank-1 modal products."""

    dims: ChannelDims
    modes: tuple[KeyholeMode, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        if len(self.modes) < 1:
            raise ParameterError("at least one keyhole mode is required")
        for mode in self.modes:
            if mode.rt.size != self.dims.m:
                raise ParameterError(f"mode rt size {mode.rt.size} != m {self.dims.m}")
            if mode.rr.size != self.dims.n:
                raise ParameterError(f"mode rr size {mode.rr.size} != n {self.dims.n}")

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    @property
    def m_star(self) -> int:
        return min(self.dims.m, self.dims.n, self.n_modes)


ChannelModel = Union[IidChannel, KroneckerChannel, MultiKeyholeChannel]


def _matrix_from_spec(spec: dict, size: int, what: str) -> CorrelationMatrix:
    kind = spec.get("type")
    if kind == "exp":
        r = make_exponential_correlation(size, float(spec["rho"]))
    elif kind == "explicit":
        rows = spec["rows"]
        mat = np.empty((len(rows), len(rows)), dtype=complex)
        for i, row in enumerate(rows):
            for j, cell in enumerate(row):
                if isinstance(cell, (list, tuple)):
                    mat[i, j] = complex(cell[0], cell[1])
                else:
                    mat[i, j] = complex(cell)
        if mat.shape != (size, size):
            raise ParameterError(f"{what} must be {size}x{size}, got {mat.shape}")
        r = CorrelationMatrix(mat)
    else:
        raise ParameterError(f"{what}: unknown matrix spec type {kind!r}")
    # formulas assume tr R = size; explicit inputs are rescaled on load
    return trace_normalized(r, float(size))


def _complex_from(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1])
    return complex(v)


def scenario_from_dict(data: dict) -> ChannelModel:
    """Build a channel model from the JSON scenario schema."""
    try:
        kind = data["model"]
        dims = ChannelDims(int(data["m"]), int(data["n"]))
    except KeyError as exc:
        raise ParameterError(f"scenario is missing required key {exc}") from exc
    if kind == "iid":
        return IidChannel(dims, entry_dist=data.get("entry_dist", GAUSSIAN))
    if kind == "kronecker":
        rt = _matrix_from_spec(data.get("rt", {"type": "exp", "rho": 0.0}), dims.m, "rt")
        rr = _matrix_from_spec(data.get("rr", {"type": "exp", "rho": 0.0}), dims.n, "rr")
        return KroneckerChannel(dims, rt=rt, rr=rr)
    if kind == "keyhole":
        modes = []
        for mspec in data.get("modes", []):
            modes.append(
                KeyholeMode(
                    b=_complex_from(mspec.get("b", 1.0)),
                    rt=_matrix_from_spec(mspec.get("rt", {"type": "exp", "rho": 0.0}), dims.m, "mode rt"),
                    rr=_matrix_from_spec(mspec.get("rr", {"type": "exp", "rho": 0.0}), dims.n, "mode rr"),
                    beta_t=float(mspec.get("beta_t", 1.0)),
                    beta_r=float(mspec.get("beta_r", 1.0)),
                )
            )
        return MultiKeyholeChannel(dims, modes=tuple(modes))
    raise ParameterError(f"unknown model kind {kind!r}")


def load_scenario(path) -> ChannelModel:
    with open(path) as fh:
        return scenario_from_dict(json.load(fh))
