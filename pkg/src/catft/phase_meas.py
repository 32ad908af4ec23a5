"""Canonical and discrete phase measurements.

The canonical phase measurement resolves the outcome density
q(phi) = ||(<phi| (x) 1)|psi>||^2 built from the (un-normalizable) phase
kets |phi> = (2 pi)^{-1/2} sum_n e^{i n phi} |n>.  Discrete-phase (DP)
measurements group the continuous outcome into K angular bins with offset
phi0; the two-outcome parity grouping of 2N bins distinguishes the
conjugate-basis code states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import codes, fock
from .errors import InvalidStateError
from .fock import FockOperator, FockVector

__all__ = [
    "DPMeasSpec",
    "PhaseSampleResult",
    "dp_povm_element",
    "xbar_povm",
    "bin_phase",
    "phase_fourier_coefficients",
    "phase_density",
    "phase_cdf",
    "sample_canonical_phase",
    "xbar_error_prob",
]


@dataclass(frozen=True)
class DPMeasSpec:
    """K angular bins of width 2 pi / K, bin k centered at k 2pi/K + phi0."""

    K: int
    phi0: float
    dim: int

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("need at least one bin")
        if not -math.pi <= self.phi0 < math.pi:
            raise ValueError("phi0 must lie in [-pi, pi)")


def dp_povm_element(spec: DPMeasSpec, k: int) -> FockOperator:
    """Closed-form Fock matrix of the bin-k element of the DP measurement."""
    if not 0 <= k < spec.K:
        raise ValueError(f"bin {k} out of range [0, {spec.K})")
    n = np.arange(spec.dim)
    d = n[:, None] - n[None, :]
    lo = (k - 0.5) * 2 * math.pi / spec.K + spec.phi0
    hi = (k + 0.5) * 2 * math.pi / spec.K + spec.phi0
    dd = np.where(d == 0, 1, d)
    entries = np.where(
        d == 0,
        (hi - lo) / (2 * math.pi),
        (np.exp(1j * dd * hi) - np.exp(1j * dd * lo)) / (2j * math.pi * dd),
    )
    return FockOperator(entries)


def xbar_povm(N: int, phi0: float, dim: int) -> tuple[FockOperator, FockOperator]:
    """Two-outcome parity grouping of the 2N-bin DP measurement.

    The plus element collects even bins (where |+_N> concentrates), the minus
    element odd bins.
    """
    spec = DPMeasSpec(K=2 * N, phi0=phi0, dim=dim)
    plus = np.zeros((dim, dim), dtype=complex)
    minus = np.zeros((dim, dim), dtype=complex)
    for k in range(2 * N):
        el = dp_povm_element(spec, k).entries
        if k % 2 == 0:
            plus += el
        else:
            minus += el
    return FockOperator(plus), FockOperator(minus)


def bin_phase(phi: float, K: int, phi0: float = 0.0) -> int:
    """Nearest-bin index modulo K; boundary ties round toward the lower bin."""
    x = (phi - phi0) * K / (2 * math.pi)
    k = math.ceil(x - 0.5)
    return k % K


def phase_fourier_coefficients(state: FockVector, mode: int = 0) -> np.ndarray:
    """c_m = sum_n G[n+m, n] of the measured mode's reduced density matrix G.

    The outcome density is q(phi) = (c_0 + 2 Re sum_{m>=1} c_m e^{-i m phi}) / 2 pi.
    """
    arr = state.amps
    mat = np.moveaxis(arr, mode, 0).reshape(arr.shape[mode], -1)
    g = mat @ mat.conj().T
    d = g.shape[0]
    return np.array([np.trace(g, offset=-m) for m in range(d)])


def phase_density(coeffs: np.ndarray, phi) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    ms = np.arange(1, coeffs.size)
    osc = np.exp(-1j * np.multiply.outer(phi, ms)) @ coeffs[1:]
    return (coeffs[0].real + 2 * osc.real) / (2 * math.pi)


def phase_cdf(coeffs: np.ndarray, phi) -> np.ndarray:
    """Integral of the outcome density from -pi to phi, exact in the coefficients."""
    phi = np.asarray(phi, dtype=float)
    ms = np.arange(1, coeffs.size)
    # integral of e^{-i m x} from -pi to phi
    anti = (np.exp(-1j * np.multiply.outer(phi, ms)) - ((-1.0) ** ms)) / (-1j * ms)
    osc = anti @ coeffs[1:]
    return (coeffs[0].real * (phi + math.pi) + 2 * osc.real) / (2 * math.pi)


@dataclass
class PhaseSampleResult:
    """One sampled canonical-phase outcome and its conditional state.

    ``branch_weight`` is the norm of the contraction (<phi| (x) 1)|psi>, so
    ``branch_weight * conditional_state`` reconstructs the contraction; its
    square is the outcome density at ``phi``.
    """

    phi: float
    bin: int | None
    conditional_state: FockVector
    branch_weight: float


def sample_canonical_phase(
    state: FockVector,
    mode: int,
    rng: np.random.Generator,
    grid_size: int = 8192,
    bin_spec: tuple[int, float] | None = None,
) -> PhaseSampleResult:
    """Sample phi by inverse CDF and return the remaining-mode conditional state.

    The CDF is piecewise-analytic (a trigonometric polynomial of bandwidth
    dim-1); phi is located by bisection to absolute tolerance 2 pi / grid_size.
    The measured mode is destroyed: only the remaining-mode state is returned.
    """
    if grid_size < 4 * state.dims[mode]:
        raise ValueError("grid_size must be at least 4x the measured mode dimension")
    coeffs = phase_fourier_coefficients(state, mode)
    total = coeffs[0].real
    if total < 1e-14:
        raise InvalidStateError("phase measurement on a (near-)zero state")
    u = rng.random() * total
    lo, hi = -math.pi, math.pi
    tol = 2 * math.pi / grid_size
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if phase_cdf(coeffs, mid) < u:
            lo = mid
        else:
            hi = mid
    phi = 0.5 * (lo + hi)

    arr = state.amps
    d = arr.shape[mode]
    bra = np.exp(-1j * phi * np.arange(d)) / math.sqrt(2 * math.pi)
    contraction = np.tensordot(bra, arr, axes=(0, mode))
    if contraction.ndim == 0:
        contraction = contraction.reshape(1)
    weight = float(np.linalg.norm(contraction))
    if weight < 1e-14:
        raise InvalidStateError("sampled a zero-weight phase branch")
    k = bin_phase(phi, bin_spec[0], bin_spec[1]) if bin_spec is not None else None
    return PhaseSampleResult(
        phi=phi,
        bin=k,
        conditional_state=FockVector(contraction / weight),
        branch_weight=weight,
    )


def xbar_error_prob(
    N: int,
    alpha: float,
    r: float = 0.0,
    k_shift: int = 0,
    phi0: float = 0.0,
    dim: int | None = None,
) -> float:
    """Probability that the parity measurement misidentifies a rotated |+_N>.

    The state R(k_shift 2pi/(2N)) |+_N> should land in a bin of parity
    k_shift mod 2; the returned value is the total weight on the wrong parity.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    spec = codes.CodeSpec(N=N, alpha=alpha, squeeze_r=r, dim=dim)
    cw = codes.codewords(spec)
    d = cw.dim
    vec = cw.ket_plus.amps
    if k_shift:
        vec = vec * np.exp(1j * (k_shift * math.pi / N) * np.arange(d))
    plus, minus = xbar_povm(N, phi0, d)
    wrong = minus if k_shift % 2 == 0 else plus
    return float(np.real(np.vdot(vec, wrong.entries @ vec)))
