"""Loss and dephasing channels, exact and as trajectory-level unravellings.

The loss channel has Kraus operators
A_k = ((1 - e^{-g})^{k/2} / sqrt(k!)) e^{-g n/2} a^k; on a D-dimensional
truncation the A_k with k < D are exactly complete.  Dephasing averages
rotations over a Gaussian angle of variance gamma_ph, which multiplies
density-matrix element (n, n') by exp(-gamma (n - n')^2 / 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidModeError
from .fock import DIAGONAL, SHIFT_DIAGONAL, FockOperator, FockVector

__all__ = [
    "NoiseStrength",
    "FaultRecord",
    "loss_kraus",
    "dephasing_damp",
    "loss_channel",
    "sample_loss",
    "sample_dephasing",
    "apply_location_noise",
]


@dataclass(frozen=True)
class NoiseStrength:
    """Dimensionless per-location strengths: rate times duration."""

    gamma_loss: float = 0.0
    gamma_ph: float = 0.0

    def __post_init__(self):
        if self.gamma_loss < 0 or self.gamma_ph < 0:
            raise ValueError("noise strengths must be nonnegative")

    def scaled(self, factor: float) -> "NoiseStrength":
        return NoiseStrength(self.gamma_loss * factor, self.gamma_ph * factor)

    @property
    def is_zero(self) -> bool:
        return self.gamma_loss == 0.0 and self.gamma_ph == 0.0


@dataclass
class FaultRecord:
    """The sampled (or injected) fault of one location in one trajectory."""

    location_id: int
    loss_count: int
    dephasing_angle: float
    injected: bool = False


def loss_kraus(gamma: float, k: int, dim: int) -> FockOperator:
    """Matrix of A_k; structure is a k-step lowering with diagonal damping."""
    if gamma < 0 or k < 0:
        raise ValueError("gamma and k must be nonnegative")
    entries = np.zeros((dim, dim), dtype=complex)
    if k >= dim:
        return FockOperator(entries, structure=SHIFT_DIAGONAL, shift=min(k, dim - 1))
    ns = np.arange(k, dim)
    if gamma == 0.0:
        pref = 1.0 if k == 0 else 0.0
    else:
        pref = (1.0 - math.exp(-gamma)) ** (k / 2) / math.sqrt(math.factorial(k))
    # a^k |n> = sqrt(n!/(n-k)!) |n-k>, then e^{-gamma n/2} on the lowered index
    lowering = np.exp(0.5 * (_log_falling_factorial(ns, k)))
    coeff = pref * np.exp(-0.5 * gamma * (ns - k)) * lowering
    entries[ns - k, ns] = coeff
    structure = DIAGONAL if k == 0 else SHIFT_DIAGONAL
    return FockOperator(entries, structure=structure, shift=k)


def _log_falling_factorial(ns: np.ndarray, k: int) -> np.ndarray:
    """log(n! / (n-k)!) elementwise, stable for large n."""
    out = np.zeros(len(ns))
    for j in range(k):
        out += np.log(ns - j)
    return out


def dephasing_damp(rho: np.ndarray, gamma: float) -> np.ndarray:
    """Exact Gaussian dephasing on a single-mode density matrix."""
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    d = rho.shape[0]
    n = np.arange(d)
    damp = np.exp(-0.5 * gamma * (n[:, None] - n[None, :]) ** 2)
    return rho * damp


def loss_channel(rho: np.ndarray, gamma: float, cutoff_tol: float = 1e-12) -> np.ndarray:
    """Exact loss channel by Kraus summation with a trace-based cutoff."""
    d = rho.shape[0]
    out = np.zeros_like(rho, dtype=complex)
    acc = 0.0
    for k in range(d):
        ak = loss_kraus(gamma, k, d).entries
        term = ak @ rho @ ak.conj().T
        out += term
        acc += float(np.real(np.trace(term)))
        if acc > 1.0 - cutoff_tol:
            break
    return out


def _lowering_coeffs(dim: int, k: int, gamma: float) -> np.ndarray:
    """Coefficient c_n with (A_k psi)[n] = c_n psi[n + k], for n < dim - k."""
    ns = np.arange(k, dim)
    if gamma == 0.0:
        pref = 1.0 if k == 0 else 0.0
    else:
        pref = (1.0 - math.exp(-gamma)) ** (k / 2) / math.sqrt(math.factorial(k))
    return pref * np.exp(-0.5 * gamma * (ns - k)) * np.exp(0.5 * _log_falling_factorial(ns, k))


def _apply_lowering(arr: np.ndarray, axis: int, k: int, gamma: float) -> np.ndarray:
    """Apply A_k (or plain a^k when gamma == 0 and k > 0 is forced) on one axis."""
    d = arr.shape[axis]
    out = np.zeros_like(arr)
    if k >= d:
        return out
    if gamma == 0.0 and k > 0:
        # bare a^k, used for deterministic fault injection
        ns = np.arange(k, d)
        coeff = np.exp(0.5 * _log_falling_factorial(ns, k))
    else:
        coeff = _lowering_coeffs(d, k, gamma)
    src = np.take(arr, np.arange(k, d), axis=axis)
    shape = [1] * arr.ndim
    shape[axis] = d - k
    sl = [slice(None)] * arr.ndim
    sl[axis] = slice(0, d - k)
    out[tuple(sl)] = src * coeff.reshape(shape)
    return out


def _damping_only(arr: np.ndarray, axis: int, gamma: float) -> np.ndarray:
    d = arr.shape[axis]
    diag = np.exp(-0.5 * gamma * np.arange(d))
    shape = [1] * arr.ndim
    shape[axis] = d
    return arr * diag.reshape(shape)


def _rotate_axis(arr: np.ndarray, axis: int, theta: float) -> np.ndarray:
    d = arr.shape[axis]
    diag = np.exp(1j * theta * np.arange(d))
    shape = [1] * arr.ndim
    shape[axis] = d
    return arr * diag.reshape(shape)


def sample_loss(
    state: FockVector,
    mode: int,
    gamma: float,
    rng: np.random.Generator,
    cutoff_tol: float = 1e-12,
) -> tuple[int, FockVector, FaultRecord]:
    """Draw a loss count k with weight ||A_k psi||^2 and collapse onto it.

    Weights are enumerated lazily from k = 0 upward; on the truncated space
    they sum to one exactly, so the draw always terminates.
    """
    arr = state.amps
    if not 0 <= mode < arr.ndim:
        raise InvalidModeError(f"mode {mode} out of range")
    if gamma == 0.0:
        return 0, state, FaultRecord(-1, 0, 0.0)
    u = rng.random()
    cum = 0.0
    d = arr.shape[mode]
    chosen = None
    for k in range(d):
        cand = _apply_lowering(arr, mode, k, gamma)
        w = float(np.linalg.norm(cand) ** 2)
        cum += w
        if w > 0.0:
            chosen = (k, cand, w)
        if (u < cum and w > 0.0) or cum > 1.0 - cutoff_tol:
            break
    k, cand, w = chosen
    post = FockVector(cand / math.sqrt(w))
    return k, post, FaultRecord(-1, k, 0.0)


def sample_dephasing(
    state: FockVector,
    mode: int,
    gamma: float,
    rng: np.random.Generator,
) -> tuple[float, FockVector, FaultRecord]:
    """Draw theta ~ N(0, gamma) and rotate the mode by it (exact unravelling)."""
    if gamma == 0.0:
        return 0.0, state, FaultRecord(-1, 0, 0.0)
    theta = float(rng.normal(0.0, math.sqrt(gamma)))
    post = FockVector(_rotate_axis(state.amps, mode, theta))
    return theta, post, FaultRecord(-1, 0, theta)


def apply_location_noise(
    state: FockVector,
    mode: int,
    strength: NoiseStrength,
    rng: np.random.Generator,
    location_id: int = -1,
) -> tuple[FockVector, FaultRecord]:
    """Loss sampling followed by dephasing sampling on one mode."""
    k, state, _ = sample_loss(state, mode, strength.gamma_loss, rng)
    theta, state, _ = sample_dephasing(state, mode, strength.gamma_ph, rng)
    return state, FaultRecord(location_id, k, theta)
