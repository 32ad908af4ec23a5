"""Cat and squeezed-cat codewords, logical operators, and correctability checks.

An order-N code lives on a single mode and is spanned by the two states
obtained from a primitive |Theta> = D(alpha) S(r, varphi) |vac> by summing its
2N rotations by pi/N with alternating signs.  The order-N rotation by pi/N
acts as the logical Z.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from . import fock
from .errors import DegenerateCodeError
from .fock import FockOperator, FockVector, rotation

__all__ = [
    "CodeSpec",
    "Codewords",
    "KLReport",
    "codewords",
    "codeword",
    "primitive_state",
    "logical_operators",
    "kl_violation",
    "squeezing_db",
]


def squeezing_db(r: float) -> float:
    """Squeezing factor in dB: -10 log10 e^{-2r} (about 8.68 r)."""
    return -10.0 * math.log10(math.exp(-2.0 * r))


@dataclass(frozen=True)
class CodeSpec:
    """Parameters of one (squeezed-)cat code: order, amplitude, squeezing, truncation."""

    N: int
    alpha: float
    squeeze_r: float = 0.0
    squeeze_varphi: float = math.pi / 2
    dim: int | None = None

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("code order N must be >= 1")
        if self.alpha < 0 or self.squeeze_r < 0:
            raise ValueError("alpha and squeeze_r must be nonnegative")

    def resolved_dim(self) -> int:
        if self.dim is not None:
            return self.dim
        return fock.ensure_dim(self.alpha, self.squeeze_r, self.squeeze_varphi)

    def with_alpha(self, alpha: float) -> "CodeSpec":
        return replace(self, alpha=alpha)


@dataclass
class Codewords:
    """The derived code states, projector, and raw normalization constants.

    ``norm_constants`` are the squared norms of the unnormalized 2N-term
    superpositions; they approach 2N as alpha grows.
    """

    spec: CodeSpec
    ket0: FockVector
    ket1: FockVector
    ket_plus: FockVector
    ket_minus: FockVector
    projector: FockOperator
    norm_constants: tuple[float, float]

    @property
    def dim(self) -> int:
        return self.ket0.dim


def primitive_state(spec: CodeSpec) -> FockVector:
    """D(alpha) S(r, varphi) |vac>, normalized in the resolved truncation."""
    dim = spec.resolved_dim()
    if spec.squeeze_r == 0.0:
        return fock.coherent(spec.alpha, dim)
    amps = fock.primitive_amps(spec.alpha, spec.squeeze_r, spec.squeeze_varphi, dim)
    return FockVector(amps).normalized()


def _raw_codeword(spec: CodeSpec, mu: int) -> tuple[np.ndarray, float]:
    dim = spec.resolved_dim()
    base = primitive_state(spec).amps
    n = np.arange(dim)
    acc = np.zeros(dim, dtype=complex)
    for m in range(2 * spec.N):
        phase = np.exp(1j * (math.pi * m / spec.N) * n)
        acc += ((-1) ** (mu * m)) * (phase * base)
    return acc, float(np.linalg.norm(acc) ** 2)


def codeword(spec: CodeSpec, mu: int) -> FockVector:
    """Logical |mu_N>, mu in {0, 1}."""
    if mu not in (0, 1):
        raise ValueError("mu must be 0 or 1")
    acc, norm_sq = _raw_codeword(spec, mu)
    if math.sqrt(norm_sq) < 1e-8:
        raise DegenerateCodeError(
            f"codeword mu={mu} has norm {math.sqrt(norm_sq):.2e}; "
            f"alpha={spec.alpha} too small for N={spec.N}"
        )
    return FockVector(acc / math.sqrt(norm_sq))


@lru_cache(maxsize=256)
def codewords(spec: CodeSpec) -> Codewords:
    """Build all four code states and the code projector."""
    k0 = codeword(spec, 0)
    k1 = codeword(spec, 1)
    kp = FockVector((k0.amps + k1.amps) / math.sqrt(2))
    km = FockVector((k0.amps - k1.amps) / math.sqrt(2))
    proj = FockOperator(np.outer(k0.amps, k0.amps.conj()) + np.outer(k1.amps, k1.amps.conj()))
    n0 = _raw_codeword(spec, 0)[1]
    n1 = _raw_codeword(spec, 1)[1]
    return Codewords(spec, k0, k1, kp, km, proj, (n0, n1))


def logical_operators(cw: Codewords) -> dict[str, FockOperator]:
    """Logical Z, X, H as full-dimension operators supported on the code space."""
    k0, k1 = cw.ket0.amps, cw.ket1.amps
    kp, km = cw.ket_plus.amps, cw.ket_minus.amps
    z = np.outer(k0, k0.conj()) - np.outer(k1, k1.conj())
    x = np.outer(k0, k1.conj()) + np.outer(k1, k0.conj())
    h = np.outer(kp, k0.conj()) + np.outer(km, k1.conj())
    return {
        "Z": FockOperator(z),
        "X": FockOperator(x),
        "H": FockOperator(h),
    }


@dataclass
class KLReport:
    """Knill-Laflamme diagnostics over an error grid, per amplitude.

    ``violations`` holds, per alpha, the largest diagonal mismatch
    |<0|E^dag E'|0> - <1|E^dag E'|1>| over same-loss-count error pairs;
    ``offdiag_max`` and ``cross_k_max`` hold the matrix elements that vanish
    exactly by Fock-support disjointness.
    """

    alphas: list[float]
    violations: list[float]
    offdiag_max: list[float]
    cross_k_max: list[float]
    fitted_decay_rate: float
    fit_r_squared: float


def _error_grid_products(cw: Codewords, k_range, theta_grid):
    """All <mu| E^dag E' |mu'> with E = R(theta) a^k over the grid."""
    dim = cw.dim
    ks = list(k_range)
    thetas = list(theta_grid)
    n = np.arange(dim)
    lowered = {}
    for mu, ket in ((0, cw.ket0), (1, cw.ket1)):
        vec = ket.amps
        for k in ks:
            v = vec
            for j in range(k):
                v = np.concatenate([np.sqrt(n[1:]) * v[1:], [0.0]])
            lowered[(mu, k)] = v
    # <mu| a^dag^k R(theta'-theta) a^k' |mu'> = (a^k ket_mu)^dag R(delta) (a^k' ket_mu')
    out = {}
    for k in ks:
        for kp in ks:
            for t in thetas:
                for tp in thetas:
                    phase = np.exp(1j * (tp - t) * n)
                    for mu in (0, 1):
                        for mup in (0, 1):
                            val = np.vdot(lowered[(mu, k)], phase * lowered[(mup, kp)])
                            out[(mu, mup, k, kp, t, tp)] = val
    return out


def kl_violation(
    spec: CodeSpec,
    k_range=None,
    theta_grid=None,
    alphas=None,
    normalize_errors: bool = True,
) -> KLReport:
    """Evaluate the correctability conditions on a loss/rotation error grid.

    The grid must stay inside the correctable set: loss counts in [0, N),
    angles in (-pi/N, 0]; the default grid spans the inner half of the
    rotation window, where the suppression is uniform.  With
    ``normalize_errors`` each loss operator is scaled by 1/alpha^k (the
    coherent amplitude of a lowered component), so violations measure the
    suppression per unit error strength and are comparable across alphas;
    the raw convention carries an alpha^{2k} prefactor that masks the decay
    at small amplitude.  The diagonal mismatch is fitted as log(violation)
    vs alpha^2 across ``alphas`` (default: just spec.alpha).
    """
    N = spec.N
    ks = list(k_range) if k_range is not None else list(range(N))
    if any(k < 0 or k >= N for k in ks):
        raise ValueError(f"loss counts {ks} outside correctable range [0, {N})")
    if theta_grid is not None:
        thetas = list(theta_grid)
    else:
        thetas = list(np.linspace(-math.pi / (2 * N), 0.0, 8))
    if any(t <= -math.pi / N or t > 0 for t in thetas):
        raise ValueError("theta grid outside the correctable window (-pi/N, 0]")
    alpha_list = [spec.alpha] if alphas is None else list(alphas)

    violations, offdiags, crossks = [], [], []
    for alpha in alpha_list:
        cw = codewords(spec.with_alpha(alpha))
        prods = _error_grid_products(cw, ks, thetas)
        if normalize_errors:
            prods = {
                (mu, mup, k, kp, t, tp): v / alpha ** (k + kp)
                for (mu, mup, k, kp, t, tp), v in prods.items()
            }
        off = max(
            (abs(v) for (mu, mup, *_), v in prods.items() if mu != mup),
            default=0.0,
        )
        cross = max(
            (
                abs(v)
                for (mu, mup, k, kp, *_), v in prods.items()
                if mu == mup and k != kp
            ),
            default=0.0,
        )
        mism = max(
            abs(prods[(0, 0, k, k, t, tp)] - prods[(1, 1, k, k, t, tp)])
            for k in ks
            for t in thetas
            for tp in thetas
        )
        violations.append(float(mism))
        offdiags.append(float(off))
        crossks.append(float(cross))

    if len(alpha_list) >= 2 and all(v > 0 for v in violations):
        x = np.asarray([a**2 for a in alpha_list])
        y = np.log(np.asarray(violations))
        slope, intercept = np.polyfit(x, y, 1)
        resid = y - (slope * x + intercept)
        ss_tot = float(np.sum((y - y.mean()) ** 2))
        r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    else:
        slope, r2 = 0.0, 1.0

    return KLReport(
        alphas=[float(a) for a in alpha_list],
        violations=violations,
        offdiag_max=offdiags,
        cross_k_max=crossks,
        fitted_decay_rate=float(slope),
        fit_r_squared=float(r2),
    )
