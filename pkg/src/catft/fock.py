"""Truncated Fock-space states and operators.

States are complex amplitude arrays over the number basis |0>, ..., |D-1|;
multimode states keep one array axis per mode.  Operators are dense D x D
matrices with an optional structure tag (``diagonal`` or ``shift-diagonal``)
so that structured applications can be checked against plain matrix algebra.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from .errors import (
    InvalidDimensionError,
    InvalidModeError,
    InvalidStateError,
    TruncationError,
)

GENERAL = "general"
DIAGONAL = "diagonal"
SHIFT_DIAGONAL = "shift-diagonal"


@dataclass(frozen=True)
class TruncationPolicy:
    """How aggressively states may be truncated.

    ``tail_mass_tol`` bounds the probability mass allowed above the cutoff;
    ``growth_factor`` controls how the search for a sufficient dimension
    expands when a guess fails.
    """

    tail_mass_tol: float = 1e-9
    min_dim: int = 8
    growth_factor: float = 1.4

    def __post_init__(self):
        if not 0.0 < self.tail_mass_tol <= 1e-3:
            raise ValueError("tail_mass_tol must lie in (0, 1e-3]")
        if self.growth_factor <= 1.0:
            raise ValueError("growth_factor must exceed 1")


DEFAULT_POLICY = TruncationPolicy()


@dataclass
class FockVector:
    """State vector over one or more truncated oscillator modes.

    ``amps`` has one axis per mode; a single-mode state is a 1-d array.
    """

    amps: np.ndarray

    def __post_init__(self):
        self.amps = np.asarray(self.amps, dtype=complex)
        if self.amps.size == 0:
            raise InvalidDimensionError("empty amplitude array")

    @property
    def dims(self) -> tuple[int, ...]:
        return self.amps.shape

    @property
    def dim(self) -> int:
        return self.amps.size

    @property
    def n_modes(self) -> int:
        return self.amps.ndim

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def normalized(self) -> "FockVector":
        n = self.norm()
        if n < 1e-14:
            raise InvalidStateError("cannot normalize a zero vector")
        return FockVector(self.amps / n)

    def overlap(self, other: "FockVector") -> complex:
        """<self|other> over the flattened joint basis."""
        return complex(np.vdot(self.amps, other.amps))

    def fidelity(self, other: "FockVector") -> float:
        return abs(self.overlap(other)) ** 2

    def tensor(self, other: "FockVector") -> "FockVector":
        return FockVector(np.multiply.outer(self.amps, other.amps))

    def density(self) -> np.ndarray:
        flat = self.amps.reshape(-1)
        return np.outer(flat, flat.conj())


@dataclass
class FockOperator:
    """Dense single-mode operator with an optional structure tag."""

    entries: np.ndarray
    structure: str = GENERAL
    shift: int = 0

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=complex)
        if self.entries.ndim != 2 or self.entries.shape[0] != self.entries.shape[1]:
            raise InvalidDimensionError("operator entries must be square")
        self._check_structure()

    def _check_structure(self):
        if self.structure == DIAGONAL:
            off = self.entries - np.diag(np.diag(self.entries))
            if np.any(off != 0):
                raise ValueError("diagonal tag with nonzero off-diagonal entries")
        elif self.structure == SHIFT_DIAGONAL:
            mask = np.ones_like(self.entries, dtype=bool)
            np.fill_diagonal(mask[: self.dim - self.shift, self.shift:], False)
            if np.any(self.entries[mask] != 0):
                raise ValueError(
                    f"shift-diagonal({self.shift}) tag with entries off the subdiagonal"
                )

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def dagger(self) -> "FockOperator":
        return FockOperator(self.entries.conj().T)

    def __matmul__(self, other):
        if isinstance(other, FockOperator):
            return FockOperator(self.entries @ other.entries)
        if isinstance(other, FockVector):
            return FockVector(self.entries @ other.amps)
        return NotImplemented

    def apply(self, state: FockVector, mode: int = 0) -> FockVector:
        """Apply to one mode of a (possibly multimode) state.

        Structure-tagged operators use the cheap axis-wise path; the result
        agrees with dense matrix application.
        """
        arr = state.amps
        if not 0 <= mode < arr.ndim:
            raise InvalidModeError(f"mode {mode} out of range")
        if arr.shape[mode] != self.dim:
            raise InvalidDimensionError(
                f"operator dim {self.dim} != mode dim {arr.shape[mode]}"
            )
        if self.structure == DIAGONAL:
            diag = np.diag(self.entries)
            shape = [1] * arr.ndim
            shape[mode] = self.dim
            return FockVector(arr * diag.reshape(shape))
        if self.structure == SHIFT_DIAGONAL:
            k = self.shift
            coeff = np.diagonal(self.entries, offset=k)
            out = np.zeros_like(arr)
            src = np.take(arr, np.arange(k, self.dim), axis=mode)
            shape = [1] * arr.ndim
            shape[mode] = self.dim - k
            sl = [slice(None)] * arr.ndim
            sl[mode] = slice(0, self.dim - k)
            out[tuple(sl)] = src * coeff.reshape(shape)
            return FockVector(out)
        moved = np.tensordot(self.entries, arr, axes=(1, mode))
        return FockVector(np.moveaxis(moved, 0, mode))


def vacuum(dim: int) -> FockVector:
    amps = np.zeros(dim, dtype=complex)
    amps[0] = 1.0
    return FockVector(amps)


def basis_state(n: int, dim: int) -> FockVector:
    if not 0 <= n < dim:
        raise InvalidDimensionError(f"|{n}> does not fit in dim {dim}")
    amps = np.zeros(dim, dtype=complex)
    amps[n] = 1.0
    return FockVector(amps)


def annihilation(dim: int) -> FockOperator:
    """Lowering operator: <n-1| a |n> = sqrt(n)."""
    if dim < 2:
        raise InvalidDimensionError("annihilation needs dim >= 2")
    entries = np.zeros((dim, dim), dtype=complex)
    ns = np.arange(1, dim)
    entries[ns - 1, ns] = np.sqrt(ns)
    return FockOperator(entries, structure=SHIFT_DIAGONAL, shift=1)


def creation(dim: int) -> FockOperator:
    return annihilation(dim).dagger()


def number(dim: int) -> FockOperator:
    return FockOperator(np.diag(np.arange(dim, dtype=complex)), structure=DIAGONAL)


def rotation(theta: float, dim: int) -> FockOperator:
    """Phase-space rotation exp(i * theta * n) as a diagonal operator."""
    phases = np.exp(1j * theta * np.arange(dim))
    return FockOperator(np.diag(phases), structure=DIAGONAL)


def coherent_tail_mass(alpha: float, dim: int) -> float:
    """Probability mass of |alpha> at Fock levels >= dim (Poisson tail)."""
    nbar = abs(alpha) ** 2
    if nbar == 0.0:
        return 0.0
    terms = np.empty(dim)
    terms[0] = -nbar
    ns = np.arange(1, dim)
    terms[1:] = ns * math.log(nbar) - nbar
    terms[1:] -= np.cumsum(np.log(ns))
    return float(max(0.0, 1.0 - np.exp(terms).sum()))


def coherent(alpha: complex, dim: int, policy: TruncationPolicy = DEFAULT_POLICY) -> FockVector:
    """Coherent state by its Fock series, renormalized after truncation."""
    a = complex(alpha)
    if abs(a) ** 2 + 6 * abs(a) >= dim:
        raise TruncationError(
            f"dim {dim} too small for |alpha|={abs(a):.3g}",
            required_dim=ensure_dim(abs(a), policy=policy),
        )
    tail = coherent_tail_mass(abs(a), dim)
    if tail >= policy.tail_mass_tol:
        raise TruncationError(
            f"coherent tail mass {tail:.2e} above {policy.tail_mass_tol:.1e}",
            required_dim=ensure_dim(abs(a), policy=policy),
        )
    amps = np.empty(dim, dtype=complex)
    amps[0] = math.exp(-abs(a) ** 2 / 2)
    for n in range(1, dim):
        amps[n] = amps[n - 1] * a / math.sqrt(n)
    amps /= np.linalg.norm(amps)
    return FockVector(amps)


def _truncation_defect(build, dim: int, stretch: float = 1.0) -> float:
    """Max element change, away from the edge, when the truncation is enlarged.

    The exponential of a truncated anti-Hermitian generator is exactly unitary
    no matter how severe the truncation, so unitarity itself cannot flag a
    too-small dimension; the guarded block must instead be stable against
    adding more levels.  ``stretch`` is how far the operator spreads number
    support (e^{2r} for squeezing), which shrinks the guardable block.
    """
    margin = int(math.ceil(4 * math.sqrt(dim)))
    keep = max(1, int((dim - margin) / stretch))
    small = build(dim)
    big = build(dim + margin + 8)
    return float(np.abs(big[:keep, :keep] - small[:keep, :keep]).max())


def displacement(alpha: complex, dim: int, policy: TruncationPolicy = DEFAULT_POLICY) -> FockOperator:
    """D(alpha) = exp(alpha a^dag - conj(alpha) a) by generator exponentiation."""

    def build(d):
        a = annihilation(d).entries
        return expm(alpha * a.conj().T - np.conj(alpha) * a)

    defect = _truncation_defect(build, dim)
    if defect > 1e-8:
        raise TruncationError(
            f"displacement truncation defect {defect:.2e} at dim {dim}",
            required_dim=ensure_dim(abs(alpha), policy=policy),
        )
    return FockOperator(build(dim))


def squeeze(r: float, varphi: float, dim: int, policy: TruncationPolicy = DEFAULT_POLICY) -> FockOperator:
    """Squeezing operator whose minimum-variance quadrature sits at angle varphi.

    With xi = r exp(2i varphi), S = exp((conj(xi) a^2 - xi a^dag^2) / 2), so
    varphi = 0 squeezes the position-like quadrature and varphi = pi/2 the
    momentum-like (phase) quadrature.
    """
    if r == 0.0:
        return FockOperator(np.eye(dim, dtype=complex))
    xi = r * np.exp(2j * varphi)

    def build(d):
        a = annihilation(d).entries
        return expm((np.conj(xi) * (a @ a) - xi * (a.conj().T @ a.conj().T)) / 2.0)

    defect = _truncation_defect(build, dim, stretch=math.exp(2 * r))
    if defect > 1e-8:
        raise TruncationError(
            f"squeeze truncation defect {defect:.2e} at dim {dim}",
            required_dim=ensure_dim(0.0, r=r, varphi=varphi, policy=policy),
        )
    return FockOperator(build(dim))


def quadrature(theta: float, dim: int) -> FockOperator:
    """X_theta = (a e^{-i theta} + a^dag e^{i theta}) / sqrt(2)."""
    a = annihilation(dim).entries
    x = (a * np.exp(-1j * theta) + a.conj().T * np.exp(1j * theta)) / math.sqrt(2)
    return FockOperator(x)


def apply_crot_phase(state: FockVector, phi: float, mode_a: int, mode_b: int) -> FockVector:
    """Apply exp(i phi n_a n_b): a pure phase on each joint Fock component."""
    arr = state.amps
    if mode_a == mode_b:
        raise InvalidModeError("controlled rotation needs two distinct modes")
    for m in (mode_a, mode_b):
        if not 0 <= m < arr.ndim:
            raise InvalidModeError(f"mode {m} out of range for {arr.ndim}-mode state")
    na = np.arange(arr.shape[mode_a])
    nb = np.arange(arr.shape[mode_b])
    grid = np.exp(1j * phi * np.outer(na, nb))
    shape = [1] * arr.ndim
    shape[mode_a] = arr.shape[mode_a]
    shape[mode_b] = arr.shape[mode_b]
    if mode_a < mode_b:
        grid_nd = grid.reshape(shape)
    else:
        grid_nd = grid.T.reshape(shape)
    return FockVector(arr * grid_nd)


def partial_inner(state: FockVector, mode: int, bra: FockVector | np.ndarray) -> FockVector:
    """Contract one mode against a bra: (<bra| (x) 1) |state>, unnormalized."""
    arr = state.amps
    bra_amps = bra.amps if isinstance(bra, FockVector) else np.asarray(bra, dtype=complex)
    if bra_amps.ndim != 1:
        raise InvalidModeError("bra must be a single-mode vector")
    if not 0 <= mode < arr.ndim:
        raise InvalidModeError(f"mode {mode} out of range")
    if arr.shape[mode] != bra_amps.size:
        raise InvalidDimensionError(
            f"bra length {bra_amps.size} != mode dim {arr.shape[mode]}"
        )
    out = np.tensordot(bra_amps.conj(), arr, axes=(0, mode))
    if out.ndim == 0:
        out = out.reshape(1)
    return FockVector(out)


def primitive_amps(alpha: float, r: float, varphi: float, dim: int) -> np.ndarray:
    """Amplitudes of D(alpha) S(r, varphi) |vac>, not tail-checked."""
    if r == 0.0:
        a = complex(alpha)
        amps = np.empty(dim, dtype=complex)
        amps[0] = math.exp(-abs(a) ** 2 / 2)
        for n in range(1, dim):
            amps[n] = amps[n - 1] * a / math.sqrt(n)
        return amps
    ann = annihilation(dim).entries
    xi = r * np.exp(2j * varphi)
    sq = expm((np.conj(xi) * (ann @ ann) - xi * (ann.conj().T @ ann.conj().T)) / 2.0)
    disp = expm(alpha * ann.conj().T - np.conj(alpha) * ann)
    vac = np.zeros(dim, dtype=complex)
    vac[0] = 1.0
    return disp @ (sq @ vac)


@lru_cache(maxsize=512)
def ensure_dim(
    alpha: float,
    r: float = 0.0,
    varphi: float = math.pi / 2,
    policy: TruncationPolicy = DEFAULT_POLICY,
) -> int:
    """Smallest dimension whose primitive tail mass is below policy tolerance.

    Starts from the heuristic ceil(alpha^2 e^{2r} + 6 alpha e^r + 20) and
    verifies with an explicit tail sum, growing until a verified dimension is
    found, then shrinking to the smallest one that still passes.
    """
    if alpha < 0 or r < 0:
        raise ValueError("alpha and r must be nonnegative")
    guess = max(
        policy.min_dim,
        math.ceil(alpha**2 * math.exp(2 * r) + 6 * alpha * math.exp(r) + 20),
    )
    big = guess
    while True:
        big = int(math.ceil(big * policy.growth_factor)) + 8
        amps = primitive_amps(alpha, r, varphi, big)
        mass = np.cumsum(np.abs(amps) ** 2)
        tail = np.maximum(0.0, 1.0 - mass)
        # tail[d-1] is the mass at levels >= d
        candidates = np.nonzero(tail < policy.tail_mass_tol)[0]
        edge_guard = big - int(math.ceil(4 * math.sqrt(big)))
        if candidates.size and candidates[0] + 1 <= edge_guard:
            return max(int(candidates[0]) + 1, policy.min_dim)


def primitive_tail_mass(alpha: float, r: float, varphi: float, dim: int) -> float:
    """Tail mass of the (squeezed) displaced vacuum above ``dim``, by direct sum."""
    big = max(2 * dim, dim + 32)
    amps = primitive_amps(alpha, r, varphi, big)
    return float(max(0.0, 1.0 - float(np.sum(np.abs(amps[:dim]) ** 2))))
