"""The two teleportation-based error-correction gadgets under location noise.

Both gadgets move the logical content of a noisy input mode onto a freshly
prepared output mode encoded in the same order-N code:

* ``knill``: an order-M ancilla and the output are entangled by a
  controlled-Z, a second controlled-Z couples input and ancilla, and both
  input and ancilla end in parity (X-bar) phase measurements.  The recovery
  Z^x1 X^x2 is tracked as a Pauli frame.
* ``hybrid``: a controlled rotation by 2 pi/(M N) couples ancilla and input;
  an N-bin phase measurement of the ancilla estimates how many photons the
  input lost, a controlled-Z teleports input to output, and the propagated
  phase kick is undone by a physical rotation.  The H X^x2 correction is
  tracked as a frame.

Every circuit location (preparation, each side of a two-mode gate, waits,
measurements) takes independent loss + dephasing noise: preparations and
gates have their noise applied after the ideal operation, measurements
before.  Deterministic faults can be injected at any location for
error-propagation tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from . import codes, fock, noise, phase_meas
from .codes import CodeSpec
from .errors import InvalidDimensionError, InvalidModeError
from .fock import FockVector
from .noise import FaultRecord, NoiseStrength

__all__ = [
    "GadgetSpec",
    "Location",
    "LocationTable",
    "GadgetRunResult",
    "location_table",
    "run_gadget",
    "decode_xbar_outcome",
    "hybrid_dp_decode",
    "PAULI_I",
    "PAULI_X",
    "PAULI_Z",
    "HADAMARD",
]

KNILL = "knill"
HYBRID = "hybrid"

PAULI_I = np.eye(2)
PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]])
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]])
HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2)


@dataclass(frozen=True)
class GadgetSpec:
    """Scheme, code orders, amplitudes/squeezing per role, and measurement offsets."""

    scheme: str
    N: int
    M: int | None = None
    alpha_in: float = 3.0
    alpha_anc: float = 3.0
    squeeze_r_in: float = 0.0
    squeeze_varphi_in: float = math.pi / 2
    squeeze_r_anc: float = 0.0
    squeeze_varphi_anc: float = math.pi / 2
    phi0_in: float = 0.0
    phi0_anc: float = 0.0
    dim_in: int | None = None
    dim_anc: int | None = None

    def __post_init__(self):
        if self.scheme not in (KNILL, HYBRID):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.N < 1:
            raise ValueError("N must be >= 1")

    @property
    def ancilla_order(self) -> int:
        if self.M is not None:
            return self.M
        return self.N if self.scheme == KNILL else 1

    def input_code(self) -> CodeSpec:
        return CodeSpec(
            N=self.N,
            alpha=self.alpha_in,
            squeeze_r=self.squeeze_r_in,
            squeeze_varphi=self.squeeze_varphi_in,
            dim=self.dim_in,
        )

    def ancilla_code(self) -> CodeSpec:
        return CodeSpec(
            N=self.ancilla_order,
            alpha=self.alpha_anc,
            squeeze_r=self.squeeze_r_anc,
            squeeze_varphi=self.squeeze_varphi_anc,
            dim=self.dim_anc,
        )


@dataclass(frozen=True)
class Location:
    location_id: int
    mode: str  # 'I', 'A', or 'O'
    kind: str  # 'input', 'prep', 'gate_side', 'wait', 'meas'


@dataclass(frozen=True)
class LocationTable:
    scheme: str
    locations: tuple[Location, ...]

    def __iter__(self):
        return iter(self.locations)

    def __len__(self):
        return len(self.locations)

    def by_id(self, location_id: int) -> Location:
        for loc in self.locations:
            if loc.location_id == location_id:
                return loc
        raise KeyError(f"no location {location_id} in {self.scheme} table")

    def ids(self) -> tuple[int, ...]:
        return tuple(loc.location_id for loc in self.locations)


_KNILL_TABLE = LocationTable(
    KNILL,
    tuple(
        Location(i, m, k)
        for i, m, k in [
            (0, "I", "input"),
            (1, "A", "prep"),
            (2, "O", "prep"),
            (3, "A", "gate_side"),   # after CZ(A, O)
            (4, "O", "gate_side"),   # after CZ(A, O)
            (5, "I", "gate_side"),   # after CZ(I, A)
            (6, "A", "gate_side"),   # after CZ(I, A)
            (7, "O", "wait"),
            (8, "I", "meas"),
            (9, "A", "meas"),
            (10, "O", "wait"),
        ]
    ),
)

_HYBRID_TABLE = LocationTable(
    HYBRID,
    tuple(
        Location(i, m, k)
        for i, m, k in [
            (0, "I", "input"),
            (1, "A", "prep"),
            (2, "O", "prep"),
            (3, "A", "gate_side"),   # after CROT(A, I)
            (4, "I", "gate_side"),   # after CROT(A, I)
            (5, "A", "meas"),
            (6, "I", "gate_side"),   # after CZ(I, O)
            (7, "O", "gate_side"),   # after CZ(I, O)
            (8, "I", "meas"),
            (9, "O", "wait"),
        ]
    ),
)


def location_table(scheme: str) -> LocationTable:
    if scheme == KNILL:
        return _KNILL_TABLE
    if scheme == HYBRID:
        return _HYBRID_TABLE
    raise ValueError(f"unknown scheme {scheme!r}")


@dataclass
class GadgetRunResult:
    """One trajectory through a gadget.

    ``pauli_frame`` F is the 2x2 logical unitary with output = F |input logical>;
    it is resolved virtually (never applied to the mode).  The hybrid scheme's
    rotation correction, being a cheap diagonal, is applied physically.
    """

    output_state: FockVector
    outcomes: dict
    pauli_frame: np.ndarray
    fault_log: list[FaultRecord] = field(default_factory=list)


@dataclass(frozen=True)
class _Bundle:
    """Per-spec cached constants shared by all trajectories."""

    dim_in: int
    dim_anc: int
    plus_in: np.ndarray
    plus_anc: np.ndarray
    phi_cz_out: float    # CZ between two order-N modes
    phi_cz_anc: float    # CZ between order-N and order-M modes (knill)
    phi_crot: float      # CROT between ancilla and input (hybrid)


@lru_cache(maxsize=128)
def _bundle(spec: GadgetSpec) -> _Bundle:
    cw_in = codes.codewords(spec.input_code())
    cw_anc = codes.codewords(spec.ancilla_code())
    n, m = spec.N, spec.ancilla_order
    return _Bundle(
        dim_in=cw_in.dim,
        dim_anc=cw_anc.dim,
        plus_in=cw_in.ket_plus.amps,
        plus_anc=cw_anc.ket_plus.amps,
        phi_cz_out=math.pi / (n * n),
        phi_cz_anc=math.pi / (n * m),
        phi_crot=2 * math.pi / (n * m),
    )


def decode_xbar_outcome(bin_k: int, N: int) -> int:
    """Parity of the 2N-bin outcome: 0 for plus, 1 for minus."""
    if not 0 <= bin_k < 2 * N:
        raise ValueError(f"bin {bin_k} out of range [0, {2 * N})")
    return bin_k % 2


def hybrid_dp_decode(bin_k: int, N: int, M: int = 1) -> tuple[int, float]:
    """Loss estimate and output correction angle from the N-bin ancilla outcome.

    A k-loss input propagates a rotation of -k 2pi/(M N) onto the ancilla, so
    the phase peak lands in bin (-k mod N); inverting gives the estimate.  The
    returned angle k_hat pi/N^2 undoes the phase kicked onto the output mode.
    """
    if N < 1 or M < 1:
        raise ValueError("orders must be positive")
    if not 0 <= bin_k < N:
        raise ValueError(f"bin {bin_k} out of range [0, {N})")
    k_hat = (-bin_k) % N
    return k_hat, k_hat * math.pi / (N * N)


def _crot(arr: np.ndarray, phi: float, axis_a: int, axis_b: int) -> np.ndarray:
    na = np.arange(arr.shape[axis_a])
    nb = np.arange(arr.shape[axis_b])
    grid = np.exp(1j * phi * np.outer(na, nb))
    shape = [1] * arr.ndim
    shape[axis_a] = arr.shape[axis_a]
    shape[axis_b] = arr.shape[axis_b]
    if axis_a > axis_b:
        grid = grid.T
    return arr * grid.reshape(shape)


class _Trajectory:
    """Mutable single-trajectory state: the amplitude array plus bookkeeping."""

    def __init__(self, arr, noise_map, rng, inject, log):
        self.arr = arr
        self.noise_map = noise_map
        self.rng = rng
        self.inject = inject or {}
        self.log = log

    def fault(self, loc: Location, axis: int):
        """Apply the location's injected fault (if any) then its sampled noise."""
        if loc.location_id in self.inject:
            k, theta = self.inject[loc.location_id]
            if k:
                self.arr = noise._apply_lowering(self.arr, axis, k, 0.0)
                nrm = np.linalg.norm(self.arr)
                if nrm < 1e-14:
                    raise InvalidDimensionError(
                        f"injected {k} losses annihilated the state at location {loc.location_id}"
                    )
                self.arr = self.arr / nrm
            if theta:
                self.arr = noise._rotate_axis(self.arr, axis, theta)
            self.log.append(FaultRecord(loc.location_id, k, theta, injected=True))
        strength = self.noise_map.get(loc.kind, NoiseStrength())
        if strength.is_zero:
            return
        state, rec = noise.apply_location_noise(
            FockVector(self.arr), axis, strength, self.rng, location_id=loc.location_id
        )
        self.arr = state.amps
        self.log.append(rec)

    def attach(self, vec: np.ndarray):
        self.arr = np.multiply.outer(self.arr, vec)

    def measure_phase(self, axis: int, K: int, phi0: float) -> int:
        res = phase_meas.sample_canonical_phase(
            FockVector(self.arr), axis, self.rng, bin_spec=(K, phi0)
        )
        self.arr = res.conditional_state.amps
        return res.bin


def _normalize_noise(noise_spec) -> dict[str, NoiseStrength]:
    kinds = ("input", "prep", "gate_side", "wait", "meas")
    if noise_spec is None:
        noise_spec = NoiseStrength()
    if isinstance(noise_spec, NoiseStrength):
        table = {kind: noise_spec for kind in kinds}
        table["input"] = NoiseStrength()
        return table
    table = {kind: NoiseStrength() for kind in kinds}
    for kind, strength in noise_spec.items():
        if kind not in kinds:
            raise ValueError(f"unknown location kind {kind!r}")
        table[kind] = strength
    return table


def run_gadget(
    state: FockVector,
    spec: GadgetSpec,
    noise_spec=None,
    rng: np.random.Generator | None = None,
    inject: dict[int, tuple[int, float]] | None = None,
) -> GadgetRunResult:
    """Run one noisy trajectory: reference (x) input in, reference (x) output out.

    ``noise_spec`` is a single NoiseStrength applied at every in-gadget
    location (the input location defaults to noiseless), or a mapping from
    location kind to NoiseStrength.  ``inject`` maps location ids to
    deterministic (loss count, rotation angle) faults.
    """
    if rng is None:
        rng = np.random.default_rng()
    bundle = _bundle(spec)
    table = location_table(spec.scheme)
    if inject:
        valid = set(table.ids())
        bad = set(inject) - valid
        if bad:
            raise KeyError(f"injection at unknown locations {sorted(bad)}")
    arr = state.amps
    if arr.ndim != 2 or arr.shape[0] != 2:
        raise InvalidModeError("gadget input must be reference (x) input mode")
    if arr.shape[1] != bundle.dim_in:
        raise InvalidDimensionError(
            f"input mode dim {arr.shape[1]} != code dim {bundle.dim_in}"
        )
    log: list[FaultRecord] = []
    noise_map = _normalize_noise(noise_spec)
    traj = _Trajectory(arr, noise_map, rng, inject, log)
    loc = table.by_id

    if spec.scheme == KNILL:
        outcomes, frame = _run_knill(traj, spec, bundle, loc)
    else:
        outcomes, frame = _run_hybrid(traj, spec, bundle, loc)

    out = FockVector(traj.arr / np.linalg.norm(traj.arr))
    log.sort(key=lambda r: r.location_id)
    return GadgetRunResult(out, outcomes, frame, log)


def _run_knill(traj, spec, bundle, loc):
    # axes: 0 = reference, 1 = I, 2 = A, 3 = O
    n, m = spec.N, spec.ancilla_order
    traj.fault(loc(0), 1)
    traj.attach(bundle.plus_anc)
    traj.fault(loc(1), 2)
    traj.attach(bundle.plus_in)
    traj.fault(loc(2), 3)
    traj.arr = _crot(traj.arr, bundle.phi_cz_anc, 2, 3)   # CZ(A, O)
    traj.fault(loc(3), 2)
    traj.fault(loc(4), 3)
    traj.arr = _crot(traj.arr, bundle.phi_cz_anc, 1, 2)   # CZ(I, A)
    traj.fault(loc(5), 1)
    traj.fault(loc(6), 2)
    traj.fault(loc(7), 3)
    traj.fault(loc(8), 1)
    bin_in = traj.measure_phase(1, 2 * n, spec.phi0_in)   # axes shift: A->1, O->2
    traj.fault(loc(9), 1)
    bin_anc = traj.measure_phase(1, 2 * m, spec.phi0_anc)  # O -> axis 1
    traj.fault(loc(10), 1)
    x1 = decode_xbar_outcome(bin_in, n)
    x2 = decode_xbar_outcome(bin_anc, m)
    frame = np.linalg.matrix_power(PAULI_X, x2) @ np.linalg.matrix_power(PAULI_Z, x1)
    outcomes = {"x1": x1, "x2": x2, "bin_in": bin_in, "bin_anc": bin_anc}
    return outcomes, frame


def _run_hybrid(traj, spec, bundle, loc):
    # The output mode only interacts after the ancilla measurement, so its
    # preparation (and prep noise) commutes past that measurement; deferring
    # it keeps the tensor three modes at most.
    n = spec.N
    traj.fault(loc(0), 1)
    traj.attach(bundle.plus_anc)                           # axes: ref, I, A
    traj.fault(loc(1), 2)
    traj.arr = _crot(traj.arr, bundle.phi_crot, 2, 1)      # CROT(A, I)
    traj.fault(loc(3), 2)
    traj.fault(loc(4), 1)
    traj.fault(loc(5), 2)
    bin_anc = traj.measure_phase(2, n, spec.phi0_anc)
    k_hat, correction = hybrid_dp_decode(bin_anc, n, spec.ancilla_order)
    traj.attach(bundle.plus_in)                            # axes: ref, I, O
    traj.fault(loc(2), 2)
    traj.arr = _crot(traj.arr, bundle.phi_cz_out, 1, 2)    # CZ(I, O)
    traj.fault(loc(6), 1)
    traj.fault(loc(7), 2)
    traj.fault(loc(8), 1)
    bin_in = traj.measure_phase(1, 2 * n, spec.phi0_in)
    traj.fault(loc(9), 1)
    if correction:
        traj.arr = noise._rotate_axis(traj.arr, 1, correction)
    x2 = decode_xbar_outcome(bin_in, n)
    frame = np.linalg.matrix_power(PAULI_X, x2) @ HADAMARD
    outcomes = {"k_hat": k_hat, "x2": x2, "bin_in": bin_in, "bin_anc": bin_anc}
    return outcomes, frame
