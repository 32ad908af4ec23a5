"""Symbolic fault propagation through the gadgets and the formal tolerance check.

Loss counts and phase angles propagate linearly through the circuits: a
k-loss fault entering a controlled rotation of strength phi kicks the partner
mode by -k phi, while phase faults commute through.  Evaluating those linear
bookkeeping formulas for a whole fault pattern gives each mode's final error
content (k, theta) just before its measurement, from which the formal
error-correction fault-tolerance property can be decided without simulating.

Conventions: all phase faults are nonpositive (worst case, since the
rotations propagated from losses are themselves negative), and the input
location carries id 0 while in-gadget locations are 1..10 (knill) or 1..9
(hybrid).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .gadgets import HYBRID, KNILL, location_table

__all__ = [
    "SymbolicFaultPattern",
    "PropagationResult",
    "EcftVerdict",
    "propagate",
    "ecft_check",
    "ecft_exhaustive",
    "ancilla_order_audit",
]


@dataclass(frozen=True)
class SymbolicFaultPattern:
    """Per-location (loss count, phase angle) assignments for one scheme."""

    scheme: str
    N: int
    M: int
    entries: tuple[tuple[int, int, float], ...]  # (location_id, k, theta)

    @staticmethod
    def from_dict(scheme: str, N: int, M: int, entries: dict[int, tuple[int, float]]):
        items = tuple(sorted((i, int(k), float(th)) for i, (k, th) in entries.items()))
        return SymbolicFaultPattern(scheme, N, M, items)

    def __post_init__(self):
        table = location_table(self.scheme)
        valid = set(table.ids())
        for loc_id, k, theta in self.entries:
            if loc_id not in valid:
                raise KeyError(f"unknown location {loc_id} for scheme {self.scheme}")
            if k < 0:
                raise ValueError("loss counts must be nonnegative")
            if theta > 0 or theta <= -math.pi / self.N:
                raise ValueError(
                    f"theta {theta} outside the worst-case window (-pi/N, 0]"
                )

    def get(self, loc_id: int) -> tuple[int, float]:
        for i, k, th in self.entries:
            if i == loc_id:
                return k, th
        return 0, 0.0


@dataclass
class PropagationResult:
    """Final per-mode error content and the aggregate fault totals.

    ``theta_A_noise`` excludes the rotation the input losses imprint on the
    ancilla (that rotation is the signal the hybrid phase estimate reads).
    ``theta_O_corrected`` includes the hybrid's rotation correction; for the
    knill scheme it equals ``theta_O``.
    """

    k_I: int
    theta_I: float
    k_A: int
    theta_A: float
    theta_A_noise: float
    k_O: int
    theta_O: float
    theta_O_corrected: float
    k_hat: int
    r: int
    theta_f: float
    theta_s: float
    theta_r: float


def _coeffs(scheme: str, N: int, M: int):
    """Per-location linear coefficients of the propagation formulas.

    Returns dicts mapping location id to its additive contribution per loss
    (for the phase columns) or per unit (for counts); phases contributed by
    the location's own theta are handled separately.
    """
    if scheme == KNILL:
        phi_ia = math.pi / (N * M)
        phi_ao = math.pi / (N * M)
        k_modes = {"I": (0, 5, 8), "A": (1, 3, 6, 9), "O": (2, 4, 7, 10)}
        th_modes = dict(k_modes)
        # phase kicked onto each mode per loss at a given location
        kick = {
            "I": {1: -phi_ia, 3: -phi_ia},
            "A": {0: -phi_ia, 2: -phi_ao},
            "O": {1: -phi_ao},
        }
    elif scheme == HYBRID:
        phi_ai = 2 * math.pi / (N * M)
        phi_io = math.pi / (N * N)
        k_modes = {"I": (0, 4, 6, 8), "A": (1, 3, 5), "O": (2, 7, 9)}
        th_modes = dict(k_modes)
        kick = {
            "I": {1: -phi_ai, 2: -phi_io},
            "A": {0: -phi_ai},
            "O": {0: -phi_io, 4: -phi_io},
        }
        if M == 1:
            # a 2 pi k / N rotation is the identity on an order-N code space
            kick["I"] = {2: -phi_io}
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    return k_modes, th_modes, kick


def propagate(scheme: str, N: int, M: int, pattern: SymbolicFaultPattern) -> PropagationResult:
    """Evaluate the linear propagation formulas for one fault pattern."""
    k_modes, th_modes, kick = _coeffs(scheme, N, M)
    k = {i: pattern.get(i)[0] for i in location_table(scheme).ids()}
    th = {i: pattern.get(i)[1] for i in location_table(scheme).ids()}

    k_tot = {m: sum(k[i] for i in locs) for m, locs in k_modes.items()}
    th_tot = {
        m: sum(th[i] for i in th_modes[m]) + sum(c * k[i] for i, c in kick[m].items())
        for m in ("I", "A", "O")
    }
    gadget_ids = [i for i in location_table(scheme).ids() if i != 0]
    r = sum(k[i] for i in gadget_ids)
    theta_f = sum(th[i] for i in gadget_ids)
    # split the loss-induced kicks into input-driven and gadget-driven totals;
    # for the hybrid scheme the kick input losses put on the ancilla is the
    # signal read out by the phase estimate, not a budgeted error
    budget_modes = ("I", "O") if scheme == HYBRID else ("I", "A", "O")
    theta_s = sum(
        c * k[i] for m in budget_modes for i, c in kick[m].items() if i == 0
    )
    theta_r = sum(
        c * k[i] for m in ("I", "A", "O") for i, c in kick[m].items() if i != 0
    )

    if scheme == HYBRID:
        signal = kick["A"].get(0, 0.0) * k[0]
        theta_a_noise = th_tot["A"] - signal
        k_hat = (round(k[0] / M)) % N if M > 1 else k[0] % N
        corrected = th_tot["O"] + k_hat * math.pi / (N * N)
    else:
        theta_a_noise = th_tot["A"]
        k_hat = 0
        corrected = th_tot["O"]

    return PropagationResult(
        k_I=k_tot["I"],
        theta_I=th_tot["I"],
        k_A=k_tot["A"],
        theta_A=th_tot["A"],
        theta_A_noise=theta_a_noise,
        k_O=k_tot["O"],
        theta_O=th_tot["O"],
        theta_O_corrected=corrected,
        k_hat=k_hat,
        r=r,
        theta_f=theta_f,
        theta_s=theta_s,
        theta_r=theta_r,
    )


@dataclass
class EcftVerdict:
    """Outcome of the formal tolerance check for one pattern.

    ``satisfied`` reports whether the gadget behaves correctly for the
    pattern (measurement outcomes recoverable, output errors within the
    gadget-fault budget and correctable).  ``hypothesis_holds`` reports
    whether the pattern falls inside the property's stated fault budget;
    a pattern with the hypothesis satisfied must never misbehave.
    """

    satisfied: bool
    hypothesis_holds: bool
    reasons: list[str] = field(default_factory=list)
    propagation: PropagationResult | None = None


def ecft_check(
    scheme: str,
    N: int,
    M: int,
    input_error: tuple[int, float] = (0, 0.0),
    pattern: SymbolicFaultPattern | dict | None = None,
) -> EcftVerdict:
    """Check the tolerance property's hypothesis and conclusion for a pattern."""
    if isinstance(pattern, SymbolicFaultPattern):
        entries = {i: (k, th) for i, k, th in pattern.entries}
    else:
        entries = dict(pattern or {})
    k0, th0 = input_error
    if k0 or th0:
        entries[0] = (k0 + entries.get(0, (0, 0.0))[0], th0 + entries.get(0, (0, 0.0))[1])
    pat = SymbolicFaultPattern.from_dict(scheme, N, M, entries)
    prop = propagate(scheme, N, M, pat)

    k_in = pat.get(0)[0]
    th_in = pat.get(0)[1]
    hyp = (k_in + prop.r < N) and (
        abs(th_in + prop.theta_f + prop.theta_s + prop.theta_r) < math.pi / N
    )

    reasons = []
    if not abs(prop.theta_I) < math.pi / N:
        reasons.append("input-xbar-flip: |theta_I| >= pi/N (logical Z on output)")
    if scheme == KNILL:
        if not abs(prop.theta_A) < math.pi / M:
            reasons.append("ancilla-xbar-flip: |theta_A| >= pi/M (logical X on output)")
    else:
        if not abs(prop.theta_A_noise) < math.pi / N:
            reasons.append("dp-misdetect: ancilla noise phase >= pi/N bin half-width")
    if prop.k_O > prop.r:
        reasons.append("output-loss-budget: k_O exceeds gadget losses")
    if abs(prop.theta_O_corrected) > abs(prop.theta_f + prop.theta_r) + 1e-12:
        reasons.append("output-phase-budget: |theta_O| exceeds |theta_f + theta_r|")
    if prop.k_O >= N:
        reasons.append("output-loss-uncorrectable: k_O >= N")
    if not abs(prop.theta_O_corrected) < math.pi / N:
        reasons.append("output-phase-uncorrectable: |theta_O| >= pi/N")

    return EcftVerdict(
        satisfied=not reasons,
        hypothesis_holds=hyp,
        reasons=reasons,
        propagation=prop,
    )


def _subset_sums(values: np.ndarray) -> np.ndarray:
    """All 2^n subset sums of a vector, one row per bitmask."""
    n = len(values)
    masks = np.arange(2**n)
    bits = (masks[:, None] >> np.arange(n)[None, :]) & 1
    return bits @ values


def ecft_exhaustive(
    scheme: str,
    N: int,
    M: int,
    k_value: int = 1,
    theta_value: float = -math.pi / 8,
) -> dict:
    """Exhaustively enumerate on/off fault patterns and count misbehavior.

    Each location independently carries either zero or ``k_value`` losses and
    either zero or ``theta_value`` phase error; the check is evaluated for
    every combination (4^n patterns, vectorized as an outer product of loss
    and phase bitmasks).  Returns counts and the first counterexample, if any,
    among patterns satisfying the hypothesis.
    """
    table = location_table(scheme)
    ids = list(table.ids())
    n = len(ids)
    k_modes, th_modes, kick = _coeffs(scheme, N, M)

    kvec = np.full(n, float(k_value))
    thvec = np.full(n, float(theta_value))
    pos = {loc_id: j for j, loc_id in enumerate(ids)}

    def loss_col(weights: dict[int, float]) -> np.ndarray:
        col = np.zeros(n)
        for loc_id, w in weights.items():
            col[pos[loc_id]] = w
        return col

    # loss-driven quantities (functions of the loss bitmask)
    kI = _subset_sums(loss_col({i: k_value for i in k_modes["I"]}))
    kA = _subset_sums(loss_col({i: k_value for i in k_modes["A"]}))
    kO = _subset_sums(loss_col({i: k_value for i in k_modes["O"]}))
    kick_I = _subset_sums(loss_col({i: c * k_value for i, c in kick["I"].items()}))
    kick_A = _subset_sums(loss_col({i: c * k_value for i, c in kick["A"].items()}))
    kick_O = _subset_sums(loss_col({i: c * k_value for i, c in kick["O"].items()}))
    r = _subset_sums(loss_col({i: k_value for i in ids if i != 0}))
    k0s = _subset_sums(loss_col({0: k_value}))
    budget_modes = ("I", "O") if scheme == HYBRID else ("I", "A", "O")
    th_s = _subset_sums(
        loss_col({0: sum(c for m in budget_modes for i, c in kick[m].items() if i == 0) * k_value})
    )
    th_r = _subset_sums(
        loss_col({i: sum(c for m in ("I", "A", "O") for j, c in kick[m].items() if j == i and i != 0) * k_value for i in ids if i != 0})
    )

    # phase-driven quantities (functions of the phase bitmask)
    thI = _subset_sums(loss_col({i: theta_value for i in th_modes["I"]}))
    thA = _subset_sums(loss_col({i: theta_value for i in th_modes["A"]}))
    thO = _subset_sums(loss_col({i: theta_value for i in th_modes["O"]}))
    th_f = _subset_sums(loss_col({i: theta_value for i in ids if i != 0}))
    th0 = _subset_sums(loss_col({0: theta_value}))

    if scheme == HYBRID:
        signal = np.array([kick["A"].get(0, 0.0)]) * k0s
        if M > 1:
            k_hat = np.round(k0s / M) % N
        else:
            k_hat = k0s % N
        corr = k_hat * math.pi / (N * N)
    else:
        signal = np.zeros_like(k0s)
        corr = np.zeros_like(k0s)

    # outer combination: axis 0 = loss mask, axis 1 = phase mask
    L = lambda a: a[:, None]
    P = lambda a: a[None, :]
    pi_n = math.pi / N

    hyp = (L(k0s + r) < N) & (np.abs(P(th0 + th_f) + L(th_s + th_r)) < pi_n)
    theta_I_tot = P(thI) + L(kick_I)
    theta_A_tot = P(thA) + L(kick_A)
    theta_O_corr = P(thO) + L(kick_O + corr)
    ok = np.abs(theta_I_tot) < pi_n
    if scheme == KNILL:
        ok &= np.abs(theta_A_tot) < math.pi / M
    else:
        ok &= np.abs(theta_A_tot - L(signal)) < pi_n
    ok &= L(kO) <= L(r)
    ok &= np.abs(theta_O_corr) <= np.abs(P(th_f) + L(th_r)) + 1e-12
    ok &= L(kO) < N
    ok &= np.abs(theta_O_corr) < pi_n

    violations = hyp & ~ok
    n_viol = int(violations.sum())
    example = None
    if n_viol:
        li, pi_ = np.argwhere(violations)[0]
        example = {
            "loss_mask": [ids[j] for j in range(n) if (int(li) >> j) & 1],
            "theta_mask": [ids[j] for j in range(n) if (int(pi_) >> j) & 1],
        }
    return {
        "scheme": scheme,
        "N": N,
        "M": M,
        "patterns": int(hyp.size),
        "hypothesis_count": int(hyp.sum()),
        "violations": n_viol,
        "example": example,
    }


def _loss_patterns(ids, weight):
    """All ways to distribute ``weight`` losses over the given locations."""
    for combo in itertools.combinations_with_replacement(ids, weight):
        counts = {}
        for loc in combo:
            counts[loc] = counts.get(loc, 0) + 1
        yield counts


def ancilla_order_audit(
    scheme: str,
    N: int,
    M_range,
    max_weight: int | None = None,
    ancilla_scan_weight: int = 6,
) -> list[dict]:
    """Minimal loss-only breaking weight per ancilla order.

    For each M, searches loss-only gadget fault patterns by increasing total
    weight for the smallest one the check flags, and separately scans
    ancilla-location-only patterns for the hybrid immunity claim.
    """
    table = location_table(scheme)
    gadget_ids = [i for i in table.ids() if i != 0]
    anc_ids = [loc.location_id for loc in table if loc.mode == "A" and loc.location_id != 0]
    out = []
    for M in M_range:
        cap = max_weight if max_weight is not None else N + 2
        breaking = None
        for w in range(1, cap + 1):
            for counts in _loss_patterns(gadget_ids, w):
                verdict = ecft_check(
                    scheme, N, M, pattern={i: (k, 0.0) for i, k in counts.items()}
                )
                if not verdict.satisfied:
                    breaking = {"weight": w, "pattern": counts, "reasons": verdict.reasons}
                    break
            if breaking:
                break
        anc_break = None
        for w in range(1, ancilla_scan_weight + 1):
            for counts in _loss_patterns(anc_ids, w):
                verdict = ecft_check(
                    scheme, N, M, pattern={i: (k, 0.0) for i, k in counts.items()}
                )
                if not verdict.satisfied:
                    anc_break = {"weight": w, "pattern": counts, "reasons": verdict.reasons}
                    break
            if anc_break:
                break
        out.append(
            {
                "M": M,
                "breaking": breaking,
                "breaking_weight": breaking["weight"] if breaking else None,
                "ancilla_only_breaking": anc_break,
                "ancilla_phase_budget": math.pi / M if scheme == KNILL else math.pi / N,
            }
        )
    return out
