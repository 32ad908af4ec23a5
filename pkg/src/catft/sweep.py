"""Parameter optimization of the infidelity ratio and break-even extraction.

The objective (R from a Monte-Carlo exRec) is noisy, so every candidate is
evaluated with common random numbers (one shared seed), which makes the
search deterministic and lets a downhill simplex refine a coarse grid
scan.  Break-even boundaries are found by bisecting the optimized R on a
logarithmic loss-strength axis.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from .exrec import ExRecConfig, run_and_report
from .gadgets import GadgetSpec
from .noise import NoiseStrength

__all__ = [
    "SearchSpace",
    "SweepPoint",
    "BreakevenPoint",
    "optimize_point",
    "breakeven_scan",
]


@dataclass(frozen=True)
class SearchSpace:
    """Bounds and switches for the adjustable gadget parameters.

    ``phi0`` bounds default to one measurement half-bin, [-pi/(2N), pi/(2N)].
    The squeezing parameter applies to both the data and ancilla codes when
    enabled; the wait multiplier is searched on a log scale when enabled.
    """

    alpha_in: tuple[float, float] = (1.5, 4.5)
    alpha_anc: tuple[float, float] = (1.5, 4.5)
    phi0_in: tuple[float, float] | None = None
    phi0_anc: tuple[float, float] | None = None
    squeeze_r: tuple[float, float] = (0.0, 1.5)
    wait_mult: tuple[float, float] = (1.0, 64.0)
    optimize_squeeze: bool = False
    optimize_wait: bool = False
    grid_points: int = 4
    fixed: tuple[tuple[str, float], ...] = ()

    def __post_init__(self):
        for name in ("alpha_in", "alpha_anc", "squeeze_r", "wait_mult"):
            lo, hi = getattr(self, name)
            if hi < lo:
                raise ValueError(f"{name} range is empty")
        if self.alpha_in[1] > 9.0 or self.alpha_anc[1] > 9.0:
            raise ValueError("amplitudes are capped at 9")
        if not (0.0 <= self.squeeze_r[0] and self.squeeze_r[1] <= 1.5):
            raise ValueError("squeeze_r range must sit inside [0, 1.5]")

    def phi0_bounds(self, N: int) -> tuple[float, float]:
        return (-math.pi / (2 * N), math.pi / (2 * N))

    def fixed_map(self) -> dict[str, float]:
        return dict(self.fixed)


@dataclass
class SweepPoint:
    """Best parameters found for one noise point, with the evaluation log."""

    gamma_loss: float
    gamma_ph: float
    best_ratio: float | None
    best_params: dict
    best_stderr: float
    shots: int
    seed: int
    budget_exhausted: bool
    evaluations: list[dict] = field(default_factory=list)


def _axes(space: SearchSpace, N: int) -> list[tuple[str, float, float, bool]]:
    """Active axes as (name, lo, hi, log_scale); fixed values are excluded."""
    phi_in = space.phi0_in or space.phi0_bounds(N)
    phi_anc = space.phi0_anc or space.phi0_bounds(N)
    axes = [
        ("alpha_in", *space.alpha_in, False),
        ("alpha_anc", *space.alpha_anc, False),
        ("phi0_in", *phi_in, False),
        ("phi0_anc", *phi_anc, False),
    ]
    if space.optimize_squeeze:
        axes.append(("squeeze_r", *space.squeeze_r, False))
    if space.optimize_wait:
        axes.append(("wait_mult", *space.wait_mult, True))
    fixed = space.fixed_map()
    return [ax for ax in axes if ax[0] not in fixed]


def _build_config(
    params: dict,
    noise_point: tuple[float, float],
    scheme: str,
    N: int,
    M: int | None,
    shots: int,
    seed: int,
) -> ExRecConfig:
    gadget = GadgetSpec(
        scheme=scheme,
        N=N,
        M=M,
        alpha_in=params["alpha_in"],
        alpha_anc=params["alpha_anc"],
        squeeze_r_in=params.get("squeeze_r", 0.0),
        squeeze_r_anc=params.get("squeeze_r", 0.0),
        phi0_in=params.get("phi0_in", 0.0),
        phi0_anc=params.get("phi0_anc", 0.0),
    )
    return ExRecConfig(
        gadget=gadget,
        op_noise=NoiseStrength(*noise_point),
        wait_mult=params.get("wait_mult", 1.0),
        shots=shots,
        seed=seed,
    )


def optimize_point(
    noise_point: tuple[float, float],
    scheme: str,
    N: int,
    space: SearchSpace,
    budget: int = 60,
    shots: int = 2000,
    seed: int = 0,
    M: int | None = None,
    final_shots: int | None = None,
) -> SweepPoint:
    """Coarse grid scan plus simplex refinement of R at one noise point.

    All evaluations share ``seed`` (common random numbers).  ``budget`` caps
    the number of exRec evaluations; if it runs out the best point so far is
    returned with ``budget_exhausted`` set.  ``final_shots`` re-evaluates the
    winner at higher precision.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    axes = _axes(space, N)
    fixed = space.fixed_map()
    evaluations: list[dict] = []
    cache: dict[tuple, tuple[float, float]] = {}
    used = 0

    def params_from_x(x: np.ndarray) -> dict:
        params = dict(fixed)
        for (name, lo, hi, logscale), xi in zip(axes, x):
            v = float(np.clip(xi, 0.0, 1.0))
            params[name] = 10 ** (math.log10(lo) + v * (math.log10(hi) - math.log10(lo))) if logscale else lo + v * (hi - lo)
        params.setdefault("alpha_in", space.alpha_in[0])
        params.setdefault("alpha_anc", space.alpha_anc[0])
        return params

    def objective(x: np.ndarray) -> float:
        nonlocal used
        key = tuple(np.round(np.clip(x, 0.0, 1.0), 10))
        if key in cache:
            return cache[key][0]
        if used >= budget:
            return float("inf")
        used += 1
        params = params_from_x(np.asarray(x))
        cfg = _build_config(params, noise_point, scheme, N, M, shots, seed)
        rep = run_and_report(cfg)
        ratio = rep.ratio if rep.ratio is not None else 0.0
        cache[key] = (ratio, rep.standard_error)
        evaluations.append({"params": params, "ratio": ratio, "stderr": rep.standard_error})
        return ratio

    if benchmark_is_zero(noise_point):
        return SweepPoint(
            gamma_loss=noise_point[0],
            gamma_ph=noise_point[1],
            best_ratio=None,
            best_params=dict(fixed),
            best_stderr=0.0,
            shots=shots,
            seed=seed,
            budget_exhausted=False,
            evaluations=[],
        )

    n_axes = len(axes)
    grid_budget = max(1, int(budget * 0.6))
    g = min(space.grid_points, max(2, int(grid_budget ** (1.0 / max(n_axes, 1)))))
    grid_levels = np.linspace(0.15, 0.85, g) if n_axes else []
    best_x, best_val = None, float("inf")
    for combo in itertools.product(grid_levels, repeat=n_axes):
        if used >= grid_budget:
            break
        val = objective(np.asarray(combo))
        if val < best_val:
            best_val, best_x = val, np.asarray(combo)
    if best_x is None:
        best_x = np.full(n_axes, 0.5)
        best_val = objective(best_x)

    refine_converged = True
    if n_axes and used < budget:
        step = max(0.5 / max(g, 2), 0.1)
        res = minimize(
            objective,
            best_x,
            method="Nelder-Mead",
            bounds=[(0.0, 1.0)] * n_axes,
            options={
                "maxfev": max(budget - used, 1),
                "xatol": 0.01,
                "fatol": 1e-4,
                "initial_simplex": _initial_simplex(best_x, step),
            },
        )
        refine_converged = bool(res.success)
        if res.fun < best_val:
            best_val, best_x = float(res.fun), np.asarray(res.x)

    best_params = params_from_x(best_x)
    best_stderr = min(
        (e["stderr"] for e in evaluations if e["ratio"] == best_val),
        default=0.0,
    )
    if final_shots and final_shots > shots:
        cfg = _build_config(best_params, noise_point, scheme, N, M, final_shots, seed)
        rep = run_and_report(cfg)
        best_val = rep.ratio if rep.ratio is not None else 0.0
        best_stderr = rep.standard_error
    return SweepPoint(
        gamma_loss=noise_point[0],
        gamma_ph=noise_point[1],
        best_ratio=best_val,
        best_params=best_params,
        best_stderr=best_stderr,
        shots=final_shots or shots,
        seed=seed,
        budget_exhausted=used >= budget or not refine_converged,
        evaluations=evaluations,
    )


def benchmark_is_zero(noise_point: tuple[float, float]) -> bool:
    return noise_point[0] == 0.0 and noise_point[1] == 0.0


def _initial_simplex(x0: np.ndarray, step: float) -> np.ndarray:
    n = len(x0)
    simplex = np.tile(x0, (n + 1, 1))
    for i in range(n):
        simplex[i + 1, i] = np.clip(x0[i] + (step if x0[i] < 0.5 else -step), 0.0, 1.0)
    return simplex


@dataclass
class BreakevenPoint:
    """Break-even loss strength for one dephasing strength."""

    gamma_ph: float
    gamma_loss_star: float | None
    bracket: tuple[float, float]
    ratio_at_star: float | None
    stderr_at_star: float
    out_of_range: bool
    best_params: dict


def breakeven_scan(
    scheme: str,
    N: int,
    gamma_ph_list,
    space: SearchSpace,
    budget: int = 60,
    shots: int = 2000,
    seed: int = 0,
    M: int | None = None,
    gamma_loss_bracket: tuple[float, float] = (3e-5, 3e-2),
    ratio_tol: float = 0.1,
    bracket_factor: float = 1.3,
) -> list[BreakevenPoint]:
    """Bisect log gamma_loss for R = 1 at each dephasing strength.

    Stops when |R - 1| < ratio_tol or the bracket shrinks below
    ``bracket_factor``; reports an out-of-range marker when R - 1 does not
    change sign across the initial bracket.
    """
    out = []
    for gph in gamma_ph_list:
        lo, hi = gamma_loss_bracket

        def ratio_at(gl: float) -> SweepPoint:
            return optimize_point(
                (gl, gph), scheme, N, space, budget=budget, shots=shots, seed=seed, M=M
            )

        p_lo, p_hi = ratio_at(lo), ratio_at(hi)
        r_lo = p_lo.best_ratio if p_lo.best_ratio is not None else 0.0
        r_hi = p_hi.best_ratio if p_hi.best_ratio is not None else 0.0
        if (r_lo - 1.0) * (r_hi - 1.0) > 0:
            out.append(
                BreakevenPoint(
                    gamma_ph=gph,
                    gamma_loss_star=None,
                    bracket=(lo, hi),
                    ratio_at_star=None,
                    stderr_at_star=0.0,
                    out_of_range=True,
                    best_params={},
                )
            )
            continue
        best = p_lo if abs(r_lo - 1) < abs(r_hi - 1) else p_hi
        best_r = r_lo if best is p_lo else r_hi
        while hi / lo > bracket_factor:
            mid = math.sqrt(lo * hi)
            p_mid = ratio_at(mid)
            r_mid = p_mid.best_ratio if p_mid.best_ratio is not None else 0.0
            if abs(r_mid - 1.0) < abs(best_r - 1.0):
                best, best_r = p_mid, r_mid
            if abs(r_mid - 1.0) < ratio_tol:
                lo = hi = mid
                break
            if (r_lo - 1.0) * (r_mid - 1.0) <= 0:
                hi, r_hi = mid, r_mid
            else:
                lo, r_lo = mid, r_mid
        star = math.sqrt(lo * hi) if lo != hi else lo
        out.append(
            BreakevenPoint(
                gamma_ph=gph,
                gamma_loss_star=star,
                bracket=(lo, hi),
                ratio_at_star=best_r,
                stderr_at_star=best.best_stderr,
                out_of_range=False,
                best_params=best.best_params,
            )
        )
    return out
