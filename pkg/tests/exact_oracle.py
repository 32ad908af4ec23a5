"""Exact density-matrix composition of the hybrid exRec at small dimension.

Independent cross-check for the Monte-Carlo trajectory pipeline: every
location noise is applied as an exact Kraus-summed channel, measurements
become sums over binned POVM branches, and the frame/correction logic is
replayed per branch.  Feasible only for small truncations, which is exactly
where it is used.
"""

import math

import numpy as np

from catft import codes
from catft.exrec import ExRecConfig
from catft.noise import NoiseStrength, loss_kraus
from catft.phase_meas import DPMeasSpec, dp_povm_element


def _apply_left(rho, op, axis):
    t = np.tensordot(op, rho, axes=(1, axis))
    return np.moveaxis(t, 0, axis)


def _kraus_channel(rho, kraus, axis, n_axes):
    out = np.zeros_like(rho)
    for k in kraus:
        t = _apply_left(rho, k, axis)
        t = _apply_left(t, k.conj(), n_axes + axis)
        out += t
    return out


def _dephase(rho, gamma, axis, n_axes):
    if gamma == 0.0:
        return rho
    d = rho.shape[axis]
    n = np.arange(d)
    damp = np.exp(-0.5 * gamma * (n[:, None] - n[None, :]) ** 2)
    shape = [1] * rho.ndim
    shape[axis] = d
    shape[n_axes + axis] = d
    return rho * damp.reshape(shape)


def _location_noise(rho, strength: NoiseStrength, axis, n_axes):
    if strength.gamma_loss:
        d = rho.shape[axis]
        kraus = [loss_kraus(strength.gamma_loss, k, d).entries for k in range(d)]
        rho = _kraus_channel(rho, kraus, axis, n_axes)
    return _dephase(rho, strength.gamma_ph, axis, n_axes)


def _rotate(rho, theta, axis, n_axes):
    d = rho.shape[axis]
    ph = np.exp(1j * theta * np.arange(d))
    shape = [1] * rho.ndim
    shape[axis] = d
    rho = rho * ph.reshape(shape)
    shape = [1] * rho.ndim
    shape[n_axes + axis] = d
    return rho * ph.conj().reshape(shape)


def _crot(rho, phi, axis_a, axis_b, n_axes):
    da, db = rho.shape[axis_a], rho.shape[axis_b]
    grid = np.exp(1j * phi * np.outer(np.arange(da), np.arange(db)))
    shape = [1] * rho.ndim
    shape[axis_a], shape[axis_b] = da, db
    rho = rho * (grid if axis_a < axis_b else grid.T).reshape(shape)
    shape = [1] * rho.ndim
    shape[n_axes + axis_a], shape[n_axes + axis_b] = da, db
    return rho * (grid.conj() if axis_a < axis_b else grid.conj().T).reshape(shape)


def _attach(rho, vec, n_axes):
    vv = np.outer(vec, vec.conj())
    out = np.multiply.outer(rho, vv)
    return np.moveaxis(out, 2 * n_axes, n_axes)


def _measure_binned(rho, axis, n_axes, povm_elements):
    """Contract the measured mode against each element; yields branch matrices."""
    for el in povm_elements:
        yield np.tensordot(rho, el, axes=([axis, n_axes + axis], [1, 0]))


def _frame_resolve(rho, frame, n_axes):
    finv = np.linalg.inv(frame.T)
    rho = _apply_left(rho, finv, 0)
    return _apply_left(rho, finv.conj(), n_axes)


def exact_hybrid_exrec_choi(config: ExRecConfig) -> np.ndarray:
    """Exact Choi matrix of the hybrid exRec (reference (x) output)."""
    gadget = config.gadget
    assert gadget.scheme == "hybrid"
    cw_in = codes.codewords(gadget.input_code())
    d = cw_in.dim
    phi = np.zeros((2, d), dtype=complex)
    phi[0] = cw_in.ket0.amps
    phi[1] = cw_in.ket1.amps
    phi /= math.sqrt(2)
    rho = np.einsum("im,jn->imjn", phi, phi.conj())

    rho = _exact_hybrid_gadget(rho, config.gadget, config.op_noise)
    wait = config.wait_noise()
    if not wait.is_zero:
        rho = _location_noise(rho, wait, 1, 2)
    rho = _exact_hybrid_gadget(rho, config.gadget, config.op_noise)
    return rho.reshape(2 * d, 2 * d)


def _exact_hybrid_gadget(rho, gadget, op: NoiseStrength):
    """One exact hybrid gadget on rho over (ref, I); returns (ref, O) rho."""
    from catft.gadgets import HADAMARD, PAULI_X, hybrid_dp_decode

    n = gadget.N
    m = gadget.ancilla_order
    cw_in = codes.codewords(gadget.input_code())
    cw_anc = codes.codewords(gadget.ancilla_code())
    d, da = cw_in.dim, cw_anc.dim

    rho = _attach(rho, cw_anc.ket_plus.amps, 2)          # (ref, I, A)
    rho = _location_noise(rho, op, 2, 3)                 # prep A
    rho = _crot(rho, 2 * math.pi / (n * m), 2, 1, 3)     # CROT(A, I)
    rho = _location_noise(rho, op, 2, 3)                 # gate side A
    rho = _location_noise(rho, op, 1, 3)                 # gate side I
    rho = _location_noise(rho, op, 2, 3)                 # meas fault A
    dp = DPMeasSpec(K=n, phi0=gadget.phi0_anc, dim=da)
    anc_els = [dp_povm_element(dp, b).entries for b in range(n)]

    out_branches = []
    for b, rho_b in enumerate(_measure_binned(rho, 2, 3, anc_els)):
        k_hat, corr = hybrid_dp_decode(b, n, m)
        rho_b = _attach(rho_b, cw_in.ket_plus.amps, 2)   # (ref, I, O)
        rho_b = _location_noise(rho_b, op, 2, 3)         # prep O
        rho_b = _crot(rho_b, math.pi / (n * n), 1, 2, 3)  # CZ(I, O)
        rho_b = _location_noise(rho_b, op, 1, 3)         # gate side I
        rho_b = _location_noise(rho_b, op, 2, 3)         # gate side O
        rho_b = _location_noise(rho_b, op, 1, 3)         # meas fault I
        xb = DPMeasSpec(K=2 * n, phi0=gadget.phi0_in, dim=d)
        parity_els = [
            sum(dp_povm_element(xb, bb).entries for bb in range(2 * n) if bb % 2 == x)
            for x in (0, 1)
        ]
        for x2, rho_bx in enumerate(_measure_binned(rho_b, 1, 3, parity_els)):
            rho_bx = _location_noise(rho_bx, op, 1, 2)   # wait O
            if corr:
                rho_bx = _rotate(rho_bx, corr, 1, 2)
            frame = np.linalg.matrix_power(PAULI_X, x2) @ HADAMARD
            out_branches.append(_frame_resolve(rho_bx, frame, 2))
    return sum(out_branches)
