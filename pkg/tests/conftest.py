import math

import numpy as np
import pytest

from catft import codes
from catft.gadgets import GadgetSpec


def phi_state(gadget: GadgetSpec) -> np.ndarray:
    """(|0>|0_bar> + |1>|1_bar>)/sqrt(2) as a (2, dim) array."""
    cw = codes.codewords(gadget.input_code())
    arr = np.zeros((2, cw.dim), dtype=complex)
    arr[0] = cw.ket0.amps
    arr[1] = cw.ket1.amps
    return arr / math.sqrt(2)


def resolve_frame(arr: np.ndarray, frame: np.ndarray) -> np.ndarray:
    """Undo a logical frame on the reference factor of an entangled pair."""
    finv = np.linalg.inv(frame.T)
    return np.tensordot(finv, arr, axes=(1, 0))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
