"""Circuit-level cat-code error-correction simulator.

Subpackage map:

* ``fock`` — truncated Fock-space states/operators and structured applications
* ``codes`` — (squeezed-)cat codewords, logical operators, correctability
* ``noise`` — loss/dephasing channels and their trajectory unravellings
* ``phase_meas`` — canonical and discrete phase measurements
* ``gadgets`` — the two teleportation-based error-correction circuits
* ``ftcheck`` — symbolic fault propagation and the formal tolerance property
* ``exrec`` — extended-rectangle Monte Carlo, recovery decode, infidelity ratio
* ``sweep`` — parameter optimization and break-even boundary scans
* ``cli`` — command-line interface
"""

from .codes import CodeSpec, Codewords, KLReport
from .errors import (
    CatftError,
    ConfigError,
    DecodeDegenerateError,
    DegenerateCodeError,
    InvalidDimensionError,
    InvalidStateError,
    TruncationError,
)
from .fock import FockOperator, FockVector, TruncationPolicy
from .gadgets import GadgetRunResult, GadgetSpec, Location, LocationTable
from .noise import FaultRecord, NoiseStrength

__all__ = [
    "CatftError",
    "CodeSpec",
    "Codewords",
    "ConfigError",
    "DecodeDegenerateError",
    "DegenerateCodeError",
    "FaultRecord",
    "FockOperator",
    "FockVector",
    "GadgetRunResult",
    "GadgetSpec",
    "InvalidDimensionError",
    "InvalidStateError",
    "KLReport",
    "Location",
    "LocationTable",
    "NoiseStrength",
    "TruncationPolicy",
]

__version__ = "0.1.0"
