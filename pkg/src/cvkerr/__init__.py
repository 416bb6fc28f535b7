"""Simulator for measurement-induced Kerr interactions.

Gate decompositions of the Kerr evolution into cubic and quartic phase
gates, truncated-Fock and position-grid numerics, ancilla construction and
the gate-teleportation protocol.
"""

from .errors import (AliasingError, BranchCutError, CvKerrError, DomainError, InvalidArgument,
                     MemoryGuardError, NumericalFailure, PostselectFailure, TruncationError)
from .states import FockState, GridSpec, GridState, fidelity_error
from .sequence import (CompositionScheme, GateSequence, GateTerm, apply_sequence,
                       compile_sequence, kerr_first_order, kerr_separated, q2_family,
                       repeat_scheme, third_order)
from .ancilla import AncillaSpec, make_ancilla, photon_subtracted_ancilla, solve_displacement_roots
from .teleport import (ProtocolConfig, ProtocolTranscript, correction_sequence, fourier_modify,
                       homodyne_sample, run_protocol, teleport_step)

__version__ = "0.1.0"

__all__ = [
    "AliasingError", "BranchCutError", "CvKerrError", "DomainError", "InvalidArgument",
    "MemoryGuardError", "NumericalFailure", "PostselectFailure", "TruncationError",
    "FockState", "GridSpec", "GridState", "fidelity_error",
    "CompositionScheme", "GateSequence", "GateTerm", "apply_sequence", "compile_sequence",
    "kerr_first_order", "kerr_separated", "q2_family", "repeat_scheme", "third_order",
    "AncillaSpec", "make_ancilla", "photon_subtracted_ancilla", "solve_displacement_roots",
    "ProtocolConfig", "ProtocolTranscript", "correction_sequence", "fourier_modify",
    "homodyne_sample", "run_protocol", "teleport_step",
]
