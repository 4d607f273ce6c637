"""Generalized Byzantine quorum systems and HotStuff consensus on top of them.

The package has three layers:

* encodings of a quorum system — monotone Boolean formulas (``formula``),
  monotone span programs over GF(p) (``msp``, ``field_linalg``), and the
  generators for named families (``constructions``);
* a JSON specification format for trust assumptions (``config``);
* HotStuff replica state machines parameterized by a quorum checker
  (``hotstuff``) plus a deterministic network simulator with fault
  injection and safety/liveness trace checking (``simulate``).

``cli`` exposes all of it as the ``gbqs`` command.
"""

from gbqs.field_linalg import PRIME
from gbqs.formula import (
    And,
    FailProneSystem,
    Literal,
    Or,
    QuorumSystem,
    Threshold,
    canonical_bqs,
    enumerate_minimal_quorums,
    evaluate,
    q3_holds,
    verify_bqs,
)
from gbqs.msp import Msp, accepts, build_msp, insert, predicted_dims, vandermonde_msp

__all__ = [
    "PRIME",
    "And",
    "FailProneSystem",
    "Literal",
    "Or",
    "QuorumSystem",
    "Threshold",
    "canonical_bqs",
    "enumerate_minimal_quorums",
    "evaluate",
    "q3_holds",
    "verify_bqs",
    "Msp",
    "accepts",
    "build_msp",
    "insert",
    "predicted_dims",
    "vandermonde_msp",
]
