"""Classical correlation polytopes and hidden-variable models for EPR data."""

__version__ = "0.1.0"

from .correlation import (
    CorrelationVector,
    Event,
    EventSpace,
    PairSet,
    ValidationReport,
    VectorFormatError,
    bell_restriction,
    conditionalize,
    flatten,
    restrict,
    validate,
)
from .polytope import (
    Certificate,
    ChInequality,
    HiddenVariableModel,
    MembershipReport,
    ch_inequalities,
    enumerate_vertices,
    evaluate_ch,
    membership,
    mixture_project,
    verify_certificate,
)
from .quantum import EprScenario, JointLaw, QuantumSetup, build_epr_vector, joint_probability, single_outcome_trace, trace_oracle
from .simulator import EmpiricalSummary, TrialRecord, compare, sample, simulate, summarize

__all__ = [
    "Certificate",
    "ChInequality",
    "CorrelationVector",
    "EmpiricalSummary",
    "EprScenario",
    "Event",
    "EventSpace",
    "HiddenVariableModel",
    "JointLaw",
    "MembershipReport",
    "PairSet",
    "QuantumSetup",
    "TrialRecord",
    "ValidationReport",
    "VectorFormatError",
    "bell_restriction",
    "build_epr_vector",
    "ch_inequalities",
    "compare",
    "conditionalize",
    "enumerate_vertices",
    "evaluate_ch",
    "flatten",
    "joint_probability",
    "membership",
    "mixture_project",
    "restrict",
    "sample",
    "simulate",
    "single_outcome_trace",
    "summarize",
    "trace_oracle",
    "validate",
    "verify_certificate",
]
