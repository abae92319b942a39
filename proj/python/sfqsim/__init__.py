"""SFQ NDRO / M-NDRO memory simulation toolkit."""

from ._sfqsim import (
    FLUX_QUANTUM,
    CompositionError,
    ConvergenceError,
    ElaborationError,
    FormatError,
    MarginError,
    ParseError,
    ScheduleError,
    StructuralError,
    behavioral_margins,
    check_trace,
    feedback_path,
    lint,
    margin_sweep,
    normalize_netlist,
    parse_value,
    run_oracle,
    run_transient,
    simulate,
    storage_capacity,
)

__all__ = [
    "FLUX_QUANTUM",
    "CompositionError",
    "ConvergenceError",
    "ElaborationError",
    "FormatError",
    "MarginError",
    "ParseError",
    "ScheduleError",
    "StructuralError",
    "behavioral_margins",
    "check_trace",
    "feedback_path",
    "lint",
    "margin_sweep",
    "normalize_netlist",
    "parse_value",
    "run_oracle",
    "run_transient",
    "simulate",
    "storage_capacity",
]
