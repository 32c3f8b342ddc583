"""Controlled teleportation over a GHZ state: simulation and verification."""

from ._ghztp import (
    BellOutcome,
    BranchReport,
    CharlieOutcome,
    ComparisonReport,
    ConnectionError,
    DomainError,
    ImpossibleOutcomeError,
    ProtocolOrderError,
    ProtocolResult,
    SecurityReport,
    SignalState,
    SweepSummary,
    ValidationError,
    bob_view_before_charlie,
    charlie_view_before_cooperation,
    enumerate_branches,
    orchestrate,
    prepare_ghz,
    run_protocol,
    security_sweep,
)

__all__ = [name for name in dir() if not name.startswith("_")]
