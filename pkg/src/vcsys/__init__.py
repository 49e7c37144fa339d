"""Modeling kit for hierarchical systems of value chains.

Build a nested description of chain actors and their connections (in code
or in the ``.vcs`` text format), validate it, flatten it to an
atomic-level graph, run deterministic flow dynamics over it with a
replayable history, and compute structural diagnostics: linkage classes,
source-to-end-market brokerage, reachability, weak and missing links.
"""

from .analysis import (
    GovernanceScore,
    LinkageClass,
    MissingTier,
    WeakLink,
    WeakLinkageReport,
    classify_linkages,
    end_market_reachability,
    governance_centrality,
    value_added_profile,
    weak_linkage_report,
)
from .export import export_dot, export_json, flat_graph_json
from .flatten import FlatEdge, FlatGraph, FlatNode, SpliceError, flatten
from .model import (
    DEFAULT_MAX_DEPTH,
    Atomic,
    BoundarySpec,
    ComponentDecl,
    DepthExceeded,
    Edge,
    EdgeKnowledge,
    EntityNode,
    EnvNode,
    FlowRule,
    HistoryPolicy,
    InterfaceGraph,
    InternalGraph,
    PathHitsAtomic,
    PathNotFound,
    Role,
    Scope,
    SinkNode,
    SourceNode,
    SystemSpec,
    ValidationReport,
    VcsysError,
    Violation,
    depth,
    make_system,
    subsystem_at,
    validate,
)
from .sdl import Diagnostic, SdlDocument, parse, print_spec
from .sim import (
    ConservationEntry,
    ConservationReport,
    HashMismatch,
    HistoryLog,
    InconsistentState,
    LogHeader,
    NegativeStock,
    NullHistory,
    SimulationState,
    TransitionRecord,
    conservation_check,
    init_state,
    model_hash,
    read_log,
    replay,
    run,
    step,
    write_log,
)

__version__ = "0.1.0"

__all__ = [
    "Atomic",
    "BoundarySpec",
    "ComponentDecl",
    "ConservationEntry",
    "ConservationReport",
    "DEFAULT_MAX_DEPTH",
    "DepthExceeded",
    "Diagnostic",
    "Edge",
    "EdgeKnowledge",
    "EntityNode",
    "EnvNode",
    "FlatEdge",
    "FlatGraph",
    "FlatNode",
    "FlowRule",
    "GovernanceScore",
    "HashMismatch",
    "HistoryLog",
    "HistoryPolicy",
    "InconsistentState",
    "InterfaceGraph",
    "InternalGraph",
    "LinkageClass",
    "LogHeader",
    "MissingTier",
    "NegativeStock",
    "NullHistory",
    "PathHitsAtomic",
    "PathNotFound",
    "Role",
    "Scope",
    "SdlDocument",
    "SimulationState",
    "SinkNode",
    "SourceNode",
    "SpliceError",
    "SystemSpec",
    "TransitionRecord",
    "ValidationReport",
    "VcsysError",
    "Violation",
    "WeakLink",
    "WeakLinkageReport",
    "classify_linkages",
    "conservation_check",
    "depth",
    "end_market_reachability",
    "export_dot",
    "export_json",
    "flat_graph_json",
    "flatten",
    "governance_centrality",
    "init_state",
    "make_system",
    "model_hash",
    "parse",
    "print_spec",
    "read_log",
    "replay",
    "run",
    "step",
    "subsystem_at",
    "validate",
    "value_added_profile",
    "weak_linkage_report",
    "write_log",
]
