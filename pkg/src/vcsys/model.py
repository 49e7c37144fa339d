"""Core data model for hierarchical value-chain systems.

A system description bundles six things: the multiset of components, the
internal connection network, the interface to the surrounding environment,
the boundary conditions that keep the system's identity, per-connection
flow attributes (what the system knows about its own interactions), and a
history policy saying whether simulation runs keep a transition record.

Descriptions nest. A component is either atomic (a chain actor with a role
and a tier position) or a whole subsystem one level further down, and the
nesting bottoms out where every component is atomic. ``validate`` checks
every structural rule and reports violations as data rather than raising;
``depth`` and ``subsystem_at`` navigate the component tree. Expansion into
a runnable graph lives in :mod:`vcsys.flatten`.

Everything here is immutable after construction; constructors normalize
ordering (components, edges and environment nodes sort by id) so that
structurally equal descriptions compare equal regardless of declaration
order, and so that downstream output is deterministic.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

DEFAULT_MAX_DEPTH = 8


class VcsysError(Exception):
    """Base class for all errors raised by this package."""


class DepthExceeded(VcsysError):
    """Component nesting goes past the configured maximum depth."""


class PathNotFound(VcsysError):
    """A component path names a type that is not declared."""


class PathHitsAtomic(VcsysError):
    """A component path descends into an atomic component."""


class Role(enum.Enum):
    """Position a chain actor occupies in the value chain."""

    INPUT_SUPPLIER = "input_supplier"
    PRODUCER = "producer"
    PROCESSOR_TRADER = "processor_trader"
    BUYER = "buyer"
    EXPORTER = "exporter"
    SUPPORT_SERVICE = "support_service"
    BEE_FACTOR = "bee_factor"


class Scope(enum.Enum):
    """Geographic reach of an end market."""

    LOCAL = "local"
    NATIONAL = "national"
    REGIONAL = "regional"
    GLOBAL = "global"


class HistoryPolicy(enum.Enum):
    """Whether simulation runs keep a record of state transitions."""

    RECORD = "record"
    NULL = "null"


class FlowRule(enum.Enum):
    """Kind of state-transition rule attached to a connection.

    Only capacity-limited throughput exists today; the enum leaves room
    for other rule kinds without changing the wire formats.
    """

    THROUGHPUT = "throughput"


@dataclass(frozen=True)
class Atomic:
    """Body of a component that needs no further decomposition."""

    role: Role
    tier: int


@dataclass(frozen=True)
class Edge:
    """One connection: ``tail -> head``.

    Endpoints are references, not objects: a component type id, an
    environment node id, or a dotted ``subsystem.port`` pair addressing an
    exported port of a nested subsystem.
    """

    id: str
    tail: str
    head: str
    directed: bool = True


@dataclass(frozen=True)
class EdgeKnowledge:
    """Flow attributes of one edge: what moves, how much, how strongly."""

    capacity: float
    substance: str
    strength: float = 1.0
    rule: FlowRule = FlowRule.THROUGHPUT

    def __post_init__(self) -> None:
        object.__setattr__(self, "capacity", float(self.capacity))
        object.__setattr__(self, "strength", float(self.strength))


@dataclass(frozen=True)
class SourceNode:
    """Environment node that offers a substance at a fixed rate per tick."""

    id: str
    rate: float
    substance: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "rate", float(self.rate))


@dataclass(frozen=True)
class SinkNode:
    """Environment node where a substance leaves the system: an end market."""

    id: str
    scope: Scope


@dataclass(frozen=True)
class EntityNode:
    """Environment node with no flow semantics.

    Doubles as an exported port when declared by a nested subsystem: parent
    edges attach to it via dotted ``subsystem.port`` references and the
    flattener splices the connection through.
    """

    id: str


EnvNode = Union[SourceNode, SinkNode, EntityNode]


def split_endpoint(ref: str) -> tuple[str, str | None]:
    """Split an edge endpoint into (base id, port or None)."""
    base, dot, port = ref.partition(".")
    return (base, port) if dot else (ref, None)


def _sorted_edges(edges: Iterable[Edge]) -> tuple[Edge, ...]:
    return tuple(sorted(edges, key=lambda e: e.id))


@dataclass(frozen=True)
class InternalGraph:
    """Connections among components at one level."""

    nodes: frozenset[str] = frozenset()
    edges: tuple[Edge, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", frozenset(self.nodes))
        object.__setattr__(self, "edges", _sorted_edges(self.edges))


@dataclass(frozen=True)
class InterfaceGraph:
    """Connections between components and the environment at one level."""

    env_nodes: tuple[EnvNode, ...] = ()
    edges: tuple[Edge, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "env_nodes", tuple(sorted(self.env_nodes, key=lambda n: n.id))
        )
        object.__setattr__(self, "edges", _sorted_edges(self.edges))

    def env_ids(self) -> frozenset[str]:
        return frozenset(n.id for n in self.env_nodes)


@dataclass(frozen=True)
class BoundarySpec:
    """Conditions that keep the system's identity during a run.

    ``allowed_substances`` and ``permitted_env_ids`` use ``None`` to mean
    unrestricted; an explicit empty set means "nothing is allowed".
    """

    allowed_substances: frozenset[str] | None = None
    conserved_substances: frozenset[str] = frozenset()
    frozen_component_types: bool = True
    permitted_env_ids: frozenset[str] | None = None

    def __post_init__(self) -> None:
        if self.allowed_substances is not None:
            object.__setattr__(
                self, "allowed_substances", frozenset(self.allowed_substances)
            )
        object.__setattr__(
            self, "conserved_substances", frozenset(self.conserved_substances)
        )
        if self.permitted_env_ids is not None:
            object.__setattr__(
                self, "permitted_env_ids", frozenset(self.permitted_env_ids)
            )

    def allows(self, substance: str) -> bool:
        return self.allowed_substances is None or substance in self.allowed_substances

    def permits_env(self, env_id: str) -> bool:
        return self.permitted_env_ids is None or env_id in self.permitted_env_ids


@dataclass(frozen=True)
class ComponentDecl:
    """One declared component: a type, how many of it, and its body.

    ``variations`` optionally partitions the multiplicity into labeled
    sub-populations; counts must sum to the multiplicity. An empty tuple
    means a single unlabeled variation covering every copy.
    """

    type_id: str
    body: Union[Atomic, "SystemSpec"]
    multiplicity: int = 1
    variations: tuple[tuple[str, int], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "variations", tuple(sorted(self.variations, key=lambda v: v[0]))
        )

    @property
    def is_atomic(self) -> bool:
        return isinstance(self.body, Atomic)


@dataclass(frozen=True)
class SystemSpec:
    """A complete system description at one nesting level."""

    id: str
    level: int = 0
    components: tuple[ComponentDecl, ...] = ()
    network: InternalGraph = InternalGraph()
    interface: InterfaceGraph = InterfaceGraph()
    boundary: BoundarySpec = BoundarySpec()
    knowledge: tuple[tuple[str, EdgeKnowledge], ...] = ()
    history_policy: HistoryPolicy = HistoryPolicy.RECORD

    def __post_init__(self) -> None:
        object.__setattr__(
            self,
            "components",
            tuple(sorted(self.components, key=lambda c: c.type_id)),
        )
        knowledge = self.knowledge
        if isinstance(knowledge, Mapping):
            knowledge = tuple(knowledge.items())
        object.__setattr__(
            self, "knowledge", tuple(sorted(knowledge, key=lambda kv: kv[0]))
        )

    def component(self, type_id: str) -> ComponentDecl | None:
        for comp in self.components:
            if comp.type_id == type_id:
                return comp
        return None

    def knowledge_map(self) -> dict[str, EdgeKnowledge]:
        return dict(self.knowledge)

    def all_edges(self) -> tuple[Edge, ...]:
        """Network and interface edges together, sorted by id."""
        return _sorted_edges(self.network.edges + self.interface.edges)


def make_system(
    id: str,
    *,
    level: int = 0,
    components: Iterable[ComponentDecl] = (),
    edges: Iterable[tuple[Edge, EdgeKnowledge]] = (),
    env: Iterable[EnvNode] = (),
    boundary: BoundarySpec = BoundarySpec(),
    history: HistoryPolicy = HistoryPolicy.RECORD,
) -> SystemSpec:
    """Assemble a SystemSpec from flat parts.

    Splits the given edges into the internal network and the environment
    interface by looking at their endpoints, and fills the network's node
    set with every declared component type. This is the convenient way to
    build descriptions in code; the dataclass constructors stay available
    for exotic cases.
    """
    components = tuple(components)
    env = tuple(env)
    env_ids = {n.id for n in env}
    internal: list[Edge] = []
    boundary_edges: list[Edge] = []
    knowledge: list[tuple[str, EdgeKnowledge]] = []
    for edge, know in edges:
        tail_base, _ = split_endpoint(edge.tail)
        head_base, _ = split_endpoint(edge.head)
        if tail_base in env_ids or head_base in env_ids:
            boundary_edges.append(edge)
        else:
            internal.append(edge)
        knowledge.append((edge.id, know))
    return SystemSpec(
        id=id,
        level=level,
        components=components,
        network=InternalGraph(
            nodes=frozenset(c.type_id for c in components), edges=tuple(internal)
        ),
        interface=InterfaceGraph(env_nodes=env, edges=tuple(boundary_edges)),
        boundary=boundary,
        knowledge=tuple(knowledge),
        history_policy=history,
    )


@dataclass(frozen=True)
class Violation:
    """One structural rule broken, located by a slash path into the tree."""

    path: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def __iter__(self):
        return iter(self.violations)

    def __len__(self) -> int:
        return len(self.violations)


def _is_quantity(value: float) -> bool:
    return isinstance(value, (int, float)) and math.isfinite(value) and value >= 0


def validate(spec: SystemSpec, max_depth: int = DEFAULT_MAX_DEPTH) -> ValidationReport:
    """Check every structural rule of a system description.

    Violations come back as data with tree paths; an empty report means the
    description is well-formed: all nesting, graph, boundary and knowledge
    invariants hold and every edge's substance is allowed by the boundary.
    Arbitrary candidate descriptions are accepted; nothing raises.
    """
    out: list[Violation] = []
    env_seen: dict[str, tuple[str, EnvNode]] = {}
    _validate_level(spec, spec.id, 0, max_depth, None, env_seen, out)
    return ValidationReport(tuple(out))


def _validate_level(
    spec: SystemSpec,
    path: str,
    depth: int,
    max_depth: int,
    parent_level: int | None,
    env_seen: dict[str, tuple[str, EnvNode]],
    out: list[Violation],
) -> None:
    def bad(message: str, at: str | None = None) -> None:
        out.append(Violation(at or path, message))

    if depth > max_depth:
        bad(f"nesting depth exceeds max_depth={max_depth}")
        return

    if not isinstance(spec.level, int) or spec.level < 0:
        bad(f"level must be a non-negative integer, got {spec.level!r}")
    if parent_level is not None and spec.level != parent_level + 1:
        bad(
            f"nested system level {spec.level} must be parent level + 1"
            f" (= {parent_level + 1})"
        )

    # Component declarations.
    seen_types: set[str] = set()
    atomics: set[str] = set()
    subsystems: dict[str, SystemSpec] = {}
    for comp in spec.components:
        cpath = f"{path}/{comp.type_id}"
        if comp.type_id in seen_types:
            bad(f"duplicate component type {comp.type_id!r}", cpath)
        seen_types.add(comp.type_id)
        if not isinstance(comp.multiplicity, int) or comp.multiplicity < 1:
            bad(f"multiplicity must be a positive integer, got {comp.multiplicity!r}", cpath)
        if comp.variations:
            labels = [label for label, _ in comp.variations]
            if len(set(labels)) != len(labels):
                bad("variation labels must be distinct", cpath)
            if any(count < 1 for _, count in comp.variations):
                bad("every variation count must be >= 1", cpath)
            total = sum(count for _, count in comp.variations)
            if total != comp.multiplicity:
                bad(
                    f"variation counts sum to {total}, expected multiplicity"
                    f" {comp.multiplicity}",
                    cpath,
                )
        if isinstance(comp.body, Atomic):
            atomics.add(comp.type_id)
            if not isinstance(comp.body.tier, int) or comp.body.tier < 0:
                bad(f"tier must be a non-negative integer, got {comp.body.tier!r}", cpath)
        else:
            subsystems[comp.type_id] = comp.body

    # Environment nodes.
    env_ids: set[str] = set()
    for node in spec.interface.env_nodes:
        epath = f"{path}/env/{node.id}"
        if node.id in env_ids:
            bad(f"duplicate environment node {node.id!r}", epath)
        env_ids.add(node.id)
        if node.id in seen_types:
            bad(
                f"identifier {node.id!r} is declared as both a component and an"
                " environment node",
                epath,
            )
        if isinstance(node, SourceNode) and not _is_quantity(node.rate):
            bad(f"source rate must be a finite non-negative quantity, got {node.rate!r}", epath)
        if not spec.boundary.permits_env(node.id):
            bad(f"environment node {node.id!r} is not permitted by the boundary", epath)
        prior = env_seen.get(node.id)
        if prior is None:
            env_seen[node.id] = (epath, node)
        elif prior[1] != node:
            bad(
                f"environment node {node.id!r} conflicts with the definition at"
                f" {prior[0]}",
                epath,
            )

    # Boundary.
    b = spec.boundary
    if b.allowed_substances is not None:
        stray = b.conserved_substances - b.allowed_substances
        if stray:
            bad(
                "conserved substances not allowed by the boundary: "
                + ", ".join(sorted(stray)),
                f"{path}/boundary",
            )

    def check_internal_ref(ref: str, epath: str) -> None:
        base, port = split_endpoint(ref)
        if base in atomics:
            if port is not None:
                bad(f"atomic component {base!r} has no port {port!r}", epath)
        elif base in subsystems:
            if port is None:
                bad(f"endpoint {base!r} is a subsystem and needs a port", epath)
            elif port not in subsystems[base].interface.env_ids():
                bad(f"subsystem {base!r} exports no port {port!r}", epath)
        else:
            bad(f"unresolved endpoint {ref!r}", epath)

    # Network edges: strictly internal.
    edge_ids: set[str] = set()
    for edge in spec.network.edges:
        epath = f"{path}/edges/{edge.id}"
        if edge.id in edge_ids:
            bad(f"duplicate edge id {edge.id!r}", epath)
        edge_ids.add(edge.id)
        for ref in (edge.tail, edge.head):
            base, _ = split_endpoint(ref)
            if base in env_ids:
                bad(f"environment node {base!r} appears in the internal network", epath)
                continue
            if base in seen_types and base not in spec.network.nodes:
                bad(f"edge endpoint {ref!r} is outside the network's node set", epath)
            check_internal_ref(ref, epath)
    for node in spec.network.nodes:
        if node not in seen_types:
            bad(f"network node {node!r} is not a declared component", f"{path}/network")

    # Interface edges: exactly one environment endpoint, sources feed in,
    # sinks drain out.
    for edge in spec.interface.edges:
        epath = f"{path}/edges/{edge.id}"
        if edge.id in edge_ids:
            bad(f"duplicate edge id {edge.id!r}", epath)
        edge_ids.add(edge.id)
        tail_base, _ = split_endpoint(edge.tail)
        head_base, _ = split_endpoint(edge.head)
        tail_env = tail_base in env_ids
        head_env = head_base in env_ids
        if tail_env == head_env:
            which = "two" if tail_env else "no"
            bad(f"interface edge has {which} environment endpoints", epath)
            continue
        env_ref, env_id, internal_ref = (
            (edge.tail, tail_base, edge.head)
            if tail_env
            else (edge.head, head_base, edge.tail)
        )
        if split_endpoint(env_ref)[1] is not None:
            bad(f"environment node {env_id!r} has no ports", epath)
        node = next(n for n in spec.interface.env_nodes if n.id == env_id)
        if isinstance(node, SourceNode) and not tail_env:
            bad(f"source {env_id!r} may only appear as an edge tail", epath)
        if isinstance(node, SinkNode) and not head_env:
            bad(f"sink {env_id!r} may only appear as an edge head", epath)
        check_internal_ref(internal_ref, epath)

    # Knowledge: one entry per edge, each entry well-formed.
    know = spec.knowledge_map()
    for edge_id in sorted(edge_ids):
        if edge_id not in know:
            bad(f"edge {edge_id!r} has no flow attributes", f"{path}/knowledge")
    for edge_id, entry in spec.knowledge:
        kpath = f"{path}/knowledge/{edge_id}"
        if edge_id not in edge_ids:
            bad(f"flow attributes reference unknown edge {edge_id!r}", kpath)
        if not _is_quantity(entry.capacity):
            bad(f"capacity must be a finite non-negative quantity, got {entry.capacity!r}", kpath)
        if not _is_quantity(entry.strength):
            bad(f"strength must be a finite non-negative number, got {entry.strength!r}", kpath)
        if not spec.boundary.allows(entry.substance):
            bad(
                f"substance {entry.substance!r} is not allowed by the boundary",
                kpath,
            )
    if len(set(k for k, _ in spec.knowledge)) != len(spec.knowledge):
        bad("duplicate flow attribute entries for one edge", f"{path}/knowledge")

    # Recurse.
    for type_id, sub in sorted(subsystems.items()):
        _validate_level(
            sub, f"{path}/{type_id}", depth + 1, max_depth, spec.level, env_seen, out
        )


def depth(spec: SystemSpec, max_depth: int = DEFAULT_MAX_DEPTH) -> int:
    """Number of nesting levels below this description.

    0 when every component is atomic. Raises :class:`DepthExceeded` when
    the nesting goes past ``max_depth``, which signals unbounded recursion
    in the input.
    """

    def walk(s: SystemSpec, used: int) -> int:
        if used > max_depth:
            raise DepthExceeded(
                f"nesting in {spec.id!r} exceeds max_depth={max_depth}"
            )
        children = [c.body for c in s.components if not c.is_atomic]
        if not children:
            return 0
        return 1 + max(walk(child, used + 1) for child in children)

    return walk(spec, 0)


def subsystem_at(spec: SystemSpec, path: Iterable[str]) -> SystemSpec:
    """Resolve a path of component type ids to the nested description.

    The empty path is the description itself. Raises
    :class:`PathNotFound` for an undeclared type and
    :class:`PathHitsAtomic` when the path descends into an atomic
    component.
    """
    current = spec
    walked: list[str] = []
    for type_id in path:
        walked.append(type_id)
        decl = current.component(type_id)
        if decl is None:
            raise PathNotFound("/".join(walked))
        if decl.is_atomic:
            raise PathHitsAtomic("/".join(walked))
        current = decl.body
    return current
