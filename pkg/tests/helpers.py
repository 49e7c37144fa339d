"""Fixtures and seeded random model generators shared across the suite."""

from __future__ import annotations

import random
from itertools import count

from vcsys import (
    Atomic,
    BoundarySpec,
    ComponentDecl,
    Edge,
    EdgeKnowledge,
    EntityNode,
    HistoryPolicy,
    Role,
    Scope,
    SinkNode,
    SourceNode,
    SystemSpec,
    make_system,
)
from vcsys.model import split_endpoint

ROLES = list(Role)
SCOPES = list(Scope)
SUBSTANCES = ["grain", "milk", "cloth"]


def demo_chain_spec(
    caps: tuple[float, float, float] = (4, 3, 5),
    rate: float = 4,
    history: HistoryPolicy = HistoryPolicy.RECORD,
    strength: float = 1.0,
) -> SystemSpec:
    """The reference chain: source S -> producer P -> trader T -> market M."""
    return make_system(
        "demo",
        components=[
            ComponentDecl("P", Atomic(Role.PRODUCER, 0)),
            ComponentDecl("T", Atomic(Role.PROCESSOR_TRADER, 1)),
        ],
        env=[SourceNode("S", rate, "grain"), SinkNode("M", Scope.NATIONAL)],
        edges=[
            (Edge("e_sp", "S", "P"), EdgeKnowledge(caps[0], "grain", strength)),
            (Edge("e_pt", "P", "T"), EdgeKnowledge(caps[1], "grain", strength)),
            (Edge("e_tm", "T", "M"), EdgeKnowledge(caps[2], "grain", strength)),
        ],
        boundary=BoundarySpec(frozenset({"grain"}), frozenset({"grain"})),
        history=history,
    )


def diamond_spec() -> SystemSpec:
    """Two equally short routes from one source to one market."""
    return make_system(
        "diamond",
        components=[
            ComponentDecl("A", Atomic(Role.PRODUCER, 0)),
            ComponentDecl("B", Atomic(Role.PRODUCER, 0)),
        ],
        env=[SourceNode("S", 2, "grain"), SinkNode("M", Scope.LOCAL)],
        edges=[
            (Edge("e1", "S", "A"), EdgeKnowledge(1, "grain")),
            (Edge("e2", "S", "B"), EdgeKnowledge(1, "grain")),
            (Edge("e3", "A", "M"), EdgeKnowledge(1, "grain")),
            (Edge("e4", "B", "M"), EdgeKnowledge(1, "grain")),
        ],
    )


def two_sink_spec() -> SystemSpec:
    """One trader feeding a national and a global end market."""
    return make_system(
        "twosink",
        components=[
            ComponentDecl("P", Atomic(Role.PRODUCER, 0)),
            ComponentDecl("T", Atomic(Role.PROCESSOR_TRADER, 1)),
        ],
        env=[
            SourceNode("S", 4, "grain"),
            SinkNode("M1", Scope.NATIONAL),
            SinkNode("M2", Scope.GLOBAL),
        ],
        edges=[
            (Edge("e_sp", "S", "P"), EdgeKnowledge(4, "grain")),
            (Edge("e_pt", "P", "T"), EdgeKnowledge(3, "grain")),
            (Edge("e_t1", "T", "M1"), EdgeKnowledge(2, "grain")),
            (Edge("e_t2", "T", "M2"), EdgeKnowledge(2, "grain")),
        ],
    )


def nested_two_level_spec() -> SystemSpec:
    """A farm subsystem exporting through a port to a trader at the root."""
    farm = make_system(
        "farm",
        level=1,
        components=[ComponentDecl("plot", Atomic(Role.PRODUCER, 0), multiplicity=2)],
        env=[EntityNode("out")],
        edges=[(Edge("b_out", "plot", "out"), EdgeKnowledge(2, "grain"))],
    )
    return make_system(
        "estate",
        components=[
            ComponentDecl("farm", farm),
            ComponentDecl("T", Atomic(Role.PROCESSOR_TRADER, 1)),
        ],
        env=[SinkNode("M", Scope.REGIONAL)],
        edges=[
            (Edge("e_ft", "farm.out", "T"), EdgeKnowledge(3, "grain")),
            (Edge("e_tm", "T", "M"), EdgeKnowledge(5, "grain")),
        ],
    )


def nested_mult_spec() -> SystemSpec:
    """Component A (x2) whose body holds two atomics: four leaves under A."""
    inner = make_system(
        "A",
        level=1,
        components=[
            ComponentDecl("x", Atomic(Role.PRODUCER, 0)),
            ComponentDecl("y", Atomic(Role.SUPPORT_SERVICE, 0)),
        ],
        env=[EntityNode("out")],
        edges=[(Edge("b1", "x", "out"), EdgeKnowledge(1, "grain"))],
    )
    return make_system(
        "plant",
        components=[
            ComponentDecl("A", inner, multiplicity=2),
            ComponentDecl("B", Atomic(Role.BUYER, 1)),
        ],
        edges=[(Edge("e1", "A.out", "B"), EdgeKnowledge(1, "grain"))],
    )


def three_level_spec() -> SystemSpec:
    """Three nesting levels: depth(root) == 2 by hand count."""
    grange = make_system(
        "grange",
        level=2,
        components=[ComponentDecl("h", Atomic(Role.PRODUCER, 0))],
        env=[EntityNode("out")],
        edges=[(Edge("b_g", "h", "out"), EdgeKnowledge(1, "grain"))],
    )
    farm = make_system(
        "farm",
        level=1,
        components=[
            ComponentDecl("barn", Atomic(Role.SUPPORT_SERVICE, 0)),
            ComponentDecl("grange", grange),
        ],
        env=[EntityNode("out")],
        edges=[(Edge("b_f", "grange.out", "out"), EdgeKnowledge(1, "grain"))],
    )
    return make_system(
        "country",
        components=[
            ComponentDecl("farm", farm),
            ComponentDecl("T", Atomic(Role.PROCESSOR_TRADER, 1)),
        ],
        env=[SinkNode("M", Scope.GLOBAL)],
        edges=[
            (Edge("e_ft", "farm.out", "T"), EdgeKnowledge(2, "grain")),
            (Edge("e_tm", "T", "M"), EdgeKnowledge(2, "grain")),
        ],
    )


DEMO_SDL = """\
# the reference chain
system "demo" {
  component P atomic role=producer tier=0
  component T atomic role=processor_trader tier=1
  source S rate=4 substance=grain
  sink M scope=national
  edge e_sp S -> P { substance=grain capacity=4 }
  edge e_pt P -> T { substance=grain capacity=3 }
  edge e_tm T -> M { substance=grain capacity=5 }
  boundary { allow=[grain] conserve=[grain] }
}
"""


def _split_total(rng: random.Random, total: int) -> list[int]:
    parts = rng.randint(1, min(3, total))
    cuts = sorted(rng.sample(range(1, total), parts - 1)) if parts > 1 else []
    bounds = [0] + cuts + [total]
    return [b - a for a, b in zip(bounds, bounds[1:])]


def random_spec(
    rng: random.Random, max_depth: int = 3, max_components: int = 6
) -> SystemSpec:
    """A random valid description: nested, multiplicities, ports all wired."""
    counter = count(1)
    name = rng.choice(["web", "chain model", "mesh", "net_7"])
    return _random_system(
        rng, name, rng.choice([0, 0, 0, 1, 2]), max_depth, max_components, counter, True
    )


def _random_system(
    rng: random.Random,
    sys_id: str,
    level: int,
    depth_budget: int,
    max_components: int,
    counter,
    is_root: bool,
) -> SystemSpec:
    n_comps = rng.randint(1, max_components)
    components: list[ComponentDecl] = []
    atom_ids: list[str] = []
    sub_specs: dict[str, SystemSpec] = {}
    for i in range(n_comps):
        type_id = f"c{next(counter)}"
        mult = rng.randint(1, 4)
        variations: tuple[tuple[str, int], ...] = ()
        if mult > 1 and rng.random() < 0.25:
            variations = tuple(
                (f"v{j}", part)
                for j, part in enumerate(_split_total(rng, mult), start=1)
            )
        if i > 0 and depth_budget > 0 and rng.random() < 0.35:
            sub = _random_system(
                rng,
                type_id,
                level + 1,
                depth_budget - 1,
                max(2, max_components - 1),
                counter,
                False,
            )
            components.append(ComponentDecl(type_id, sub, mult, variations))
            sub_specs[type_id] = sub
        else:
            body = Atomic(rng.choice(ROLES), rng.randint(0, 3))
            components.append(ComponentDecl(type_id, body, mult, variations))
            atom_ids.append(type_id)

    substances = rng.sample(SUBSTANCES, rng.randint(1, 2))

    def knowledge() -> EdgeKnowledge:
        if rng.random() < 0.7:
            capacity: float = float(rng.randint(0, 9))
        else:
            capacity = round(rng.uniform(0, 9), 3)
        strength = 1.0 if rng.random() < 0.7 else round(rng.uniform(0.1, 3.0), 2)
        return EdgeKnowledge(capacity, rng.choice(substances), strength)

    edges: list[tuple[Edge, EdgeKnowledge]] = []
    env: list = []

    # Non-root systems export ports; the enclosing level must wire them.
    if not is_root:
        out_port = f"po{next(counter)}"
        env.append(EntityNode(out_port))
        edges.append(
            (Edge(f"b{next(counter)}", rng.choice(atom_ids), out_port), knowledge())
        )
        if rng.random() < 0.5:
            in_port = f"pi{next(counter)}"
            env.append(EntityNode(in_port))
            edges.append(
                (Edge(f"b{next(counter)}", in_port, rng.choice(atom_ids)), knowledge())
            )

    # Ports exported by the children, by direction.
    out_refs: list[str] = []
    in_refs: list[str] = []
    for type_id, sub in sub_specs.items():
        for edge in sub.interface.edges:
            tail_base, _ = split_endpoint(edge.tail)
            head_base, _ = split_endpoint(edge.head)
            for node in sub.interface.env_nodes:
                if not isinstance(node, EntityNode):
                    continue
                if head_base == node.id:
                    out_refs.append(f"{type_id}.{node.id}")
                if tail_base == node.id:
                    in_refs.append(f"{type_id}.{node.id}")

    tails = atom_ids + out_refs
    heads = atom_ids + in_refs

    # Every child port gets at least one connection, so flattening never
    # finds an orphan binding.
    for ref in out_refs:
        edges.append((Edge(f"g{next(counter)}", ref, rng.choice(atom_ids)), knowledge()))
    for ref in in_refs:
        edges.append((Edge(f"g{next(counter)}", rng.choice(atom_ids), ref), knowledge()))

    for _ in range(rng.randint(0, n_comps)):
        edges.append(
            (Edge(f"g{next(counter)}", rng.choice(tails), rng.choice(heads)), knowledge())
        )

    env_chance = 0.7 if is_root else 0.2
    if rng.random() < env_chance:
        source = SourceNode(f"src{next(counter)}", float(rng.randint(1, 6)), substances[0])
        env.append(source)
        edges.append((Edge(f"g{next(counter)}", source.id, rng.choice(heads)), knowledge()))
    if rng.random() < env_chance:
        sink = SinkNode(f"mkt{next(counter)}", rng.choice(SCOPES))
        env.append(sink)
        edges.append((Edge(f"g{next(counter)}", rng.choice(tails), sink.id), knowledge()))
    if is_root and rng.random() < 0.25:
        entity = EntityNode(f"bee{next(counter)}")
        env.append(entity)
        edges.append((Edge(f"g{next(counter)}", rng.choice(atom_ids), entity.id), knowledge()))

    allowed = None if rng.random() < 0.6 else frozenset(SUBSTANCES)
    conserved = frozenset(substances) if rng.random() < 0.4 else frozenset()
    permitted = None
    if rng.random() < 0.2:
        permitted = frozenset(node.id for node in env) | {f"spare{next(counter)}"}
    boundary = BoundarySpec(allowed, conserved, rng.random() < 0.8, permitted)
    history = HistoryPolicy.RECORD
    if is_root and rng.random() < 0.3:
        history = HistoryPolicy.NULL
    return make_system(
        sys_id,
        level=level,
        components=components,
        edges=edges,
        env=env,
        boundary=boundary,
        history=history,
    )


def random_flow_model(
    rng: random.Random, integer_caps: bool = True, max_internal: int = 8
) -> SystemSpec:
    """A single-level model for simulator tests: <= 12 nodes, cycles allowed."""
    counter = count(1)
    n_nodes = rng.randint(1, max_internal)
    node_ids = [f"n{i}" for i in range(n_nodes)]
    components = [
        ComponentDecl(node_id, Atomic(rng.choice(ROLES), rng.randint(0, 3)))
        for node_id in node_ids
    ]
    substances = rng.sample(SUBSTANCES, rng.randint(1, 2))

    def quantity() -> float:
        if integer_caps:
            return float(rng.randint(0, 10))
        return round(rng.uniform(0, 10), 3)

    edges: list[tuple[Edge, EdgeKnowledge]] = []
    for _ in range(rng.randint(0, 2 * n_nodes)):
        tail, head = rng.choice(node_ids), rng.choice(node_ids)
        edges.append(
            (
                Edge(f"e{next(counter)}", tail, head),
                EdgeKnowledge(quantity(), rng.choice(substances)),
            )
        )
    env: list = []
    for _ in range(rng.randint(1, 2)):
        source = SourceNode(f"s{next(counter)}", quantity(), rng.choice(substances))
        env.append(source)
        edges.append(
            (
                Edge(f"e{next(counter)}", source.id, rng.choice(node_ids)),
                EdgeKnowledge(quantity(), source.substance),
            )
        )
    for _ in range(rng.randint(1, 2)):
        sink = SinkNode(f"m{next(counter)}", rng.choice(SCOPES))
        env.append(sink)
        edges.append(
            (
                Edge(f"e{next(counter)}", rng.choice(node_ids), sink.id),
                EdgeKnowledge(quantity(), rng.choice(substances)),
            )
        )
    return make_system(
        f"flow{rng.randint(0, 999)}",
        components=components,
        edges=edges,
        env=env,
        boundary=BoundarySpec(None, frozenset(substances)),
    )
