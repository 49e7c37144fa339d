"""Expand a nested description into the graph that actually runs.

Multiplicities become numbered instances (plot#1, plot#2, ...), subsystem
ports splice into direct edges, and every expanded edge keeps its flow
attributes. The flat graph is what the simulator and the diagnostics
consume, and it exports to Graphviz DOT and JSON for everything else.
"""

import json

from vcsys import export_dot, export_json, flat_graph_json, flatten, parse

TEXT = """
system "estate" {
  component farm * 2 {
    component plot * 2 atomic role=producer tier=0
    entity out
    edge b_out plot -> out { substance=grain capacity=2 }
  }
  component trader atomic role=processor_trader tier=1
  sink market scope=national
  edge e_collect farm.out -> trader { substance=grain capacity=3 }
  edge e_sell trader -> market { substance=grain capacity=8 }
}
"""

spec = parse(TEXT).root
flat = flatten(spec)

print("instances (type#k, numbered depth-first):")
for node in flat.nodes:
    origin = "/".join(node.path) or "(root)"
    print(f"  {node.id:9s} role={node.role.value:17s} tier={node.tier} from {origin}")

print("\nspliced edges (the enclosing edge's attributes govern):")
for edge in flat.edges:
    print(
        f"  {edge.id:13s} {edge.tail:8s} -> {edge.head:8s}"
        f" {edge.knowledge.substance} cap={edge.knowledge.capacity:g}"
    )

print("\nGraphviz view (sources as houses, markets as inverted houses):\n")
print(export_dot(flat))

print("flat-graph JSON, first node entry:")
print(json.dumps(flat_graph_json(flat)["nodes"][0], indent=2))

print("\ndescription JSON mirrors the six parts plus id and level:")
print(json.dumps(list(export_json(spec)), indent=None))
