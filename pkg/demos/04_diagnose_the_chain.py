"""Read the structure of a chain: who links to whom, who holds power.

Four diagnostics over the flat graph:

- linkage classes: vertical (across tiers), horizontal (within a tier),
  interface (touching the environment);
- governance: how much of the source-to-market routing runs through each
  actor, as a share of shortest paths, in [0, 1];
- end-market reachability over edges that can actually carry flow;
- weak or missing vertical links under a capacity threshold, plus a
  capacity-weighted value-added balance per actor.
"""

from vcsys import (
    classify_linkages,
    end_market_reachability,
    flatten,
    governance_centrality,
    parse,
    value_added_profile,
    weak_linkage_report,
)

TEXT = """
system "region" {
  component grower * 2 atomic role=producer tier=0
  component coop atomic role=support_service tier=0
  component trader atomic role=processor_trader tier=1
  component exporter atomic role=exporter tier=2
  source land rate=8 substance=coffee
  sink village scope=local
  sink abroad scope=global
  edge e_land1 land -> grower { substance=coffee capacity=4 }
  edge e_coop grower -> coop { substance=coffee capacity=1 }
  edge e_gt grower -> trader { substance=coffee capacity=2 }
  edge e_tv trader -> village { substance=coffee capacity=1 }
  edge e_tx trader -> exporter { substance=coffee capacity=3 }
  edge e_xa exporter -> abroad { substance=coffee capacity=3 }
}
"""

flat = flatten(parse(TEXT).root)

print("linkage classes:")
for edge_id, linkage in sorted(classify_linkages(flat).items()):
    print(f"  {edge_id:10s} {linkage.value}")

print("\ngovernance (brokerage between sources and end markets):")
for score in governance_centrality(flat):
    bar = "#" * round(score.score * 20)
    print(f"  {score.node:11s} {score.score:5.3f} {bar}")

print("\nwhich end markets can each actor feed?")
for node, sinks in sorted(end_market_reachability(flat).items()):
    print(f"  {node:11s} -> {sorted(sinks) or '(none)'}")

report = weak_linkage_report(flat, threshold=3)
print(f"\nvertical links under capacity {report.threshold:g}:")
for weak in report.weak:
    print(f"  {weak.edge} carries only {weak.capacity:g}")
for low, high in report.missing:
    print(f"  tiers {low} and {high} are populated but never connected")

print("\nvalue-added balance (out minus in, capacity x strength):")
for node, value in sorted(value_added_profile(flat).items()):
    print(f"  {node:11s} {value:+g}")
