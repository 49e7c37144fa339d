"""Describe a value-chain system and check it is well formed.

A description names the chain's actors (components, possibly many copies
of one type), their connections, the environment they touch (supply
sources, end markets), the boundary that keeps the system's identity, and
whether runs should remember what happened. This demo builds the same
small chain twice, once as text and once in code, and shows that the two
agree.
"""

from vcsys import depth, parse, print_spec, subsystem_at, validate

TEXT = """
# a smallholder chain: farm plots -> trader -> regional market
system "smallholder" {
  component farm * 2 {
    component plot * 3 variations=[organic:1, plain:2] atomic role=producer tier=0
    entity out                                        # exported port
    edge b_out plot -> out { substance=grain capacity=2 }
  }
  component trader atomic role=processor_trader tier=1
  source rains rate=6 substance=grain
  sink market scope=regional
  edge e_supply rains -> farm.in { substance=grain capacity=6 }
  edge e_collect farm.out -> trader { substance=grain capacity=4 }
  edge e_sell trader -> market { substance=grain capacity=9 }
  boundary { allow=[grain] conserve=[grain] }
}
"""

# The source feeds the farms through an inbound port, so the farm body
# needs one; the text above forgot it. parse() reports that as data, with
# positions, instead of raising.
broken = parse(TEXT)
print("first attempt ok?", broken.ok)
for diag in broken.diagnostics:
    print(f"  line {diag.line}, col {diag.column}: {diag.message}")

FIXED = TEXT.replace(
    "entity out",
    "entity out\n    entity in\n"
    "    edge b_in in -> plot { substance=grain capacity=6 }",
)
doc = parse(FIXED)
print("\nsecond attempt ok?", doc.ok)
spec = doc.root

print("\nvalidation:", "clean" if validate(spec).ok else "violations!")
print("nesting depth below the root:", depth(spec))

farm = subsystem_at(spec, ["farm"])
print("the farm is its own system at level", farm.level)
print("its components:", [c.type_id for c in farm.components])

print("\ncanonical form (sorted, two-space indent):\n")
print(print_spec(spec))
