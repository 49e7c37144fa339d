"""Run the flow dynamics, keep the history, replay it, audit it.

Each tick moves substance synchronously: sources push up to edge
capacity, stocked actors push up to capacity from what they held at the
start of the tick, and a stock too small for all of its outlets is split
proportionally (exactly, when everything is integer). The run appends one
record per positive flow; the log replays to the same final state bit for
bit, and a conservation audit balances what the sources emitted against
what is still held plus what the end markets received.
"""

import io

from vcsys import (
    HistoryPolicy,
    conservation_check,
    flatten,
    init_state,
    parse,
    replay,
    run,
    step,
    write_log,
)

TEXT = """
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

flat = flatten(parse(TEXT).root)

print("tick by tick (stocks | delivered):")
state = init_state(flat)
for _ in range(4):
    state, records = step(state, flat)
    stocks = {node: qty for (node, _), qty in sorted(state.stocks.items())}
    sunk = {node: qty for (node, _), qty in sorted(state.sink_received.items())}
    moved = ", ".join(f"{r.edge}:{r.amount:g}" for r in records) or "nothing"
    print(f"  tick {state.tick}: {stocks} | {sunk}   moved {moved}")

state, log = run(flat, 10)
print(f"\nafter 10 ticks the market received {state.sink_received[('M', 'grain')]:g}")
print(f"history holds {len(log.records)} records; header hash {log.header.model_hash[:12]}...")

again = replay(flat, log)
print("replay reproduces the final state exactly:", again == state)

report = conservation_check(flat, state, log)
for entry in report.entries:
    print(
        f"conservation[{entry.substance}]: emitted {entry.emitted:g}"
        f" = held {entry.in_stock:g} + delivered {entry.delivered:g}"
        f" (error {entry.error:g})"
    )

# A null-history system walks the same trajectory but remembers nothing.
import dataclasses

null_flat = dataclasses.replace(flat, history_policy=HistoryPolicy.NULL)
null_state, null_log = run(null_flat, 10)
print(
    "null history: same stocks?",
    null_state.stocks == state.stocks,
    "| records kept:",
    len(null_log.records),
)

buffer = io.StringIO()
write_log(log, buffer)
print("\nlog file format (first three lines):")
for line in buffer.getvalue().splitlines()[:3]:
    print(" ", line)
