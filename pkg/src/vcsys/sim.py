"""Deterministic discrete-time flow dynamics with a replayable history.

Each tick is a synchronous update: every flow is computed from the
start-of-tick stocks and then applied, so the result does not depend on
any evaluation order. Sources push ``min(rate, edge capacity)`` onto each
of their edges; an actor's out-edges move up to their capacity, and when
several edges want the same substance from a stock that cannot cover them
all, the stock is split proportionally to capacities. For whole-number
stocks and capacities the split uses largest-remainder rounding (ties to
the ascending edge id), which keeps every quantity an integer and makes
conservation exact rather than approximate.

Runs append one record per positive flow to the history unless the model
was declared with a null history policy, in which case the trajectory is
identical but nothing is remembered. A history can be replayed against
its model to reproduce the final state bit for bit; logs serialize as
line-delimited JSON with a header line carrying the model hash and the
run parameters.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable

from .export import flat_graph_json
from .flatten import FlatEdge, FlatGraph
from .model import EntityNode, HistoryPolicy, SinkNode, SourceNode, VcsysError

__all__ = [
    "InconsistentState",
    "HashMismatch",
    "NegativeStock",
    "NullHistory",
    "TransitionRecord",
    "LogHeader",
    "HistoryLog",
    "SimulationState",
    "model_hash",
    "init_state",
    "step",
    "run",
    "replay",
    "ConservationEntry",
    "ConservationReport",
    "conservation_check",
    "write_log",
    "read_log",
]


class InconsistentState(VcsysError):
    """State or history references nodes or edges the model does not have."""


class HashMismatch(VcsysError):
    """The history was recorded against a different model."""


class NegativeStock(VcsysError):
    """Applying a history drove a stock below zero: the log is corrupt."""


class NullHistory(VcsysError):
    """The requested operation needs records, but the history is null."""


@dataclass(frozen=True)
class TransitionRecord:
    """One flow event: at `tick`, `amount` of `substance` moved along `edge`."""

    tick: int
    edge: str
    substance: str
    amount: float


@dataclass(frozen=True)
class LogHeader:
    model_hash: str
    seed: int
    start_tick: int
    steps: int
    history: HistoryPolicy


@dataclass(frozen=True)
class HistoryLog:
    header: LogHeader
    records: tuple[TransitionRecord, ...] = ()


@dataclass(frozen=True)
class SimulationState:
    """Stocks per (actor, substance) and cumulative deliveries per end market."""

    tick: int
    stocks: dict[tuple[str, str], float]
    sink_received: dict[tuple[str, str], float]


def model_hash(flat: FlatGraph) -> str:
    """Stable content hash of a flattened graph."""
    payload = json.dumps(flat_graph_json(flat), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def init_state(flat: FlatGraph) -> SimulationState:
    """Tick zero: every stock and every delivery counter at zero.

    Keys exist for each (node, substance) combination an incident edge can
    touch, so states from a run and from a replay carry identical key sets.
    """
    env = flat.env_by_id
    internal = {n.id for n in flat.nodes}
    stocks: dict[tuple[str, str], float] = {}
    received: dict[tuple[str, str], float] = {}
    for edge in flat.edges:
        substance = edge.knowledge.substance
        for end in (edge.tail, edge.head):
            if end in internal:
                stocks.setdefault((end, substance), 0.0)
        if isinstance(env.get(edge.head), SinkNode):
            received.setdefault((edge.head, substance), 0.0)
    return SimulationState(0, stocks, received)


def _ration(pool: float, edges: list[FlatEdge]) -> list[tuple[FlatEdge, float]]:
    """Split `pool` over competing edges proportionally to capacity.

    Integer pools with integer capacities stay integral: floor shares plus
    one leftover unit each to the largest remainders, ties broken by
    ascending edge id.
    """
    caps = [e.knowledge.capacity for e in edges]
    total = sum(caps)
    if pool.is_integer() and all(c.is_integer() for c in caps):
        pool_i, total_i = int(pool), int(total)
        base = [(pool_i * int(c)) // total_i for c in caps]
        rems = [(pool_i * int(c)) % total_i for c in caps]
        order = sorted(range(len(edges)), key=lambda i: (-rems[i], edges[i].id))
        for i in order[: pool_i - sum(base)]:
            base[i] += 1
        return [(edges[i], float(share)) for i, share in enumerate(base) if share > 0]
    return [
        (edge, pool * cap / total)
        for edge, cap in zip(edges, caps)
        if pool * cap / total > 0
    ]


def step(
    state: SimulationState, flat: FlatGraph
) -> tuple[SimulationState, list[TransitionRecord]]:
    """Advance one tick; returns the new state and the positive-flow records."""
    internal = {n.id for n in flat.nodes}
    env = flat.env_by_id
    for node, _ in state.stocks:
        if node not in internal:
            raise InconsistentState(f"stocked node {node!r} is not in the model")
    for sink, _ in state.sink_received:
        if not isinstance(env.get(sink), SinkNode):
            raise InconsistentState(f"delivery counter {sink!r} is not a sink")

    flows: list[tuple[FlatEdge, float]] = []
    contenders: dict[tuple[str, str], list[FlatEdge]] = {}
    for edge in flat.edges:
        tail_env = env.get(edge.tail)
        head_env = env.get(edge.head)
        if isinstance(head_env, (EntityNode, SourceNode)) or isinstance(
            tail_env, (EntityNode, SinkNode)
        ):
            continue  # entities carry nothing; sources/sinks are one-way
        if edge.knowledge.capacity <= 0:
            continue
        if isinstance(tail_env, SourceNode):
            # The environment is not modeled: each source edge fills up to
            # capacity, but only with the source's own substance.
            if edge.knowledge.substance == tail_env.substance:
                amount = min(tail_env.rate, edge.knowledge.capacity)
                if amount > 0:
                    flows.append((edge, amount))
            continue
        key = (edge.tail, edge.knowledge.substance)
        contenders.setdefault(key, []).append(edge)

    for (tail, substance), group in sorted(contenders.items()):
        pool = state.stocks.get((tail, substance), 0.0)
        group = sorted(group, key=lambda e: e.id)
        wanted = sum(e.knowledge.capacity for e in group)
        if wanted <= pool:
            flows.extend((e, e.knowledge.capacity) for e in group)
        elif pool > 0:
            flows.extend(_ration(pool, group))

    flows.sort(key=lambda item: item[0].id)
    stocks = dict(state.stocks)
    received = dict(state.sink_received)
    records: list[TransitionRecord] = []
    for edge, amount in flows:
        substance = edge.knowledge.substance
        if edge.tail in internal:
            key = (edge.tail, substance)
            stocks[key] = stocks.get(key, 0.0) - amount
        if edge.head in internal:
            key = (edge.head, substance)
            stocks[key] = stocks.get(key, 0.0) + amount
        elif isinstance(env.get(edge.head), SinkNode):
            key = (edge.head, substance)
            received[key] = received.get(key, 0.0) + amount
        records.append(TransitionRecord(state.tick, edge.id, substance, amount))
    return SimulationState(state.tick + 1, stocks, received), records


def run(flat: FlatGraph, steps: int, seed: int = 0) -> tuple[SimulationState, HistoryLog]:
    """Run `steps` ticks from a zero state.

    With a null history policy the trajectory is the same but the log
    stays empty. `seed` is carried in the log header for forward
    compatibility; current dynamics use no randomness.
    """
    if steps < 0:
        raise ValueError("steps must be non-negative")
    state = init_state(flat)
    collected: list[TransitionRecord] = []
    recording = flat.history_policy is HistoryPolicy.RECORD
    for _ in range(steps):
        state, records = step(state, flat)
        if recording:
            collected.extend(records)
    header = LogHeader(model_hash(flat), seed, 0, steps, flat.history_policy)
    return state, HistoryLog(header, tuple(collected))


def replay(flat: FlatGraph, log: HistoryLog) -> SimulationState:
    """Reapply a recorded history to reproduce the run's final state."""
    if log.header.model_hash != model_hash(flat):
        raise HashMismatch("history was recorded against a different model")
    if log.header.history is HistoryPolicy.NULL:
        raise NullHistory("a null history has no records to replay")
    env = flat.env_by_id
    edges = {e.id: e for e in flat.edges}
    start = init_state(flat)
    stocks = dict(start.stocks)
    received = dict(start.sink_received)
    by_tick: dict[int, list[TransitionRecord]] = {}
    for record in log.records:
        by_tick.setdefault(record.tick, []).append(record)
    for tick in sorted(by_tick):
        for record in by_tick[tick]:
            edge = edges.get(record.edge)
            if edge is None:
                raise InconsistentState(f"record references unknown edge {record.edge!r}")
            substance = record.substance
            if env.get(edge.tail) is None:
                key = (edge.tail, substance)
                stocks[key] = stocks.get(key, 0.0) - record.amount
            if env.get(edge.head) is None:
                key = (edge.head, substance)
                stocks[key] = stocks.get(key, 0.0) + record.amount
            elif isinstance(env.get(edge.head), SinkNode):
                key = (edge.head, substance)
                received[key] = received.get(key, 0.0) + record.amount
        for key, value in stocks.items():
            if value < 0:
                raise NegativeStock(
                    f"stock {key} fell to {value} at tick {tick}; corrupt history"
                )
    return SimulationState(
        log.header.start_tick + log.header.steps, stocks, received
    )


@dataclass(frozen=True)
class ConservationEntry:
    substance: str
    emitted: float
    in_stock: float
    delivered: float
    error: float
    ok: bool


@dataclass(frozen=True)
class ConservationReport:
    entries: tuple[ConservationEntry, ...] = ()

    @property
    def ok(self) -> bool:
        return all(entry.ok for entry in self.entries)


def conservation_check(
    flat: FlatGraph, state: SimulationState, log: HistoryLog
) -> ConservationReport:
    """Balance every conserved substance: emitted = still held + delivered.

    Integer runs must balance exactly; real-valued runs within 1e-9. Needs
    the complete history of the run that produced `state`.
    """
    if log.header.history is HistoryPolicy.NULL and log.header.steps > 0:
        raise NullHistory("conservation needs the complete flow history")
    env = flat.env_by_id
    edges = {e.id: e for e in flat.edges}
    entries = []
    for substance in sorted(flat.conserved):
        amounts = [r.amount for r in log.records if r.substance == substance]
        emitted = sum(
            r.amount
            for r in log.records
            if r.substance == substance
            and (e := edges.get(r.edge)) is not None
            and isinstance(env.get(e.tail), SourceNode)
        )
        held_values = [v for (_, s), v in state.stocks.items() if s == substance]
        sunk_values = [v for (_, s), v in state.sink_received.items() if s == substance]
        held = sum(held_values)
        delivered = sum(sunk_values)
        error = emitted - held - delivered
        integral = all(
            float(x).is_integer() for x in amounts + held_values + sunk_values
        )
        tolerance = 0.0 if integral else 1e-9
        entries.append(
            ConservationEntry(
                substance, emitted, held, delivered, error, abs(error) <= tolerance
            )
        )
    return ConservationReport(tuple(entries))


def write_log(log: HistoryLog, target: str | Path | IO[str]) -> None:
    """Write a history as line-delimited JSON: header line, then records."""
    own = isinstance(target, (str, Path))
    fp: IO[str] = open(target, "w", encoding="utf-8") if own else target
    try:
        header = {
            "model_hash": log.header.model_hash,
            "seed": log.header.seed,
            "start_tick": log.header.start_tick,
            "steps": log.header.steps,
            "history": log.header.history.value,
        }
        fp.write(json.dumps(header, sort_keys=False) + "\n")
        for record in log.records:
            fp.write(
                json.dumps(
                    {
                        "tick": record.tick,
                        "edge": record.edge,
                        "substance": record.substance,
                        "amount": record.amount,
                    }
                )
                + "\n"
            )
    finally:
        if own:
            fp.close()


def _parse_log_lines(lines: Iterable[str], source: str) -> HistoryLog:
    rows = [line for line in lines if line.strip()]
    if not rows:
        raise InconsistentState(f"{source}: empty history file")
    raw = json.loads(rows[0])
    header = LogHeader(
        model_hash=raw["model_hash"],
        seed=raw["seed"],
        start_tick=raw["start_tick"],
        steps=raw["steps"],
        history=HistoryPolicy(raw["history"]),
    )
    records = tuple(
        TransitionRecord(
            tick=entry["tick"],
            edge=entry["edge"],
            substance=entry["substance"],
            amount=float(entry["amount"]),
        )
        for entry in map(json.loads, rows[1:])
    )
    return HistoryLog(header, records)


def read_log(source: str | Path | IO[str]) -> HistoryLog:
    """Read a history written by :func:`write_log`."""
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fp:
            return _parse_log_lines(fp, str(source))
    return _parse_log_lines(source, "<stream>")
