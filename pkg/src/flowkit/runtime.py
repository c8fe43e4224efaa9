"""Deterministic event-driven execution with full message provenance.

A session runs a checked flow on a virtual clock: datasources emit mock data
on their configured period, processors apply their semantics, outputs
accumulate. Every emission and consumption is appended to a provenance log
whose bytes are fully determined by (flow, seed, duration, profiles).
Node faults are logged against the offending message and the session
continues.
"""

from __future__ import annotations

import heapq
import json
import math
import random
from dataclasses import dataclass, field
from typing import Any, Callable, Iterator, Mapping, Optional, Sequence

from . import expr
from .checker import SchemaContext, check_flow, function_signature
from .model import FlowGraph, SpecRegistry, Wire
from .schema import generate_value, validate_profile, validate_value


class RefusedToRun(ValueError):
    """The flow has check errors (or bad session parameters) and will not execute."""


class UnknownMessage(KeyError):
    pass


class UnknownNode(KeyError):
    pass


@dataclass(frozen=True)
class ProvRecord:
    kind: str  # emit | consume | fault
    msg: int
    node: str
    port: str
    t: int
    payload: Any
    parents: tuple[int, ...]

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "msg": self.msg,
            "node": self.node,
            "port": self.port,
            "t": self.t,
            "payload": self.payload,
            "parents": list(self.parents),
        }


def record_line(record: ProvRecord) -> str:
    return json.dumps(record.to_json(), ensure_ascii=False)


@dataclass
class SessionResult:
    records: list[ProvRecord]
    outputs: dict[str, list[tuple[int, int, Any]]]  # node -> [(t, msg, payload)]
    nodes: frozenset[str]
    emitted: dict[str, int]
    faults: int

    def log_lines(self) -> list[str]:
        return [record_line(r) for r in self.records]

    def log_text(self) -> str:
        return "".join(line + "\n" for line in self.log_lines())

    def log_bytes(self) -> bytes:
        return self.log_text().encode("utf-8")


@dataclass(frozen=True)
class _Message:
    msg_id: int
    node: str
    port: str
    payload: Any
    t: int
    parents: tuple[int, ...]


class Session:
    """One deterministic execution; step() processes one scheduled event."""

    def __init__(
        self,
        flow: FlowGraph,
        registry: SpecRegistry,
        seed: int,
        duration: int,
        profiles: Optional[Mapping[str, str]] = None,
    ):
        if duration < 0:
            raise RefusedToRun("duration must be >= 0")
        diagnostics = check_flow(flow, registry)
        errors = [d for d in diagnostics if d.severity == "error"]
        if errors:
            raise RefusedToRun(
                f"flow has {len(errors)} check error(s); first: {errors[0].code} at {errors[0].loc.to_json()}"
            )
        self.flow = flow
        self.registry = registry
        self.seed = seed
        self.duration = duration
        self.profiles = dict(profiles or {})
        self.ctx = SchemaContext(flow, registry)
        self.records: list[ProvRecord] = []
        self.outputs: dict[str, list[tuple[int, int, Any]]] = {}
        self.emitted: dict[str, int] = {nid: 0 for nid in flow.nodes}
        self.faults = 0
        self._msg_counter = 0
        self._event_seq = 0
        self._heap: list[tuple] = []
        self._trigger_state: dict[str, bool] = {}
        self._combine_state: dict[str, dict[str, _Message]] = {}
        self._programs: dict[str, Optional[expr.TypedProgram]] = {}
        self._rngs: dict[str, random.Random] = {}
        self._source_profile: dict[str, Any] = {}
        self._prepare()

    # -- setup ------------------------------------------------------------

    def _spec(self, node_id: str):
        return self.registry.get(self.flow.nodes[node_id].spec_id)

    def _config(self, node_id: str) -> Any:
        return self.flow.nodes[node_id].config

    def _prepare(self) -> None:
        for node_id in self.profiles:
            if node_id not in self.flow.nodes:
                raise RefusedToRun(f"profile assigned to unknown node {node_id!r}")
            if self._spec(node_id).role != "datasource":
                raise RefusedToRun(f"profile assigned to non-datasource node {node_id!r}")
        for node_id in sorted(self.flow.nodes):
            spec = self._spec(node_id)
            if spec.role == "output":
                self.outputs[node_id] = []
            if spec.role != "datasource":
                continue
            self._rngs[node_id] = random.Random(f"{self.seed}:{node_id}")
            out_port = spec.outputs[0].name if spec.outputs else None
            if out_port is None:
                continue
            schema = self.ctx.output_schema(node_id, out_port)
            profile = None
            name = self.profiles.get(node_id)
            if name is not None:
                matches = [p for p in spec.profiles if p.name == name]
                if not matches:
                    raise RefusedToRun(f"node {node_id!r} has no profile named {name!r}")
                profile = matches[0]
                try:
                    validate_profile(profile, schema)
                except ValueError as e:
                    raise RefusedToRun(
                        f"profile {name!r} does not fit the active schema of {node_id!r}: {e}"
                    ) from None
            self._source_profile[node_id] = (out_port, schema, profile)
            period = (self._config(node_id) or {}).get("period")
            if isinstance(period, int) and period > 0 and period <= self.duration:
                self._schedule(period, ("source", node_id))
        for node_id in sorted(self.flow.nodes):
            spec = self._spec(node_id)
            if _is_function(spec):
                input_schema, output_schema, diags = function_signature(
                    self.flow, self.registry, node_id, self.ctx
                )
                source = (self._config(node_id) or {}).get("body", "")
                try:
                    program = expr.parse(source)
                    result = expr.infer_type(program, input_schema, output_schema)
                    self._programs[node_id] = result.typed
                except expr.ParseError:
                    self._programs[node_id] = None

    def _schedule(self, t: int, event: tuple) -> None:
        self._event_seq += 1
        heapq.heappush(self._heap, (t, self._event_seq, event))

    # -- event loop --------------------------------------------------------

    def step(self) -> bool:
        """Process one event; False when the session is drained."""
        if not self._heap:
            return False
        t, _, event = heapq.heappop(self._heap)
        if event[0] == "source":
            self._run_source(event[1], t)
        else:
            _, wire, message = event
            self._run_delivery(wire, message, t)
        return True

    def run(self) -> SessionResult:
        while self.step():
            pass
        return self.result()

    def run_iter(self) -> Iterator[ProvRecord]:
        """Drive the session, yielding records as they are appended."""
        cursor = 0
        while self.step():
            while cursor < len(self.records):
                yield self.records[cursor]
                cursor += 1
        while cursor < len(self.records):
            yield self.records[cursor]
            cursor += 1

    def result(self) -> SessionResult:
        return SessionResult(
            records=list(self.records),
            outputs={k: list(v) for k, v in self.outputs.items()},
            nodes=frozenset(self.flow.nodes),
            emitted=dict(self.emitted),
            faults=self.faults,
        )

    # -- node semantics ------------------------------------------------------

    def _run_source(self, node_id: str, t: int) -> None:
        out_port, schema, profile = self._source_profile[node_id]
        value = generate_value(schema, self._rngs[node_id], profile)
        if isinstance(value, dict) and "ts" in (schema.properties or {}):
            value = dict(value)
            value["ts"] = t  # timestamps follow the virtual clock
        self._emit(node_id, out_port, value, t, ())
        nxt = t + (self._config(node_id) or {}).get("period")
        if nxt <= self.duration:
            self._schedule(nxt, ("source", node_id))

    def _emit(self, node_id: str, port: str, payload: Any, t: int, parents: tuple[int, ...]) -> None:
        schema = self.ctx.output_schema(node_id, port)
        if schema is not None:
            check = validate_value(payload, schema)
            if not check.ok:
                self._fault(node_id, port, t, parents, "schema",
                            f"emitted value violates the port schema at {', '.join(check.violations) or 'root'}")
                return
        wires = sorted(self.flow.wires_from(node_id, port), key=Wire.key)
        targets = wires or [None]
        for wire in targets:
            self._msg_counter += 1
            message = _Message(self._msg_counter, node_id, port, payload, t, parents)
            self.records.append(
                ProvRecord("emit", message.msg_id, node_id, port, t, payload, parents)
            )
            self.emitted[node_id] += 1
            if wire is not None:
                self._schedule(t, ("deliver", wire, message))

    def _fault(self, node_id: str, port: str, t: int, parents: tuple[int, ...], code: str, message: str) -> None:
        self.faults += 1
        ref = parents[0] if parents else 0
        self.records.append(
            ProvRecord("fault", ref, node_id, port, t, {"error": code, "message": message}, ())
        )

    def _run_delivery(self, wire: Wire, message: _Message, t: int) -> None:
        node_id = wire.dst
        spec = self._spec(node_id)
        self.records.append(
            ProvRecord("consume", message.msg_id, node_id, wire.dst_port, t, message.payload, message.parents)
        )
        if spec.role == "output":
            self.outputs[node_id].append((t, message.msg_id, message.payload))
            return
        handler = _semantics_for(spec)
        try:
            handler(self, node_id, spec, wire, message, t)
        except expr.EvalError as e:
            self._fault(node_id, wire.dst_port, t, (message.msg_id,), e.code, str(e))


def _is_function(spec) -> bool:
    from .model import DynamicResolver

    props = spec.config_schema.properties or {}
    has_body = "body" in props and props["body"].kind == "string"
    has_context = any(
        isinstance(p.resolver, DynamicResolver) and p.resolver.rule == "context"
        for p in spec.inputs + spec.outputs
    )
    return has_body and has_context


def _out_port(spec) -> Optional[str]:
    return spec.outputs[0].name if spec.outputs else None


def _sem_function(session: Session, node_id: str, spec, wire: Wire, message: _Message, t: int) -> None:
    program = session._programs.get(node_id)
    if program is None:
        session._fault(node_id, wire.dst_port, t, (message.msg_id,), "body", "function body failed to compile")
        return
    result = expr.evaluate(program, message.payload)
    session._emit(node_id, _out_port(spec), result, t, (message.msg_id,))


def _sem_project(session: Session, node_id: str, spec, wire: Wire, message: _Message, t: int) -> None:
    config = session._config(node_id) or {}
    fields = config.get("fields") or []
    payload = message.payload
    if not isinstance(payload, dict):
        session._fault(node_id, wire.dst_port, t, (message.msg_id,), "bad-input", "projection input is not an object")
        return
    projected = {k: payload[k] for k in sorted(payload) if k in fields}
    session._emit(node_id, _out_port(spec), projected, t, (message.msg_id,))


def _sem_pair(session: Session, node_id: str, spec, wire: Wire, message: _Message, t: int) -> None:
    state = session._combine_state.setdefault(node_id, {})
    state[wire.dst_port] = message
    ports = [p.name for p in spec.inputs]
    if all(p in state for p in ports):
        payload = {p: state[p].payload for p in ports}
        parents = tuple(state[p].msg_id for p in sorted(ports))
        session._emit(node_id, _out_port(spec), payload, t, parents)


_OPS: dict[str, Callable[[float, float], bool]] = {
    "gt": lambda a, b: a > b,
    "ge": lambda a, b: a >= b,
    "lt": lambda a, b: a < b,
    "le": lambda a, b: a <= b,
    "eq": lambda a, b: a == b,
    "ne": lambda a, b: a != b,
}


def _sem_trigger(session: Session, node_id: str, spec, wire: Wire, message: _Message, t: int) -> None:
    config = session._config(node_id) or {}
    field_name = config.get("field") or ""
    value = message.payload
    if field_name:
        if not isinstance(value, dict) or field_name not in value:
            session._fault(node_id, wire.dst_port, t, (message.msg_id,), "bad-input",
                           f"trigger field {field_name!r} missing from input")
            return
        value = value[field_name]
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        session._fault(node_id, wire.dst_port, t, (message.msg_id,), "bad-input",
                       "trigger input is not numeric")
        return
    pred = _OPS[config["op"]](value, config["threshold"])
    last = session._trigger_state.get(node_id, False)
    if pred != last:
        session._trigger_state[node_id] = pred
        session._emit(node_id, _out_port(spec), pred, t, (message.msg_id,))


def _sem_chart(session: Session, node_id: str, spec, wire: Wire, message: _Message, t: int) -> None:
    plot = (session._config(node_id) or {}).get("plot")
    payload = message.payload
    if plot == "lux":
        point = {"x": payload["ts"], "y": payload["lux"]}
    elif plot == "xyz":
        point = {"x": t, "y": math.sqrt(payload["x"] ** 2 + payload["y"] ** 2 + payload["z"] ** 2)}
    else:  # battery | value: a bare numeric reading
        point = {"x": t, "y": payload}
    session._emit(node_id, _out_port(spec), point, t, (message.msg_id,))


def _sem_passthrough(session: Session, node_id: str, spec, wire: Wire, message: _Message, t: int) -> None:
    for pdef in spec.outputs:
        session._emit(node_id, pdef.name, message.payload, t, (message.msg_id,))


def _semantics_for(spec):
    from .model import DynamicResolver

    if spec.spec_id == "chart-data":
        return _sem_chart
    if _is_function(spec):
        return _sem_function
    out_rules = [
        p.resolver.rule for p in spec.outputs if isinstance(p.resolver, DynamicResolver)
    ]
    if "project" in out_rules:
        return _sem_project
    if "pair" in out_rules:
        return _sem_pair
    props = spec.config_schema.properties or {}
    if "threshold" in props and "op" in props:
        return _sem_trigger
    return _sem_passthrough


# -- public operations -------------------------------------------------------------

def start_session(
    flow: FlowGraph,
    registry: SpecRegistry,
    seed: int,
    duration: int,
    profiles: Optional[Mapping[str, str]] = None,
) -> SessionResult:
    return Session(flow, registry, seed, duration, profiles).run()


def replay(
    flow: FlowGraph,
    registry: SpecRegistry,
    seed: int,
    duration: int,
    profiles: Optional[Mapping[str, str]] = None,
) -> SessionResult:
    """Identical inputs produce an identical log; this is just a fresh run."""
    return start_session(flow, registry, seed, duration, profiles)


@dataclass
class LineageNode:
    msg: int
    node: str
    port: str
    t: int
    payload: Any
    parents: list["LineageNode"] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "msg": self.msg,
            "node": self.node,
            "port": self.port,
            "t": self.t,
            "payload": self.payload,
            "parents": [p.to_json() for p in self.parents],
        }

    def leaves(self) -> list["LineageNode"]:
        if not self.parents:
            return [self]
        out: list[LineageNode] = []
        for p in self.parents:
            out.extend(p.leaves())
        return out


def lineage(records: Sequence[ProvRecord], msg_id: int) -> LineageNode:
    """Ancestor tree of a message: finite, acyclic, leaves are datasource emissions."""
    emits = {r.msg: r for r in records if r.kind == "emit"}
    if msg_id not in emits:
        raise UnknownMessage(f"no emit record for message {msg_id}")

    def build(mid: int) -> LineageNode:
        r = emits[mid]
        return LineageNode(
            r.msg, r.node, r.port, r.t, r.payload, [build(p) for p in r.parents]
        )

    return build(msg_id)


def window(
    records: Sequence[ProvRecord],
    node_id: str,
    t_from: int,
    t_to: int,
    known_nodes: Optional[frozenset[str]] = None,
) -> list[ProvRecord]:
    """All records of a node with t in [t_from, t_to], in log order."""
    if t_from > t_to:
        raise ValueError("t_from must be <= t_to")
    known = known_nodes if known_nodes is not None else frozenset(r.node for r in records)
    if node_id not in known:
        raise UnknownNode(f"node {node_id!r} not present in this session")
    return [r for r in records if r.node == node_id and t_from <= r.t <= t_to]


def parse_log(text: str) -> list[ProvRecord]:
    out = []
    for line in text.splitlines():
        if not line.strip():
            continue
        data = json.loads(line)
        out.append(
            ProvRecord(
                data["kind"], data["msg"], data["node"], data["port"],
                data["t"], data["payload"], tuple(data["parents"]),
            )
        )
    return out
