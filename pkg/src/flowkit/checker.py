"""Development-time analysis of a flow graph.

Produces one deterministic, ordered diagnostic list: wire incompatibilities,
function-body problems, signature conflicts, and dead-node warnings.
Effective port schemas handle the context-derived ports (function, extract,
trigger, combine): a function node's input is the join of its producers and
its output is the meet of its concretely-typed consumers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping, Optional, Sequence

from . import expr
from .model import (
    ChangedSet,
    ConstResolver,
    DynamicResolver,
    FlowGraph,
    NodeSpec,
    SelectResolver,
    SpecRegistry,
    Wire,
    resolve_port_schema,
)
from .schema import SchemaDoc, is_subtype

SEVERITIES = ("error", "warning", "info")


@dataclass(frozen=True)
class WireLoc:
    wire: Wire

    def to_json(self) -> dict:
        w = self.wire
        return {"wire": [w.src, w.src_port, w.dst, w.dst_port]}

    def sort_key(self) -> tuple:
        return (self.wire.src, 1, self.wire.key())

    def owner(self) -> Any:
        return self.wire


@dataclass(frozen=True)
class NodeLoc:
    node: str
    port: Optional[str] = None

    def to_json(self) -> dict:
        out: dict[str, Any] = {"node": self.node}
        if self.port is not None:
            out["port"] = self.port
        return out

    def sort_key(self) -> tuple:
        return (self.node, 0, (self.port or "",))

    def owner(self) -> Any:
        return self.node


@dataclass(frozen=True)
class AstLoc:
    node: str
    line: int
    col: int

    def to_json(self) -> dict:
        return {"node": self.node, "line": self.line, "col": self.col}

    def sort_key(self) -> tuple:
        return (self.node, 0, ("", self.line, self.col))

    def owner(self) -> Any:
        return self.node


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    code: str
    loc: Any
    message: str

    def to_json(self) -> dict:
        return {
            "severity": self.severity,
            "code": self.code,
            "loc": self.loc.to_json(),
            "message": self.message,
        }

    def sort_key(self) -> tuple:
        return (*self.loc.sort_key(), self.code, self.message)


def _sorted_diagnostics(diags: Sequence[Diagnostic]) -> list[Diagnostic]:
    return sorted(diags, key=Diagnostic.sort_key)


# -- effective port schemas -------------------------------------------------------

_UPSTREAM_RULES = ("passthrough", "project", "pair")


class SchemaContext:
    """Per-flow effective schemas, precomputed in dependency order.

    Upstream-looking dynamic rules form a dependency graph over output ports;
    ports on (or fed by) a dependency cycle resolve to None regardless of
    query order, which keeps incremental rechecks equal to batch checks.
    """

    def __init__(self, flow: FlowGraph, registry: SpecRegistry):
        self.flow = flow
        self.registry = registry
        self._out_cache: dict[tuple[str, str], Optional[SchemaDoc]] = {}
        self._precompute()

    def spec(self, node_id: str) -> NodeSpec:
        return self.registry.get(self.flow.nodes[node_id].spec_id)

    def config(self, node_id: str) -> Any:
        return self.flow.nodes[node_id].config

    def input_resolver(self, node_id: str, port: str):
        return self.spec(node_id).input_port(port).resolver

    def _precompute(self) -> None:
        deps: dict[tuple[str, str], list[tuple[str, str]]] = {}
        for node_id in self.flow.nodes:
            spec = self.spec(node_id)
            for pdef in spec.outputs:
                key = (node_id, pdef.name)
                r = pdef.resolver
                if isinstance(r, DynamicResolver) and r.rule in _UPSTREAM_RULES:
                    deps[key] = [(w.src, w.src_port) for w in self.flow.wires_into(node_id)]
                else:
                    deps[key] = []
        dependents: dict[tuple[str, str], list[tuple[str, str]]] = {k: [] for k in deps}
        pending = {}
        for key, targets in deps.items():
            pending[key] = len(targets)
            for t in targets:
                dependents[t].append(key)
        ready = sorted(k for k, n in pending.items() if n == 0)
        order: list[tuple[str, str]] = []
        while ready:
            key = ready.pop()
            order.append(key)
            for dep in dependents[key]:
                pending[dep] -= 1
                if pending[dep] == 0:
                    ready.append(dep)
        ordered = set(order)
        for key in deps:
            if key not in ordered:
                self._out_cache[key] = None  # on or fed by a dynamic-schema cycle
        for key in order:
            self._out_cache[key] = self._compute_output(*key)

    def output_schema(self, node_id: str, port: str) -> Optional[SchemaDoc]:
        """Effective schema a node emits on a port; None when underdetermined."""
        return self._out_cache.get((node_id, port))

    def _compute_output(self, node_id: str, port: str) -> Optional[SchemaDoc]:
        spec = self.spec(node_id)
        resolver = spec.output_port(port).resolver
        if isinstance(resolver, (ConstResolver, SelectResolver)):
            return resolve_port_schema(spec, self.config(node_id), port, "out")
        rule = resolver.rule
        if rule == "context":
            return self.consumer_meet(node_id, port)[0]
        if rule == "passthrough":
            return self.input_join(node_id)[0]
        if rule == "project":
            base = self.input_join(node_id)[0]
            config = self.config(node_id)
            fields = config.get("fields") or [] if isinstance(config, dict) else []
            if base is None or base.kind != "object":
                return None
            props = {k: v for k, v in (base.properties or {}).items() if k in fields}
            required = [k for k in (base.required or ()) if k in fields]
            return SchemaDoc.obj(props, required)
        if rule == "pair":
            props: dict[str, SchemaDoc] = {}
            for pdef in spec.inputs:
                sub = self.input_join(node_id, pdef.name)[0]
                if sub is None:
                    return None
                props[pdef.name] = sub
            return SchemaDoc.obj(props, required=list(props))
        return None

    def input_join(self, node_id: str, port: Optional[str] = None) -> tuple[Optional[SchemaDoc], Optional[str]]:
        """Join (most general) of producer schemas; (None, reason) when unknown or conflicting."""
        schemas: list[SchemaDoc] = []
        for wire in self.flow.wires_into(node_id, port):
            s = self.output_schema(wire.src, wire.src_port)
            if s is not None:
                schemas.append(s)
        if not schemas:
            return None, None
        joined = schemas[0]
        for s in schemas[1:]:
            if is_subtype(s, joined):
                continue
            if is_subtype(joined, s):
                joined = s
                continue
            return None, "conflicting-producers"
        return joined, None

    def consumer_meet(self, node_id: str, port: str) -> tuple[Optional[SchemaDoc], Optional[str]]:
        """Meet (most permissive schema every concrete consumer accepts)."""
        schemas: list[SchemaDoc] = []
        for wire in self.flow.wires_from(node_id, port):
            resolver = self.input_resolver(wire.dst, wire.dst_port)
            if isinstance(resolver, DynamicResolver):
                continue  # flexible consumer constrains nothing
            schemas.append(
                resolve_port_schema(self.spec(wire.dst), self.config(wire.dst), wire.dst_port, "in")
            )
        if not schemas:
            return None, None
        meet = schemas[0]
        for s in schemas[1:]:
            if is_subtype(meet, s):
                continue
            if is_subtype(s, meet):
                meet = s
                continue
            return None, "conflicting-consumers"
        return meet, None


def function_signature(
    flow: FlowGraph, registry: SpecRegistry, node_id: str, ctx: Optional[SchemaContext] = None
) -> tuple[Optional[SchemaDoc], Optional[SchemaDoc], list[Diagnostic]]:
    """(input, output) schemas of a function node derived from its graph context.

    Unwired or underdetermined sides come back None (input None is checked as
    an empty message; output None places no result constraint).
    """
    ctx = ctx or SchemaContext(flow, registry)
    diags: list[Diagnostic] = []
    spec = ctx.spec(node_id)
    in_port = spec.inputs[0].name if spec.inputs else "in"
    out_port = spec.outputs[0].name if spec.outputs else "out"
    input_schema, in_conflict = ctx.input_join(node_id, in_port)
    if in_conflict:
        diags.append(
            Diagnostic(
                "error",
                "conflicting-producers",
                NodeLoc(node_id, in_port),
                "producers feeding this node have incomparable schemas",
            )
        )
    output_schema, out_conflict = ctx.consumer_meet(node_id, out_port)
    if out_conflict:
        diags.append(
            Diagnostic(
                "error",
                "conflicting-consumers",
                NodeLoc(node_id, out_port),
                "consumers of this node accept no common schema",
            )
        )
    return input_schema, output_schema, diags


# -- per-entity checks ---------------------------------------------------------------

def _check_wire(ctx: SchemaContext, wire: Wire) -> list[Diagnostic]:
    consumer_resolver = ctx.input_resolver(wire.dst, wire.dst_port)
    if isinstance(consumer_resolver, DynamicResolver):
        return []
    consumer = resolve_port_schema(ctx.spec(wire.dst), ctx.config(wire.dst), wire.dst_port, "in")
    producer = ctx.output_schema(wire.src, wire.src_port)
    if producer is None:
        return []
    compat = is_subtype(producer, consumer)
    if compat:
        return []
    return [
        Diagnostic(
            "error",
            "wire-incompatible",
            WireLoc(wire),
            f"producer schema does not fit consumer at {compat.path or 'root'}: {compat.reason}",
        )
    ]


def _check_node(ctx: SchemaContext, node_id: str, reachable: frozenset[str]) -> list[Diagnostic]:
    flow, registry = ctx.flow, ctx.registry
    spec = ctx.spec(node_id)
    diags: list[Diagnostic] = []
    incoming = flow.wires_into(node_id)
    if spec.role != "datasource" and not incoming:
        diags.append(
            Diagnostic("warning", "unwired-input", NodeLoc(node_id), "node has no wired input")
        )
    if spec.role == "output" and node_id not in reachable:
        diags.append(
            Diagnostic(
                "warning",
                "unreachable-output",
                NodeLoc(node_id),
                "output node is not reachable from any datasource",
            )
        )
    body_key = _body_config_key(spec)
    if body_key is not None:
        diags.extend(_check_function_body(ctx, node_id, body_key))
    if _has_dynamic_input(spec):
        diags.extend(_check_config_against_input(ctx, node_id, spec))
    return diags


def _body_config_key(spec: NodeSpec) -> Optional[str]:
    """Function-style nodes carry their program in a string config property named body."""
    props = spec.config_schema.properties or {}
    body = props.get("body")
    if body is not None and body.kind == "string" and _is_context_node(spec):
        return "body"
    return None


def _is_context_node(spec: NodeSpec) -> bool:
    return any(
        isinstance(p.resolver, DynamicResolver) and p.resolver.rule == "context"
        for p in spec.inputs + spec.outputs
    )


def _has_dynamic_input(spec: NodeSpec) -> bool:
    return any(isinstance(p.resolver, DynamicResolver) for p in spec.inputs)


def _check_function_body(ctx: SchemaContext, node_id: str, body_key: str) -> list[Diagnostic]:
    config = ctx.config(node_id) or {}
    source = config.get(body_key, "")
    input_schema, output_schema, diags = function_signature(ctx.flow, ctx.registry, node_id, ctx)
    if any(d.severity == "error" for d in diags):
        return diags
    try:
        program = expr.parse(source)
    except expr.ParseError as e:
        diags.append(
            Diagnostic("error", "body-syntax", AstLoc(node_id, e.line, e.col), e.reason)
        )
        return diags
    producers = ctx.flow.wires_into(node_id)
    if producers and input_schema is None:
        diags.append(
            Diagnostic(
                "info",
                "signature-underdetermined",
                NodeLoc(node_id),
                "input schema could not be derived; body checked against an empty message",
            )
        )
    result = expr.infer_type(program, input_schema, output_schema)
    for d in result.diagnostics:
        diags.append(Diagnostic("error", "body-type", AstLoc(node_id, d.line, d.col), d.message))
    return diags


def _numeric_kind(schema: SchemaDoc) -> bool:
    return schema.kind in ("integer", "number")


def _check_config_against_input(ctx: SchemaContext, node_id: str, spec: NodeSpec) -> list[Diagnostic]:
    """Config options must make sense for the data actually arriving."""
    config = ctx.config(node_id) or {}
    diags: list[Diagnostic] = []
    if not isinstance(config, dict):
        return diags
    if "fields" in (spec.config_schema.properties or {}) and "fields" in config:
        base, _ = ctx.input_join(node_id)
        if base is not None:
            if base.kind != "object":
                diags.append(
                    Diagnostic(
                        "error",
                        "bad-projection",
                        NodeLoc(node_id),
                        "projection configured but the input is not an object",
                    )
                )
            else:
                missing = [f for f in config["fields"] if f not in (base.properties or {})]
                if missing:
                    diags.append(
                        Diagnostic(
                            "error",
                            "bad-projection",
                            NodeLoc(node_id),
                            f"configured fields not present in the input: {missing}",
                        )
                    )
    if "threshold" in (spec.config_schema.properties or {}) and "threshold" in config:
        base, _ = ctx.input_join(node_id)
        if base is not None:
            target = base
            field = config.get("field") or ""
            if field:
                if base.kind != "object" or field not in (base.properties or {}):
                    diags.append(
                        Diagnostic(
                            "error",
                            "bad-trigger-field",
                            NodeLoc(node_id),
                            f"configured field {field!r} not present in the input",
                        )
                    )
                    return diags
                target = base.properties[field]
            if not _numeric_kind(target):
                diags.append(
                    Diagnostic(
                        "error",
                        "bad-trigger-field",
                        NodeLoc(node_id),
                        "threshold comparison needs a numeric input",
                    )
                )
    return diags


def _reachable_from_datasources(flow: FlowGraph, registry: SpecRegistry) -> frozenset[str]:
    sources = [
        nid for nid in flow.nodes if registry.get(flow.nodes[nid].spec_id).role == "datasource"
    ]
    succ: dict[str, set[str]] = {}
    for w in flow.wires:
        succ.setdefault(w.src, set()).add(w.dst)
    seen = set(sources)
    stack = list(sources)
    while stack:
        for nxt in succ.get(stack.pop(), ()):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return frozenset(seen)


# -- whole-flow and incremental checks --------------------------------------------------

def check_flow(flow: FlowGraph, registry: SpecRegistry) -> list[Diagnostic]:
    """Full analysis; deterministically ordered by location."""
    ctx = SchemaContext(flow, registry)
    reachable = _reachable_from_datasources(flow, registry)
    diags: list[Diagnostic] = []
    for node_id in sorted(flow.nodes):
        diags.extend(_check_node(ctx, node_id, reachable))
    for wire in flow.wires:
        diags.extend(_check_wire(ctx, wire))
    return _sorted_diagnostics(diags)


def recheck_after_edit(
    flow: FlowGraph,
    registry: SpecRegistry,
    changed: ChangedSet,
    previous: Sequence[Diagnostic],
) -> list[Diagnostic]:
    """Recompute only the changed portion; equals check_flow on the edited graph.

    Function signatures look one hop downstream (the consumer meet), so the
    direct predecessors of changed nodes are rechecked as well.
    """
    ctx = SchemaContext(flow, registry)
    reachable = _reachable_from_datasources(flow, registry)
    recheck_nodes = set(changed.nodes)
    for wire in flow.wires:
        if wire.dst in changed.nodes:
            recheck_nodes.add(wire.src)
    recheck_wires = set(changed.wires)
    for wire in flow.wires:
        if wire.src in recheck_nodes or wire.dst in recheck_nodes:
            recheck_wires.add(wire)
    kept = [
        d
        for d in previous
        if not (
            (isinstance(d.loc, WireLoc) and d.loc.wire in recheck_wires)
            or (not isinstance(d.loc, WireLoc) and d.loc.owner() in recheck_nodes)
        )
    ]
    fresh: list[Diagnostic] = []
    for node_id in sorted(recheck_nodes):
        if node_id in flow.nodes:
            fresh.extend(_check_node(ctx, node_id, reachable))
    for wire in sorted(recheck_wires, key=Wire.key):
        if wire in flow.wires:
            fresh.extend(_check_wire(ctx, wire))
    return _sorted_diagnostics(kept + fresh)


def diagnostics_to_jsonl(diags: Sequence[Diagnostic]) -> str:
    import json

    return "".join(json.dumps(d.to_json(), ensure_ascii=False) + "\n" for d in diags)
