"""Flow graphs: node specifications, instances, typed ports, wires, edits.

A NodeSpec declares a node type (datasource / processor / output) with a
config schema, ports whose data schemas may depend on the configuration,
personal-data transfers, and a declared risk spectrum. A FlowGraph is an
immutable snapshot of instances and wires; edits produce new snapshots plus
the set of entities whose analyses must be recomputed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Any, Mapping, Optional, Sequence

from . import taint
from .schema import (
    SchemaDoc,
    SchemaError,
    ValueProfile,
    profile_from_json,
    profile_to_json,
    schema_from_json,
    schema_to_json,
    validate_profile,
    validate_value,
)

ROLES = ("datasource", "processor", "output")

# Graph-context portion of dynamic port schema resolution (see checker):
#   context      derive from connected neighbours (function node ports)
#   passthrough  output carries the input join unchanged
#   project      output carries the input join restricted to config "fields"
#   pair         output is an object with one property per input port
#   any          input port accepts any producer
DYNAMIC_RULES = ("context", "passthrough", "project", "pair", "any")


class FlowError(ValueError):
    """Structural flow problem; `code` and `location` identify it."""

    def __init__(self, code: str, message: str, location: Any = None):
        super().__init__(message)
        self.code = code
        self.location = location


class DuplicateSpecError(FlowError):
    def __init__(self, spec_id: str):
        super().__init__("duplicate-spec", f"spec {spec_id!r} already registered", spec_id)


class UnknownSpecError(FlowError):
    def __init__(self, spec_id: str):
        super().__init__("unknown-spec", f"spec {spec_id!r} not registered", spec_id)


class InvalidSpecError(FlowError):
    def __init__(self, message: str, location: Any = None):
        super().__init__("invalid-spec", message, location)


class UnknownPortError(FlowError):
    def __init__(self, message: str, location: Any = None):
        super().__init__("unknown-port", message, location)


class DynamicPortError(FlowError):
    """The port's schema is derived from graph context, not from config alone."""

    def __init__(self, message: str, location: Any = None):
        super().__init__("dynamic-port", message, location)


# -- port schema resolvers -----------------------------------------------------

@dataclass(frozen=True)
class ConstResolver:
    schema: SchemaDoc


@dataclass(frozen=True)
class SelectResolver:
    """Schema keyed on an enum-valued config property; must cover every enum value."""

    key: str
    cases: Mapping[str, SchemaDoc]


@dataclass(frozen=True)
class DynamicResolver:
    rule: str

    def __post_init__(self) -> None:
        if self.rule not in DYNAMIC_RULES:
            raise InvalidSpecError(f"unknown dynamic rule {self.rule!r}")


Resolver = Any


@dataclass(frozen=True)
class PortDef:
    name: str
    resolver: Resolver


@dataclass(frozen=True)
class NodeSpec:
    spec_id: str
    role: str
    config_schema: SchemaDoc
    inputs: tuple[PortDef, ...] = ()
    outputs: tuple[PortDef, ...] = ()
    transfers: Mapping[str, Any] = field(default_factory=dict)
    risk_spectrum: tuple[int, int] = (0, 0)
    insecure_hardware: bool = False
    exports_data: bool = False
    actuates: bool = False
    profiles: tuple[ValueProfile, ...] = ()
    help: str = ""
    granularity_options: Optional[tuple[int, ...]] = None

    def input_port(self, name: str) -> PortDef:
        for p in self.inputs:
            if p.name == name:
                return p
        raise UnknownPortError(f"{self.spec_id} has no input port {name!r}", (self.spec_id, name))

    def output_port(self, name: str) -> PortDef:
        for p in self.outputs:
            if p.name == name:
                return p
        raise UnknownPortError(f"{self.spec_id} has no output port {name!r}", (self.spec_id, name))


def _resolver_case_schemas(resolver: Resolver) -> list[SchemaDoc]:
    if isinstance(resolver, ConstResolver):
        return [resolver.schema]
    if isinstance(resolver, SelectResolver):
        return [resolver.cases[k] for k in sorted(resolver.cases)]
    return []


def validate_spec(spec: NodeSpec) -> None:
    """Raise InvalidSpecError on any spec invariant violation."""
    if not spec.spec_id:
        raise InvalidSpecError("spec id must be non-empty")
    if spec.role not in ROLES:
        raise InvalidSpecError(f"unknown role {spec.role!r}", spec.spec_id)
    if spec.role == "datasource" and spec.inputs:
        raise InvalidSpecError("datasource specs have zero input ports", spec.spec_id)
    if spec.role == "output" and spec.outputs:
        raise InvalidSpecError("output specs have zero output ports", spec.spec_id)
    lo, hi = spec.risk_spectrum
    if not (isinstance(lo, int) and isinstance(hi, int) and 0 <= lo <= hi <= 5):
        raise InvalidSpecError(f"risk spectrum {spec.risk_spectrum} not within [0,5] with lo <= hi", spec.spec_id)
    names = [p.name for p in spec.inputs] + [p.name for p in spec.outputs]
    if len(set(names)) != len(names):
        raise InvalidSpecError("port names must be unique", spec.spec_id)
    for port in spec.inputs + spec.outputs:
        _validate_resolver(spec, port)
    for port_name in spec.transfers:
        spec.output_port(port_name)
    if spec.granularity_options is not None:
        if not spec.granularity_options or any(
            not isinstance(g, int) or g <= 0 for g in spec.granularity_options
        ):
            raise InvalidSpecError("granularity options must be positive integers", spec.spec_id)
    for profile in spec.profiles:
        if not _profile_applies_somewhere(spec, profile):
            raise InvalidSpecError(
                f"profile {profile.name!r} does not fit any output schema", spec.spec_id
            )


def _validate_resolver(spec: NodeSpec, port: PortDef) -> None:
    r = port.resolver
    if isinstance(r, (ConstResolver, DynamicResolver)):
        return
    if isinstance(r, SelectResolver):
        props = spec.config_schema.properties or {}
        key_schema = props.get(r.key)
        if key_schema is None or key_schema.kind != "string" or key_schema.enum is None:
            raise InvalidSpecError(
                f"select resolver on port {port.name!r} needs an enum config property {r.key!r}",
                spec.spec_id,
            )
        if r.key not in (spec.config_schema.required or ()):
            raise InvalidSpecError(
                f"select resolver key {r.key!r} must be a required config property", spec.spec_id
            )
        missing = set(key_schema.enum) - set(r.cases)
        if missing:
            raise InvalidSpecError(
                f"select resolver on port {port.name!r} misses cases {sorted(missing)}", spec.spec_id
            )
        return
    raise InvalidSpecError(f"unknown resolver on port {port.name!r}", spec.spec_id)


def _profile_applies_somewhere(spec: NodeSpec, profile: ValueProfile) -> bool:
    for port in spec.outputs:
        for schema in _resolver_case_schemas(port.resolver):
            try:
                validate_profile(profile, schema)
                return True
            except Exception:
                continue
    return False


class SpecRegistry:
    """Immutable-by-convention store of NodeSpecs, keyed by spec id."""

    def __init__(self, specs: Sequence[NodeSpec] = ()):
        self._specs: dict[str, NodeSpec] = {}
        for spec in specs:
            self.register(spec)

    def register(self, spec: NodeSpec) -> "SpecRegistry":
        validate_spec(spec)
        if spec.spec_id in self._specs:
            raise DuplicateSpecError(spec.spec_id)
        self._specs[spec.spec_id] = spec
        return self

    def get(self, spec_id: str) -> NodeSpec:
        try:
            return self._specs[spec_id]
        except KeyError:
            raise UnknownSpecError(spec_id) from None

    def __contains__(self, spec_id: str) -> bool:
        return spec_id in self._specs

    def ids(self) -> list[str]:
        return sorted(self._specs)

    def specs(self) -> list[NodeSpec]:
        return [self._specs[k] for k in sorted(self._specs)]


def register_nodespec(spec: NodeSpec, registry: SpecRegistry) -> SpecRegistry:
    return registry.register(spec)


# -- flow graphs -----------------------------------------------------------------

@dataclass(frozen=True)
class NodeInstance:
    spec_id: str
    config: Any


@dataclass(frozen=True)
class Wire:
    src: str
    src_port: str
    dst: str
    dst_port: str

    def key(self) -> tuple[str, str, str, str]:
        return (self.src, self.src_port, self.dst, self.dst_port)


@dataclass(frozen=True)
class FlowGraph:
    flow_id: str
    name: str = ""
    version: str = "0"
    author: str = ""
    description: str = ""
    nodes: Mapping[str, NodeInstance] = field(default_factory=dict)
    wires: tuple[Wire, ...] = ()

    def with_wires(self, wires: Sequence[Wire]) -> "FlowGraph":
        return replace(self, wires=tuple(sorted(wires, key=Wire.key)))

    def wires_into(self, node_id: str, port: Optional[str] = None) -> list[Wire]:
        return [
            w for w in self.wires if w.dst == node_id and (port is None or w.dst_port == port)
        ]

    def wires_from(self, node_id: str, port: Optional[str] = None) -> list[Wire]:
        return [
            w for w in self.wires if w.src == node_id and (port is None or w.src_port == port)
        ]


def validate_flow(flow: FlowGraph, registry: SpecRegistry) -> None:
    """Raise FlowError on the first structural invariant violation."""
    for node_id in sorted(flow.nodes):
        inst = flow.nodes[node_id]
        if inst.spec_id not in registry:
            raise FlowError("unknown-spec", f"node {node_id!r} uses unknown spec {inst.spec_id!r}", node_id)
        spec = registry.get(inst.spec_id)
        result = validate_value(inst.config, spec.config_schema)
        if not result.ok:
            raise FlowError(
                "bad-config",
                f"node {node_id!r} config invalid at {', '.join(result.violations) or 'root'}",
                node_id,
            )
        if spec.granularity_options is not None and isinstance(inst.config, dict):
            period = inst.config.get("period")
            if period is not None and period not in spec.granularity_options:
                raise FlowError(
                    "bad-config",
                    f"node {node_id!r} period {period} not an offered granularity",
                    node_id,
                )
    seen = set()
    for wire in flow.wires:
        if wire.key() in seen:
            raise FlowError("duplicate-wire", f"duplicate wire {wire.key()}", wire.key())
        seen.add(wire.key())
        for end, port, direction in ((wire.src, wire.src_port, "out"), (wire.dst, wire.dst_port, "in")):
            if end not in flow.nodes:
                raise FlowError("dangling-wire", f"wire endpoint {end!r} does not exist", wire.key())
            spec = registry.get(flow.nodes[end].spec_id)
            ports = spec.outputs if direction == "out" else spec.inputs
            if all(p.name != port for p in ports):
                raise FlowError(
                    "dangling-wire",
                    f"wire references port {port!r} not declared by {spec.spec_id!r}",
                    wire.key(),
                )


def resolve_port_schema(spec: NodeSpec, config: Any, port: str, direction: str) -> SchemaDoc:
    """The concrete schema a port carries under this configuration.

    Ports with graph-context resolution (function / extract / trigger style
    nodes) raise DynamicPortError; use the checker's effective-schema helpers
    for those.
    """
    pdef = spec.output_port(port) if direction == "out" else spec.input_port(port)
    r = pdef.resolver
    if isinstance(r, ConstResolver):
        return r.schema
    if isinstance(r, SelectResolver):
        key = config.get(r.key) if isinstance(config, dict) else None
        if key not in r.cases:
            raise FlowError("bad-config", f"no schema case for {r.key}={key!r}", (spec.spec_id, port))
        return r.cases[key]
    raise DynamicPortError(
        f"port {port!r} of {spec.spec_id!r} derives its schema from graph context",
        (spec.spec_id, port),
    )


# -- flow file round-trip ----------------------------------------------------------

_FLOW_KEYS = {"id", "name", "version", "meta", "nodes", "wires"}


def load_flow(document: bytes | str, registry: SpecRegistry) -> FlowGraph:
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    try:
        data = json.loads(document)
    except json.JSONDecodeError as e:
        raise FlowError("parse-error", f"flow file is not valid JSON: {e}", (e.lineno, e.colno)) from None
    return flow_from_json(data, registry)


def flow_from_json(data: Any, registry: SpecRegistry) -> FlowGraph:
    if not isinstance(data, dict):
        raise FlowError("parse-error", "flow document must be a JSON object")
    unknown = set(data) - _FLOW_KEYS
    if unknown:
        raise FlowError("parse-error", f"unknown top-level keys: {sorted(unknown)}")
    meta = data.get("meta") or {}
    if not isinstance(meta, dict) or set(meta) - {"author", "description"}:
        raise FlowError("parse-error", "meta must hold only author/description")
    nodes: dict[str, NodeInstance] = {}
    for entry in data.get("nodes", ()):
        if not isinstance(entry, dict) or set(entry) != {"id", "spec", "config"}:
            raise FlowError("parse-error", f"node entry needs exactly id/spec/config: {entry!r}")
        node_id = entry["id"]
        if not isinstance(node_id, str) or not node_id:
            raise FlowError("parse-error", "node id must be a non-empty string")
        if node_id in nodes:
            raise FlowError("parse-error", f"duplicate node id {node_id!r}", node_id)
        nodes[node_id] = NodeInstance(entry["spec"], entry["config"])
    wires = []
    for entry in data.get("wires", ()):
        if (
            not isinstance(entry, dict)
            or set(entry) != {"from", "to"}
            or len(entry["from"]) != 2
            or len(entry["to"]) != 2
        ):
            raise FlowError("parse-error", f"wire entry needs from/to pairs: {entry!r}")
        wires.append(Wire(entry["from"][0], entry["from"][1], entry["to"][0], entry["to"][1]))
    flow = FlowGraph(
        flow_id=str(data.get("id", "")),
        name=str(data.get("name", "")),
        version=str(data.get("version", "0")),
        author=str(meta.get("author", "")),
        description=str(meta.get("description", "")),
        nodes=nodes,
        wires=tuple(sorted(wires, key=Wire.key)),
    )
    validate_flow(flow, registry)
    return flow


def flow_to_json(flow: FlowGraph) -> dict:
    return {
        "id": flow.flow_id,
        "name": flow.name,
        "version": flow.version,
        "meta": {"author": flow.author, "description": flow.description},
        "nodes": [
            {"id": nid, "spec": flow.nodes[nid].spec_id, "config": flow.nodes[nid].config}
            for nid in sorted(flow.nodes)
        ],
        "wires": [
            {"from": [w.src, w.src_port], "to": [w.dst, w.dst_port]}
            for w in sorted(flow.wires, key=Wire.key)
        ],
    }


def save_flow(flow: FlowGraph) -> str:
    """Canonical flow file text: sorted nodes and wires, stable key order."""
    return json.dumps(flow_to_json(flow), indent=2, ensure_ascii=False) + "\n"


# -- edits --------------------------------------------------------------------------

@dataclass(frozen=True)
class AddNode:
    node_id: str
    spec_id: str
    config: Any


@dataclass(frozen=True)
class RemoveNode:
    node_id: str


@dataclass(frozen=True)
class AddWire:
    wire: Wire


@dataclass(frozen=True)
class RemoveWire:
    wire: Wire


@dataclass(frozen=True)
class Reconfigure:
    node_id: str
    config: Any


FlowEdit = Any  # one of the five edit dataclasses


@dataclass(frozen=True)
class ChangedSet:
    """Entities whose analyses must be recomputed after an edit."""

    nodes: frozenset[str]
    wires: frozenset[Wire]


def downstream_nodes(flow: FlowGraph, start: Sequence[str]) -> frozenset[str]:
    """Transitive closure over wires, including the start nodes themselves."""
    succ: dict[str, set[str]] = {}
    for w in flow.wires:
        succ.setdefault(w.src, set()).add(w.dst)
    seen = set(start)
    stack = list(start)
    while stack:
        for nxt in succ.get(stack.pop(), ()):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return frozenset(seen)


def _incident_wires(flow: FlowGraph, nodes: frozenset[str]) -> frozenset[Wire]:
    return frozenset(w for w in flow.wires if w.src in nodes or w.dst in nodes)


def apply_edit(flow: FlowGraph, edit: FlowEdit, registry: SpecRegistry) -> tuple[FlowGraph, ChangedSet]:
    """Apply one edit atomically; failed edits raise and leave the input unchanged."""
    if isinstance(edit, AddNode):
        if edit.node_id in flow.nodes:
            raise FlowError("edit-conflict", f"node {edit.node_id!r} already exists", edit.node_id)
        nodes = dict(flow.nodes)
        nodes[edit.node_id] = NodeInstance(edit.spec_id, edit.config)
        new = replace(flow, nodes=nodes)
        validate_flow(new, registry)
        changed_nodes = frozenset({edit.node_id})
        return new, ChangedSet(changed_nodes, frozenset())
    if isinstance(edit, RemoveNode):
        if edit.node_id not in flow.nodes:
            raise FlowError("edit-missing", f"node {edit.node_id!r} does not exist", edit.node_id)
        changed_nodes = downstream_nodes(flow, [edit.node_id])
        removed_wires = frozenset(
            w for w in flow.wires if w.src == edit.node_id or w.dst == edit.node_id
        )
        nodes = {k: v for k, v in flow.nodes.items() if k != edit.node_id}
        new = replace(
            flow,
            nodes=nodes,
            wires=tuple(w for w in flow.wires if w not in removed_wires),
        )
        validate_flow(new, registry)
        changed_wires = removed_wires | _incident_wires(new, changed_nodes)
        return new, ChangedSet(changed_nodes, changed_wires)
    if isinstance(edit, AddWire):
        w = edit.wire
        if w in flow.wires:
            raise FlowError("edit-conflict", f"wire {w.key()} already exists", w.key())
        new = flow.with_wires(flow.wires + (w,))
        validate_flow(new, registry)
        changed_nodes = downstream_nodes(new, [w.dst]) | {w.src}
        changed_wires = frozenset({w}) | _incident_wires(new, changed_nodes)
        return new, ChangedSet(changed_nodes, changed_wires)
    if isinstance(edit, RemoveWire):
        w = edit.wire
        if w not in flow.wires:
            raise FlowError("edit-missing", f"wire {w.key()} does not exist", w.key())
        changed_nodes = downstream_nodes(flow, [w.dst]) | {w.src}
        new = flow.with_wires(tuple(x for x in flow.wires if x != w))
        validate_flow(new, registry)
        changed_wires = frozenset({w}) | _incident_wires(new, changed_nodes)
        return new, ChangedSet(changed_nodes, changed_wires)
    if isinstance(edit, Reconfigure):
        if edit.node_id not in flow.nodes:
            raise FlowError("edit-missing", f"node {edit.node_id!r} does not exist", edit.node_id)
        nodes = dict(flow.nodes)
        nodes[edit.node_id] = NodeInstance(nodes[edit.node_id].spec_id, edit.config)
        new = replace(flow, nodes=nodes)
        validate_flow(new, registry)
        changed_nodes = downstream_nodes(new, [edit.node_id])
        return new, ChangedSet(changed_nodes, _incident_wires(new, changed_nodes))
    raise FlowError("edit-unknown", f"unknown edit {edit!r}")


# -- nodespec serialization -----------------------------------------------------------

def _resolver_to_json(resolver: Resolver) -> dict:
    if isinstance(resolver, ConstResolver):
        return {"const": schema_to_json(resolver.schema)}
    if isinstance(resolver, SelectResolver):
        return {
            "select": {
                "key": resolver.key,
                "cases": {k: schema_to_json(v) for k, v in sorted(resolver.cases.items())},
            }
        }
    return {"dynamic": resolver.rule}


def _resolver_from_json(data: Any) -> Resolver:
    if not isinstance(data, dict) or len(data) != 1:
        raise InvalidSpecError(f"resolver must be a single-key object: {data!r}")
    key, payload = next(iter(data.items()))
    if key == "const":
        return ConstResolver(schema_from_json(payload))
    if key == "select":
        return SelectResolver(
            payload["key"], {k: schema_from_json(v) for k, v in payload["cases"].items()}
        )
    if key == "dynamic":
        return DynamicResolver(payload)
    raise InvalidSpecError(f"unknown resolver key {key!r}")


def spec_to_json(spec: NodeSpec) -> dict:
    out: dict[str, Any] = {
        "id": spec.spec_id,
        "role": spec.role,
        "config": schema_to_json(spec.config_schema),
        "inputs": [{"name": p.name, "resolver": _resolver_to_json(p.resolver)} for p in spec.inputs],
        "outputs": [
            {
                "name": p.name,
                "resolver": _resolver_to_json(p.resolver),
                "transfer": taint.transfer_to_json(
                    spec.transfers.get(p.name, taint.PassthroughTransfer())
                ),
            }
            for p in spec.outputs
        ],
        "risk": list(spec.risk_spectrum),
        "flags": {
            "insecure_hardware": spec.insecure_hardware,
            "exports_data": spec.exports_data,
            "actuates": spec.actuates,
        },
        "profiles": [profile_to_json(p) for p in spec.profiles],
        "help": spec.help,
    }
    if spec.granularity_options is not None:
        out["granularity"] = list(spec.granularity_options)
    return out


def spec_from_json(data: Any) -> NodeSpec:
    if not isinstance(data, dict):
        raise InvalidSpecError("nodespec must be a JSON object")
    try:
        flags = data.get("flags") or {}
        spec = NodeSpec(
            spec_id=data["id"],
            role=data["role"],
            config_schema=schema_from_json(data["config"]),
            inputs=tuple(
                PortDef(p["name"], _resolver_from_json(p["resolver"])) for p in data.get("inputs", ())
            ),
            outputs=tuple(
                PortDef(p["name"], _resolver_from_json(p["resolver"])) for p in data.get("outputs", ())
            ),
            transfers={
                p["name"]: taint.transfer_from_json(p["transfer"])
                for p in data.get("outputs", ())
                if "transfer" in p
            },
            risk_spectrum=tuple(data.get("risk", (0, 0))),
            insecure_hardware=bool(flags.get("insecure_hardware", False)),
            exports_data=bool(flags.get("exports_data", False)),
            actuates=bool(flags.get("actuates", False)),
            profiles=tuple(profile_from_json(p) for p in data.get("profiles", ())),
            help=data.get("help", ""),
            granularity_options=tuple(data["granularity"]) if "granularity" in data else None,
        )
    except (KeyError, TypeError, SchemaError, taint.LabelError) as e:
        raise InvalidSpecError(f"malformed nodespec: {e}") from None
    validate_spec(spec)
    return spec
