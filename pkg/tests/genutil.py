"""Seeded random generators and brute-force oracles shared across the suite.

Everything here is deliberately independent of the implementation paths it
checks: containment is decided by enumeration + validation, reachability by
brute-force graph walks, label fixpoints by round-robin iteration.
"""

from __future__ import annotations

import random
from typing import Optional

from flowkit.model import (
    AddNode,
    AddWire,
    ConstResolver,
    FlowGraph,
    NodeInstance,
    NodeSpec,
    PortDef,
    Reconfigure,
    RemoveNode,
    RemoveWire,
    SpecRegistry,
    Wire,
)
from flowkit.schema import SchemaDoc, domain_size, enumerate_values, generate_value, validate_value
from flowkit.taint import (
    ClearTransfer,
    Condition,
    EmitTransfer,
    FilterTransfer,
    PassthroughTransfer,
    PersonalAtom,
    input_label,
    node_transfer,
)

_WORDS = ("lux", "ts", "x", "y", "z", "text", "level", "state", "mode", "value")
_ENUMS = ("on", "off", "auto", "hot", "cold", "dim")


# -- random schemas ------------------------------------------------------------

def rand_schema(
    rng: random.Random, depth: int = 0, unions: bool = True, finite: bool = False
) -> SchemaDoc:
    choices = ["boolean", "integer", "string"]
    if not finite:
        choices.append("number")
    if depth < 2:
        choices += ["array", "object"]
        if unions:
            choices.append("union")
    kind = rng.choice(choices)
    if kind == "boolean":
        return SchemaDoc.boolean()
    if kind == "integer":
        if finite or rng.random() < 0.8:
            lo = rng.randint(-20, 20)
            return SchemaDoc.integer(lo, lo + rng.randint(0, 30))
        lo = rng.choice([None, rng.randint(-100, 0)])
        hi = rng.choice([None, rng.randint(1, 100)])
        return SchemaDoc.integer(lo, hi)
    if kind == "number":
        if rng.random() < 0.7:
            lo = round(rng.uniform(-50, 50), 2)
            return SchemaDoc.number(lo, round(lo + rng.uniform(0, 100), 2))
        return SchemaDoc.number()
    if kind == "string":
        if finite or rng.random() < 0.6:
            n = rng.randint(1, min(4, len(_ENUMS)))
            return SchemaDoc.string(sorted(rng.sample(_ENUMS, n)))
        return SchemaDoc.string()
    if kind == "array":
        items = rand_schema(rng, depth + 1, unions, finite)
        if finite or rng.random() < 0.7:
            lo = rng.randint(0, 2)
            return SchemaDoc.array(items, lo, lo + rng.randint(0, 2))
        return SchemaDoc.array(items)
    if kind == "object":
        n = rng.randint(0, 3)
        names = rng.sample(_WORDS, n)
        props = {name: rand_schema(rng, depth + 1, unions, finite) for name in names}
        required = [name for name in names if rng.random() < 0.6]
        return SchemaDoc.obj(props, required)
    arms = [rand_schema(rng, depth + 1, unions, finite) for _ in range(rng.randint(1, 3))]
    return SchemaDoc.union(arms)


def narrow_schema(rng: random.Random, schema: SchemaDoc) -> SchemaDoc:
    """A plausibly-narrower producer for a consumer schema (not guaranteed narrower)."""
    kind = schema.kind
    if kind == "integer" or kind == "number":
        lo = schema.min if schema.min is not None else -30
        hi = schema.max if schema.max is not None else 30
        if rng.random() < 0.3:
            return SchemaDoc.integer(int(lo), int(max(lo, hi)))  # integer narrows into number
        a = rng.uniform(float(lo), float(hi))
        b = rng.uniform(a, float(hi))
        if kind == "integer":
            return SchemaDoc.integer(int(a), max(int(a), int(b)))
        return SchemaDoc.number(round(a, 2), round(b, 2))
    if kind == "string" and schema.enum:
        n = rng.randint(1, len(schema.enum))
        return SchemaDoc.string(sorted(rng.sample(list(schema.enum), n)))
    if kind == "array":
        lo = schema.min_len if schema.min_len is not None else 0
        hi = schema.max_len if schema.max_len is not None else lo + 2
        a = rng.randint(lo, hi)
        return SchemaDoc.array(narrow_schema(rng, schema.items), a, rng.randint(a, hi))
    if kind == "object":
        props = {}
        required = set(schema.required or ())
        for name, sub in (schema.properties or {}).items():
            if name in required or rng.random() < 0.7:
                props[name] = narrow_schema(rng, sub)
        req = set(props) & required
        for name in props:
            if rng.random() < 0.5:
                req.add(name)
        return SchemaDoc.obj(props, sorted(req))
    if kind == "union":
        return narrow_schema(rng, schema.arms[rng.randrange(len(schema.arms))])
    return schema


def brute_containment(producer: SchemaDoc, consumer: SchemaDoc, budget: int = 10_000) -> Optional[bool]:
    """Set containment by exhaustive enumeration; None when the producer domain is too big."""
    values = enumerate_values(producer, budget)
    if values is None:
        return None
    return all(validate_value(v, consumer).ok for v in values)


# -- random flows over synthetic specs ----------------------------------------------

_ATOM_POOL = (
    PersonalAtom("identifier", "handle"),
    PersonalAtom("identifier", "device-id"),
    PersonalAtom("sensitive", "health"),
    PersonalAtom("personal", "location"),
    PersonalAtom("personal", "motion"),
    PersonalAtom("personal", "gait", "secondary", (Condition.granularity_at_most(100),)),
    PersonalAtom("personal", "routines", "secondary", (Condition.requires_atom("location"),)),
    PersonalAtom("sensitive", "mood", "secondary", (Condition.requires_atom("motion"),)),
)

_PASS_SCHEMA = SchemaDoc.obj({"v": SchemaDoc.number()}, required=["v"])


def synthetic_specs(rng: random.Random, n_source: int = 3, n_proc: int = 4) -> SpecRegistry:
    """Small universe of specs with varied label transfers for taint testing."""
    specs = []
    for i in range(n_source):
        atoms = tuple(
            rng.sample(_ATOM_POOL, rng.randint(1, 3))
        )
        specs.append(
            NodeSpec(
                spec_id=f"src{i}",
                role="datasource",
                config_schema=SchemaDoc.obj(
                    {"period": SchemaDoc.integer(10, 10000)}, required=["period"]
                ),
                outputs=(PortDef("out", ConstResolver(_PASS_SCHEMA)),),
                transfers={"out": EmitTransfer(atoms)},
                risk_spectrum=(0, 3),
            )
        )
    for i in range(n_proc):
        roll = rng.random()
        if roll < 0.4:
            extra = tuple(rng.sample(_ATOM_POOL, rng.randint(0, 2)))
            transfer = PassthroughTransfer(extra)
        elif roll < 0.7:
            transfer = FilterTransfer(
                drop_categories=tuple(
                    rng.sample(("identifier", "sensitive", "personal"), rng.randint(0, 2))
                ),
                drop_tags=tuple(rng.sample(("handle", "location", "motion"), rng.randint(0, 2))),
            )
        elif roll < 0.85:
            transfer = ClearTransfer()
        else:
            transfer = PassthroughTransfer()
        specs.append(
            NodeSpec(
                spec_id=f"proc{i}",
                role="processor",
                config_schema=SchemaDoc.obj({}),
                inputs=(PortDef("in", ConstResolver(_PASS_SCHEMA)),),
                outputs=(PortDef("out", ConstResolver(_PASS_SCHEMA)),),
                transfers={"out": transfer},
                risk_spectrum=(0, 2),
            )
        )
    specs.append(
        NodeSpec(
            spec_id="sink",
            role="output",
            config_schema=SchemaDoc.obj({}),
            inputs=(PortDef("in", ConstResolver(_PASS_SCHEMA)),),
            risk_spectrum=(0, 1),
        )
    )
    return SpecRegistry(specs)


def rand_labeled_flow(rng: random.Random, registry: SpecRegistry, max_nodes: int = 8) -> FlowGraph:
    """Random wiring over the synthetic specs; cycles between processors allowed."""
    spec_ids = registry.ids()
    sources = [s for s in spec_ids if registry.get(s).role == "datasource"]
    procs = [s for s in spec_ids if registry.get(s).role == "processor"]
    sinks = [s for s in spec_ids if registry.get(s).role == "output"]
    n = rng.randint(1, max_nodes)
    nodes = {}
    for i in range(n):
        roll = rng.random()
        if roll < 0.3:
            spec_id = rng.choice(sources)
            config = {"period": rng.choice([10, 50, 100, 1000, 10000])}
        elif roll < 0.85:
            spec_id = rng.choice(procs)
            config = {}
        else:
            spec_id = rng.choice(sinks)
            config = {}
        nodes[f"n{i}"] = NodeInstance(spec_id, config)
    wires = set()
    for _ in range(rng.randint(0, 2 * n)):
        src = rng.choice(sorted(nodes))
        dst = rng.choice(sorted(nodes))
        src_spec = registry.get(nodes[src].spec_id)
        dst_spec = registry.get(nodes[dst].spec_id)
        if not src_spec.outputs or not dst_spec.inputs:
            continue
        wires.add(Wire(src, "out", dst, "in"))
    return FlowGraph(flow_id="random", name="random", nodes=nodes, wires=tuple(sorted(wires, key=Wire.key)))


def naive_propagate(flow: FlowGraph, registry: SpecRegistry) -> dict:
    """Round-robin iterate-to-stability label propagation (independent oracle)."""
    labels = {w: frozenset() for w in flow.wires}
    for _ in range(len(flow.wires) * 8 + len(_ATOM_POOL) * len(flow.wires) + 8):
        changed = False
        for wire in flow.wires:
            inst = flow.nodes[wire.src]
            spec = registry.get(inst.spec_id)
            incoming = input_label(flow, wire.src, labels)
            out = node_transfer(spec, inst.config, incoming).get(wire.src_port, frozenset())
            if out != labels[wire]:
                labels[wire] = out
                changed = True
        if not changed:
            return labels
    raise AssertionError("naive propagation failed to stabilize")


def brute_downstream(flow: FlowGraph, start: str) -> frozenset:
    """Exhaustive reachability by repeated edge relaxation."""
    reach = {start}
    for _ in range(len(flow.nodes) + 1):
        for w in flow.wires:
            if w.src in reach:
                reach.add(w.dst)
    return frozenset(reach)


def rand_edit(rng: random.Random, flow: FlowGraph, registry: SpecRegistry):
    """One applicable random edit for the incremental-vs-batch differential."""
    spec_ids = registry.ids()
    options = ["add_node"]
    if flow.nodes:
        options += ["remove_node", "reconfigure", "add_wire"]
    if flow.wires:
        options.append("remove_wire")
    kind = rng.choice(options)
    if kind == "add_node":
        spec_id = rng.choice(spec_ids)
        spec = registry.get(spec_id)
        config = {"period": rng.choice([10, 100, 1000])} if spec.role == "datasource" else {}
        fresh = f"n{rng.randrange(10_000)}"
        while fresh in flow.nodes:
            fresh = f"n{rng.randrange(10_000)}"
        return AddNode(fresh, spec_id, config)
    if kind == "remove_node":
        return RemoveNode(rng.choice(sorted(flow.nodes)))
    if kind == "reconfigure":
        node_id = rng.choice(sorted(flow.nodes))
        spec = registry.get(flow.nodes[node_id].spec_id)
        config = {"period": rng.choice([10, 100, 1000])} if spec.role == "datasource" else {}
        return Reconfigure(node_id, config)
    if kind == "add_wire":
        for _ in range(20):
            src = rng.choice(sorted(flow.nodes))
            dst = rng.choice(sorted(flow.nodes))
            if not registry.get(flow.nodes[src].spec_id).outputs:
                continue
            if not registry.get(flow.nodes[dst].spec_id).inputs:
                continue
            wire = Wire(src, "out", dst, "in")
            if wire not in flow.wires:
                return AddWire(wire)
        return None
    return RemoveWire(rng.choice(sorted(flow.wires, key=Wire.key)))


# -- random well-typed expressions ---------------------------------------------------

from flowkit.expr.nodes import (  # noqa: E402
    ArrLit,
    Binary,
    Call,
    FieldAccess,
    If,
    Let,
    Lit,
    ObjLit,
    Unary,
    Var,
)
from flowkit.expr.types import (  # noqa: E402
    BOOL,
    INT,
    NUM,
    STR,
    Arr,
    Obj,
    Prim,
    schema_to_type,
    type_subtype,
)

_LETTERS = "abcdefgh"


class ExprGen:
    """Builds random programs that infer_type accepts against the input schema.

    The only runtime failures the generated programs may hit are the declared
    ones (division by zero, overflow); anything else is a type-safety bug.
    """

    def __init__(self, rng: random.Random, input_schema: SchemaDoc):
        self.rng = rng
        self.input_type = schema_to_type(input_schema)
        self.paths: list[tuple] = []  # (builder, type, optional)
        self._collect(lambda: Var("msg"), self.input_type, False, 0)
        self.counter = 0

    def _collect(self, builder, t, optional, depth) -> None:
        self.paths.append((builder, t, optional))
        if isinstance(t, Obj) and depth < 3:
            for name, ftype, opt in t.fields:
                if optional:
                    continue  # cannot descend through an optional field
                make = (lambda b, n: lambda: FieldAccess(b(), n))(builder, name)
                self._collect(make, ftype, opt, depth + 1)

    def fresh(self) -> str:
        self.counter += 1
        return f"{_LETTERS[self.counter % len(_LETTERS)]}{self.counter}"

    def paths_of(self, target, scope) -> list:
        out = []
        for builder, t, optional in self.paths:
            if optional:
                continue
            if type_subtype(t, target):
                out.append((builder, t))
        for name, t in scope:
            if type_subtype(t, target):
                out.append(((lambda n: lambda: Var(n))(name), t))
        return out

    def optional_paths_of(self, target) -> list:
        return [
            (builder, t)
            for builder, t, optional in self.paths
            if optional and type_subtype(t, target) and isinstance(t, (Prim,))
        ]

    def literal(self, target):
        rng = self.rng
        if target == BOOL:
            return Lit(rng.random() < 0.5)
        if target == INT:
            return Lit(rng.randint(0, 50))
        if target == NUM:
            return Lit(round(rng.uniform(0, 50), 3)) if rng.random() < 0.7 else Lit(rng.randint(0, 50))
        if target == STR:
            return Lit(rng.choice(["on", "off", "warm", ""]))
        if isinstance(target, Arr):
            return ArrLit(tuple(self.gen(target.item, 0, []) for _ in range(rng.randint(0, 2))))
        if isinstance(target, Obj):
            return ObjLit(tuple((n, self.gen(t, 0, [])) for n, t, _ in target.fields))
        raise AssertionError(target)

    def gen(self, target, depth, scope):
        rng = self.rng
        if depth <= 0:
            candidates = self.paths_of(target, scope)
            if candidates and rng.random() < 0.6:
                builder, _ = rng.choice(candidates)
                return builder()
            return self.literal(target)
        roll = rng.random()
        if roll < 0.12:
            name = self.fresh()
            bound_t = rng.choice([BOOL, INT, NUM, STR])
            value = self.gen(bound_t, depth - 1, scope)
            body = self.gen(target, depth - 1, scope + [(name, bound_t)])
            return Let(name, value, body)
        if roll < 0.24:
            return If(
                self.gen(BOOL, depth - 1, scope),
                self.gen(target, depth - 1, scope),
                self.gen(target, depth - 1, scope),
            )
        if roll < 0.34:
            options = self.optional_paths_of(target)
            if options:
                builder, t = rng.choice(options)
                return Call("coalesce", (builder(), self.gen(t, depth - 1, scope)))
        if target == BOOL:
            return self._gen_bool(depth, scope)
        if target in (INT, NUM):
            return self._gen_numeric(target, depth, scope)
        if target == STR:
            roll = rng.random()
            if roll < 0.3:
                return If(
                    self.gen(BOOL, depth - 1, scope),
                    self.gen(STR, depth - 1, scope),
                    self.gen(STR, depth - 1, scope),
                )
            return self.gen(STR, 0, scope)
        return self.gen(target, 0, scope)

    def _gen_bool(self, depth, scope):
        rng = self.rng
        roll = rng.random()
        if roll < 0.3:
            op = rng.choice(["<", "<=", ">", ">=", "==", "!="])
            return Binary(
                op,
                self.gen(rng.choice([INT, NUM]), depth - 1, scope),
                self.gen(rng.choice([INT, NUM]), depth - 1, scope),
            )
        if roll < 0.5:
            op = rng.choice(["&&", "||"])
            return Binary(op, self.gen(BOOL, depth - 1, scope), self.gen(BOOL, depth - 1, scope))
        if roll < 0.6:
            return Unary("!", self.gen(BOOL, depth - 1, scope))
        if roll < 0.7:
            t = rng.choice([STR, BOOL])
            return Binary("==", self.gen(t, depth - 1, scope), self.gen(t, depth - 1, scope))
        if roll < 0.8:
            hay = self.gen(Arr(INT), depth - 1, scope)
            return Call("contains", (hay, self.gen(INT, depth - 1, scope)))
        return self.gen(BOOL, 0, scope)

    def _gen_numeric(self, target, depth, scope):
        rng = self.rng
        roll = rng.random()
        operand = INT if target == INT else rng.choice([INT, NUM])
        if roll < 0.35:
            op = rng.choice(["+", "-", "*", "/", "%"]) if target == INT else rng.choice(["+", "-", "*", "/"])
            return Binary(op, self.gen(operand, depth - 1, scope), self.gen(target, depth - 1, scope))
        if roll < 0.45:
            return Call("abs", (self.gen(target, depth - 1, scope),))
        if roll < 0.55:
            fn = rng.choice(["min", "max"])
            return Call(fn, (self.gen(target, depth - 1, scope), self.gen(target, depth - 1, scope)))
        if roll < 0.65 and target == INT:
            return Call("round", (self.gen(NUM, depth - 1, scope),))
        if roll < 0.75 and target == INT:
            return Call("len", (self.gen(Arr(rng.choice([INT, BOOL, STR])), depth - 1, scope),))
        if roll < 0.85:
            return Unary("-", self.gen(target, depth - 1, scope))
        return self.gen(target, 0, scope)

    def program(self, depth: int = 3):
        pool = [BOOL, INT, NUM, STR, Arr(INT), Arr(BOOL)]
        fields = tuple(
            (n, self.rng.choice([BOOL, INT, NUM, STR]), False) for n in ("p", "q")
        )
        pool.append(Obj(tuple(sorted(fields))))
        target = self.rng.choice(pool)
        return self.gen(target, depth, [])


# -- random flows over the builtin palette -------------------------------------------

_BODY_POOL = (
    "msg",
    "msg.lux > 1000",
    "msg.lux / 1000",
    "1 + 1",
    "coalesce(msg.likes, 0)",
    "msg.",          # syntax error
    "msg.zz + 1",    # type error against most inputs
    "{x: 1, y: 2}",
)

_FIELD_POOL = ("lux", "ts", "text", "handle", "likes", "x", "y", "z", "zz")


def sample_config(rng: random.Random, spec: NodeSpec) -> dict:
    """A structurally valid (schema-conforming) random config for a spec."""
    props = spec.config_schema.properties or {}
    required = spec.config_schema.required or frozenset()
    config: dict = {}
    for name in sorted(props):
        sub = props[name]
        if name not in required and rng.random() < 0.4:
            continue
        if name == "period" and spec.granularity_options:
            config[name] = rng.choice(spec.granularity_options)
        elif sub.kind == "string" and sub.enum:
            config[name] = rng.choice(sub.enum)
        elif sub.kind == "string":
            config[name] = rng.choice(_BODY_POOL) if name == "body" else rng.choice(_FIELD_POOL)
        elif sub.kind == "integer":
            lo = int(sub.min) if sub.min is not None else 0
            hi = int(sub.max) if sub.max is not None else lo + 1000
            config[name] = rng.randint(lo, min(hi, lo + 1000))
        elif sub.kind == "number":
            config[name] = rng.choice([0, 100, 500, 1000, 20000])
        elif sub.kind == "boolean":
            config[name] = rng.random() < 0.5
        elif sub.kind == "array" and sub.items is not None and sub.items.kind == "string":
            low = sub.min_len or 0
            pool = list(sub.items.enum) if sub.items.enum else list(_FIELD_POOL)
            count = rng.randint(max(low, 0), min(len(pool), max(low, 2)))
            config[name] = sorted(rng.sample(pool, count)) if count else []
        else:
            config[name] = None
    return config


def rand_builtin_flow(rng: random.Random, registry: SpecRegistry, max_nodes: int = 8) -> FlowGraph:
    """Random wiring over the real palette; exercises dynamic port schemas."""
    spec_ids = registry.ids()
    n = rng.randint(1, max_nodes)
    nodes = {}
    for i in range(n):
        spec_id = rng.choice(spec_ids)
        nodes[f"n{i}"] = NodeInstance(spec_id, sample_config(rng, registry.get(spec_id)))
    wires = set()
    names = sorted(nodes)
    for _ in range(rng.randint(0, 2 * n)):
        src = rng.choice(names)
        dst = rng.choice(names)
        src_spec = registry.get(nodes[src].spec_id)
        dst_spec = registry.get(nodes[dst].spec_id)
        if not src_spec.outputs or not dst_spec.inputs:
            continue
        wires.add(
            Wire(
                src,
                rng.choice([p.name for p in src_spec.outputs]),
                dst,
                rng.choice([p.name for p in dst_spec.inputs]),
            )
        )
    return FlowGraph(
        flow_id="random-builtin", name="random", nodes=nodes, wires=tuple(sorted(wires, key=Wire.key))
    )


def rand_edit_generic(rng: random.Random, flow: FlowGraph, registry: SpecRegistry):
    """Like rand_edit, but picks legal ports/configs from the actual specs."""
    spec_ids = registry.ids()
    options = ["add_node"]
    if flow.nodes:
        options += ["remove_node", "reconfigure", "add_wire"]
    if flow.wires:
        options.append("remove_wire")
    kind = rng.choice(options)
    if kind == "add_node":
        spec_id = rng.choice(spec_ids)
        fresh = f"n{rng.randrange(10_000)}"
        while fresh in flow.nodes:
            fresh = f"n{rng.randrange(10_000)}"
        return AddNode(fresh, spec_id, sample_config(rng, registry.get(spec_id)))
    if kind == "remove_node":
        return RemoveNode(rng.choice(sorted(flow.nodes)))
    if kind == "reconfigure":
        node_id = rng.choice(sorted(flow.nodes))
        spec = registry.get(flow.nodes[node_id].spec_id)
        return Reconfigure(node_id, sample_config(rng, spec))
    if kind == "add_wire":
        names = sorted(flow.nodes)
        for _ in range(20):
            src = rng.choice(names)
            dst = rng.choice(names)
            src_spec = registry.get(flow.nodes[src].spec_id)
            dst_spec = registry.get(flow.nodes[dst].spec_id)
            if not src_spec.outputs or not dst_spec.inputs:
                continue
            wire = Wire(
                src,
                rng.choice([p.name for p in src_spec.outputs]),
                dst,
                rng.choice([p.name for p in dst_spec.inputs]),
            )
            if wire not in flow.wires:
                return AddWire(wire)
        return None
    return RemoveWire(rng.choice(sorted(flow.wires, key=Wire.key)))
