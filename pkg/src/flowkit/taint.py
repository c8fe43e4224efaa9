"""Personal-data labels and their propagation through a flow.

Each wire carries a PersonalLabel: a set of atoms classifying the data as
identifier / sensitive / personal, tagged with a concrete type and a
derivation (primary, or secondary when the atom is an inference that only
holds under conditions such as a fine enough sampling period). Propagation
is a least-fixpoint forward dataflow analysis over the powerset lattice with
union as join; every declared transfer is monotone, so the worklist
terminates on cyclic graphs too.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Iterable, Mapping, Optional

if TYPE_CHECKING:  # pragma: no cover
    from .model import FlowGraph, NodeSpec, SpecRegistry, Wire

CATEGORIES = ("identifier", "sensitive", "personal")


class LabelError(ValueError):
    pass


# -- atoms and conditions -----------------------------------------------------

@dataclass(frozen=True)
class Condition:
    """Gate on a secondary atom.

    kind "granularity-at-most": active when the node's configured sampling
    period (config key "period", ms) is <= `period`.
    kind "requires-atom": active when the evaluation label already contains
    an atom with type-tag `tag`.
    """

    kind: str
    period: Optional[int] = None
    tag: Optional[str] = None

    def __post_init__(self) -> None:
        if self.kind == "granularity-at-most":
            if not isinstance(self.period, int) or self.period <= 0:
                raise LabelError("granularity-at-most needs a positive period")
        elif self.kind == "requires-atom":
            if not isinstance(self.tag, str) or not self.tag:
                raise LabelError("requires-atom needs a type-tag")
        else:
            raise LabelError(f"unknown condition kind {self.kind!r}")

    @classmethod
    def granularity_at_most(cls, period_ms: int) -> "Condition":
        return cls("granularity-at-most", period=period_ms)

    @classmethod
    def requires_atom(cls, tag: str) -> "Condition":
        return cls("requires-atom", tag=tag)


@dataclass(frozen=True)
class PersonalAtom:
    category: str
    tag: str
    derivation: str = "primary"
    conditions: tuple[Condition, ...] = ()

    def __post_init__(self) -> None:
        if self.category not in CATEGORIES:
            raise LabelError(f"unknown category {self.category!r}")
        if self.derivation not in ("primary", "secondary"):
            raise LabelError(f"unknown derivation {self.derivation!r}")
        if self.derivation == "primary" and self.conditions:
            raise LabelError("primary atoms carry no conditions")
        if self.derivation == "secondary" and not self.conditions:
            raise LabelError("secondary atoms need at least one condition")


PersonalLabel = frozenset  # of PersonalAtom

EMPTY_LABEL: PersonalLabel = frozenset()


def _sort_key(atom: PersonalAtom) -> tuple:
    return (atom.category, atom.tag, atom.derivation)


# -- transfers ----------------------------------------------------------------

@dataclass(frozen=True)
class EmitTransfer:
    """Datasource declaration: the atoms this output introduces."""

    atoms: tuple[PersonalAtom, ...]


@dataclass(frozen=True)
class PassthroughTransfer:
    """Default processor behaviour: input label plus optionally added atoms."""

    atoms: tuple[PersonalAtom, ...] = ()


@dataclass(frozen=True)
class FilterTransfer:
    """Redaction: drop atoms matching a category/tag predicate.

    config_categories_key / config_tags_key name config properties (string
    arrays) whose entries extend the drop sets per node instance.
    """

    drop_categories: tuple[str, ...] = ()
    drop_tags: tuple[str, ...] = ()
    config_categories_key: Optional[str] = None
    config_tags_key: Optional[str] = None


@dataclass(frozen=True)
class ClearTransfer:
    """Declared anonymizing aggregation: output carries no atoms."""


LabelTransfer = Any  # one of the four transfer dataclasses


@dataclass(frozen=True)
class SelectTransfer:
    """Config-dependent transfer, keyed on an enum config property."""

    key: str
    cases: Mapping[str, LabelTransfer]


def _condition_active(cond: Condition, config: Any, context: frozenset) -> bool:
    if cond.kind == "granularity-at-most":
        period = None
        if isinstance(config, dict):
            period = config.get("period")
        return isinstance(period, (int, float)) and period <= cond.period
    return any(a.tag == cond.tag for a in context)


def _gated(atoms: Iterable[PersonalAtom], config: Any, base: frozenset) -> frozenset:
    """Activate declared atoms against base + already-activated siblings.

    requires-atom conditions may refer to primary atoms introduced by the
    same transfer, so this iterates to a (tiny, monotone) fixpoint.
    """
    active = set(base)
    pending = list(atoms)
    changed = True
    while changed:
        changed = False
        still = []
        for atom in pending:
            if all(_condition_active(c, config, frozenset(active)) for c in atom.conditions):
                active.add(atom)
                changed = True
            else:
                still.append(atom)
        pending = still
    return frozenset(active)


def apply_transfer(transfer: LabelTransfer, config: Any, input_label: frozenset) -> frozenset:
    if isinstance(transfer, SelectTransfer):
        key = config.get(transfer.key) if isinstance(config, dict) else None
        case = transfer.cases.get(key)
        if case is None:
            raise LabelError(f"no transfer case for {transfer.key}={key!r}")
        return apply_transfer(case, config, input_label)
    if isinstance(transfer, EmitTransfer):
        return _gated(transfer.atoms, config, EMPTY_LABEL)
    if isinstance(transfer, PassthroughTransfer):
        return _gated(transfer.atoms, config, input_label)
    if isinstance(transfer, FilterTransfer):
        cats = set(transfer.drop_categories)
        tags = set(transfer.drop_tags)
        if isinstance(config, dict):
            if transfer.config_categories_key:
                cats |= set(config.get(transfer.config_categories_key) or ())
            if transfer.config_tags_key:
                tags |= set(config.get(transfer.config_tags_key) or ())
        return frozenset(a for a in input_label if a.category not in cats and a.tag not in tags)
    if isinstance(transfer, ClearTransfer):
        return EMPTY_LABEL
    raise LabelError(f"unknown transfer {transfer!r}")


def node_transfer(spec: "NodeSpec", config: Any, input_label: frozenset) -> dict[str, frozenset]:
    """Labels this node places on each output port for a given input label."""
    out: dict[str, frozenset] = {}
    for port in spec.outputs:
        transfer = spec.transfers.get(port.name)
        if transfer is None:
            transfer = PassthroughTransfer()
        out[port.name] = apply_transfer(transfer, config, input_label)
    return out


# -- propagation ----------------------------------------------------------------

def input_label(flow: "FlowGraph", node_id: str, labels: Mapping["Wire", frozenset]) -> frozenset:
    acc: frozenset = EMPTY_LABEL
    for wire in flow.wires:
        if wire.dst == node_id:
            acc = acc | labels.get(wire, EMPTY_LABEL)
    return acc


def propagate_labels(flow: "FlowGraph", registry: "SpecRegistry") -> dict["Wire", frozenset]:
    """Least fixpoint of the edge-labeling equations; correct on cyclic graphs."""
    labels: dict = {w: EMPTY_LABEL for w in flow.wires}
    out_wires: dict[str, list] = {}
    for w in flow.wires:
        out_wires.setdefault(w.src, []).append(w)
    worklist = sorted(flow.nodes)
    queued = set(worklist)
    while worklist:
        node_id = worklist.pop(0)
        queued.discard(node_id)
        inst = flow.nodes[node_id]
        spec = registry.get(inst.spec_id)
        incoming = input_label(flow, node_id, labels)
        per_port = node_transfer(spec, inst.config, incoming)
        for wire in out_wires.get(node_id, ()):
            new = per_port.get(wire.src_port, EMPTY_LABEL)
            if new != labels[wire]:
                labels[wire] = new
                if wire.dst not in queued:
                    worklist.append(wire.dst)
                    queued.add(wire.dst)
    return labels


def diff_labels(
    before: Mapping["Wire", frozenset], after: Mapping["Wire", frozenset]
) -> dict["Wire", tuple[frozenset, frozenset]]:
    """Per-wire (added, removed) atom sets; wires with no change are omitted."""
    out = {}
    for wire in set(before) | set(after):
        b = before.get(wire, EMPTY_LABEL)
        a = after.get(wire, EMPTY_LABEL)
        added, removed = a - b, b - a
        if added or removed:
            out[wire] = (added, removed)
    return out


@dataclass(frozen=True)
class PersonalDataSummary:
    per_output: Mapping[str, frozenset]
    per_export: Mapping[str, frozenset]
    whole_app: frozenset


def summarize_personal_data(
    flow: "FlowGraph", registry: "SpecRegistry", labels: Mapping["Wire", frozenset]
) -> PersonalDataSummary:
    """Union of incoming labels per output-role node, split out for exporting nodes."""
    per_output: dict[str, frozenset] = {}
    per_export: dict[str, frozenset] = {}
    whole: frozenset = EMPTY_LABEL
    for node_id in sorted(flow.nodes):
        spec = registry.get(flow.nodes[node_id].spec_id)
        if spec.role != "output":
            continue
        label = input_label(flow, node_id, labels)
        per_output[node_id] = label
        if spec.exports_data:
            per_export[node_id] = label
        whole = whole | label
    return PersonalDataSummary(per_output, per_export, whole)


# -- serialization ----------------------------------------------------------------

def condition_to_json(cond: Condition) -> dict:
    if cond.kind == "granularity-at-most":
        return {"kind": cond.kind, "period": cond.period}
    return {"kind": cond.kind, "tag": cond.tag}


def condition_from_json(data: Any) -> Condition:
    if not isinstance(data, dict):
        raise LabelError("condition must be an object")
    return Condition(data.get("kind", ""), period=data.get("period"), tag=data.get("tag"))


def atom_to_json(atom: PersonalAtom) -> dict:
    out: dict[str, Any] = {"cat": atom.category, "tag": atom.tag, "derivation": atom.derivation}
    if atom.conditions:
        out["conditions"] = [condition_to_json(c) for c in atom.conditions]
    return out


def atom_from_json(data: Any) -> PersonalAtom:
    if not isinstance(data, dict):
        raise LabelError("atom must be an object")
    return PersonalAtom(
        category=data.get("cat", ""),
        tag=data.get("tag", ""),
        derivation=data.get("derivation", "primary"),
        conditions=tuple(condition_from_json(c) for c in data.get("conditions", ())),
    )


def label_to_json(label: frozenset) -> list[dict]:
    return [atom_to_json(a) for a in sorted(label, key=_sort_key)]


def label_map_to_json(labels: Mapping["Wire", frozenset]) -> dict:
    wires = []
    for wire in sorted(labels, key=lambda w: (w.src, w.src_port, w.dst, w.dst_port)):
        wires.append(
            {
                "from": [wire.src, wire.src_port],
                "to": [wire.dst, wire.dst_port],
                "atoms": label_to_json(labels[wire]),
            }
        )
    return {"wires": wires}


def transfer_to_json(transfer: LabelTransfer) -> dict:
    if isinstance(transfer, EmitTransfer):
        return {"emit": [atom_to_json(a) for a in transfer.atoms]}
    if isinstance(transfer, PassthroughTransfer):
        return {"passthrough": [atom_to_json(a) for a in transfer.atoms]}
    if isinstance(transfer, FilterTransfer):
        inner: dict[str, Any] = {
            "categories": list(transfer.drop_categories),
            "tags": list(transfer.drop_tags),
        }
        if transfer.config_categories_key:
            inner["configCategoriesKey"] = transfer.config_categories_key
        if transfer.config_tags_key:
            inner["configTagsKey"] = transfer.config_tags_key
        return {"filter": inner}
    if isinstance(transfer, ClearTransfer):
        return {"clear": True}
    if isinstance(transfer, SelectTransfer):
        return {
            "select": {
                "key": transfer.key,
                "cases": {k: transfer_to_json(v) for k, v in sorted(transfer.cases.items())},
            }
        }
    raise LabelError(f"unknown transfer {transfer!r}")


def transfer_from_json(data: Any) -> LabelTransfer:
    if not isinstance(data, dict) or len(data) != 1:
        raise LabelError("transfer must be a single-key object")
    key, payload = next(iter(data.items()))
    if key == "emit":
        return EmitTransfer(tuple(atom_from_json(a) for a in payload))
    if key == "passthrough":
        return PassthroughTransfer(tuple(atom_from_json(a) for a in payload))
    if key == "filter":
        return FilterTransfer(
            drop_categories=tuple(payload.get("categories", ())),
            drop_tags=tuple(payload.get("tags", ())),
            config_categories_key=payload.get("configCategoriesKey"),
            config_tags_key=payload.get("configTagsKey"),
        )
    if key == "clear":
        return ClearTransfer()
    if key == "select":
        return SelectTransfer(
            payload["key"], {k: transfer_from_json(v) for k, v in payload["cases"].items()}
        )
    raise LabelError(f"unknown transfer key {key!r}")
