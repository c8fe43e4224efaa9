"""App manifest construction, validation, and canonical serialization.

The manifest mirrors the flow exactly: one datasource entry per datasource
node (with chosen and offered granularity and the personal atoms it
introduces), one export entry per exporting output, one actuation entry per
actuating output, plus the risk rating, the developer's statutory texts, and
a two-layer notice (auto-composed summary, full detail).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Any, Mapping, Optional, Sequence

from .model import FlowGraph, SpecRegistry, Wire
from .risk import NodeRisk, RiskFactors, RiskRating
from .taint import EMPTY_LABEL, atom_from_json, input_label, label_to_json, node_transfer

STATUTORY_FIELDS = ("controller", "purpose", "retention", "rights")


class ManifestError(ValueError):
    pass


class MissingStatutoryFields(ManifestError):
    def __init__(self, fields: Sequence[str]):
        super().__init__(f"missing statutory fields: {', '.join(fields)}")
        self.fields = tuple(fields)


class ManifestParseError(ManifestError):
    def __init__(self, message: str, location: str = ""):
        super().__init__(f"{location + ': ' if location else ''}{message}")
        self.location = location


@dataclass(frozen=True)
class DeveloperMeta:
    """Everything the toolkit cannot introspect from the flow itself."""

    description: str
    benefits: str
    controller: str
    purpose: str
    retention: str
    rights: str
    purposes: Mapping[str, str] = field(default_factory=dict)  # node id -> purpose prose


@dataclass(frozen=True)
class DatasourceEntry:
    node: str
    spec: str
    purpose: str
    granularity: Optional[int]
    granularity_options: tuple[int, ...]
    atoms: frozenset


@dataclass(frozen=True)
class ExportEntry:
    node: str
    destination: str
    atoms: frozenset


@dataclass(frozen=True)
class ActuationEntry:
    node: str
    device: str


@dataclass(frozen=True)
class Manifest:
    app_id: str
    name: str
    version: str
    author: str
    description: str
    benefits: str
    datasources: tuple[DatasourceEntry, ...]
    exports: tuple[ExportEntry, ...]
    actuations: tuple[ActuationEntry, ...]
    risk: RiskRating
    controller: str
    purpose: str
    retention: str
    rights: str
    layer_summary: str
    layer_detail: str


def build_manifest(
    flow: FlowGraph,
    registry: SpecRegistry,
    labels: Mapping[Wire, frozenset],
    risk: RiskRating,
    meta: DeveloperMeta,
) -> Manifest:
    """Assemble the manifest from flow introspection plus developer metadata."""
    missing = [f for f in STATUTORY_FIELDS if not getattr(meta, f, "").strip()]
    if missing:
        raise MissingStatutoryFields(missing)
    datasources = []
    exports = []
    actuations = []
    for node_id in sorted(flow.nodes):
        inst = flow.nodes[node_id]
        spec = registry.get(inst.spec_id)
        config = inst.config if isinstance(inst.config, dict) else {}
        if spec.role == "datasource":
            emitted: frozenset = EMPTY_LABEL
            for port_label in node_transfer(spec, inst.config, EMPTY_LABEL).values():
                emitted = emitted | port_label
            datasources.append(
                DatasourceEntry(
                    node=node_id,
                    spec=spec.spec_id,
                    purpose=meta.purposes.get(node_id, meta.purpose),
                    granularity=config.get("period"),
                    granularity_options=tuple(spec.granularity_options or ()),
                    atoms=emitted,
                )
            )
        elif spec.role == "output":
            label = input_label(flow, node_id, labels)
            if spec.exports_data:
                exports.append(
                    ExportEntry(node=node_id, destination=str(config.get("destination", "")), atoms=label)
                )
            if spec.actuates:
                actuations.append(ActuationEntry(node=node_id, device=str(config.get("device", ""))))
    manifest = Manifest(
        app_id=flow.flow_id,
        name=flow.name,
        version=flow.version,
        author=flow.author,
        description=meta.description,
        benefits=meta.benefits,
        datasources=tuple(datasources),
        exports=tuple(exports),
        actuations=tuple(actuations),
        risk=risk,
        controller=meta.controller,
        purpose=meta.purpose,
        retention=meta.retention,
        rights=meta.rights,
        layer_summary=_layer_summary(flow.name, len(datasources), bool(exports), risk.band),
        layer_detail="",
    )
    return replace(manifest, layer_detail=_layer_detail(manifest))


def _layer_summary(name: str, n_sources: int, exports: bool, band: str) -> str:
    return (
        f"{name} reads {n_sources} data source(s), "
        f"sends data off-box: {'yes' if exports else 'no'}, risk: {band}."
    )


def _atom_phrase(atoms: frozenset) -> str:
    if not atoms:
        return "none"
    parts = []
    for a in sorted(atoms, key=lambda a: (a.category, a.tag)):
        suffix = " (inferred)" if a.derivation == "secondary" else ""
        parts.append(f"{a.category}:{a.tag}{suffix}")
    return ", ".join(parts)


def _layer_detail(m: Manifest) -> str:
    lines = [
        f"{m.name} ({m.app_id} v{m.version}) by {m.author}",
        f"Purpose: {m.purpose}",
        f"Description: {m.description}",
        f"Benefits: {m.benefits}",
        "Data sources:",
    ]
    if not m.datasources:
        lines.append("  none")
    for d in m.datasources:
        options = ", ".join(str(o) for o in d.granularity_options) or "fixed"
        lines.append(
            f"  {d.node} ({d.spec}): every {d.granularity} ms (offered: {options}); "
            f"personal data: {_atom_phrase(d.atoms)}; purpose: {d.purpose}"
        )
    lines.append("Exports:")
    if not m.exports:
        lines.append("  none")
    for e in m.exports:
        lines.append(f"  {e.node} -> {e.destination}; personal data: {_atom_phrase(e.atoms)}")
    lines.append("Actuations:")
    if not m.actuations:
        lines.append("  none")
    for a in m.actuations:
        lines.append(f"  {a.node}: {a.device}")
    lines.append(f"Risk: {m.risk.band} ({m.risk.app_score}/5)")
    lines.append(f"Data controller: {m.controller}")
    lines.append(f"Retention: {m.retention}")
    lines.append(f"Your rights: {m.rights}")
    return "\n".join(lines)


# -- canonical serialization ----------------------------------------------------------

def manifest_to_json(m: Manifest) -> dict:
    return {
        "app": {"id": m.app_id, "name": m.name, "version": m.version, "author": m.author},
        "description": m.description,
        "benefits": m.benefits,
        "datasources": [
            {
                "node": d.node,
                "spec": d.spec,
                "purpose": d.purpose,
                "granularity": d.granularity,
                "granularity_options": list(d.granularity_options),
                "atoms": label_to_json(d.atoms),
            }
            for d in m.datasources
        ],
        "exports": [
            {"node": e.node, "destination": e.destination, "atoms": label_to_json(e.atoms)}
            for e in m.exports
        ],
        "actuations": [{"node": a.node, "device": a.device} for a in m.actuations],
        "risk": m.risk.to_json(),
        "statutory": {
            "controller": m.controller,
            "purpose": m.purpose,
            "retention": m.retention,
            "rights": m.rights,
        },
        "layers": {"summary": m.layer_summary, "detail": m.layer_detail},
    }


def serialize_manifest(m: Manifest) -> bytes:
    """Canonical bytes: UTF-8, LF, 2-space indent, fixed field order."""
    return (json.dumps(manifest_to_json(m), indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def _risk_from_json(data: Any) -> RiskRating:
    try:
        nodes = tuple(
            NodeRisk(
                n["id"],
                n["score"],
                tuple(n["spectrum"]),
                RiskFactors(**n["factors"]),
            )
            for n in data["nodes"]
        )
        return RiskRating(data["app"]["score"], data["app"]["band"], nodes)
    except (KeyError, TypeError) as e:
        raise ManifestParseError(f"bad risk section: {e}", "risk") from None


def parse_manifest(raw: bytes | str) -> Manifest:
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8")
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as e:
        raise ManifestParseError(str(e), f"{e.lineno}:{e.colno}") from None
    if not isinstance(data, dict):
        raise ManifestParseError("manifest must be a JSON object")
    try:
        app = data["app"]
        statutory = data["statutory"]
        layers = data["layers"]
        m = Manifest(
            app_id=app["id"],
            name=app["name"],
            version=app["version"],
            author=app["author"],
            description=data["description"],
            benefits=data["benefits"],
            datasources=tuple(
                DatasourceEntry(
                    node=d["node"],
                    spec=d["spec"],
                    purpose=d["purpose"],
                    granularity=d["granularity"],
                    granularity_options=tuple(d["granularity_options"]),
                    atoms=frozenset(atom_from_json(a) for a in d["atoms"]),
                )
                for d in data["datasources"]
            ),
            exports=tuple(
                ExportEntry(
                    node=e["node"],
                    destination=e["destination"],
                    atoms=frozenset(atom_from_json(a) for a in e["atoms"]),
                )
                for e in data["exports"]
            ),
            actuations=tuple(
                ActuationEntry(node=a["node"], device=a["device"]) for a in data["actuations"]
            ),
            risk=_risk_from_json(data["risk"]),
            controller=statutory["controller"],
            purpose=statutory["purpose"],
            retention=statutory["retention"],
            rights=statutory["rights"],
            layer_summary=layers["summary"],
            layer_detail=layers["detail"],
        )
    except (KeyError, TypeError) as e:
        raise ManifestParseError(f"missing or malformed field: {e}") from None
    missing = [f for f in STATUTORY_FIELDS if not getattr(m, f).strip()]
    if missing:
        raise MissingStatutoryFields(missing)
    return m


def meta_from_json(data: Any) -> DeveloperMeta:
    if not isinstance(data, dict):
        raise ManifestError("meta must be a JSON object")
    return DeveloperMeta(
        description=str(data.get("description", "")),
        benefits=str(data.get("benefits", "")),
        controller=str(data.get("controller", "")),
        purpose=str(data.get("purpose", "")),
        retention=str(data.get("retention", "")),
        rights=str(data.get("rights", "")),
        purposes={str(k): str(v) for k, v in (data.get("purposes") or {}).items()},
    )
