"""Risk scoring: per-node effective score within the declared spectrum, app aggregate.

Fixed rule table on a 0..5 integer scale:
    effective = clamp(lo + 2*exports + 2*actuation + 1*insecure_hw + 1*unverified, lo, hi)
    app = max(node scores), +1 (capped at 5) when an exporting node's input
    label carries a sensitive or identifier atom.
Bands: low 0-1, medium 2-3, high 4-5.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .checker import Diagnostic
from .model import FlowGraph, NodeSpec, SpecRegistry, Wire
from .taint import input_label

_WEIGHTS = {
    "exports_off_box": 2,
    "physical_actuation": 2,
    "insecure_hardware": 1,
    "unverified_code": 1,
}


@dataclass(frozen=True)
class RiskFactors:
    exports_off_box: bool = False
    physical_actuation: bool = False
    insecure_hardware: bool = False
    unverified_code: bool = False

    def to_json(self) -> dict:
        return {
            "exports_off_box": self.exports_off_box,
            "physical_actuation": self.physical_actuation,
            "insecure_hardware": self.insecure_hardware,
            "unverified_code": self.unverified_code,
        }


@dataclass(frozen=True)
class NodeRisk:
    node_id: str
    score: int
    spectrum: tuple[int, int]
    factors: RiskFactors

    def to_json(self) -> dict:
        return {
            "id": self.node_id,
            "score": self.score,
            "spectrum": list(self.spectrum),
            "factors": self.factors.to_json(),
        }


@dataclass(frozen=True)
class RiskRating:
    app_score: int
    band: str
    nodes: tuple[NodeRisk, ...]

    def to_json(self) -> dict:
        return {
            "app": {"score": self.app_score, "band": self.band},
            "nodes": [n.to_json() for n in self.nodes],
        }


def band(score: int) -> str:
    if score <= 1:
        return "low"
    if score <= 3:
        return "medium"
    return "high"


def node_factors(spec: NodeSpec, config, diagnostics: Sequence[Diagnostic] = ()) -> RiskFactors:
    """Derive the four factors from the spec flags and current diagnostics."""
    unverified = any(
        d.severity == "error"
        and d.code in ("body-syntax", "body-type", "conflicting-producers", "conflicting-consumers")
        for d in diagnostics
    )
    return RiskFactors(
        exports_off_box=spec.exports_data,
        physical_actuation=spec.actuates,
        insecure_hardware=spec.insecure_hardware,
        unverified_code=unverified,
    )


def node_risk(spec: NodeSpec, factors: RiskFactors, node_id: str = "") -> NodeRisk:
    lo, hi = spec.risk_spectrum
    raw = lo
    raw += _WEIGHTS["exports_off_box"] * factors.exports_off_box
    raw += _WEIGHTS["physical_actuation"] * factors.physical_actuation
    raw += _WEIGHTS["insecure_hardware"] * factors.insecure_hardware
    raw += _WEIGHTS["unverified_code"] * factors.unverified_code
    score = max(lo, min(hi, raw))
    return NodeRisk(node_id or spec.spec_id, score, (lo, hi), factors)


_ESCALATING = ("sensitive", "identifier")


def app_risk(
    flow: FlowGraph,
    registry: SpecRegistry,
    labels: Mapping[Wire, frozenset],
    node_risks: Mapping[str, NodeRisk],
) -> RiskRating:
    """Aggregate: max node score, escalated when sensitive data leaves the box."""
    scores = [node_risks[nid].score for nid in node_risks]
    app = max(scores, default=0)
    escalate = False
    for node_id in sorted(flow.nodes):
        spec = registry.get(flow.nodes[node_id].spec_id)
        if not spec.exports_data:
            continue
        label = input_label(flow, node_id, labels)
        if any(a.category in _ESCALATING for a in label):
            escalate = True
            break
    if escalate:
        app = min(5, app + 1)
    ordered = tuple(node_risks[nid] for nid in sorted(node_risks))
    return RiskRating(app, band(app), ordered)


def assess_flow(
    flow: FlowGraph,
    registry: SpecRegistry,
    labels: Mapping[Wire, frozenset],
    diagnostics: Sequence[Diagnostic] = (),
) -> RiskRating:
    """Factors, per-node scores, and the app rating for a checked flow."""
    by_node: dict[str, list[Diagnostic]] = {}
    for d in diagnostics:
        owner = d.loc.owner()
        if isinstance(owner, str):
            by_node.setdefault(owner, []).append(d)
    node_risks = {}
    for node_id in sorted(flow.nodes):
        spec = registry.get(flow.nodes[node_id].spec_id)
        factors = node_factors(spec, flow.nodes[node_id].config, by_node.get(node_id, ()))
        node_risks[node_id] = node_risk(spec, factors, node_id)
    return app_risk(flow, registry, labels, node_risks)
