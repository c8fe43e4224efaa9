"""One-stop analysis of a flow; the single source of truth for check output.

The CLI's check command and the dev server's validate endpoint both render
this report, which is what keeps them byte-for-byte consistent.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional

from . import expr
from .checker import Diagnostic, SchemaContext, check_flow, function_signature
from .model import DynamicResolver, FlowGraph, SpecRegistry, Wire
from .risk import RiskRating, assess_flow
from .schema import schema_to_json
from .taint import label_map_to_json, propagate_labels


@dataclass
class CheckReport:
    diagnostics: list[Diagnostic]
    labels: dict[Wire, frozenset]
    risk: RiskRating
    signatures: dict[str, tuple[Optional[Any], Optional[Any]]]
    skeletons: dict[str, str]


def analyze_flow(flow: FlowGraph, registry: SpecRegistry) -> CheckReport:
    diagnostics = check_flow(flow, registry)
    labels = propagate_labels(flow, registry)
    risk = assess_flow(flow, registry, labels, diagnostics)
    ctx = SchemaContext(flow, registry)
    signatures: dict[str, tuple[Optional[Any], Optional[Any]]] = {}
    skeletons: dict[str, str] = {}
    for node_id in sorted(flow.nodes):
        spec = registry.get(flow.nodes[node_id].spec_id)
        if _is_function_spec(spec):
            input_schema, output_schema, _ = function_signature(flow, registry, node_id, ctx)
            signatures[node_id] = (input_schema, output_schema)
            skeletons[node_id] = expr.generate_skeleton(input_schema, output_schema)
    return CheckReport(diagnostics, labels, risk, signatures, skeletons)


def _is_function_spec(spec) -> bool:
    props = spec.config_schema.properties or {}
    if "body" not in props or props["body"].kind != "string":
        return False
    return any(
        isinstance(p.resolver, DynamicResolver) and p.resolver.rule == "context"
        for p in spec.inputs + spec.outputs
    )


def check_payload(report: CheckReport) -> dict:
    """The shared JSON body: diagnostics, wire labels, risk."""
    return {
        "diagnostics": [d.to_json() for d in report.diagnostics],
        "labels": label_map_to_json(report.labels),
        "risk": report.risk.to_json(),
    }


def validate_payload(report: CheckReport) -> dict:
    """check_payload plus the editor-only extras (signatures, skeletons)."""
    out = check_payload(report)
    out["signatures"] = {
        node_id: {
            "input": schema_to_json(sig[0]) if sig[0] is not None else None,
            "output": schema_to_json(sig[1]) if sig[1] is not None else None,
        }
        for node_id, sig in sorted(report.signatures.items())
    }
    out["skeletons"] = dict(sorted(report.skeletons.items()))
    return out
