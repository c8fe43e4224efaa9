"""Shared fixtures: the builtin registry and the canonical example flows."""

from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from flowkit.library import builtin_specs
from flowkit.model import FlowGraph, NodeInstance, Wire


def _flow(flow_id, name, nodes, wires, author="dev", description=""):
    return FlowGraph(
        flow_id=flow_id,
        name=name,
        version="1.0.0",
        author=author,
        description=description,
        nodes=nodes,
        wires=tuple(sorted(wires, key=Wire.key)),
    )


@pytest.fixture(scope="session")
def registry():
    return builtin_specs()


@pytest.fixture()
def phone_chart_flow():
    """Smartphone battery level plotted to an on-box display: 3 nodes, 2 wires."""
    return _flow(
        "phone-chart",
        "Battery chart",
        {
            "phone": NodeInstance("smartphone", {"sensor": "battery", "period": 1000}),
            "chart": NodeInstance("chart-data", {"plot": "battery"}),
            "screen": NodeInstance("display", {"title": "Battery"}),
        },
        [Wire("phone", "out", "chart", "in"), Wire("chart", "out", "screen", "in")],
        description="Plots the phone battery level.",
    )


@pytest.fixture()
def feed_merge_flow():
    """Two sources through extracts into a combine, exported off-box.

    Removing the social-feed wire must clear every identifier badge downstream.
    """
    return _flow(
        "feed-merge",
        "Feed and light export",
        {
            "feed": NodeInstance("social-feed", {"period": 10000}),
            "lamp": NodeInstance("light", {"period": 1000}),
            "pick_text": NodeInstance("extract", {"fields": ["text", "handle"]}),
            "pick_lux": NodeInstance("extract", {"fields": ["lux"]}),
            "merge": NodeInstance("combine", {}),
            "out": NodeInstance("export", {"destination": "https://example.net/ingest"}),
        },
        [
            Wire("feed", "out", "pick_text", "in"),
            Wire("lamp", "out", "pick_lux", "in"),
            Wire("pick_text", "out", "merge", "a"),
            Wire("pick_lux", "out", "merge", "b"),
            Wire("merge", "out", "out", "in"),
        ],
    )


@pytest.fixture()
def light_trigger_flow():
    """Light source into a threshold trigger at 1000 lux, logged to debug."""
    return _flow(
        "light-trigger",
        "Bright-light alarm",
        {
            "lamp": NodeInstance("light", {"period": 100}),
            "alarm": NodeInstance("trigger", {"field": "lux", "op": "gt", "threshold": 1000}),
            "log": NodeInstance("debug", {}),
        },
        [Wire("lamp", "out", "alarm", "in"), Wire("alarm", "out", "log", "in")],
    )


@pytest.fixture()
def accel_miswire_flow():
    """Accelerometer wired into a lux-configured chart: one wire error."""
    return _flow(
        "accel-miswire",
        "Broken wiring",
        {
            "phone": NodeInstance("smartphone", {"sensor": "accelerometer", "period": 100}),
            "chart": NodeInstance("chart-data", {"plot": "lux"}),
            "screen": NodeInstance("display", {}),
        },
        [Wire("phone", "out", "chart", "in"), Wire("chart", "out", "screen", "in")],
    )


@pytest.fixture()
def function_chain_flow():
    """Light through a function body into a value chart."""
    return _flow(
        "lux-function",
        "Lux scaling",
        {
            "lamp": NodeInstance("light", {"period": 100}),
            "scale": NodeInstance("function", {"body": "msg.lux / 1000"}),
            "chart": NodeInstance("chart-data", {"plot": "value"}),
            "screen": NodeInstance("display", {}),
        },
        [
            Wire("lamp", "out", "scale", "in"),
            Wire("scale", "out", "chart", "in"),
            Wire("chart", "out", "screen", "in"),
        ],
    )
