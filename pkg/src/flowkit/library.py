"""Built-in node specs: datasources, processors, and outputs.

Every mechanism is exercised here: config-dependent port schemas
(smartphone sensor select, chart input select), context-derived schemas
(function, extract, trigger, combine), personal-data transfers with
conditional secondary atoms, granularity options, mock profiles, and the
risk flags.
"""

from __future__ import annotations

from .model import (
    ConstResolver,
    DynamicResolver,
    NodeSpec,
    PortDef,
    SelectResolver,
    SpecRegistry,
)
from .schema import EnumSubset, NumRange, SchemaDoc, ValueProfile
from .taint import (
    Condition,
    EmitTransfer,
    FilterTransfer,
    PassthroughTransfer,
    PersonalAtom,
    SelectTransfer,
)

_ANY_IN = PortDef("in", DynamicResolver("any"))


def _light_spec() -> NodeSpec:
    out_schema = SchemaDoc.obj(
        {"ts": SchemaDoc.number(0), "lux": SchemaDoc.number(0, 130000)},
        required=["ts", "lux"],
    )
    profiles = (
        ValueProfile("full moon", {"lux": NumRange(0.05, 0.36)}, "Clear night under a full moon"),
        ValueProfile("living room", {"lux": NumRange(40, 60)}, "Evening domestic lighting"),
        ValueProfile("office lighting", {"lux": NumRange(320, 500)}, "Typical interior office illumination"),
        ValueProfile("overcast day", {"lux": NumRange(900, 1100)}, "Daylight under full cloud cover"),
        ValueProfile("full daylight", {"lux": NumRange(10000, 25000)}, "Direct outdoor daylight"),
    )
    return NodeSpec(
        spec_id="light",
        role="datasource",
        config_schema=SchemaDoc.obj({"period": SchemaDoc.integer(100, 60000)}, required=["period"]),
        outputs=(PortDef("out", ConstResolver(out_schema)),),
        transfers={
            "out": EmitTransfer(
                (
                    PersonalAtom(
                        "personal", "occupancy", "secondary",
                        (Condition.granularity_at_most(1000),),
                    ),
                )
            )
        },
        risk_spectrum=(0, 2),
        profiles=profiles,
        help="Ambient light level in lux from a device camera, with a timestamp.",
        granularity_options=(100, 500, 1000, 5000, 60000),
    )


def _smartphone_spec() -> NodeSpec:
    accel = SchemaDoc.obj(
        {"x": SchemaDoc.number(), "y": SchemaDoc.number(), "z": SchemaDoc.number()},
        required=["x", "y", "z"],
    )
    battery = SchemaDoc.number(0, 1)
    bluetooth = SchemaDoc.array(SchemaDoc.array(SchemaDoc.string(), 2, 2))
    profiles = (
        ValueProfile(
            "resting on table",
            {"x": NumRange(-0.2, 0.2), "y": NumRange(-0.2, 0.2), "z": NumRange(9.6, 10.0)},
            "Device lying flat and still",
        ),
        ValueProfile(
            "vigorous shake",
            {"x": NumRange(-40, 40), "y": NumRange(-40, 40), "z": NumRange(-40, 40)},
            "Hard shaking across all axes",
        ),
        ValueProfile("battery full", {"": NumRange(0.85, 1.0)}, "Near a full charge"),
        ValueProfile("battery low", {"": NumRange(0.0, 0.15)}, "Close to empty"),
    )
    return NodeSpec(
        spec_id="smartphone",
        role="datasource",
        config_schema=SchemaDoc.obj(
            {
                "sensor": SchemaDoc.string(["accelerometer", "battery", "bluetooth-scan"]),
                "period": SchemaDoc.integer(20, 60000),
            },
            required=["sensor", "period"],
        ),
        outputs=(
            PortDef(
                "out",
                SelectResolver(
                    "sensor",
                    {"accelerometer": accel, "battery": battery, "bluetooth-scan": bluetooth},
                ),
            ),
        ),
        transfers={
            "out": SelectTransfer(
                "sensor",
                {
                    "accelerometer": EmitTransfer(
                        (
                            PersonalAtom("personal", "motion"),
                            PersonalAtom(
                                "personal", "gait", "secondary",
                                (Condition.granularity_at_most(20),),
                            ),
                        )
                    ),
                    "battery": EmitTransfer((PersonalAtom("personal", "device-usage"),)),
                    "bluetooth-scan": EmitTransfer(
                        (
                            PersonalAtom("identifier", "bluetooth-mac"),
                            PersonalAtom(
                                "personal", "timestamp-series", "secondary",
                                (Condition.granularity_at_most(1000),),
                            ),
                            PersonalAtom(
                                "personal", "social-graph", "secondary",
                                (Condition.requires_atom("timestamp-series"),),
                            ),
                        )
                    ),
                },
            )
        },
        risk_spectrum=(1, 3),
        profiles=profiles,
        help="Multi-sensor phone source; the configured sensor decides the emitted shape.",
        granularity_options=(20, 100, 1000, 60000),
    )


def _social_feed_spec() -> NodeSpec:
    out_schema = SchemaDoc.obj(
        {
            "ts": SchemaDoc.number(0),
            "handle": SchemaDoc.string(),
            "text": SchemaDoc.string(),
            "likes": SchemaDoc.integer(0, 1000000),
        },
        required=["ts", "handle", "text"],
    )
    return NodeSpec(
        spec_id="social-feed",
        role="datasource",
        config_schema=SchemaDoc.obj({"period": SchemaDoc.integer(1000, 3600000)}, required=["period"]),
        outputs=(PortDef("out", ConstResolver(out_schema)),),
        transfers={
            "out": EmitTransfer(
                (
                    PersonalAtom("identifier", "handle"),
                    PersonalAtom("personal", "opinions"),
                )
            )
        },
        risk_spectrum=(1, 4),
        help="Synthetic micro-blog posts: timestamp, account handle, text, likes.",
        granularity_options=(1000, 10000, 60000, 3600000),
    )


def _function_spec() -> NodeSpec:
    return NodeSpec(
        spec_id="function",
        role="processor",
        config_schema=SchemaDoc.obj({"body": SchemaDoc.string()}, required=["body"]),
        inputs=(PortDef("in", DynamicResolver("context")),),
        outputs=(PortDef("out", DynamicResolver("context")),),
        transfers={"out": PassthroughTransfer()},
        risk_spectrum=(0, 3),
        help="Custom logic in the sandboxed expression language; signature derives from the wiring.",
    )


def _extract_spec() -> NodeSpec:
    return NodeSpec(
        spec_id="extract",
        role="processor",
        config_schema=SchemaDoc.obj(
            {
                "fields": SchemaDoc.array(SchemaDoc.string(), min_len=1),
                "drop_categories": SchemaDoc.array(
                    SchemaDoc.string(["identifier", "sensitive", "personal"])
                ),
                "drop_tags": SchemaDoc.array(SchemaDoc.string()),
            },
            required=["fields"],
        ),
        inputs=(PortDef("in", DynamicResolver("any")),),
        outputs=(PortDef("out", DynamicResolver("project")),),
        transfers={
            "out": FilterTransfer(
                config_categories_key="drop_categories", config_tags_key="drop_tags"
            )
        },
        risk_spectrum=(0, 2),
        help="Projects the configured fields out of each message; can drop personal-data labels.",
    )


def _trigger_spec() -> NodeSpec:
    return NodeSpec(
        spec_id="trigger",
        role="processor",
        config_schema=SchemaDoc.obj(
            {
                "field": SchemaDoc.string(),
                "op": SchemaDoc.string(["gt", "ge", "lt", "le", "eq", "ne"]),
                "threshold": SchemaDoc.number(),
            },
            required=["op", "threshold"],
        ),
        inputs=(PortDef("in", DynamicResolver("any")),),
        outputs=(PortDef("out", ConstResolver(SchemaDoc.boolean())),),
        transfers={"out": PassthroughTransfer()},
        risk_spectrum=(0, 3),
        help="Compares a numeric input (or field) against a threshold; emits on predicate edges.",
    )


def _combine_spec() -> NodeSpec:
    return NodeSpec(
        spec_id="combine",
        role="processor",
        config_schema=SchemaDoc.obj({}),
        inputs=(PortDef("a", DynamicResolver("any")), PortDef("b", DynamicResolver("any"))),
        outputs=(PortDef("out", DynamicResolver("pair")),),
        transfers={"out": PassthroughTransfer()},
        risk_spectrum=(0, 2),
        help="Pairs the latest value from each input into one object {a, b}.",
    )


def _chart_data_spec() -> NodeSpec:
    lux_in = SchemaDoc.obj(
        {"ts": SchemaDoc.number(0), "lux": SchemaDoc.number(0, 130000)},
        required=["ts", "lux"],
    )
    xyz_in = SchemaDoc.obj(
        {"x": SchemaDoc.number(), "y": SchemaDoc.number(), "z": SchemaDoc.number()},
        required=["x", "y", "z"],
    )
    point = SchemaDoc.obj({"x": SchemaDoc.number(), "y": SchemaDoc.number()}, required=["x", "y"])
    return NodeSpec(
        spec_id="chart-data",
        role="processor",
        config_schema=SchemaDoc.obj(
            {"plot": SchemaDoc.string(["lux", "battery", "xyz", "value"])},
            required=["plot"],
        ),
        inputs=(
            PortDef(
                "in",
                SelectResolver(
                    "plot",
                    {
                        "lux": lux_in,
                        "battery": SchemaDoc.number(0, 1),
                        "xyz": xyz_in,
                        "value": SchemaDoc.number(),
                    },
                ),
            ),
        ),
        outputs=(PortDef("out", ConstResolver(point)),),
        transfers={"out": PassthroughTransfer()},
        risk_spectrum=(0, 1),
        help="Turns readings into plottable {x, y} points for a display.",
    )


def _debug_spec() -> NodeSpec:
    return NodeSpec(
        spec_id="debug",
        role="output",
        config_schema=SchemaDoc.obj({}),
        inputs=(_ANY_IN,),
        risk_spectrum=(0, 1),
        help="Accumulates whatever it receives for inspection.",
    )


def _display_spec() -> NodeSpec:
    return NodeSpec(
        spec_id="display",
        role="output",
        config_schema=SchemaDoc.obj({"title": SchemaDoc.string()}),
        inputs=(_ANY_IN,),
        risk_spectrum=(0, 1),
        help="On-box visualization sink.",
    )


def _export_spec() -> NodeSpec:
    return NodeSpec(
        spec_id="export",
        role="output",
        config_schema=SchemaDoc.obj({"destination": SchemaDoc.string()}, required=["destination"]),
        inputs=(_ANY_IN,),
        risk_spectrum=(1, 4),
        exports_data=True,
        help="Sends received data off the box to the configured destination.",
    )


def _actuate_spec() -> NodeSpec:
    return NodeSpec(
        spec_id="actuate",
        role="output",
        config_schema=SchemaDoc.obj({"device": SchemaDoc.string()}, required=["device"]),
        inputs=(_ANY_IN,),
        risk_spectrum=(0, 2),
        actuates=True,
        help="Drives a physical device from received values.",
    )


def builtin_specs() -> SpecRegistry:
    """Registry with the full built-in palette."""
    return SpecRegistry(
        [
            _light_spec(),
            _smartphone_spec(),
            _social_feed_spec(),
            _function_spec(),
            _extract_spec(),
            _trigger_spec(),
            _combine_spec(),
            _chart_data_spec(),
            _debug_spec(),
            _display_spec(),
            _export_spec(),
            _actuate_spec(),
        ]
    )
