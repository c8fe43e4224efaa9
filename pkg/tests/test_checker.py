"""Static checking: wire diagnostics, signatures, incremental rechecks."""

from __future__ import annotations

import random

from genutil import rand_edit, rand_labeled_flow, synthetic_specs

from flowkit.checker import (
    Diagnostic,
    check_flow,
    diagnostics_to_jsonl,
    function_signature,
    recheck_after_edit,
)
from flowkit.model import (
    FlowGraph,
    NodeInstance,
    Reconfigure,
    RemoveWire,
    Wire,
    apply_edit,
)
from flowkit.schema import generate_value, validate_value
import flowkit.checker as checker_mod


def codes(diags):
    return [d.code for d in diags]


class TestCheckFlow:
    def test_empty_flow_clean(self, registry):
        assert check_flow(FlowGraph(flow_id="e"), registry) == []

    def test_phone_chart_has_no_errors(self, registry, phone_chart_flow):
        diags = check_flow(phone_chart_flow, registry)
        assert [d for d in diags if d.severity == "error"] == []

    def test_accelerometer_cannot_feed_lux_chart(self, registry, accel_miswire_flow):
        diags = check_flow(accel_miswire_flow, registry)
        errors = [d for d in diags if d.severity == "error"]
        assert len(errors) == 1
        assert errors[0].code == "wire-incompatible"
        assert errors[0].loc.wire == Wire("phone", "out", "chart", "in")

    def test_unwired_processor_warned(self, registry):
        flow = FlowGraph(
            flow_id="w",
            nodes={"fn": NodeInstance("function", {"body": "1"})},
        )
        diags = check_flow(flow, registry)
        assert "unwired-input" in codes(diags)

    def test_unreachable_output_warned(self, registry):
        flow = FlowGraph(flow_id="u", nodes={"log": NodeInstance("debug", {})})
        diags = check_flow(flow, registry)
        assert "unreachable-output" in codes(diags)
        assert "unwired-input" in codes(diags)

    def test_function_body_type_error_located(self, registry, function_chain_flow):
        flow, _ = apply_edit(
            function_chain_flow, Reconfigure("scale", {"body": "msg.lux && true"}), registry
        )
        diags = check_flow(flow, registry)
        errors = [d for d in diags if d.severity == "error"]
        assert errors and all(d.code == "body-type" for d in errors)
        assert errors[0].loc.node == "scale"

    def test_function_syntax_error_located(self, registry, function_chain_flow):
        flow, _ = apply_edit(
            function_chain_flow, Reconfigure("scale", {"body": "msg."}), registry
        )
        diags = check_flow(flow, registry)
        assert "body-syntax" in codes(diags)

    def test_bad_projection_flagged(self, registry, feed_merge_flow):
        flow, _ = apply_edit(
            feed_merge_flow, Reconfigure("pick_text", {"fields": ["nope"]}), registry
        )
        diags = check_flow(flow, registry)
        assert "bad-projection" in codes(diags)

    def test_trigger_field_must_be_numeric(self, registry, light_trigger_flow):
        flow, _ = apply_edit(
            light_trigger_flow,
            Reconfigure("alarm", {"field": "missing", "op": "gt", "threshold": 5}),
            registry,
        )
        diags = check_flow(flow, registry)
        assert "bad-trigger-field" in codes(diags)

    def test_deterministic_ordering(self, registry, accel_miswire_flow, feed_merge_flow):
        for flow in (accel_miswire_flow, feed_merge_flow):
            a = check_flow(flow, registry)
            b = check_flow(flow, registry)
            assert a == b
            assert [d.sort_key() for d in a] == sorted(d.sort_key() for d in a)

    def test_jsonl_shape(self, registry, accel_miswire_flow):
        import json

        lines = diagnostics_to_jsonl(check_flow(accel_miswire_flow, registry)).splitlines()
        for line in lines:
            data = json.loads(line)
            assert set(data) == {"severity", "code", "loc", "message"}


class TestFunctionSignature:
    def test_single_producer_single_consumer(self, registry, function_chain_flow):
        input_schema, output_schema, diags = function_signature(
            function_chain_flow, registry, "scale"
        )
        assert diags == []
        assert sorted(input_schema.properties) == ["lux", "ts"]
        assert output_schema.kind == "number"

    def test_conflicting_consumers(self, registry):
        # one consumer wants a bare number, the other a lux object: no common schema
        flow = FlowGraph(
            flow_id="c",
            nodes={
                "lamp": NodeInstance("light", {"period": 1000}),
                "fn": NodeInstance("function", {"body": "msg.lux"}),
                "chart": NodeInstance("chart-data", {"plot": "value"}),
                "battery": NodeInstance("chart-data", {"plot": "lux"}),
            },
            wires=(
                Wire("fn", "out", "battery", "in"),
                Wire("fn", "out", "chart", "in"),
                Wire("lamp", "out", "fn", "in"),
            ),
        )
        _, _, diags = function_signature(flow, registry, "fn")
        assert any(d.code == "conflicting-consumers" for d in diags)
        all_diags = check_flow(flow, registry)
        assert "conflicting-consumers" in codes(all_diags)

    def test_unwired_function_gets_empty_message(self, registry):
        flow = FlowGraph(flow_id="u", nodes={"fn": NodeInstance("function", {"body": "1 + 1"})})
        input_schema, output_schema, diags = function_signature(flow, registry, "fn")
        assert input_schema is None and output_schema is None
        check = check_flow(flow, registry)
        assert "unwired-input" in codes(check)
        # body referencing msg fields must fail against the empty message
        flow2 = FlowGraph(flow_id="u2", nodes={"fn": NodeInstance("function", {"body": "msg.x"})})
        assert "body-type" in codes(check_flow(flow2, registry))

    def test_meet_ignores_flexible_consumers(self, registry):
        flow = FlowGraph(
            flow_id="m",
            nodes={
                "lamp": NodeInstance("light", {"period": 1000}),
                "fn": NodeInstance("function", {"body": "msg.lux > 1000"}),
                "log": NodeInstance("debug", {}),
            },
            wires=(Wire("lamp", "out", "fn", "in"), Wire("fn", "out", "log", "in")),
        )
        input_schema, output_schema, _ = function_signature(flow, registry, "fn")
        assert input_schema is not None
        assert output_schema is None  # debug constrains nothing
        assert [d for d in check_flow(flow, registry) if d.severity == "error"] == []


class TestSoundnessOfCleanWires:
    def test_sampled_producer_values_validate_at_consumers(self, registry, phone_chart_flow, function_chain_flow):
        from flowkit.checker import SchemaContext
        from flowkit.model import DynamicResolver, resolve_port_schema

        for flow in (phone_chart_flow, function_chain_flow):
            assert [d for d in check_flow(flow, registry) if d.severity == "error"] == []
            ctx = SchemaContext(flow, registry)
            for wire in flow.wires:
                spec = ctx.spec(wire.dst)
                resolver = spec.input_port(wire.dst_port).resolver
                if isinstance(resolver, DynamicResolver):
                    continue
                consumer = resolve_port_schema(spec, ctx.config(wire.dst), wire.dst_port, "in")
                producer = ctx.output_schema(wire.src, wire.src_port)
                if producer is None:
                    continue
                for seed in range(50):
                    value = generate_value(producer, random.Random(seed))
                    assert validate_value(value, consumer).ok


class TestIncrementalEqualsBatch:
    def test_builtin_fixture_edits(self, registry, feed_merge_flow, function_chain_flow):
        cases = [
            (feed_merge_flow, RemoveWire(Wire("feed", "out", "pick_text", "in"))),
            (function_chain_flow, Reconfigure("scale", {"body": "msg.lux && true"})),
            (function_chain_flow, Reconfigure("chart", {"plot": "battery"})),
            (function_chain_flow, Reconfigure("lamp", {"period": 5000})),
        ]
        for flow, edit in cases:
            previous = check_flow(flow, registry)
            edited, changed = apply_edit(flow, edit, registry)
            incremental = recheck_after_edit(edited, registry, changed, previous)
            assert incremental == check_flow(edited, registry), edit

    def test_random_edit_sequences(self):
        rng = random.Random(777)
        registry = synthetic_specs(rng)
        for _ in range(60):
            flow = rand_labeled_flow(rng, registry)
            diags = check_flow(flow, registry)
            for _ in range(12):
                edit = rand_edit(rng, flow, registry)
                if edit is None:
                    continue
                flow, changed = apply_edit(flow, edit, registry)
                diags = recheck_after_edit(flow, registry, changed, diags)
                assert diags == check_flow(flow, registry), edit

    def test_consumer_reconfigure_reaches_upstream_function(self, registry, function_chain_flow):
        # switching the chart's plot changes the function's expected output: the
        # body must flip from clean to erroring without a full recheck
        previous = check_flow(function_chain_flow, registry)
        assert "body-type" not in codes(previous)
        edited, changed = apply_edit(
            function_chain_flow, Reconfigure("chart", {"plot": "lux"}), registry
        )
        incremental = recheck_after_edit(edited, registry, changed, previous)
        assert incremental == check_flow(edited, registry)
        assert "body-type" in codes(incremental)


class TestUpstreamReconfigureFlip:
    def test_battery_to_accelerometer_flips_chart_wire(self, registry, phone_chart_flow):
        # upstream sensor switch must surface as a downstream wire error,
        # and the incremental recheck must see it without a full pass
        previous = check_flow(phone_chart_flow, registry)
        assert "wire-incompatible" not in codes(previous)
        edited, changed = apply_edit(
            phone_chart_flow,
            Reconfigure("phone", {"sensor": "accelerometer", "period": 100}),
            registry,
        )
        incremental = recheck_after_edit(edited, registry, changed, previous)
        assert incremental == check_flow(edited, registry)
        flips = [d for d in incremental if d.code == "wire-incompatible"]
        assert len(flips) == 1
        assert flips[0].loc.wire == Wire("phone", "out", "chart", "in")
        # and back again
        restored, changed = apply_edit(
            edited, Reconfigure("phone", {"sensor": "battery", "period": 1000}), registry
        )
        again = recheck_after_edit(restored, registry, changed, incremental)
        assert again == check_flow(restored, registry)
        assert "wire-incompatible" not in codes(again)


class TestIncrementalOnDynamicSchemas:
    def test_random_edit_sequences_over_builtin_palette(self, registry):
        # function/extract/trigger/combine derive schemas from context, which
        # is exactly where incremental rechecking can drift from batch
        from genutil import rand_builtin_flow, rand_edit_generic

        rng = random.Random(2718)
        edits = 0
        for _ in range(40):
            flow = rand_builtin_flow(rng, registry)
            from flowkit.model import validate_flow

            validate_flow(flow, registry)
            diags = check_flow(flow, registry)
            for _ in range(10):
                edit = rand_edit_generic(rng, flow, registry)
                if edit is None:
                    continue
                flow, changed = apply_edit(flow, edit, registry)
                diags = recheck_after_edit(flow, registry, changed, diags)
                assert diags == check_flow(flow, registry), edit
                edits += 1
        assert edits > 250


class TestUnionWires:
    def test_union_producer_checked_arm_wise(self, registry):
        from flowkit.model import ConstResolver, NodeSpec, PortDef, SpecRegistry
        from flowkit.schema import SchemaDoc

        mixed = NodeSpec(
            spec_id="mixed-source",
            role="datasource",
            config_schema=SchemaDoc.obj({}),
            outputs=(
                PortDef(
                    "out",
                    ConstResolver(
                        SchemaDoc.union([SchemaDoc.integer(0, 5), SchemaDoc.integer(10, 20)])
                    ),
                ),
            ),
        )
        narrow = NodeSpec(
            spec_id="narrow-sink",
            role="output",
            config_schema=SchemaDoc.obj({}),
            inputs=(PortDef("in", ConstResolver(SchemaDoc.integer(0, 20))),),
        )
        tight = NodeSpec(
            spec_id="tight-sink",
            role="output",
            config_schema=SchemaDoc.obj({}),
            inputs=(PortDef("in", ConstResolver(SchemaDoc.integer(0, 15))),),
        )
        reg = SpecRegistry([mixed, narrow, tight])
        ok_flow = FlowGraph(
            flow_id="u1",
            nodes={"s": NodeInstance("mixed-source", {}), "d": NodeInstance("narrow-sink", {})},
            wires=(Wire("s", "out", "d", "in"),),
        )
        assert [d for d in check_flow(ok_flow, reg) if d.severity == "error"] == []
        bad_flow = FlowGraph(
            flow_id="u2",
            nodes={"s": NodeInstance("mixed-source", {}), "d": NodeInstance("tight-sink", {})},
            wires=(Wire("s", "out", "d", "in"),),
        )
        errors = [d for d in check_flow(bad_flow, reg) if d.severity == "error"]
        assert [d.code for d in errors] == ["wire-incompatible"]
