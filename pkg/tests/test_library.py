"""Built-in registry self-checks: schemas, profiles, transfers, skeletons."""

from __future__ import annotations

import random

from flowkit import expr
from flowkit.model import (
    ConstResolver,
    SelectResolver,
    validate_spec,
)
from flowkit.schema import NumRange, validate_profile
from flowkit.taint import SelectTransfer, apply_transfer


def static_schemas(registry):
    """All concretely resolvable port schemas in the library, labelled."""
    out = []
    for spec in registry.specs():
        for port in spec.inputs + spec.outputs:
            r = port.resolver
            if isinstance(r, ConstResolver):
                out.append((f"{spec.spec_id}.{port.name}", r.schema))
            elif isinstance(r, SelectResolver):
                for case, schema in sorted(r.cases.items()):
                    out.append((f"{spec.spec_id}.{port.name}[{case}]", schema))
    return out


class TestRegistrySelfCheck:
    def test_all_specs_valid(self, registry):
        for spec in registry.specs():
            validate_spec(spec)

    def test_expected_palette_present(self, registry):
        expected = {
            "light", "smartphone", "social-feed", "function", "extract",
            "trigger", "combine", "chart-data", "debug", "display", "export", "actuate",
        }
        assert expected <= set(registry.ids())

    def test_light_profiles_include_office_band(self, registry):
        spec = registry.get("light")
        office = next(p for p in spec.profiles if p.name == "office lighting")
        assert office.ranges["lux"] == NumRange(320, 500)
        names = {p.name for p in spec.profiles}
        assert {"overcast day", "full daylight"} <= names

    def test_profiles_sit_inside_schemas(self, registry):
        for spec in registry.specs():
            for profile in spec.profiles:
                fits_somewhere = False
                for port in spec.outputs:
                    r = port.resolver
                    schemas = (
                        [r.schema] if isinstance(r, ConstResolver)
                        else list(r.cases.values()) if isinstance(r, SelectResolver)
                        else []
                    )
                    for schema in schemas:
                        try:
                            validate_profile(profile, schema)
                            fits_somewhere = True
                        except Exception:
                            pass
                assert fits_somewhere, (spec.spec_id, profile.name)

    def test_transfers_monotone_by_sampling(self, registry):
        from flowkit.taint import PersonalAtom, Condition

        pool = [
            PersonalAtom("identifier", "handle"),
            PersonalAtom("personal", "opinions"),
            PersonalAtom("sensitive", "health"),
            PersonalAtom("personal", "timestamp-series", "secondary",
                         (Condition.granularity_at_most(1000),)),
        ]
        rng = random.Random(9)
        configs = {
            "light": {"period": 100},
            "smartphone": {"sensor": "bluetooth-scan", "period": 100},
            "social-feed": {"period": 1000},
            "function": {"body": "1"},
            "extract": {"fields": ["x"], "drop_tags": ["handle"]},
            "trigger": {"op": "gt", "threshold": 1},
            "combine": {},
            "chart-data": {"plot": "value"},
        }
        for spec in registry.specs():
            for port, transfer in spec.transfers.items():
                config = configs.get(spec.spec_id, {})
                for _ in range(100):
                    small = frozenset(rng.sample(pool, rng.randint(0, 3)))
                    big = small | frozenset(rng.sample(pool, rng.randint(0, 3)))
                    assert apply_transfer(transfer, config, small) <= apply_transfer(
                        transfer, config, big
                    ), (spec.spec_id, port)

    def test_smartphone_transfer_cases_cover_sensors(self, registry):
        spec = registry.get("smartphone")
        transfer = spec.transfers["out"]
        assert isinstance(transfer, SelectTransfer)
        assert set(transfer.cases) == {"accelerometer", "battery", "bluetooth-scan"}

    def test_actuate_reaches_spectrum_top_via_actuation(self, registry):
        from flowkit.risk import RiskFactors, node_factors, node_risk

        spec = registry.get("actuate")
        f = node_factors(spec, {"device": "pump"})
        assert node_risk(spec, f).score == spec.risk_spectrum[1]


class TestSkeletonTotality:
    def test_every_library_schema_pair_has_a_clean_skeleton(self, registry):
        schemas = static_schemas(registry)
        assert len(schemas) > 10
        checked = 0
        for _, input_schema in schemas:
            for _, output_schema in schemas:
                source = expr.generate_skeleton(input_schema, output_schema)
                program = expr.parse(source)
                result = expr.infer_type(program, input_schema, output_schema)
                assert result.ok, (source, input_schema, output_schema)
                checked += 1
        assert checked == len(schemas) ** 2
