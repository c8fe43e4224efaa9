"""Closed-world schema documents for node port data types.

A SchemaDoc describes the values a port may carry: scalars with inclusive
numeric bounds or string enums, arrays with length bounds, closed objects
(undeclared properties are rejected), and unions. The module provides value
validation, structural subtyping (producer fits consumer), exact enumeration
of finite domains, and seeded mock-value generation driven by optional
context profiles.
"""

from __future__ import annotations

import json
import math
import string as _stringmod
from dataclasses import dataclass, field
from typing import Any, Iterator, Mapping, Optional, Sequence

KINDS = ("boolean", "integer", "number", "string", "array", "object", "union")

# Fallback bounds used when generating from an unbounded numeric schema.
_DEFAULT_INT_SPAN = 1_000_000
_DEFAULT_NUM_SPAN = 1_000_000.0


class SchemaError(ValueError):
    """The schema document itself is malformed (distinct from a value failing validation)."""


class ProfileError(ValueError):
    """A value profile does not belong to the schema it is applied to."""


class GenerationError(ValueError):
    """The requested value domain is empty (e.g. profile intersection collapsed a range)."""


def _is_num(v: Any) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


@dataclass(frozen=True)
class SchemaDoc:
    """One schema document node. Use the class-method constructors."""

    kind: str
    min: Optional[float] = None
    max: Optional[float] = None
    enum: Optional[tuple[str, ...]] = None
    items: Optional["SchemaDoc"] = None
    min_len: Optional[int] = None
    max_len: Optional[int] = None
    properties: Optional[Mapping[str, "SchemaDoc"]] = None
    required: Optional[frozenset[str]] = None
    arms: Optional[tuple["SchemaDoc", ...]] = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise SchemaError(f"unknown schema kind {self.kind!r}")
        if self.min is not None and not _is_num(self.min):
            raise SchemaError("minimum must be numeric")
        if self.max is not None and not _is_num(self.max):
            raise SchemaError("maximum must be numeric")
        if self.kind == "integer":
            # Normalize fractional bounds so the declared range and the set of
            # admissible integers agree (keeps subtyping exact).
            if self.min is not None:
                object.__setattr__(self, "min", math.ceil(self.min))
            if self.max is not None:
                object.__setattr__(self, "max", math.floor(self.max))
        if self.min is not None and self.max is not None and self.min > self.max:
            raise SchemaError(f"minimum {self.min} exceeds maximum {self.max}")
        if self.enum is not None:
            if self.kind != "string":
                raise SchemaError("enum is only valid on string schemas")
            if not self.enum:
                raise SchemaError("enum list must be non-empty")
            if any(not isinstance(e, str) for e in self.enum):
                raise SchemaError("enum entries must be strings")
            if len(set(self.enum)) != len(self.enum):
                raise SchemaError("enum entries must be distinct")
        if self.kind == "array":
            if not isinstance(self.items, SchemaDoc):
                raise SchemaError("array schema requires an item schema")
            for bound in (self.min_len, self.max_len):
                if bound is not None and (not isinstance(bound, int) or bound < 0):
                    raise SchemaError("array length bounds must be non-negative integers")
            if self.min_len is not None and self.max_len is not None and self.min_len > self.max_len:
                raise SchemaError(f"minLen {self.min_len} exceeds maxLen {self.max_len}")
        elif self.items is not None or self.min_len is not None or self.max_len is not None:
            raise SchemaError("item schema and length bounds are only valid on arrays")
        if self.kind == "object":
            if self.properties is None:
                raise SchemaError("object schema requires a property map")
            for name, sub in self.properties.items():
                if not isinstance(name, str):
                    raise SchemaError("property names must be strings")
                if not isinstance(sub, SchemaDoc):
                    raise SchemaError(f"property {name!r} is not a schema")
            req = self.required if self.required is not None else frozenset()
            if not isinstance(req, frozenset):
                req = frozenset(req)
            unknown = req - set(self.properties)
            if unknown:
                raise SchemaError(f"required names not declared: {sorted(unknown)}")
            object.__setattr__(self, "required", req)
        elif self.properties is not None or self.required is not None:
            raise SchemaError("properties/required are only valid on objects")
        if self.kind == "union":
            if not self.arms:
                raise SchemaError("union must have at least one arm")
            if any(not isinstance(a, SchemaDoc) for a in self.arms):
                raise SchemaError("union arms must be schemas")
        elif self.arms is not None:
            raise SchemaError("arms are only valid on unions")
        if self.kind in ("boolean", "string") and (self.min is not None or self.max is not None):
            raise SchemaError(f"numeric bounds are not valid on {self.kind} schemas")
        if self.kind in ("boolean", "array", "object", "union") and (
            self.min is not None or self.max is not None or self.enum is not None
        ):
            raise SchemaError(f"scalar constraints are not valid on {self.kind} schemas")

    # -- constructors ------------------------------------------------------

    @classmethod
    def boolean(cls) -> "SchemaDoc":
        return cls("boolean")

    @classmethod
    def integer(cls, minimum: Optional[float] = None, maximum: Optional[float] = None) -> "SchemaDoc":
        return cls("integer", min=minimum, max=maximum)

    @classmethod
    def number(cls, minimum: Optional[float] = None, maximum: Optional[float] = None) -> "SchemaDoc":
        return cls("number", min=minimum, max=maximum)

    @classmethod
    def string(cls, enum: Optional[Sequence[str]] = None) -> "SchemaDoc":
        return cls("string", enum=tuple(enum) if enum is not None else None)

    @classmethod
    def array(
        cls,
        items: "SchemaDoc",
        min_len: Optional[int] = None,
        max_len: Optional[int] = None,
    ) -> "SchemaDoc":
        return cls("array", items=items, min_len=min_len, max_len=max_len)

    @classmethod
    def obj(
        cls,
        properties: Mapping[str, "SchemaDoc"],
        required: Sequence[str] = (),
    ) -> "SchemaDoc":
        return cls("object", properties=dict(properties), required=frozenset(required))

    @classmethod
    def union(cls, arms: Sequence["SchemaDoc"]) -> "SchemaDoc":
        return cls("union", arms=tuple(arms))

    def prop_names(self) -> list[str]:
        return sorted(self.properties or {})


# -- serialization ---------------------------------------------------------

def schema_to_json(schema: SchemaDoc) -> dict:
    """Serialize with fixed key order; round-trips bit-exactly through schema_from_json."""
    out: dict[str, Any] = {"kind": schema.kind}
    if schema.min is not None:
        out["min"] = schema.min
    if schema.max is not None:
        out["max"] = schema.max
    if schema.enum is not None:
        out["enum"] = list(schema.enum)
    if schema.items is not None:
        out["items"] = schema_to_json(schema.items)
    if schema.min_len is not None:
        out["minLen"] = schema.min_len
    if schema.max_len is not None:
        out["maxLen"] = schema.max_len
    if schema.properties is not None:
        out["properties"] = {k: schema_to_json(schema.properties[k]) for k in sorted(schema.properties)}
        out["required"] = sorted(schema.required or ())
    if schema.arms is not None:
        out["arms"] = [schema_to_json(a) for a in schema.arms]
    return out


_SCHEMA_KEYS = {"kind", "min", "max", "enum", "items", "minLen", "maxLen", "properties", "required", "arms"}


def schema_from_json(data: Any) -> SchemaDoc:
    if not isinstance(data, dict):
        raise SchemaError("schema document must be a JSON object")
    unknown = set(data) - _SCHEMA_KEYS
    if unknown:
        raise SchemaError(f"unknown schema keys: {sorted(unknown)}")
    kind = data.get("kind")
    items = schema_from_json(data["items"]) if "items" in data else None
    props = None
    if "properties" in data:
        if not isinstance(data["properties"], dict):
            raise SchemaError("properties must be an object")
        props = {k: schema_from_json(v) for k, v in data["properties"].items()}
    arms = None
    if "arms" in data:
        if not isinstance(data["arms"], list):
            raise SchemaError("arms must be a list")
        arms = tuple(schema_from_json(a) for a in data["arms"])
    enum = data.get("enum")
    if enum is not None:
        if not isinstance(enum, list):
            raise SchemaError("enum must be a list")
        enum = tuple(enum)
    required = data.get("required")
    if required is not None and not isinstance(required, list):
        raise SchemaError("required must be a list")
    return SchemaDoc(
        kind=kind if isinstance(kind, str) else "",
        min=data.get("min"),
        max=data.get("max"),
        enum=enum,
        items=items,
        min_len=data.get("minLen"),
        max_len=data.get("maxLen"),
        properties=props,
        required=frozenset(required) if required is not None else (frozenset() if props is not None else None),
        arms=arms,
    )


# -- validation ------------------------------------------------------------

@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    violations: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.ok


def validate_value(value: Any, schema: SchemaDoc) -> ValidationResult:
    """Check a structured value against a schema.

    Returns ok plus the paths of every violation ("" is the root, ".name"
    descends into an object property, "[i]" into an array item).
    """
    if not isinstance(schema, SchemaDoc):
        raise SchemaError("schema must be a SchemaDoc")
    violations: list[str] = []
    _validate(value, schema, "", violations)
    return ValidationResult(not violations, tuple(violations))


def _validate(value: Any, schema: SchemaDoc, path: str, out: list[str]) -> None:
    kind = schema.kind
    if kind == "boolean":
        if not isinstance(value, bool):
            out.append(path)
    elif kind == "integer":
        if not (isinstance(value, int) and not isinstance(value, bool)):
            out.append(path)
        elif (schema.min is not None and value < schema.min) or (
            schema.max is not None and value > schema.max
        ):
            out.append(path)
    elif kind == "number":
        if not _is_num(value) or not math.isfinite(value):
            out.append(path)
        elif (schema.min is not None and value < schema.min) or (
            schema.max is not None and value > schema.max
        ):
            out.append(path)
    elif kind == "string":
        if not isinstance(value, str):
            out.append(path)
        elif schema.enum is not None and value not in schema.enum:
            out.append(path)
    elif kind == "array":
        if not isinstance(value, list):
            out.append(path)
            return
        if schema.min_len is not None and len(value) < schema.min_len:
            out.append(path)
        if schema.max_len is not None and len(value) > schema.max_len:
            out.append(path)
        for i, item in enumerate(value):
            _validate(item, schema.items, f"{path}[{i}]", out)
    elif kind == "object":
        if not isinstance(value, dict):
            out.append(path)
            return
        props = schema.properties or {}
        for name in sorted(schema.required or ()):
            if name not in value:
                out.append(f"{path}.{name}")
        for name in sorted(value):
            if name not in props:
                out.append(f"{path}.{name}")
        for name in sorted(value):
            if name in props:
                _validate(value[name], props[name], f"{path}.{name}", out)
    elif kind == "union":
        for arm in schema.arms:
            sub: list[str] = []
            _validate(value, arm, path, sub)
            if not sub:
                return
        out.append(path)


# -- structural subtyping ---------------------------------------------------

@dataclass(frozen=True)
class Compat:
    compatible: bool
    path: str = ""
    reason: str = ""

    def __bool__(self) -> bool:
        return self.compatible


_OK = Compat(True)


def is_subtype(producer: SchemaDoc, consumer: SchemaDoc) -> Compat:
    """Sound structural check: compatible implies every producer value validates under the consumer.

    Exact on union-free schemas; a producer must fit a single consumer union
    arm, so some valid union combinations are conservatively rejected.
    """
    if not isinstance(producer, SchemaDoc) or not isinstance(consumer, SchemaDoc):
        raise SchemaError("both sides of a subtype check must be SchemaDocs")
    return _sub(producer, consumer, "")


def _bound_ok(p_lo, p_hi, c_lo, c_hi) -> bool:
    lo_ok = c_lo is None or (p_lo is not None and p_lo >= c_lo)
    hi_ok = c_hi is None or (p_hi is not None and p_hi <= c_hi)
    return lo_ok and hi_ok


def _sub(p: SchemaDoc, c: SchemaDoc, path: str) -> Compat:
    if p.kind == "union":
        for arm in p.arms:
            r = _sub(arm, c, path)
            if not r:
                return r
        return _OK
    if c.kind == "union":
        for arm in c.arms:
            if _sub(p, arm, path):
                return _OK
        return Compat(False, path, "no single consumer union arm admits the producer")
    if p.kind == "boolean":
        return _OK if c.kind == "boolean" else Compat(False, path, f"boolean does not fit {c.kind}")
    if p.kind in ("integer", "number"):
        widening = c.kind == "number" or (c.kind == "integer" and p.kind == "integer")
        if not widening:
            return Compat(False, path, f"{p.kind} does not fit {c.kind}")
        if not _bound_ok(p.min, p.max, c.min, c.max):
            return Compat(False, path, "numeric range not contained in consumer range")
        return _OK
    if p.kind == "string":
        if c.kind != "string":
            return Compat(False, path, f"string does not fit {c.kind}")
        if c.enum is None:
            return _OK
        if p.enum is None:
            return Compat(False, path, "unconstrained string does not fit an enum")
        extra = set(p.enum) - set(c.enum)
        if extra:
            return Compat(False, path, f"enum values not accepted: {sorted(extra)}")
        return _OK
    if p.kind == "array":
        if c.kind != "array":
            return Compat(False, path, f"array does not fit {c.kind}")
        if p.max_len == 0:
            # Producer can only emit []; item schemas are irrelevant.
            if c.min_len not in (None, 0):
                return Compat(False, path, "consumer requires a non-empty array")
            return _OK
        if (c.min_len or 0) > (p.min_len or 0):
            return Compat(False, path, "producer may emit arrays shorter than consumer minimum")
        if c.max_len is not None and (p.max_len is None or p.max_len > c.max_len):
            return Compat(False, path, "producer may emit arrays longer than consumer maximum")
        return _sub(p.items, c.items, path + "[]")
    if p.kind == "object":
        if c.kind != "object":
            return Compat(False, path, f"object does not fit {c.kind}")
        p_props = p.properties or {}
        c_props = c.properties or {}
        for name in sorted(c.required or ()):
            if name not in (p.required or ()):
                return Compat(False, f"{path}.{name}", "consumer requires a property the producer may omit")
        for name in sorted(p_props):
            if name not in c_props:
                return Compat(False, f"{path}.{name}", "closed consumer does not declare this producer property")
        for name in sorted(p_props):
            r = _sub(p_props[name], c_props[name], f"{path}.{name}")
            if not r:
                return r
        return _OK
    raise SchemaError(f"unhandled kind {p.kind}")  # pragma: no cover


# -- finite-domain enumeration ----------------------------------------------

def domain_size(schema: SchemaDoc) -> Optional[int]:
    """Number of admissible values, or None when infinite.

    For unions this is an upper bound (arms may overlap); enumerate_values
    deduplicates and is exact.
    """
    kind = schema.kind
    if kind == "boolean":
        return 2
    if kind == "integer":
        if schema.min is None or schema.max is None:
            return None
        return int(schema.max) - int(schema.min) + 1
    if kind == "number":
        return None
    if kind == "string":
        return len(schema.enum) if schema.enum is not None else None
    if kind == "array":
        if schema.max_len is None:
            return None
        if schema.max_len == 0:
            return 1
        item = domain_size(schema.items)
        if item is None:
            return None
        return sum(item ** k for k in range((schema.min_len or 0), schema.max_len + 1))
    if kind == "object":
        total = 1
        for name in sorted(schema.properties or {}):
            sub = domain_size(schema.properties[name])
            if sub is None:
                return None
            if name not in (schema.required or ()):
                sub += 1  # the absent case
            total *= sub
        return total
    if kind == "union":
        total = 0
        for arm in schema.arms:
            sub = domain_size(arm)
            if sub is None:
                return None
            total += sub
        return total
    raise SchemaError(f"unhandled kind {kind}")  # pragma: no cover


def _iter_domain(schema: SchemaDoc) -> Iterator[Any]:
    kind = schema.kind
    if kind == "boolean":
        yield True
        yield False
    elif kind == "integer":
        yield from range(int(schema.min), int(schema.max) + 1)
    elif kind == "string":
        yield from schema.enum
    elif kind == "array":
        for k in range((schema.min_len or 0), schema.max_len + 1):
            yield from _iter_tuples(schema.items, k)
    elif kind == "object":
        names = sorted(schema.properties or {})
        required = schema.required or frozenset()

        def rec(i: int, acc: dict) -> Iterator[dict]:
            if i == len(names):
                yield dict(acc)
                return
            name = names[i]
            if name not in required:
                yield from rec(i + 1, acc)
            for v in _iter_domain(schema.properties[name]):
                acc[name] = v
                yield from rec(i + 1, acc)
                del acc[name]

        yield from rec(0, {})
    elif kind == "union":
        for arm in schema.arms:
            yield from _iter_domain(arm)
    else:  # pragma: no cover
        raise SchemaError(f"kind {kind} has no finite domain")


def _iter_tuples(item: SchemaDoc, k: int) -> Iterator[list]:
    if k == 0:
        yield []
        return
    for head in _iter_domain(item):
        for tail in _iter_tuples(item, k - 1):
            yield [head] + tail


def enumerate_values(schema: SchemaDoc, budget: int) -> Optional[list]:
    """Exact, deduplicated enumeration of a finite domain.

    Returns None when the domain is infinite or holds more than `budget`
    distinct values.
    """
    if budget <= 0:
        raise ValueError("budget must be positive")
    if domain_size(schema) is None:
        return None
    out: list = []
    seen: set[str] = set()
    for v in _iter_domain(schema):
        key = json.dumps(v, sort_keys=True)
        if key in seen:
            continue
        seen.add(key)
        out.append(v)
        if len(out) > budget:
            return None
    return out


# -- value profiles ----------------------------------------------------------

@dataclass(frozen=True)
class NumRange:
    lo: float
    hi: float


@dataclass(frozen=True)
class EnumSubset:
    values: tuple[str, ...]


@dataclass(frozen=True)
class ValueProfile:
    """Named sub-ranges for schema fields under some real-world context.

    Field paths are dot-separated object property names; "" addresses a
    scalar root schema.
    """

    name: str
    ranges: Mapping[str, "NumRange | EnumSubset"] = field(default_factory=dict)
    description: str = ""


def profile_to_json(profile: ValueProfile) -> dict:
    ranges: dict[str, Any] = {}
    for path in sorted(profile.ranges):
        r = profile.ranges[path]
        if isinstance(r, NumRange):
            ranges[path] = {"min": r.lo, "max": r.hi}
        else:
            ranges[path] = {"enum": list(r.values)}
    return {"name": profile.name, "description": profile.description, "ranges": ranges}


def profile_from_json(data: Any) -> ValueProfile:
    if not isinstance(data, dict) or not isinstance(data.get("name"), str):
        raise ProfileError("profile must be an object with a name")
    ranges: dict[str, NumRange | EnumSubset] = {}
    for path, r in (data.get("ranges") or {}).items():
        if "enum" in r:
            ranges[path] = EnumSubset(tuple(r["enum"]))
        else:
            ranges[path] = NumRange(r["min"], r["max"])
    return ValueProfile(data["name"], ranges, data.get("description", ""))


def _resolve_path(schema: SchemaDoc, path: str) -> Optional[SchemaDoc]:
    cur = schema
    if path == "":
        return cur
    for part in path.split("."):
        if cur.kind != "object" or part not in (cur.properties or {}):
            return None
        cur = cur.properties[part]
    return cur


def validate_profile(profile: ValueProfile, schema: SchemaDoc) -> None:
    """Raise ProfileError unless every profiled sub-range sits inside the schema's range."""
    for path, r in profile.ranges.items():
        sub = _resolve_path(schema, path)
        if sub is None:
            raise ProfileError(f"profile {profile.name!r}: path {path!r} not in schema")
        if isinstance(r, NumRange):
            if sub.kind not in ("integer", "number"):
                raise ProfileError(f"profile {profile.name!r}: path {path!r} is not numeric")
            if r.lo > r.hi:
                raise ProfileError(f"profile {profile.name!r}: empty range at {path!r}")
            if not _bound_ok(r.lo, r.hi, sub.min, sub.max):
                raise ProfileError(f"profile {profile.name!r}: range at {path!r} exceeds schema bounds")
        else:
            if sub.kind != "string":
                raise ProfileError(f"profile {profile.name!r}: path {path!r} is not a string")
            if not r.values:
                raise ProfileError(f"profile {profile.name!r}: empty enum subset at {path!r}")
            if sub.enum is not None and not set(r.values) <= set(sub.enum):
                raise ProfileError(f"profile {profile.name!r}: enum subset at {path!r} exceeds schema enum")


# -- mock-value generation ----------------------------------------------------

_WORD_CHARS = _stringmod.ascii_lowercase


def generate_value(schema: SchemaDoc, rng, profile: Optional[ValueProfile] = None) -> Any:
    """Generate a schema-conforming value from a seeded random.Random stream.

    Identical seeds yield identical values. When a profile is given, every
    profiled field is present and lies in its sub-range.
    """
    if profile is not None:
        validate_profile(profile, schema)
    ranges = dict(profile.ranges) if profile is not None else {}
    return _gen(schema, rng, ranges, "")


def _gen(schema: SchemaDoc, rng, ranges: Mapping[str, Any], path: str) -> Any:
    kind = schema.kind
    constraint = ranges.get(path)
    if kind == "boolean":
        return rng.random() < 0.5
    if kind == "integer":
        lo, hi = schema.min, schema.max
        if isinstance(constraint, NumRange):
            lo = max(lo, math.ceil(constraint.lo)) if lo is not None else math.ceil(constraint.lo)
            hi = min(hi, math.floor(constraint.hi)) if hi is not None else math.floor(constraint.hi)
        if lo is None and hi is None:
            lo, hi = -_DEFAULT_INT_SPAN, _DEFAULT_INT_SPAN
        elif lo is None:
            lo = int(hi) - 2 * _DEFAULT_INT_SPAN
        elif hi is None:
            hi = int(lo) + 2 * _DEFAULT_INT_SPAN
        if lo > hi:
            raise GenerationError(f"empty integer domain at {path!r}")
        return rng.randint(int(lo), int(hi))
    if kind == "number":
        lo, hi = schema.min, schema.max
        if isinstance(constraint, NumRange):
            lo = max(lo, constraint.lo) if lo is not None else constraint.lo
            hi = min(hi, constraint.hi) if hi is not None else constraint.hi
        if lo is None and hi is None:
            lo, hi = -_DEFAULT_NUM_SPAN, _DEFAULT_NUM_SPAN
        elif lo is None:
            lo = float(hi) - 2 * _DEFAULT_NUM_SPAN
        elif hi is None:
            hi = float(lo) + 2 * _DEFAULT_NUM_SPAN
        if lo > hi:
            raise GenerationError(f"empty number domain at {path!r}")
        return rng.uniform(float(lo), float(hi))
    if kind == "string":
        pool = schema.enum
        if isinstance(constraint, EnumSubset):
            if pool is not None:
                pool = tuple(v for v in pool if v in set(constraint.values))
            else:
                pool = constraint.values
            if not pool:
                raise GenerationError(f"empty enum domain at {path!r}")
        if pool is not None:
            return pool[rng.randrange(len(pool))]
        length = rng.randint(0, 8)
        return "".join(_WORD_CHARS[rng.randrange(len(_WORD_CHARS))] for _ in range(length))
    if kind == "array":
        lo = schema.min_len or 0
        hi = lo + 3 if schema.max_len is None else min(schema.max_len, lo + 3)
        length = rng.randint(lo, hi)
        return [_gen(schema.items, rng, ranges, path) for _ in range(length)]
    if kind == "object":
        out = {}
        prefix = path + "." if path else ""
        for name in sorted(schema.properties or {}):
            profiled = any(p == prefix + name or p.startswith(prefix + name + ".") for p in ranges)
            if name in (schema.required or ()) or profiled or rng.random() < 0.5:
                out[name] = _gen(schema.properties[name], rng, ranges, prefix + name)
        return out
    if kind == "union":
        arm = schema.arms[rng.randrange(len(schema.arms))]
        return _gen(arm, rng, ranges, path)
    raise SchemaError(f"unhandled kind {kind}")  # pragma: no cover
