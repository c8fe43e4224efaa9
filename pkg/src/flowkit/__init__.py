"""flowkit: a privacy-aware flow-based programming toolkit.

Compose apps as graphs of datasource / processor / output nodes. Every wire
is schema-checked at development time, personal-data labels are tracked to a
fixpoint across the graph, risk is scored per node and per app, GDPR-style
manifests are generated from the flow itself, and checked flows execute
deterministically with full message provenance.
"""

from .schema import (
    Compat,
    EnumSubset,
    GenerationError,
    NumRange,
    ProfileError,
    SchemaDoc,
    SchemaError,
    ValueProfile,
    enumerate_values,
    generate_value,
    is_subtype,
    validate_value,
)

__version__ = "0.1.0"

__all__ = [
    "Compat",
    "EnumSubset",
    "GenerationError",
    "NumRange",
    "ProfileError",
    "SchemaDoc",
    "SchemaError",
    "ValueProfile",
    "enumerate_values",
    "generate_value",
    "is_subtype",
    "validate_value",
    "__version__",
]
