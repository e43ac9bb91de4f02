"""CDDL subset: parsing, elaboration and schema-driven codecs."""

from .elab import ElabSchema, elaborate, elaborate_text
from .parser import inline, parse_cddl, parse_type
from .runtime import ListSeed, TableSeed, iterate, parse, serialize, sigma_check, validate
from .values import to_owned

__all__ = [
    "ElabSchema", "ListSeed", "TableSeed", "elaborate", "elaborate_text", "inline",
    "iterate", "parse", "parse_cddl", "parse_type", "serialize", "sigma_check", "to_owned",
    "validate",
]
