"""Deterministic CBOR codec, CDDL schema toolchain and COSE_Sign1 signing."""

from . import det, errors, raw
from .det import compare_det, decode_det, det_check, encode_det, loads, mk_map
from .raw import validate_raw

__version__ = "0.1.0"

__all__ = [
    "compare_det", "decode_det", "det", "det_check", "encode_det", "errors", "loads",
    "mk_map", "raw", "validate_raw",
]
