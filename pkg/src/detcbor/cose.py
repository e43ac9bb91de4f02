"""COSE_Sign1 signing and verification (single signer, EdDSA).

Messages are built and checked through the schema runtime, so every
message this module emits or accepts is deterministically encoded and
matches the schemas below.
"""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Union

from . import det as D
from .cddl import elaborate_text, parse, serialize
from .cddl.values import VBytes, VLeft, VPair, VRight, VUnit
from .errors import (
    CborError,
    NonDeterministicEncoding,
    NonMinimalInt,
    ParseFailure,
    SignatureInvalid,
    UnsortedOrDuplicateKeys,
    ValidationError,
)

ALG_EDDSA = -8
SIG_LEN = 64
SIGN1_TAG = 18

_COMMON = """
label = int / tstr
values = any
"""

# header map with the mutual exclusion of keys 5 (IV) and 6 (partial IV):
# when 5 is present a 6 entry must have a value of the empty type, which no
# value has, and the cut turns that into a rejection of the whole map
GENERIC_HEADERS = """
header_map = {
  Generic_Headers,
  * label => values
}
Generic_Headers = (
  ? 1 ^=> int / tstr,
  ? 2 ^=> [label, * label],
  ? 3 ^=> tstr / int,
  ? 4 ^=> bstr,
  ((5 ^=> bstr, ? 6 ^=> no_value) // ? 6 ^=> bstr)
)
no_value = 1..0
""" + _COMMON

# the widely published form: it lets the table absorb key 6 next to key 5
GENERIC_HEADERS_UNFIXED = """
header_map = {
  Generic_Headers,
  * label => values
}
Generic_Headers = (
  ? 1 => int / tstr,
  ? 2 => [label, * label],
  ? 3 => tstr / int,
  ? 4 => bstr,
  ? ( 5 => bstr // 6 => bstr )
)
""" + _COMMON

COSE_SIGN1 = """
COSE_Sign1_Tagged = #6.18(COSE_Sign1)
COSE_Sign1 = [
  protected : bstr,
  unprotected : header_map,
  payload : bstr / nil,
  signature : bstr
]
""" + GENERIC_HEADERS.replace(_COMMON, "") + _COMMON

# each context string fixes the number of protected fields, so no optional
# item has to be guessed before the mandatory tail
SIG_STRUCTURE = """
Sig_structure = [
  "Signature", body_protected : bstr, sign_protected : bstr,
    external_aad : bstr, payload : bstr
  //
  "Signature1", body_protected : bstr, external_aad : bstr, payload : bstr
]
"""

# the published form: a greedy optional member swallows external_aad
SIG_STRUCTURE_UNFIXED = """
Sig_structure = [
  context : "Signature" / "Signature1",
  body_protected : bstr,
  ? sign_protected : bstr,
  external_aad : bstr,
  payload : bstr
]
"""

COSE_KEY_OKP = """
COSE_Key_OKP = { 1 : 1, -1 : int / tstr, ? -2 : bstr, ? -4 : bstr, * label => values }
""" + _COMMON

SCHEMAS = {
    "COSE_Sign1_Tagged": COSE_SIGN1,
    "Sig_structure": SIG_STRUCTURE,
    "header_map": GENERIC_HEADERS,
    "COSE_Key_OKP": COSE_KEY_OKP,
}


@lru_cache(maxsize=None)
def schema(name: str):
    return elaborate_text(SCHEMAS[name], name)


# -- crypto providers -----------------------------------------------------------------


class CryptoProvider:
    def sign(self, sk: bytes, message: bytes) -> bytes:
        raise NotImplementedError

    def verify(self, pk: bytes, message: bytes, signature: bytes) -> bool:
        raise NotImplementedError


class FakeProvider(CryptoProvider):
    """Deterministic keyed-hash stand-in for a signature scheme.

    The "signature" is HMAC-SHA512 under the key, so public and private keys
    are the same bytes. Only for tests and demos.
    """

    @staticmethod
    def keypair(seed: bytes):
        k = hashlib.sha256(b"fake-key" + seed).digest()
        return k, k

    def sign(self, sk, message):
        return hmac.new(bytes(sk), bytes(message), hashlib.sha512).digest()

    def verify(self, pk, message, signature):
        return hmac.compare_digest(self.sign(pk, message), bytes(signature))


class Ed25519Provider(CryptoProvider):
    """Ed25519 through the ``cryptography`` package; keys are raw 32 bytes."""

    def __init__(self):
        from cryptography.hazmat.primitives.asymmetric import ed25519

        self._ed = ed25519

    def public_key(self, sk: bytes) -> bytes:
        from cryptography.hazmat.primitives import serialization as S

        priv = self._ed.Ed25519PrivateKey.from_private_bytes(bytes(sk))
        return priv.public_key().public_bytes(S.Encoding.Raw, S.PublicFormat.Raw)

    def sign(self, sk, message):
        return self._ed.Ed25519PrivateKey.from_private_bytes(bytes(sk)).sign(bytes(message))

    def verify(self, pk, message, signature):
        from cryptography.exceptions import InvalidSignature

        try:
            self._ed.Ed25519PublicKey.from_public_bytes(bytes(pk)).verify(
                bytes(signature), bytes(message))
        except (InvalidSignature, ValueError):
            return False
        return True


# -- typed-value helpers ----------------------------------------------------------------


def _pairs(*vs):
    out = vs[-1]
    for v in reversed(vs[:-1]):
        out = VPair(v, out)
    return out


def _check_canonical(data) -> None:
    try:
        size = D.det_check(data)
    except (NonMinimalInt, UnsortedOrDuplicateKeys) as e:
        raise NonDeterministicEncoding(f"not deterministically encoded: {e}") from e
    except CborError as e:
        raise ParseFailure(f"malformed CBOR: {e}") from e
    if size != len(data):
        raise ParseFailure(f"{len(data) - size} trailing bytes")


def headers(entries: Optional[dict] = None):
    """Typed header map from ``{label: value}`` with Python values."""
    data = D.encode_det(D.from_python(entries or {}))
    return parse(schema("header_map"), data)[0]


def protected_bytes(hdrs) -> bytes:
    """Serialized protected headers; an empty map becomes the empty string."""
    if hdrs is None:
        return b""
    data = serialize(schema("header_map"), hdrs)
    return b"" if data == b"\xa0" else data


def check_protected(protected) -> None:
    """Protected bytes must be empty or a deterministic header map."""
    if len(protected) == 0:
        return
    _check_canonical(protected)
    try:
        parse(schema("header_map"), protected)
    except ValidationError as e:
        raise ParseFailure(f"protected headers: {e}") from e


def to_be_signed(protected: bytes, payload: bytes, aad: bytes = b"") -> bytes:
    """The Sig_structure bytes a Sign1 signature covers."""
    check_protected(protected)
    v = VRight(_pairs(VUnit(), VBytes(bytes(protected)), VBytes(bytes(aad)),
                      VBytes(bytes(payload))))
    return serialize(schema("Sig_structure"), v)


@dataclass
class Sign1Message:
    protected: bytes
    unprotected: object  # typed header map
    payload: Optional[bytes]
    signature: bytes


def encode_sign1(m: Sign1Message, out=None):
    payload = VLeft(VBytes(m.payload)) if m.payload is not None else VRight(VUnit())
    v = _pairs(VBytes(m.protected), m.unprotected, payload, VBytes(m.signature))
    return serialize(schema("COSE_Sign1_Tagged"), v, out)


def decode_sign1(msg) -> Sign1Message:
    """Validate and parse a tagged Sign1 message (deterministic encoding only)."""
    _check_canonical(msg)
    try:
        v, _ = parse(schema("COSE_Sign1_Tagged"), msg)
    except ValidationError as e:
        raise ParseFailure(f"not a COSE_Sign1_Tagged message: {e}") from e
    prot, rest = v.first, v.second
    unprot, rest = rest.first, rest.second
    pay, sig = rest.first, rest.second
    payload = bytes(pay.value.data) if isinstance(pay, VLeft) else None
    return Sign1Message(bytes(prot.data), unprot, payload, bytes(sig.data))


def sign1(cp: CryptoProvider, sk: bytes, protected, payload: bytes, out=None,
          unprotected=None, aad: bytes = b""):
    """Sign ``payload``; returns the message bytes, or the size written into ``out``.

    ``protected`` and ``unprotected`` are typed header maps (see
    :func:`headers`); ``None`` means an empty map.
    """
    prot = protected_bytes(protected)
    tbs = to_be_signed(prot, payload, aad)
    sig = cp.sign(sk, tbs)
    if len(sig) != SIG_LEN:
        raise ValueError(f"provider returned a {len(sig)}-byte signature")
    m = Sign1Message(prot, unprotected if unprotected is not None else headers(), bytes(payload), sig)
    return encode_sign1(m, out)


def verify1(cp: CryptoProvider, pk: bytes, msg, aad: bytes = b"") -> bytes:
    """The payload of ``msg`` if its signature verifies under ``pk``."""
    m = decode_sign1(msg)
    if m.payload is None:
        raise ParseFailure("detached payloads are not supported")
    if len(m.signature) != SIG_LEN:
        raise SignatureInvalid(f"signature is {len(m.signature)} bytes, expected {SIG_LEN}")
    check_protected(m.protected)
    tbs = to_be_signed(m.protected, m.payload, aad)
    if not cp.verify(pk, tbs, m.signature):
        raise SignatureInvalid("signature does not verify")
    return m.payload


# -- OKP keys -------------------------------------------------------------------------------


@dataclass
class OkpKey:
    curve: Union[int, str]
    public: Optional[bytes]
    private: Optional[bytes]
    rest: object  # table of the remaining entries


def parse_key_okp(data) -> OkpKey:
    v, _ = parse(schema("COSE_Key_OKP"), data)
    # 1 : 1 carries no field; then -1, ? -2, ? -4 and the table
    _, rest = v.first, v.second
    crv, rest = rest.first, rest.second
    pub, rest = rest.first, rest.second
    priv, table = rest.first, rest.second
    c = crv.second
    curve = c.value.text if isinstance(c, VRight) else c.value.value

    def opt(o):
        return bytes(o.value.second.data) if hasattr(o, "value") else None

    return OkpKey(curve, opt(pub), opt(priv), table)


def okp_key_bytes(curve: int, public: Optional[bytes] = None, private: Optional[bytes] = None,
                  extra: Optional[dict] = None) -> bytes:
    """Canonical COSE_Key_OKP encoding (kty 1 = OKP)."""
    m = dict(extra or {})
    m.update({1: 1, -1: curve})
    if public is not None:
        m[-2] = bytes(public)
    if private is not None:
        m[-4] = bytes(private)
    return D.encode_det(D.from_python(m))


__all__ = [
    "ALG_EDDSA", "CryptoProvider", "Ed25519Provider", "FakeProvider", "OkpKey", "SCHEMAS",
    "Sign1Message", "decode_sign1", "encode_sign1", "headers", "okp_key_bytes",
    "parse_key_okp", "schema", "sign1", "to_be_signed", "verify1"
]
