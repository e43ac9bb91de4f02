"""Diagnostic notation for CBOR items.

The writer walks validated bytes with an explicit stack. Integer, length and
tag arguments that are wider than necessary carry an encoding indicator
(``_0`` for one trailing byte up to ``_3`` for eight), so the notation
identifies raw items exactly. The reader parses that notation back into raw
items.
"""

from __future__ import annotations

import json
import re

from . import raw as R

_SIMPLE_NAMES = {20: "false", 21: "true", 22: "null", 23: "undefined"}
_NAMED = {v: k for k, v in _SIMPLE_NAMES.items()}


def _ind(v: R.ShallowView) -> str:
    if v.size_class == R.minimal_size(v.arg):
        return ""
    return f"_{v.size_class - 1}"


def _scalar(v: R.ShallowView) -> str:
    k = v.kind
    if k == R.Kind.UINT:
        return f"{v.arg}{_ind(v)}"
    if k == R.Kind.NINT:
        return f"{-1 - v.arg}{_ind(v)}"
    if k == R.Kind.BYTES:
        return f"h'{bytes(v.payload).hex()}'{_ind(v)}"
    if k == R.Kind.TEXT:
        return json.dumps(v.text, ensure_ascii=False) + _ind(v)
    if k == R.Kind.SIMPLE:
        name = _SIMPLE_NAMES.get(v.arg)
        return name if name else f"simple({v.arg})"
    raise AssertionError(k)


def diag(buf, pos: int = 0) -> str:
    """Notation for the item at ``pos``; the bytes are validated first."""
    R.validate_raw(buf, pos)
    out = []
    # frames: [closer, children left, is_map, children emitted]
    stack = []
    p = pos
    while True:
        if stack and stack[-1][3]:
            top = stack[-1]
            out.append(": " if top[2] and top[3] % 2 else ", ")
        v = R.read_shallow(buf, p)
        k = v.kind
        if k in (R.Kind.ARRAY, R.Kind.MAP, R.Kind.TAGGED):
            ind = _ind(v)
            if k == R.Kind.TAGGED:
                out.append(f"{v.arg}{ind}(")
                frame = [")", 1, False, 0]
            elif k == R.Kind.ARRAY:
                out.append("[" + (ind + " " if ind else ""))
                frame = ["]", v.arg, False, 0]
            else:
                out.append("{" + (ind + " " if ind else ""))
                frame = ["}", 2 * v.arg, True, 0]
            p = v.body
            if frame[1]:
                stack.append(frame)
                continue
            out.append(frame[0])
        else:
            out.append(_scalar(v))
            p = v.end
        # one child finished; close every container it completes
        while stack:
            top = stack[-1]
            top[1] -= 1
            top[3] += 1
            if top[1]:
                break
            out.append(top[0])
            stack.pop()
        if not stack:
            return "".join(out)


def diag_item(x) -> str:
    """Notation for a canonical item."""
    from .det import encode_det

    return diag(encode_det(x))


# -- reader ------------------------------------------------------------------------------

_TOKEN = re.compile(
    r"""\s*(?:
      (?P<hex>h'(?P<hexbody>[0-9a-fA-F\s]*)')
    | (?P<str>"(?:[^"\\]|\\.)*")
    | (?P<int>-?\d+)
    | (?P<ind>_[0-3])
    | (?P<name>false|true|null|undefined|simple)
    | (?P<punct>[\[\]{}(),:])
    )""",
    re.VERBOSE,
)


class DiagSyntaxError(ValueError):
    pass


def _tokens(text):
    pos = 0
    toks = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise DiagSyntaxError(f"unexpected input at offset {pos}")
        pos = m.end()
        kind = m.lastgroup if m.lastgroup != "hexbody" else "hex"
        for name in ("hex", "str", "int", "ind", "name", "punct"):
            if m.group(name) is not None:
                kind = name
                break
        toks.append((kind, m.group(kind), m))
    return toks


def parse_diag(text: str):
    """Raw item for a diagnostic-notation string produced by :func:`diag`."""
    toks = _tokens(text)
    i = 0

    def peek():
        return toks[i] if i < len(toks) else (None, None, None)

    def take():
        nonlocal i
        t = peek()
        if t[0] is None:
            raise DiagSyntaxError("unexpected end of input")
        i += 1
        return t

    def expect(p):
        t = take()
        if t[1] != p:
            raise DiagSyntaxError(f"expected {p!r}, got {t[1]!r}")

    def size_for(value):
        t = peek()
        if t[0] == "ind":
            take()
            return int(t[1][1]) + 1
        return R.minimal_size(value)

    def item():
        kind, text_, m = take()
        if kind == "int":
            n = int(text_)
            if peek()[1] == "(":
                size = R.minimal_size(n)
                take()
                inner = item()
                expect(")")
                return R.raw_tagged(n, inner, size)
            arg = n if n >= 0 else -1 - n
            size = size_for(arg)
            if peek()[1] == "(":
                take()
                inner = item()
                expect(")")
                return R.raw_tagged(n, inner, size)
            return R.raw_int(n, size)
        if kind == "hex":
            data = bytes.fromhex("".join(m.group("hexbody").split()))
            return R.raw_bytes(data, size_for(len(data)))
        if kind == "str":
            s = json.loads(text_)
            return R.raw_text(s, size_for(len(s.encode("utf-8"))))
        if kind == "name":
            if text_ == "simple":
                expect("(")
                _, num, _ = take()
                expect(")")
                return R.RawSimple(int(num))
            return R.RawSimple(_NAMED[text_])
        if text_ == "[":
            ind = None
            if peek()[0] == "ind":
                ind = int(take()[1][1]) + 1
            items = []
            while peek()[1] != "]":
                if items:
                    expect(",")
                items.append(item())
            take()
            return R.raw_array(items, ind)
        if text_ == "{":
            ind = None
            if peek()[0] == "ind":
                ind = int(take()[1][1]) + 1
            entries = []
            while peek()[1] != "}":
                if entries:
                    expect(",")
                k = item()
                expect(":")
                entries.append((k, item()))
            take()
            return R.raw_map(entries, ind)
        raise DiagSyntaxError(f"unexpected token {text_!r}")

    result = item()
    if i != len(toks):
        raise DiagSyntaxError("trailing input")
    return result
