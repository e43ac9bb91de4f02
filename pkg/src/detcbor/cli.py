"""Command-line interface.

Reports are ``key=value`` lines. Failures add ``finding`` lines with a
code, a path or offset, and a message. Exit status: 0 success, 1
validation or schema failure, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

from . import bench, cose
from . import det as D
from . import raw as R
from .cddl import elaborate_text, parse, serialize, validate
from .cddl.ast import show_type
from .cddl.values import DumpSyntaxError, dump, load_dump
from .diag import diag
from .errors import CborError, CddlError, CoseError, SigmaError, ValidationError


class _Usage(Exception):
    pass


class Report:
    def __init__(self, command: str):
        self.fields = [("command", command)]
        self.findings = []

    def add(self, key, value):
        self.fields.append((key, value))

    def finding(self, code, where, message):
        self.findings.append((code, where, message))

    def render(self) -> str:
        status = "fail" if self.findings else "ok"
        lines = [f"status={status}"] + [f"{k}={_fmt(v)}" for k, v in self.fields]
        for code, where, message in self.findings:
            lines.append(f"finding code={code} at={_fmt(where)} message={json.dumps(message)}")
        return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if isinstance(v, str):
        return v if v and all(c.isprintable() and not c.isspace() for c in v) else json.dumps(v)
    if isinstance(v, (tuple, list)):
        return json.dumps("/".join(map(str, v)) or "$")
    return str(v)


def _read(path, text=False):
    try:
        if path == "-":
            return sys.stdin.read() if text else sys.stdin.buffer.read()
        with open(path, "r" if text else "rb", encoding="utf-8" if text else None) as f:
            return f.read()
    except OSError as e:
        raise _Usage(f"cannot read {path}: {e.strerror}") from e


def _write(path, data: bytes):
    try:
        if path == "-":
            sys.stdout.buffer.write(data)
            sys.stdout.flush()
        else:
            with open(path, "wb") as f:
                f.write(data)
    except OSError as e:
        raise _Usage(f"cannot write {path}: {e.strerror}") from e


def _report_error(rep: Report, e: Exception):
    if isinstance(e, CborError):
        rep.finding(e.code, e.offset if e.offset is not None else "-", str(e))
    elif isinstance(e, CddlError):
        pos = e.position
        where = f"{pos[0]}:{pos[1]}" if pos else (e.where or "-")
        rep.finding(e.code, where, str(e))
    elif isinstance(e, (ValidationError, SigmaError)):
        rep.finding(e.code, e.path, str(e))
    elif isinstance(e, CoseError):
        rep.finding(e.code, "-", str(e))
    else:
        raise e


def _schema(args):
    return elaborate_text(_read(args.schema, text=True), args.root)


# -- commands ---------------------------------------------------------------------


def cmd_validate(args, rep, out):
    data = _read(args.file)
    size = R.validate_raw(data)
    rep.add("size", size)
    rep.add("trailing", len(data) - size)


def cmd_det_check(args, rep, out):
    data = _read(args.file)
    size = D.det_check(data)
    rep.add("size", size)
    rep.add("trailing", len(data) - size)


def cmd_diag(args, rep, out):
    data = _read(args.file)
    R.validate_raw(data)
    out.append(diag(data) + "\n")
    return True


def cmd_cddl_check(args, rep, out):
    es = _schema(args)
    rep.add("type", show_type(es.type))
    rep.add("shape", repr(es.shape))
    for note in es.notes:
        rep.add("note", note)


def cmd_cddl_validate(args, rep, out):
    es = _schema(args)
    data = _read(args.file)
    rep.add("size", validate(es, data))


def cmd_cddl_parse(args, rep, out):
    es = _schema(args)
    data = _read(args.file)
    v, _ = parse(es, data)
    out.append(dump(v))
    return True


def cmd_cddl_serialize(args, rep, out):
    es = _schema(args)
    try:
        v = load_dump(_read(args.valuefile, text=True))
    except DumpSyntaxError as e:
        raise _Usage(f"value dump: {e}") from e
    data = serialize(es, v)
    if args.output:
        _write(args.output, data)
        rep.add("size", len(data))
        rep.add("output", args.output)
    else:
        out.append(data.hex() + "\n")
        return True


def _provider(name):
    return cose.Ed25519Provider() if name == "ed25519" else cose.FakeProvider()


def cmd_cose_keygen(args, rep, out):
    seed = args.seed.encode("utf-8")
    if args.provider == "ed25519":
        import hashlib

        sk = hashlib.sha256(b"ed25519-key" + seed).digest()
        pk = cose.Ed25519Provider().public_key(sk)
    else:
        sk, pk = cose.FakeProvider.keypair(seed)
    data = cose.okp_key_bytes(6, pk, None if args.public_only else sk)
    _write(args.output, data)
    rep.add("output", args.output)
    rep.add("public", pk.hex())


def cmd_cose_sign(args, rep, out):
    key = cose.parse_key_okp(_read(args.key))
    if key.private is None:
        raise _Usage("key file has no private key (-4)")
    payload = _read(args.payload)
    prot = cose.headers({1: cose.ALG_EDDSA})
    unprot = cose.headers({4: args.kid.encode("utf-8")}) if args.kid else None
    msg = cose.sign1(_provider(args.provider), key.private, prot, payload, unprotected=unprot)
    _write(args.output, msg)
    rep.add("size", len(msg))
    rep.add("output", args.output)


def cmd_cose_verify(args, rep, out):
    key = cose.parse_key_okp(_read(args.key))
    if key.public is None:
        raise _Usage("key file has no public key (-2)")
    payload = cose.verify1(_provider(args.provider), key.public, _read(args.message))
    rep.add("payload_size", len(payload))
    if args.output:
        _write(args.output, payload)
        rep.add("output", args.output)


def cmd_bench(args, rep, out):
    kw = {}
    if args.iters:
        kw["iters"] = args.iters
    if args.workload == "map":
        if args.n:
            kw["n"] = args.n
        if args.k:
            kw["k"] = args.k
    elif args.workload == "arr" and args.n:
        kw["n"] = args.n
    for k, v in bench.WORKLOADS[args.workload](**kw).items():
        if k != "workload":
            rep.add(k, v)


# -- argument parsing ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="detcbor", description="Deterministic CBOR and CDDL tools")
    sub = p.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("validate", help="check well-formedness, print the item size")
    s.add_argument("file")
    s.set_defaults(fn=cmd_validate, name="validate")
    s = sub.add_parser("det-check", help="check deterministic encoding")
    s.add_argument("file")
    s.set_defaults(fn=cmd_det_check, name="det-check")
    s = sub.add_parser("diag", help="print diagnostic notation")
    s.add_argument("file")
    s.set_defaults(fn=cmd_diag, name="diag")

    c = sub.add_parser("cddl", help="schema commands").add_subparsers(dest="sub", required=True)
    for name, fn, extra, hlp in (
        ("check", cmd_cddl_check, [], "elaborate a schema"),
        ("validate", cmd_cddl_validate, ["file"], "validate bytes against a schema"),
        ("parse", cmd_cddl_parse, ["file"], "print the typed value of bytes"),
        ("serialize", cmd_cddl_serialize, ["valuefile"], "encode a value dump"),
    ):
        s = c.add_parser(name, help=hlp)
        s.add_argument("schema")
        for a in extra:
            s.add_argument(a)
        s.add_argument("--root", help="rule to use as the root (default: first rule)")
        if name == "serialize":
            s.add_argument("-o", "--output", help="write bytes here instead of hex to stdout")
        s.set_defaults(fn=fn, name=f"cddl {name}")

    cs = sub.add_parser("cose", help="COSE_Sign1").add_subparsers(dest="sub", required=True)
    s = cs.add_parser("keygen", help="write a COSE_Key_OKP key file")
    s.add_argument("--seed", required=True,
                   help="keys are derived deterministically from this; for tests, not real keys")
    s.add_argument("-o", "--output", required=True)
    s.add_argument("--public-only", action="store_true")
    s.add_argument("--provider", choices=("fake", "ed25519"), default="ed25519")
    s.set_defaults(fn=cmd_cose_keygen, name="cose keygen")
    s1 = cs.add_parser("sign1", help="sign or verify").add_subparsers(dest="op", required=True)
    s = s1.add_parser("sign")
    s.add_argument("--key", required=True, help="COSE_Key_OKP file with -4")
    s.add_argument("--payload", required=True)
    s.add_argument("-o", "--output", required=True)
    s.add_argument("--kid")
    s.add_argument("--provider", choices=("fake", "ed25519"), default="ed25519")
    s.set_defaults(fn=cmd_cose_sign, name="cose sign1 sign")
    s = s1.add_parser("verify")
    s.add_argument("--key", required=True, help="COSE_Key_OKP file with -2")
    s.add_argument("--message", required=True)
    s.add_argument("-o", "--output", help="write the payload here")
    s.add_argument("--provider", choices=("fake", "ed25519"), default="ed25519")
    s.set_defaults(fn=cmd_cose_verify, name="cose sign1 verify")

    s = sub.add_parser("bench", help="synthetic workloads")
    s.add_argument("workload", choices=sorted(bench.WORKLOADS))
    s.add_argument("--iters", type=int, help="default: $DETCBOR_BENCH_ITERS")
    s.add_argument("--n", type=int)
    s.add_argument("--k", type=int)
    s.set_defaults(fn=cmd_bench, name="bench")
    return p


def run(argv: Optional[List[str]] = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    rep = Report(args.name)
    out: list = []
    try:
        raw_only = args.fn(args, rep, out)
    except _Usage as e:
        rep.finding("UsageError", "-", str(e))
        stdout.write(rep.render())
        return 2
    except (CborError, CddlError, ValidationError, SigmaError, CoseError) as e:
        _report_error(rep, e)
        stdout.write(rep.render())
        return 1
    if raw_only:
        stdout.write("".join(out))
    else:
        stdout.write(rep.render())
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
