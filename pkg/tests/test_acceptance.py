"""One test per acceptance criterion; each prints a PASS/FAIL line."""

import gc
import itertools
import random
import time

import pytest

from detcbor import bench, cose
from detcbor import det as D
from detcbor import raw as R
from detcbor.cddl import ast as A
from detcbor.cddl import elaborate_text, parse, serialize, validate
from detcbor.cddl.elab import rewrite_stars
from detcbor.cddl.sem import BOT, map_group_sem, small_maps, type_sem
from detcbor.errors import (
    CborError, CutViolation, NonDisjointAlternatives, NonDeterministicEncoding, ParseFailure,
    SigmaError, SignatureInvalid, ValidationError,
)

import gen

ENTITY = 'entity = [ tstr, ("company" / "nonprofit"), { ? ("CEO": tstr), * (tstr => uint) } ]'


def _enc(obj):
    return D.encode_det(D.from_python(obj))


# 1 -----------------------------------------------------------------------------------------


def test_1_non_malleability(record):
    t0 = time.perf_counter()
    rng = random.Random(1)
    encodings = []
    mismatches = 0
    for _ in range(10_000):
        x = gen.rand_canon(rng, depth=6, fanout=8, budget=[60])
        data = D.encode_det(x)
        y, size = D.decode_det(data)
        if size != len(data) or D.encode_det(y) != data:
            mismatches += 1
        encodings.append(data)
    malleable = 0
    for _ in range(1_000):
        orig = rng.choice(encodings)
        m = bytearray(orig)
        i = rng.randrange(len(m))
        m[i] = (m[i] + rng.randrange(1, 256)) % 256
        m = bytes(m)
        try:
            y, size = D.decode_det(m)
        except CborError:
            continue
        if size != len(m):
            continue  # the mutant is not a single item
        again = D.encode_det(y)
        if again != m or again == orig:
            malleable += 1
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and malleable == 0 and elapsed < 60
    record(1, "non-malleability", ok,
           f"round-trip mismatches={mismatches}/10000, accepted malleable mutants={malleable}/1000, "
           f"{elapsed:.1f}s")
    assert ok


# 2 -------------------------------------------------------------------------------------------


def comparator_universe():
    ints = [D.Int(i) for i in (-2, -1, 0, 1, 23, 24)]
    simples = [D.Simple(0), D.Simple(32)]
    strs = [bytes(s) for n in range(3) for s in itertools.product((0x00, 0x61), repeat=n)]
    atoms = ints + simples + [D.Bytes(s) for s in strs] + [D.Text(s.decode()) for s in strs]
    # nested levels draw from a subset so the pair count stays tractable
    sub = [D.Int(-1), D.Int(0), D.Int(24), D.Simple(32), D.Bytes(b"a"), D.Text("a\x00")]
    elems = sub + [D.Array(()), D.mk_map([])]
    arrays = [D.Array(t) for n in range(3) for t in itertools.product(elems, repeat=n)]
    vals = [D.Int(0), D.Text("a"), D.Array(())]
    maps = [D.mk_map([])]
    for n in (1, 2):
        for keys in itertools.combinations(sub, n):
            for vs in itertools.product(vals, repeat=n):
                maps.append(D.mk_map(list(zip(keys, vs))))
    return atoms + arrays + maps


def test_2_comparator_oracle(record):
    t0 = time.perf_counter()
    universe = comparator_universe()
    encs = [D.encode_det(x) for x in universe]
    assert len(set(encs)) == len(encs)
    pairs = mismatches = 0
    for x, ex in zip(universe, encs):
        for y, ey in zip(universe, encs):
            want = (ex > ey) - (ex < ey)
            if D.compare_det(x, y) != want:
                mismatches += 1
            pairs += 1
    elapsed = time.perf_counter() - t0
    ok = pairs >= 10_000 and mismatches == 0 and elapsed < 30
    record(2, "comparator matches byte order", ok,
           f"{len(universe)} items, {pairs} ordered pairs, mismatches={mismatches}, {elapsed:.1f}s")
    assert ok


# 3 -----------------------------------------------------------------------------------------


def _time_validate(buf):
    t0 = time.perf_counter()
    size = R.validate_raw(buf)
    t = time.perf_counter() - t0
    assert size == len(buf)
    return t


def test_3_constant_stack_linear_time(record):
    n = 10**6
    one = b"\x81" * n + b"\x00"
    two = b"\x81" * (2 * n) + b"\x00"
    gc.collect()
    # interleaved repeats, best of each, so background noise hits both sizes alike
    t1 = t2 = float("inf")
    for _ in range(5):
        t1 = min(t1, _time_validate(one))
        t2 = min(t2, _time_validate(two))
    ratio = t2 / t1
    ok = 1.5 <= ratio <= 2.5
    record(3, "deep nesting validates in linear time", ok,
           f"10^6 deep {t1:.2f}s, 2x10^6 deep {t2:.2f}s, ratio {ratio:.2f} (want 2 +- 25%)")
    assert ok


# 4 -----------------------------------------------------------------------------------------------

_KEY_VAL_TYPES = [A.Base("uint"), A.Base("nint"), A.Base("int"), A.Base("tstr"), A.Base("any"),
                  A.LiteralInt(18), A.LiteralInt(42), A.LiteralText("a"), A.IntRange(0, 20)]


def test_4_star_alternative_rewrite(record):
    universe = [D.Int(0), D.Int(18), D.Int(42), D.Int(-1), D.Text("a"), D.Text("b")]
    maps = [m.entries for m in small_maps(universe, 3)]
    rng = random.Random(4)
    pairs = mismatches = 0
    for _ in range(20):
        e1 = A.Entry(rng.choice(_KEY_VAL_TYPES), rng.choice(_KEY_VAL_TYPES), rng.random() < 0.5)
        e2 = A.Entry(rng.choice(_KEY_VAL_TYPES), rng.choice(_KEY_VAL_TYPES), rng.random() < 0.5)
        star = A.StarMG(A.AltMG(e1, e2))
        concat = A.ConcatMG(A.StarMG(e1), A.StarMG(e2))
        assert rewrite_stars(star) == concat
        for m in maps:
            pairs += 1
            if map_group_sem(star, m) != map_group_sem(concat, m):
                mismatches += 1
    ok = pairs >= 1000 and mismatches == 0
    record(4, "star over alternatives equals concatenated stars", ok,
           f"{pairs} (group, map) pairs, mismatches={mismatches}")
    assert ok


# 5 and 6 --------------------------------------------------------------------------------------------


@pytest.fixture(scope="module")
def accepted():
    schemas, tries = gen.accepted_schemas(random.Random(2024), 500)
    return schemas, tries


def _items_for(es, rng, n):
    """Small random items, plus mutations of schema-valid items to land near the boundary."""
    items = []
    for _ in range(n):
        if rng.random() < 0.5:
            items.append(gen.rand_small_item(rng, 3))
            continue
        try:
            x = D.loads(serialize(es, gen.rand_value(es.type, rng)))
        except (gen.NoValue, SigmaError):
            items.append(gen.rand_small_item(rng, 3))
            continue
        items.append(x if rng.random() < 0.5 else gen.mutate_item(x, rng))
    return items


def test_5_elaboration_preserves_semantics(record, accepted):
    schemas, tries = accepted
    rng = random.Random(5)
    checks = disagreements = accepted_items = 0
    for t, es in schemas:
        for x in _items_for(es, rng, 100):
            a = type_sem(t, x)
            checks += 1
            accepted_items += a
            if a != type_sem(es.type, x):
                disagreements += 1
    ok = len(schemas) >= 500 and disagreements == 0
    record(5, "elaboration preserves semantics", ok,
           f"{len(schemas)} schemas accepted of {tries} generated, {checks} items "
           f"({accepted_items} in the type), disagreements={disagreements}")
    assert ok


def test_6_round_trip(record, accepted):
    schemas, _ = accepted
    rng = random.Random(6)
    value_trials = item_trials = failures = 0
    for _, es in schemas:
        for _ in range(20):
            try:
                v = gen.rand_value(es.type, rng)
                data = serialize(es, v)
            except (gen.NoValue, SigmaError):
                continue
            value_trials += 1
            back, rest = parse(es, data)
            if back != v or len(rest):
                failures += 1
            # items: schema-valid bytes, some from mutations of the value's item
            for x in (D.loads(data), gen.mutate_item(D.loads(data), rng), gen.rand_small_item(rng, 3)):
                b = D.encode_det(x)
                try:
                    validate(es, b)
                except ValidationError:
                    continue
                item_trials += 1
                if serialize(es, parse(es, b)[0]) != b:
                    failures += 1
    total = value_trials + item_trials
    ok = total >= 10_000 and failures == 0
    record(6, "serialize/parse round trip", ok,
           f"{value_trials} value trials, {item_trials} item trials, failures={failures}")
    assert ok


# 7 -------------------------------------------------------------------------------------------------


def test_7_worked_examples(record):
    results = {}
    es = elaborate_text(ENTITY)
    for name, obj in (("ACME", ["ACME Corp.", "company", {"J.D.": 1842, "M.S.": 1729, "CEO": "J.D."}]),
                      ("Main St", ["The Main St. Assoc.", "nonprofit", {"John S.": 0}])):
        data = _enc(obj)
        results[f"entity {name} validates"] = validate(es, data) == len(data)

    m = D.mk_map([(D.Int(18), D.Int(21))]).entries
    plain = A.OptMG(A.Entry(A.LiteralInt(18), A.LiteralInt(42), False))
    cut = A.OptMG(A.Entry(A.LiteralInt(18), A.LiteralInt(42), True))
    results["?(18 => 42) consumes nothing"] = map_group_sem(plain, m) == {(frozenset(), frozenset(m))}
    results["?(18 : 42) fails"] = map_group_sem(cut, m) is BOT
    try:
        validate(elaborate_text("m = { ? (18 : 42) }"), _enc({18: 21}))
        results["?(18 : 42) validator fails"] = False
    except CutViolation:
        results["?(18 : 42) validator fails"] = True

    try:
        elaborate_text("x = uint / any")
        results["uint / any rejected"] = False
    except NonDisjointAlternatives:
        results["uint / any rejected"] = True

    okp = cose.schema("COSE_Key_OKP")
    results["COSE_Key_OKP elaborates"] = okp is not None
    pub = bytes(range(32))
    key = cose.parse_key_okp(_enc({1: 1, -1: 6, -2: pub}))
    results["key example parses"] = key.curve == 6 and key.public == pub and key.private is None

    failed = [k for k, v in results.items() if not v]
    ok = not failed
    record(7, "worked examples", ok, f"{len(results) - len(failed)}/{len(results)} outcomes as expected"
           + (f"; failed: {', '.join(failed)}" if failed else ""))
    assert ok


# 8 ---------------------------------------------------------------------------------------------------


def test_8_cose_sign1(record):
    fp = cose.FakeProvider()
    rng = random.Random(8)
    sk, pk = fp.keypair(b"acceptance")
    prot = cose.headers({1: cose.ALG_EDDSA})
    recovered = rejected = 0
    n = 1000
    for _ in range(n):
        payload = bytes(rng.randrange(256) for _ in range(rng.randrange(200)))
        msg = cose.sign1(fp, sk, prot, payload)
        if cose.verify1(fp, pk, msg) == payload:
            recovered += 1
        bad = bytearray(msg)
        bad[len(bad) - 1 - rng.randrange(cose.SIG_LEN)] ^= 1 << rng.randrange(8)
        try:
            cose.verify1(fp, pk, bytes(bad))
        except SignatureInvalid:
            rejected += 1
    detail = f"fake provider: recovered {recovered}/{n}, tampered rejected {rejected}/{n}"
    ok = recovered == n and rejected == n

    # the real backend: a message produced by an independent COSE implementation
    try:
        import cryptography  # noqa: F401
        import pycose  # noqa: F401
    except ImportError:
        record(8, "COSE Sign1", ok, detail + "; real-backend example skipped (pycose or cryptography absent)")
        assert ok
        pytest.skip("pycose or cryptography not installed")
    from pycose.algorithms import EdDSA
    from pycose.headers import KID, Algorithm
    from pycose.keys import OKPKey
    from pycose.keys.curves import Ed25519
    from pycose.messages import Sign1Message

    sk_ed = bytes.fromhex("9d61b19deffd5a60ba844af492ec2cc44449c5697b326919703bac031cae7f60")
    pk_ed = bytes.fromhex("d75a980182b10ab7d54bfed3c964073a0ee172f3daa62325af021a68f707511a")
    msg = Sign1Message(phdr={Algorithm: EdDSA}, uhdr={KID: b"11"}, payload=b"This is the content.")
    msg.key = OKPKey(crv=Ed25519, d=sk_ed)
    example = msg.encode()
    ed = cose.Ed25519Provider()
    try:
        got = cose.verify1(ed, pk_ed, example)
    except (ParseFailure, NonDeterministicEncoding, SignatureInvalid):
        got = None
    real_ok = got == b"This is the content."
    ok = ok and real_ok
    record(8, "COSE Sign1", ok, detail + f"; Ed25519 example verifies={real_ok}")
    assert ok


# 9 -----------------------------------------------------------------------------------------------------


def test_9_workload_shapes(record):
    m = bench.bench_map(n=8000, k=1000, iters=3)
    a = bench.bench_arr(n=10_000, iters=1)
    # extra allocation must stay within the input size plus a constant
    mem_ok = a["extra_peak_bytes"] <= a["bytes"] + (1 << 20)
    speed_ok = m["early_speedup_absent"] >= 2
    sublinear = m["indexed_growth_8x"] < 8
    ok = speed_ok and sublinear and mem_ok and a["elements"] == 10**8
    record(9, "workload shapes", ok,
           f"map: early-exit speedup on absent keys {m['early_speedup_absent']}x, indexed cost "
           f"growth for 8x entries {m['indexed_growth_8x']}x; arr: {a['elements']} elements, "
           f"extra peak {a['extra_peak_bytes']} bytes for {a['bytes']} input bytes")
    assert ok
