"""Synthetic workloads: an 8-field record, map lookups, nested arrays.

Each function returns a dict of report fields. Times are wall-clock medians
over ``iters`` runs (``DETCBOR_BENCH_ITERS`` sets the default).
"""

from __future__ import annotations

import os
import random
import statistics
import time
import tracemalloc
from bisect import bisect_left

from . import det as D
from . import raw as R
from .cddl import elaborate_text, parse, serialize, validate
from .cddl.values import VList, VUInt

REC_SCHEMA = "rec = { 1 => uint, 2 => uint, 3 => uint, 4 => uint, " \
             "5 => uint, 6 => uint, 7 => uint, 8 => uint }"
MAP_SCHEMA = "map = { * uint => uint }"
ARR_SCHEMA = "arr = [* subarr]\nsubarr = [* uint]"


def default_iters(fallback: int = 5) -> int:
    try:
        return max(1, int(os.environ.get("DETCBOR_BENCH_ITERS", fallback)))
    except ValueError:
        return fallback


def _median_time(fn, iters):
    ts = []
    for _ in range(iters):
        t = time.perf_counter()
        fn()
        ts.append(time.perf_counter() - t)
    return statistics.median(ts)


# -- record ----------------------------------------------------------------------------


def bench_rec(iters=None, reps: int = 2000, seed: int = 0):
    iters = iters or default_iters()
    es = elaborate_text(REC_SCHEMA)
    rng = random.Random(seed)
    data = D.encode_det(D.mk_map([(D.Int(i), D.Int(rng.randrange(1 << 32))) for i in range(1, 9)]))
    v, _ = parse(es, data)
    out = bytearray(64)

    def vp():
        for _ in range(reps):
            parse(es, data)

    def ser():
        for _ in range(reps):
            serialize(es, v, out)

    assert serialize(es, v) == data
    return {
        "workload": "rec",
        "fields": 8,
        "bytes": len(data),
        "validate_parse_us": round(_median_time(vp, iters) / reps * 1e6, 3),
        "serialize_us": round(_median_time(ser, iters) / reps * 1e6, 3),
    }


# -- map lookups -----------------------------------------------------------------------------


def make_map(n: int, seed: int = 0):
    """(encoding, sorted key list) of a map of ``n`` random uint keys."""
    rng = random.Random(seed)
    keys = set()
    while len(keys) < n:
        keys.add(rng.randrange(1 << 32))
    ents = [(D.Int(k), D.Int(rng.randrange(1 << 32))) for k in keys]
    return D.encode_det(D.mk_map(ents)), sorted(keys)


def lookup_linear(buf, pos, key: int):
    """Decode every key and compare; no use of the key order."""
    v = R.read_shallow(buf, pos)
    p = v.body
    found = None
    for _ in range(v.arg):
        k_end = p + R.jump(buf, p)
        if found is None and D.decode_view(buf, p).value == key:
            found = k_end
        p = k_end + R.jump(buf, k_end)
    return found


def lookup_early(buf, pos, key: int):
    return D.map_get(buf, pos, D.encode_det(D.Int(key)))


class MapIndex:
    """Entry offsets of a validated map, searched by encoded key."""

    def __init__(self, buf, pos):
        v = R.read_shallow(buf, pos)
        self.buf = buf
        self.keys = []
        self.values = []
        p = v.body
        for _ in range(v.arg):
            k_end = p + R.jump(buf, p)
            self.keys.append(bytes(buf[p:k_end]))
            self.values.append(k_end)
            p = k_end + R.jump(buf, k_end)

    def get(self, key: int):
        kb = D.encode_det(D.Int(key))
        i = bisect_left(self.keys, kb)
        if i < len(self.keys) and self.keys[i] == kb:
            return self.values[i]
        return None


def _lookup_times(buf, keys, iters, modes=("linear", "early", "indexed")):
    index = MapIndex(buf, 0)
    fns = {
        "linear": lambda k: lookup_linear(buf, 0, k),
        "early": lambda k: lookup_early(buf, 0, k),
        "indexed": index.get,
    }
    out = {}
    for name in modes:
        fn = fns[name]
        def run(fn=fn):
            for k in keys:
                fn(k)
        out[name] = min(_median_time(run, 1) for _ in range(iters)) / len(keys)
    return out


def bench_map(n: int = 8000, k: int = 1000, iters=None, seed: int = 0,
              linear_keys: int = 20, scan_keys: int = 100):
    """Lookups of ``k`` random keys, present or absent, in an ``n``-entry map.

    The scanning modes are slow in Python, so the linear mode is timed on
    the first ``linear_keys`` keys and the early-exit mode on the first
    ``scan_keys``; the indexed mode runs all ``k``. Figures are per lookup.
    """
    iters = iters or default_iters(3)
    es = elaborate_text(MAP_SCHEMA)
    buf, present = make_map(n, seed)
    t0 = time.perf_counter()
    validate(es, buf)
    t_validate = time.perf_counter() - t0
    rng = random.Random(seed + 1)
    pset = set(present)
    mixed = [rng.choice(present) if rng.random() < 0.5 else rng.randrange(1 << 32) for _ in range(k)]
    absent = []
    while len(absent) < k:
        x = rng.randrange(1 << 32)
        if x not in pset:
            absent.append(x)
    # all three modes must agree
    idx = MapIndex(buf, 0)
    for key in mixed[:50] + absent[:50]:
        a, b, c = lookup_linear(buf, 0, key), lookup_early(buf, 0, key), idx.get(key)
        if not a == b == c:
            raise AssertionError(f"lookup modes disagree on key {key}")
    t_mixed, t_abs, t_small = {}, {}, {}
    small, _ = make_map(max(1, n // 8), seed)
    for mode, m in (("linear", linear_keys), ("early", scan_keys), ("indexed", k)):
        t_mixed.update(_lookup_times(buf, mixed[:m], iters, (mode,)))
        t_abs.update(_lookup_times(buf, absent[:m], iters, (mode,)))
        if mode != "linear":
            t_small.update(_lookup_times(small, absent[:m], iters, (mode,)))
    rep = {
        "workload": "map",
        "entries": n,
        "lookups": k,
        "validate_ms": round(t_validate * 1e3, 3),
    }
    for mode in ("linear", "early", "indexed"):
        rep[f"{mode}_us"] = round(t_mixed[mode] * 1e6, 3)
        rep[f"{mode}_absent_us"] = round(t_abs[mode] * 1e6, 3)
    rep["early_speedup_absent"] = round(t_abs["linear"] / t_abs["early"], 2)
    rep["indexed_growth_8x"] = round(t_abs["indexed"] / t_small["indexed"], 2)
    rep["early_growth_8x"] = round(t_abs["early"] / t_small["early"], 2)
    return rep


# -- nested arrays -------------------------------------------------------------------------------


def build_arr(n: int):
    """``n`` subarrays of ``n`` zeros, serialized through the schema.

    One subarray is serialized from owned values and parsed back; the outer
    list then repeats that zero-copy list, which serializes by copying.
    """
    es_sub = elaborate_text("subarr = [* uint]")
    es = elaborate_text(ARR_SCHEMA)
    sub, _ = parse(es_sub, serialize(es_sub, VList([VUInt(0)] * n)))
    return serialize(es, VList([sub] * n))


def walk_arr(es, buf) -> tuple:
    """Parse, then visit every element; returns (element count, sum)."""
    v, _ = parse(es, buf)
    count = total = 0
    for sub in v:
        for chunk in sub.items.uint_chunks():
            if isinstance(chunk, int):
                count += 1
                total += chunk
            else:
                count += len(chunk)
                total += sum(chunk)
    return count, total


def bench_arr(n: int = 10_000, iters=None, memory: bool = True):
    iters = iters or default_iters(1)
    es = elaborate_text(ARR_SCHEMA)
    t0 = time.perf_counter()
    buf = build_arr(n)
    t_ser = time.perf_counter() - t0
    t_val = _median_time(lambda: validate(es, buf), iters)
    result = {}

    def it():
        result["r"] = walk_arr(es, buf)

    t_it = _median_time(it, iters)
    count, total = result["r"]
    if count != n * n or total != 0:
        raise AssertionError(f"walked {count} elements with sum {total}")
    rep = {
        "workload": "arr",
        "n": n,
        "elements": count,
        "bytes": len(buf),
        "serialize_s": round(t_ser, 3),
        "validate_s": round(t_val, 3),
        "parse_iterate_s": round(t_it, 3),
    }
    if memory:
        tracemalloc.start()
        validate(es, buf)
        walk_arr(es, buf)
        _, peak = tracemalloc.get_traced_memory()
        tracemalloc.stop()
        rep["extra_peak_bytes"] = peak
        rep["extra_peak_ratio"] = round(peak / len(buf), 6)
    return rep


WORKLOADS = {"rec": bench_rec, "map": bench_map, "arr": bench_arr}
