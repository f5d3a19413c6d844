"""Independent reference implementations used to cross-check the package.

Each oracle takes a deliberately different route from the code it checks:
enumeration instead of DP, string multisets instead of bead sets, an
arbitrary-precision series instead of a rational approximation.
"""

from __future__ import annotations

import math
import re
from collections import Counter

import mpmath

BEAD_STEPS = [(1, 1), (1, 2), (2, 1), (2, 2), (1, 0), (0, 1)]


def normal_cdf_series(x: float, dps: int = 30) -> float:
    """Phi(x) = 1/2 + phi(x) * sum_n x^(2n+1) / (1*3*5*...*(2n+1)), in mpmath precision."""
    with mpmath.workdps(dps):
        x = mpmath.mpf(x)
        term = x
        total = x
        n = 0
        while abs(term) > mpmath.mpf(10) ** (-dps):
            n += 1
            term = term * x * x / (2 * n + 1)
            total += term
        pdf = mpmath.exp(-x * x / 2) / mpmath.sqrt(2 * mpmath.pi)
        return float(mpmath.mpf("0.5") + pdf * total)


def gc_cost(l1: int, l2: int, prior: float, c: float = 1.0, s2: float = 6.8) -> float:
    """Bead cost written out with math.erfc, independent of the package's CDF."""
    delta = (l2 - l1 * c) / math.sqrt((l1 + 1e-9) * s2)
    tail = math.erfc(abs(delta) / math.sqrt(2))
    return -math.log(prior) - math.log(max(tail, 1e-300))


def enumerate_paths(n: int, m: int):
    """Every monotone bead sequence from (0, 0) to (n, m), as lists of (di, dj, i, j)."""
    def rec(i, j):
        if i == n and j == m:
            yield []
            return
        for di, dj in BEAD_STEPS:
            if i + di <= n and j + dj <= m:
                for rest in rec(i + di, j + dj):
                    yield [(di, dj, i, j)] + rest
    return rec(0, 0)


def brute_force_alignment(src_lens, tgt_lens, cost_fn):
    """Minimum total cost over all monotone segmentations, plus one argmin path."""
    best, best_path = math.inf, None
    cache = {}
    for path in enumerate_paths(len(src_lens), len(tgt_lens)):
        total = 0.0
        for step in path:
            if step not in cache:
                di, dj, i, j = step
                cache[step] = cost_fn(sum(src_lens[i:i + di]), sum(tgt_lens[j:j + dj]), f"{di}-{dj}")
            total += cache[step]
        if total < best:
            best, best_path = total, path
    return best, best_path


def path_cost(path, src_lens, tgt_lens, cost_fn) -> float:
    total = 0.0
    for di, dj, i, j in path:
        total += cost_fn(sum(src_lens[i:i + di]), sum(tgt_lens[j:j + dj]), f"{di}-{dj}")
    return total


def bead_string(src, tgt) -> str:
    return ",".join(map(str, sorted(src))) + ":" + ",".join(map(str, sorted(tgt)))


def strict_counts_oracle(hyp_pairs, ref_pairs, include_null=False):
    """(tp, hyp, ref) by intersecting multisets of canonical bead strings."""
    def strings(pairs):
        return Counter(bead_string(s, t) for s, t in pairs
                       if include_null or (len(s) and len(t)))
    h, r = strings(hyp_pairs), strings(ref_pairs)
    return sum((h & r).values()), sum(h.values()), sum(r.values())


_LINE = re.compile(r"^(?P<s>(?:\d+(?:,\d+)*)?):(?P<t>(?:\d+(?:,\d+)*)?)$")


def parse_ladder_oracle(text: str):
    """Reference grammar: list of (src set, tgt set) in file order."""
    out = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        m = _LINE.match(line.replace(" ", ""))
        assert m, line
        s = frozenset(int(x) for x in m["s"].split(",") if x)
        t = frozenset(int(x) for x in m["t"].split(",") if x)
        out.append((s, t))
    return out


def repair_trace(records, src_len, tgt_len):
    """Per-record outcome of the repair rules: the surviving (src, tgt) sets, or None if dropped.

    1. dedupe each side; 2. drop indices outside [0, len); 3. drop indices
    claimed by an earlier surviving record; 4. drop a record if a side that
    was non-empty became empty, or if both sides are empty.
    """
    claimed_src, claimed_tgt = set(), set()
    trace = []
    for src, tgt in records:
        s0, t0 = set(src), set(tgt)
        s = {i for i in s0 if 0 <= i < src_len} - claimed_src
        t = {i for i in t0 if 0 <= i < tgt_len} - claimed_tgt
        if (not s0 and not t0) or (s0 and not s) or (t0 and not t):
            trace.append(None)
            continue
        claimed_src |= s
        claimed_tgt |= t
        trace.append((frozenset(s), frozenset(t)))
    return trace


def repair_oracle(records, src_len, tgt_len):
    """Set of surviving (src, tgt) pairs under the repair rules."""
    return {x for x in repair_trace(records, src_len, tgt_len) if x is not None}


def first_violation(records, src_len, tgt_len):
    """Strict mode: (record index, kind) of the first rule break, or None.

    Records are checked in order; within a record, src before tgt, indices
    ascending, each index either out of range or already claimed.
    """
    claimed = {"src": set(), "tgt": set()}
    limits = {"src": src_len, "tgt": tgt_len}
    for k, (src, tgt) in enumerate(records):
        if not src and not tgt:
            return k, "empty"
        sides = {"src": sorted(set(src)), "tgt": sorted(set(tgt))}
        for side in ("src", "tgt"):
            for i in sides[side]:
                if not 0 <= i < limits[side]:
                    return k, "range"
                if i in claimed[side]:
                    return k, "duplicate"
        for side in ("src", "tgt"):
            claimed[side] |= set(sides[side])
    return None
