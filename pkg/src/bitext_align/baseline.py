"""Length-based dynamic-programming aligner (Gale & Church style).

Costs are negative log probabilities: a bead-type prior times the two-sided
tail probability of the normalised length difference ``delta``. Lengths are
counted in characters (Unicode scalar values), never bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .beads import Bead, Ladder
from .corpus import Document

# (source sentences, target sentences), in tie-break preference order.
BEAD_TYPES: tuple[tuple[int, int], ...] = ((1, 1), (1, 2), (2, 1), (2, 2), (1, 0), (0, 1))

DEFAULT_PRIORS = {
    "1-1": 0.89,
    "1-0": 0.0099 / 2,
    "0-1": 0.0099 / 2,
    "2-1": 0.089 / 2,
    "1-2": 0.089 / 2,
    "2-2": 0.011,
}

EPS = 1e-9
PROB_FLOOR = 1e-300
# costs this close (relative) are ties, settled by BEAD_TYPES order
TIE_RTOL = 1e-12


def kind_name(kind: tuple[int, int]) -> str:
    return f"{kind[0]}-{kind[1]}"


@dataclass(frozen=True)
class GaleChurchParams:
    c: float = 1.0
    s2: float = 6.8
    priors: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_PRIORS))

    def __post_init__(self):
        if self.c <= 0 or self.s2 <= 0:
            raise ValueError("c and s2 must be positive")
        missing = {kind_name(k) for k in BEAD_TYPES} - set(self.priors)
        if missing:
            raise ValueError(f"missing priors for bead types {sorted(missing)}")
        if any(not 0 < p < 1 for p in self.priors.values()):
            raise ValueError("priors must lie in (0, 1)")
        if sum(self.priors.values()) > 1 + 1e-6:
            raise ValueError("priors sum to more than 1")

    def with_ratio(self, c: float) -> "GaleChurchParams":
        return GaleChurchParams(c=c, s2=self.s2, priors=dict(self.priors))


def normal_cdf(x: float) -> float:
    """Standard normal CDF, Hart (1968) rational approximation as given by West (2005).

    Absolute error is around 1e-14 over the real line.
    """
    z = abs(x)
    if z > 37.0:
        lower = 0.0
    else:
        e = math.exp(-z * z / 2.0)
        if z < 7.07106781186547:
            num = 3.52624965998911e-02 * z + 0.700383064443688
            num = num * z + 6.37396220353165
            num = num * z + 33.912866078383
            num = num * z + 112.079291497871
            num = num * z + 221.213596169931
            num = num * z + 220.206867912376
            den = 8.83883476483184e-02 * z + 1.75566716318264
            den = den * z + 16.064177579207
            den = den * z + 86.7807322029461
            den = den * z + 296.564248779674
            den = den * z + 637.333633378831
            den = den * z + 793.826512519948
            den = den * z + 440.413735824752
            lower = e * num / den
        else:
            b = z + 0.65
            b = z + 4.0 / b
            b = z + 3.0 / b
            b = z + 2.0 / b
            b = z + 1.0 / b
            lower = e / b / 2.506628274631
    return 1.0 - lower if x > 0 else lower


def length_delta(l1: int, l2: int, params: GaleChurchParams) -> float:
    if l1 + l2 <= 0:
        raise ValueError("bead must span at least one character")
    # EPS only matters for source-null beads; max() keeps delta exactly scale-invariant otherwise
    return (l2 - l1 * params.c) / math.sqrt(max(l1, EPS) * params.s2)


def match_cost(l1: int, l2: int, bead_type: str, params: GaleChurchParams) -> float:
    delta = length_delta(l1, l2, params)
    # 2 * (1 - Phi(|d|)) == 2 * Phi(-|d|), computed on the lower tail to avoid cancellation
    tail = 2.0 * normal_cdf(-abs(delta))
    return -math.log(params.priors[bead_type]) - math.log(max(tail, PROB_FLOOR))


def estimate_ratio(src: Document, tgt: Document) -> float:
    return sum(len(t) for t in tgt.texts) / sum(len(t) for t in src.texts)


def align_lengths(src_lens: Sequence[int], tgt_lens: Sequence[int],
                  params: GaleChurchParams) -> tuple[float, list[tuple[tuple[int, int], int, int]]]:
    """Minimum-cost monotone bead sequence over sentence lengths.

    Returns ``(cost, steps)`` where each step is ``(bead type, i, j)`` giving
    the type and the source/target offsets at which the bead starts.
    """
    n, m = len(src_lens), len(tgt_lens)
    src_pre = [0]
    for x in src_lens:
        src_pre.append(src_pre[-1] + x)
    tgt_pre = [0]
    for x in tgt_lens:
        tgt_pre.append(tgt_pre[-1] + x)

    inf = math.inf
    cost = [[inf] * (m + 1) for _ in range(n + 1)]
    back: list[list] = [[None] * (m + 1) for _ in range(n + 1)]
    cost[0][0] = 0.0
    names = {k: kind_name(k) for k in BEAD_TYPES}
    for i in range(n + 1):
        for j in range(m + 1):
            if i == 0 and j == 0:
                continue
            best, arg = inf, None
            for kind in BEAD_TYPES:
                di, dj = kind
                if di > i or dj > j:
                    continue
                prev = cost[i - di][j - dj]
                if prev == inf:
                    continue
                l1 = src_pre[i] - src_pre[i - di]
                l2 = tgt_pre[j] - tgt_pre[j - dj]
                cand = prev + match_cost(l1, l2, names[kind], params)
                if best == inf or cand < best - TIE_RTOL * best:
                    best, arg = cand, kind
            cost[i][j] = best
            back[i][j] = arg

    steps = []
    i, j = n, m
    while i or j:
        kind = back[i][j]
        i, j = i - kind[0], j - kind[1]
        steps.append((kind, i, j))
    steps.reverse()
    return cost[n][m], steps


def gale_church_align(src: Document, tgt: Document, params: GaleChurchParams | None = None,
                      pair_id: str = "") -> Ladder:
    params = params or GaleChurchParams()
    _, steps = align_lengths([len(t) for t in src.texts], [len(t) for t in tgt.texts], params)
    beads = [
        Bead(tuple(range(i, i + di)), tuple(range(j, j + dj)))
        for (di, dj), i, j in steps
    ]
    return Ladder(pair_id, tuple(beads))
