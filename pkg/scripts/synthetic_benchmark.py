"""Benchmark the length-based baseline and the repair step on synthetic bitext.

A synthetic pair is built by taking random source sentences and, for each,
emitting one or two target sentences whose total length is the source length
times a ratio plus Gaussian noise (occasionally merging two source sentences
into one target, or dropping one). The generating alignment is the gold ladder.

Two methods are scored with strict P/R/F1:

* ``gale-church``: the DP aligner, with c fixed or estimated per pair.
* ``noisy-mapping``: the gold mapping corrupted like a careless model answer
  (out-of-range, duplicated and overlapping indices), then repaired.
  Overlaps that steal a later record's target are not recoverable, so this
  method loses up to two correct beads per such overlap.
"""

import argparse
import json
import random

from bitext_align.baseline import GaleChurchParams, estimate_ratio, gale_church_align
from bitext_align.beads import Bead, Ladder
from bitext_align.corpus import Document
from bitext_align.evaluate import micro_average, strict_compare
from bitext_align.llm_align import MappingRecord, MappingResponse, mappings_to_beads


def words(rng, n_chars):
    out = []
    while sum(len(w) + 1 for w in out) < n_chars:
        out.append("x" * rng.randint(2, 9))
    return " ".join(out) or "x"


def make_pair(rng, n_src, ratio, noise):
    src, tgt, beads = [], [], []
    i = 0
    while i < n_src:
        r = rng.random()
        if r < 0.08 and i + 1 < n_src:
            kind = (2, 1)
        elif r < 0.30:
            kind = (1, 2)
        elif r < 0.32:
            kind = (1, 0)
        else:
            kind = (1, 1)
        s_lens = [rng.randint(20, 160) for _ in range(kind[0])]
        s_idx = tuple(range(len(src), len(src) + kind[0]))
        src += [words(rng, n) for n in s_lens]
        t_idx = ()
        if kind[1]:
            total = max(4, int(sum(s_lens) * ratio + rng.gauss(0, noise * sum(s_lens) ** 0.5)))
            cut = [total] if kind[1] == 1 else [total // 2, total - total // 2]
            t_idx = tuple(range(len(tgt), len(tgt) + kind[1]))
            tgt += [words(rng, n) for n in cut]
        beads.append(Bead(s_idx, t_idx))
        i += kind[0]
    return Document.from_texts(src), Document.from_texts(tgt), beads


def corrupt(rng, beads, m, rate):
    recs = []
    for k, b in enumerate(beads):
        s, t = list(b.src), list(b.tgt)
        nxt = beads[k + 1] if k + 1 < len(beads) else None
        if nxt is not None and nxt.tgt and rng.random() < rate:
            # grab the next record's first target; first-come repair cannot undo this
            t.append(nxt.tgt[0])
        if rng.random() < rate:
            t.append(m + rng.randint(0, 3))
        if rng.random() < rate:
            # claim a target already used by an earlier record
            earlier = [j for _, tt in recs for j in tt]
            if earlier:
                t.append(rng.choice(earlier))
        if rng.random() < rate:
            s = s + s
        recs.append((s, t))
    return MappingResponse(tuple(MappingRecord(tuple(s), tuple(t)) for s, t in recs))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pairs", type=int, default=10)
    ap.add_argument("--sentences", type=int, default=150)
    ap.add_argument("--ratio", type=float, default=1.6, help="target/source character ratio")
    ap.add_argument("--noise", type=float, default=2.5)
    ap.add_argument("--corrupt", type=float, default=0.1, help="per-record corruption rate")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args()

    rng = random.Random(args.seed)
    counts = {"gale-church c=1": [], "gale-church c=est": [], "noisy-mapping+repair": []}
    for k in range(args.pairs):
        src, tgt, gold_beads = make_pair(rng, args.sentences, args.ratio, args.noise)
        gold = Ladder(f"syn{k}", tuple(gold_beads))
        params = GaleChurchParams()
        counts["gale-church c=1"].append(strict_compare(gale_church_align(src, tgt, params), gold))
        est = params.with_ratio(estimate_ratio(src, tgt))
        counts["gale-church c=est"].append(strict_compare(gale_church_align(src, tgt, est), gold))
        resp = corrupt(rng, gold_beads, len(tgt), args.corrupt)
        repaired, _ = mappings_to_beads(resp, len(src), len(tgt))
        counts["noisy-mapping+repair"].append(strict_compare(repaired, gold))

    results = {name: micro_average(c) for name, c in counts.items()}
    if args.json:
        print(json.dumps({n: vars(m) for n, m in results.items()}, indent=2))
        return
    for name, m in results.items():
        print(f"{name:<22} {m.fmt()}")


if __name__ == "__main__":
    main()
