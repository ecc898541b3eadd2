#!/usr/bin/env python3
"""Threshold/window sweep with the noisy mock translator on a synthetic document.

Prints the retranslation, match-ratio and flicker grids plus the
mask-vs-flicker points at one threshold. The shape of these tables, not the
absolute numbers, is what can be compared with real MT systems.

    python scripts/reproduce_trends.py --tokens 2000 --rate 0.15
"""

import argparse
import random
import time

from slidewin.metrics import THRESHOLD_GRID, WINDOW_GRID, format_table, sweep
from slidewin.simulate import Document
from slidewin.translators import NoisyTranslator


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--tokens", type=int, default=2000)
    ap.add_argument("--vocab", type=int, default=5000)
    ap.add_argument("--rate", type=float, default=0.15)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--windows", default=",".join(map(str, WINDOW_GRID)))
    ap.add_argument("--mask-threshold", type=float, default=0.4)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    doc = Document("synthetic", [f"w{rng.randrange(args.vocab)}" for _ in range(args.tokens)])
    windows = [int(w) for w in args.windows.split(",")]
    masks = list(range(0, 11, 2))

    t0 = time.time()
    cells = sweep(
        [doc], NoisyTranslator(rate=args.rate, seed=args.seed), windows, THRESHOLD_GRID,
        curve_masks=masks, workers=args.workers,
    )
    for title, metric in [
        ("extra retranslations", "extra_retranslations"),
        ("average match ratio", "avg_match_ratio"),
        ("normalized erasure (mask 0)", "normalized_erasure"),
    ]:
        print(f"## {title}")
        print(format_table(cells, metric))

    print(f"## normalized erasure vs mask (r = {args.mask_threshold:g})")
    print("w_l\t" + "\t".join(f"k={m}" for m in masks))
    for c in cells:
        if c.threshold == args.mask_threshold:
            print(f"{c.window_len}\t" + "\t".join(f"{ne:.4f}" for _, ne in c.ne_by_mask))
    print(f"\n{len(cells)} cells in {time.time() - t0:.1f}s")


if __name__ == "__main__":
    main()
