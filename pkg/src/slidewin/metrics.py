"""Flicker, match-ratio and retranslation statistics over revision logs.

Flicker is normalized erasure: for each pair of consecutive displays, the
number of tokens of the earlier display beyond their longest common prefix
counts as erased; the total is divided by the final output length.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from itertools import product
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from slidewin.merge import MergeParams, Translator
from slidewin.simulate import Document, RevisionLog, SimulationConfig, run_online

WINDOW_GRID = (8, 10, 12, 14, 16, 18, 20)
THRESHOLD_GRID = (0.1, 0.2, 0.4, 0.5, 0.6, 0.8)


class MetricError(ValueError):
    pass


@dataclass(frozen=True)
class FlickerReport:
    total_erasure: int
    final_length: int
    normalized_erasure: float


def common_prefix_len(a: Sequence[str], b: Sequence[str]) -> int:
    a, b = tuple(a), tuple(b)
    n = min(len(a), len(b))
    if a[:n] == b[:n]:
        return n
    # streams mostly diverge near their ends: try a cheap C-level check of
    # everything but the last 64 tokens before bisecting
    lo, hi = 0, n
    if n > 64 and a[: n - 64] == b[: n - 64]:
        lo = n - 64
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if a[:mid] == b[:mid]:
            lo = mid
        else:
            hi = mid
    return lo


def erasure(prev: Sequence[str], nxt: Sequence[str]) -> int:
    return len(prev) - common_prefix_len(prev, nxt)


def normalized_erasure(displays: Sequence[Sequence[str]], final: Sequence[str]) -> FlickerReport:
    if not final:
        raise MetricError("normalized erasure is undefined for an empty final output")
    displays = [tuple(d) for d in displays]
    total = sum(erasure(p, n) for p, n in zip(displays, displays[1:]))
    return FlickerReport(total, len(final), total / len(final))


def log_flicker(log: RevisionLog, mask: Optional[int] = None) -> FlickerReport:
    """Flicker of one log, from its stored displays or re-masked at ``mask``."""
    displays = log.displays() if mask is None else log.remasked(mask)
    return normalized_erasure(displays, log.final_output)


def pooled_flicker(logs: Sequence[RevisionLog], mask: Optional[int] = None) -> Tuple[FlickerReport, float]:
    """Corpus-level NE (total erasure over total final length) and the per-document mean."""
    reports = [log_flicker(l, mask) for l in logs]
    if not reports:
        raise MetricError("no logs to score")
    total = sum(r.total_erasure for r in reports)
    length = sum(r.final_length for r in reports)
    mean = sum(r.normalized_erasure for r in reports) / len(reports)
    return FlickerReport(total, length, total / length), mean


def _match_ratios(log: RevisionLog, warmup: int) -> List[float]:
    return [e.match_len / e.window_len for e in log.entries[warmup:] if e.window_len > 0]


def average_match_ratio(log: RevisionLog, warmup: int = 0) -> float:
    """Mean of match length over output window length, skipping ``warmup`` leading entries."""
    ratios = _match_ratios(log, warmup)
    if not ratios:
        raise MetricError("average match ratio is undefined: no entry with a non-empty window")
    return sum(ratios) / len(ratios)


def count_extra_retranslations(log: RevisionLog) -> int:
    return sum(e.k_extra for e in log.entries)


@dataclass(frozen=True)
class SweepCell:
    window_len: int
    threshold: float
    normalized_erasure: float
    avg_match_ratio: float
    extra_retranslations: int
    window_count: int
    mean_doc_ne: float = 0.0
    # (mask, pooled NE) pairs for flicker-vs-mask curves
    ne_by_mask: Tuple[Tuple[int, float], ...] = ()


def score_logs(
    logs: Sequence[RevisionLog], window_len: int, threshold: float, mask: int = 0,
    curve_masks: Iterable[int] = (),
) -> SweepCell:
    pooled, mean = pooled_flicker(logs, mask)
    ratios = [r for l in logs for r in _match_ratios(l, 0)]
    return SweepCell(
        window_len=window_len,
        threshold=threshold,
        normalized_erasure=pooled.normalized_erasure,
        avg_match_ratio=sum(ratios) / len(ratios) if ratios else 0.0,
        extra_retranslations=sum(count_extra_retranslations(l) for l in logs),
        window_count=sum(len(l.entries) for l in logs),
        mean_doc_ne=mean,
        ne_by_mask=tuple((m, pooled_flicker(logs, m)[0].normalized_erasure) for m in curve_masks),
    )


def sweep(
    docs: Sequence[Document],
    translator: Translator,
    window_lens: Iterable[int] = WINDOW_GRID,
    thresholds: Iterable[float] = THRESHOLD_GRID,
    mask: int = 0,
    backoff_cap: int = 5,
    curve_masks: Iterable[int] = (),
    workers: int = 1,
) -> List[SweepCell]:
    """Simulate every (window length, threshold) pair over all documents.

    Cells come back ordered by window length, then threshold, whatever the
    worker count.
    """
    grid = list(product(sorted(set(window_lens)), sorted(set(thresholds))))
    if not grid:
        raise MetricError("sweep grid is empty")
    curve_masks = tuple(curve_masks)

    def cell(wr):
        w, r = wr
        cfg = SimulationConfig(merge=MergeParams(w, r, backoff_cap), mask=mask)
        logs = [run_online(d, cfg, translator) for d in docs]
        return score_logs(logs, w, r, mask, curve_masks)

    if workers <= 1:
        return [cell(wr) for wr in grid]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(cell, grid))


TABLE_METRICS = {
    "normalized_erasure": "{:.4f}",
    "extra_retranslations": "{:d}",
    "avg_match_ratio": "{:.2f}",
}


def format_table(cells: Sequence[SweepCell], metric: str) -> str:
    """Tab-separated grid: one row per window length, one column per threshold."""
    fmt = TABLE_METRICS[metric]
    windows = sorted({c.window_len for c in cells})
    thresholds = sorted({c.threshold for c in cells})
    by_key = {(c.window_len, c.threshold): c for c in cells}
    lines = ["\t".join(["Window(w_l) \\ Match Threshold (r)"] + [f"{r:g}" for r in thresholds] + ["#windows"])]
    for w in windows:
        row = [str(w)]
        count = 0
        for r in thresholds:
            c = by_key.get((w, r))
            row.append("" if c is None else fmt.format(getattr(c, metric)))
            if c is not None:
                count = c.window_count
        row.append(str(count))
        lines.append("\t".join(row))
    return "\n".join(lines) + "\n"


def cells_to_json(cells: Sequence[SweepCell]) -> str:
    out = []
    for c in cells:
        d = asdict(c)
        d["ne_by_mask"] = {str(m): v for m, v in c.ne_by_mask}
        out.append(d)
    return json.dumps(out, indent=2, sort_keys=True) + "\n"


def _csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def threshold_curve_csv(cells: Sequence[SweepCell]) -> str:
    """Threshold-vs-flicker points, one series per window length."""
    rows = [(c.window_len, f"{c.threshold:g}", f"{c.normalized_erasure:.6f}") for c in cells]
    return _csv(("window_len", "threshold", "normalized_erasure"), rows)


def mask_curve_csv(cells: Sequence[SweepCell]) -> str:
    """Mask-vs-flicker points, one series per (window length, threshold)."""
    rows = [
        (c.window_len, f"{c.threshold:g}", m, f"{ne:.6f}")
        for c in cells
        for m, ne in c.ne_by_mask
    ]
    return _csv(("window_len", "threshold", "mask", "normalized_erasure"), rows)


def summarize_logs(logs: Sequence[RevisionLog], mask: Optional[int] = None) -> Dict[str, object]:
    """Headline numbers for a set of stored logs."""
    if not logs or any(not l.entries for l in logs):
        raise MetricError("cannot score an empty revision log")
    pooled, mean = pooled_flicker(logs, mask)
    ratios = [r for l in logs for r in _match_ratios(l, 0)]
    return {
        "documents": len(logs),
        "window_count": sum(len(l.entries) for l in logs),
        "total_erasure": pooled.total_erasure,
        "final_length": pooled.final_length,
        "normalized_erasure": pooled.normalized_erasure,
        "mean_doc_normalized_erasure": mean,
        "avg_match_ratio": sum(ratios) / len(ratios) if ratios else None,
        "extra_retranslations": sum(count_extra_retranslations(l) for l in logs),
    }
