"""Turn a word-aligned parallel corpus into parallel training windows.

The corpus is first collapsed into a single long sentence pair with
re-indexed alignment links, then the target side is cut into consecutive
random-length windows; each target window's source counterpart is the span
between the smallest and largest source index aligned into it.
"""

from __future__ import annotations

import os
import random
from dataclasses import dataclass
from typing import IO, Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

from slidewin.textnorm import as_tokens, detokenize

# (min_len, max_len) presets for the target window length
WINDOW_PRESETS = {
    "10-25": (10, 25),
    "15-25": (15, 25),
}
DEFAULT_PRESET = "10-25"


class AlignmentParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class CorpusValidationError(ValueError):
    pass


class AlignmentLink(NamedTuple):
    src: int
    tgt: int


def parse_alignment_line(line: str, lineno: int = 1) -> List[AlignmentLink]:
    """Parse one Pharaoh-format line (``"0-0 1-2"``) into links.

    Columns in error messages are 1-based character offsets of the bad pair.
    """
    links = []
    pos = 0
    for field in line.split():
        col = line.index(field, pos) + 1
        pos = col - 1 + len(field)
        src, dash, tgt = field.partition("-")
        if not dash:
            raise AlignmentParseError(f"missing '-' in {field!r}", lineno, col)
        if not (src.isdigit() and tgt.isdigit()):
            raise AlignmentParseError(f"non-integer index in {field!r}", lineno, col)
        links.append(AlignmentLink(int(src), int(tgt)))
    return links


def read_alignments(lines: Iterable[str]) -> List[List[AlignmentLink]]:
    return [parse_alignment_line(line, n) for n, line in enumerate(lines, start=1)]


@dataclass(frozen=True)
class CollapsedCorpus:
    source_tokens: Tuple[str, ...]
    target_tokens: Tuple[str, ...]
    links: Tuple[AlignmentLink, ...]
    # cumulative token offsets of each original sentence pair
    src_offsets: Tuple[int, ...] = ()
    tgt_offsets: Tuple[int, ...] = ()

    @property
    def link_set(self) -> frozenset:
        return frozenset(self.links)


Sentence = Union[str, Sequence[str]]


def collapse_corpus(
    pairs: Sequence[Tuple[Sentence, Sentence]],
    alignments: Sequence[Iterable[Tuple[int, int]]],
) -> CollapsedCorpus:
    """Concatenate all sentence pairs, shifting each link by the preceding token counts."""
    if len(pairs) != len(alignments):
        raise CorpusValidationError(
            f"{len(pairs)} sentence pairs but {len(alignments)} alignment lines"
        )
    source: List[str] = []
    target: List[str] = []
    links: List[AlignmentLink] = []
    seen = set()
    src_offsets, tgt_offsets = [], []
    for k, ((s_k, t_k), a_k) in enumerate(zip(pairs, alignments), start=1):
        s_toks, t_toks = as_tokens(s_k), as_tokens(t_k)
        src_offsets.append(len(source))
        tgt_offsets.append(len(target))
        for i, j in a_k:
            if not (0 <= i < len(s_toks) and 0 <= j < len(t_toks)):
                raise CorpusValidationError(
                    f"sentence {k}: link {i}-{j} out of range "
                    f"(source has {len(s_toks)} tokens, target has {len(t_toks)})"
                )
            link = AlignmentLink(i + len(source), j + len(target))
            if link not in seen:
                seen.add(link)
                links.append(link)
        source.extend(s_toks)
        target.extend(t_toks)
    return CollapsedCorpus(
        tuple(source), tuple(target), tuple(links), tuple(src_offsets), tuple(tgt_offsets)
    )


@dataclass(frozen=True)
class WindowSpan:
    tgt_start: int
    tgt_len: int
    # inclusive source bounds; None when no link falls in the target range
    src_start: Optional[int]
    src_end: Optional[int]


@dataclass(frozen=True)
class WindowPair:
    source: Tuple[str, ...]
    target: Tuple[str, ...]
    span: WindowSpan
    partial: bool = False

    @property
    def aligned(self) -> bool:
        return self.span.src_start is not None


def extract_windows(
    corpus: CollapsedCorpus,
    min_len: int = WINDOW_PRESETS[DEFAULT_PRESET][0],
    max_len: int = WINDOW_PRESETS[DEFAULT_PRESET][1],
    seed: int = 0,
) -> List[WindowPair]:
    """Tile the target stream with windows of uniformly random length.

    The last window is truncated at the end of the stream and marked
    ``partial`` when shorter than ``min_len``. Source spans include the
    maximum aligned index.
    """
    if not 1 <= min_len <= max_len:
        raise ValueError(f"need 1 <= min_len <= max_len, got {min_len}, {max_len}")
    n_tgt = len(corpus.target_tokens)
    lo: List[Optional[int]] = [None] * n_tgt
    hi: List[Optional[int]] = [None] * n_tgt
    for i, j in corpus.links:
        if lo[j] is None or i < lo[j]:
            lo[j] = i
        if hi[j] is None or i > hi[j]:
            hi[j] = i

    rng = random.Random(seed)
    windows = []
    idx = 0
    while idx < n_tgt:
        l = rng.randint(min_len, max_len)
        end = min(idx + l, n_tgt)
        mins = [v for v in lo[idx:end] if v is not None]
        if mins:
            p = min(mins)
            q = max(v for v in hi[idx:end] if v is not None)
            source = corpus.source_tokens[p : q + 1]
        else:
            p = q = None
            source = ()
        windows.append(
            WindowPair(
                source=source,
                target=corpus.target_tokens[idx:end],
                span=WindowSpan(idx, end - idx, p, q),
                partial=end - idx < min_len,
            )
        )
        idx += l
    return windows


def emit_training_pairs(windows: Iterable[WindowPair], sink: Union[str, os.PathLike, IO[str]]) -> int:
    """Write ``source ||| target`` lines, skipping windows without alignment."""
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w", encoding="utf-8") as fh:
            return emit_training_pairs(windows, fh)
    written = 0
    for w in windows:
        if not w.aligned:
            continue
        sink.write(f"{detokenize(w.source)} ||| {detokenize(w.target)}\n")
        written += 1
    return written


def join_parallel(src_lines: Iterable[str], tgt_lines: Iterable[str]) -> Iterable[str]:
    """Produce aligner input lines (``src ||| tgt``) from two parallel files."""
    for s, t in zip(src_lines, tgt_lines):
        yield f"{s.strip()} ||| {t.strip()}"
