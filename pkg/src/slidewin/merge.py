"""Join overlapping translated windows into one output stream.

Each new translation is matched against the tail of the output stream with a
token-level longest common substring. If the match covers too small a share
of the translation, the input window is extended one token into the history
and translated again, up to ``backoff_cap`` times. The translation is then
spliced into the stream at the match, replacing the stream suffix after it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence, Tuple

Translator = Callable[[Sequence[str]], Sequence[str]]


@dataclass(frozen=True)
class MatchResult:
    length: int
    start_in_tail: int
    start_in_window: int


NO_MATCH = MatchResult(0, 0, 0)


@dataclass(frozen=True)
class MergeParams:
    window_len: int = 16
    threshold: float = 0.4
    backoff_cap: int = 5

    def __post_init__(self):
        if self.window_len < 1:
            raise ValueError(f"window_len must be >= 1, got {self.window_len}")
        if not 0 < self.threshold < 1:
            raise ValueError(f"threshold must lie in (0, 1), got {self.threshold}")
        if self.backoff_cap < 0:
            raise ValueError(f"backoff_cap must be >= 0, got {self.backoff_cap}")


@dataclass(frozen=True)
class MergeStats:
    extra_retranslations: int
    match_len: int
    window_len_out: int
    accepted_via_fallback: bool


class WindowTranslationError(RuntimeError):
    """Translator failure inside the merge loop; ``window`` is the attempted input."""

    def __init__(self, window: Sequence[str], cause: BaseException):
        super().__init__(f"translation failed for window {' '.join(window)!r}: {cause}")
        self.window = list(window)


def longest_common_substring(a: Sequence[str], b: Sequence[str]) -> MatchResult:
    """Longest contiguous run shared by ``a`` and ``b``.

    Among equally long runs the one starting latest in ``a`` wins, then the
    one starting latest in ``b``. ``start_in_tail`` indexes ``a`` and
    ``start_in_window`` indexes ``b``.
    """
    positions: Dict[str, List[int]] = {}
    for y, tok in enumerate(b, start=1):
        positions.setdefault(tok, []).append(y)
    best, best_x, best_y = 0, 0, 0
    # prev[y]: length of the common run ending at a[x-2], b[y-1] (1-based ends)
    prev: Dict[int, int] = {}
    for x, tok in enumerate(a, start=1):
        cur = {}
        for y in positions.get(tok, ()):
            run = prev.get(y - 1, 0) + 1
            cur[y] = run
            # (x, y) visited in lexicographic order, so >= keeps the largest end
            # point, which for a fixed length is the largest start point
            if run >= best:
                best, best_x, best_y = run, x, y
        prev = cur
    if best == 0:
        return NO_MATCH
    return MatchResult(best, best_x - best, best_y - best)


def tail_base(output_len: int, window_len: int) -> int:
    return max(0, output_len - window_len)


def splice(output: Sequence[str], window: Sequence[str], match: MatchResult) -> List[str]:
    """Keep the stream up to the match and continue with the window from it.

    ``match`` must have been computed against ``output[tail_base(...):]``.
    Without a match the whole window is appended.
    """
    base = tail_base(len(output), len(window))
    if match.length == 0:
        i, j = min(len(window), len(output) - base), 0
    else:
        i, j = match.start_in_tail, match.start_in_window
    return list(output[: base + i]) + list(window[j:])


def merge_with_backoff(
    output: Sequence[str],
    input_tokens: Sequence[str],
    translate: Translator,
    params: MergeParams = MergeParams(),
) -> Tuple[List[str], MergeStats]:
    """Translate the latest input window and merge it into ``output``.

    History extension stops early once the window already spans the whole
    input, since retranslating the same tokens cannot change the result.
    """
    n = len(input_tokens)
    if n < 1:
        raise ValueError("input stream is empty")
    k = 0
    while True:
        size = min(n, params.window_len + k)
        src = list(input_tokens[n - size :])
        try:
            window = list(translate(src))
        except Exception as exc:
            raise WindowTranslationError(src, exc) from exc
        tail = output[tail_base(len(output), len(window)) :]
        match = longest_common_substring(tail, window)
        k += 1
        if match.length >= len(window) * params.threshold or k > params.backoff_cap:
            break
        if size == n:
            break
    stats = MergeStats(
        extra_retranslations=k - 1,
        match_len=match.length,
        window_len_out=len(window),
        accepted_via_fallback=match.length == 0,
    )
    return splice(output, window, match), stats
