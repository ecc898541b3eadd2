"""Source-side normalization and whitespace tokenization.

Written text is made to look like ASR output: punctuation and symbols become
spaces, whitespace runs collapse, and everything is lowercased.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from typing import FrozenSet, Iterable, List, Optional, Sequence


def _is_unicode_punct(ch: str) -> bool:
    # Unicode categories P* (punctuation) and S* (symbols)
    return unicodedata.category(ch)[0] in "PS"


@dataclass(frozen=True)
class NormalizationConfig:
    """Controls :func:`normalize_source`.

    ``punctuation_class=None`` means every character in Unicode categories
    P* and S*. An explicit set replaces that default entirely.
    """

    strip_punctuation: bool = True
    lowercase: bool = True
    punctuation_class: Optional[FrozenSet[str]] = None

    def __post_init__(self):
        if self.punctuation_class is not None:
            chars = frozenset(self.punctuation_class)
            bad = sorted(c for c in chars if c.isalnum() or len(c) != 1)
            if bad:
                raise ValueError(f"punctuation_class contains non-punctuation entries: {bad!r}")
            object.__setattr__(self, "punctuation_class", chars)

    def is_punct(self, ch: str) -> bool:
        if self.punctuation_class is None:
            return _is_unicode_punct(ch)
        return ch in self.punctuation_class


DEFAULT_CONFIG = NormalizationConfig()


def normalize_source(text: str, cfg: NormalizationConfig = DEFAULT_CONFIG) -> str:
    """Return ``text`` stripped of punctuation, whitespace-collapsed and lowercased.

    >>> normalize_source("Hello, World!  Twice.")
    'hello world twice'
    """
    if cfg.lowercase:
        # lowercase first: a case mapping must not reintroduce characters we strip
        text = text.lower()
    if cfg.strip_punctuation:
        text = "".join(" " if cfg.is_punct(ch) else ch for ch in text)
    return " ".join(text.split())


def tokenize(text: str) -> List[str]:
    return text.split()


def detokenize(tokens: Iterable[str]) -> str:
    return " ".join(tokens)


def normalize_lines(lines: Iterable[str], cfg: NormalizationConfig = DEFAULT_CONFIG) -> Iterable[str]:
    """Normalize line by line; empty results are kept so line counts never change."""
    for line in lines:
        yield normalize_source(line.rstrip("\r\n"), cfg)


def as_tokens(value: "str | Sequence[str]") -> List[str]:
    """Accept either a raw string or an already tokenized sequence."""
    if isinstance(value, str):
        return tokenize(value)
    return list(value)
