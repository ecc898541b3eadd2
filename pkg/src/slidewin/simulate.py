"""Replay a token stream one token at a time through the window merger."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import IO, Iterable, List, Optional, Sequence

from slidewin.merge import MergeParams, Translator, merge_with_backoff
from slidewin.textnorm import detokenize, tokenize
from slidewin.translators import TranslatorSpec, build_translator


@dataclass(frozen=True)
class SimulationConfig:
    merge: MergeParams = MergeParams()
    mask: int = 0
    translator: TranslatorSpec = TranslatorSpec()
    mode: str = "online"

    def __post_init__(self):
        if self.mask < 0:
            raise ValueError(f"mask must be >= 0, got {self.mask}")
        if self.mode not in ("online", "offline"):
            raise ValueError(f"mode must be 'online' or 'offline', got {self.mode!r}")


@dataclass(frozen=True)
class Document:
    id: str
    tokens: tuple

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if not self.tokens:
            raise ValueError(f"document {self.id!r} has no tokens")

    @classmethod
    def from_file(cls, path: str) -> "Document":
        with open(path, encoding="utf-8") as fh:
            return cls(id=str(path), tokens=tokenize(fh.read()))


@dataclass(frozen=True)
class LogEntry:
    t: int
    input_len: int
    k_extra: int
    match_len: int
    window_len: int
    output: tuple
    displayed: tuple

    def to_json(self) -> str:
        return json.dumps(
            {
                "t": self.t,
                "input_len": self.input_len,
                "k_extra": self.k_extra,
                "match_len": self.match_len,
                "window_len": self.window_len,
                "output": detokenize(self.output),
                "displayed": detokenize(self.displayed),
            },
            ensure_ascii=False,
        )

    @classmethod
    def from_json(cls, line: str) -> "LogEntry":
        d = json.loads(line)
        return cls(
            t=d["t"],
            input_len=d["input_len"],
            k_extra=d["k_extra"],
            match_len=d["match_len"],
            window_len=d["window_len"],
            output=tuple(tokenize(d["output"])),
            displayed=tuple(tokenize(d["displayed"])),
        )


@dataclass
class RevisionLog:
    entries: List[LogEntry] = field(default_factory=list)
    doc_id: str = ""

    @property
    def final_output(self) -> List[str]:
        return list(self.entries[-1].output) if self.entries else []

    def displays(self) -> List[tuple]:
        return [e.displayed for e in self.entries]

    def remasked(self, mask: int) -> List[List[str]]:
        """Displayed outputs as they would have been under another mask."""
        return [apply_mask(e.output, mask) for e in self.entries]

    def write_jsonl(self, fh: IO[str]) -> None:
        for e in self.entries:
            fh.write(e.to_json() + "\n")

    @classmethod
    def read_jsonl(cls, lines: Iterable[str], doc_id: str = "") -> "RevisionLog":
        return cls([LogEntry.from_json(l) for l in lines if l.strip()], doc_id=doc_id)


class SimulationError(RuntimeError):
    """Translator failure mid-stream; ``log`` holds the entries produced so far."""

    def __init__(self, log: RevisionLog, cause: BaseException):
        super().__init__(f"simulation of {log.doc_id!r} aborted after {len(log.entries)} steps: {cause}")
        self.log = log


def apply_mask(output: Sequence[str], k: int) -> List[str]:
    if k < 0:
        raise ValueError(f"mask must be >= 0, got {k}")
    return list(output[: max(0, len(output) - k)])


def run_online(
    doc: Document, cfg: SimulationConfig, translator: Optional[Translator] = None
) -> RevisionLog:
    """Feed ``doc`` one token at a time, merging a fresh translation per step.

    Without an explicit ``translator`` one is built from ``cfg.translator``
    and closed afterwards.
    """
    if translator is None:
        owned = build_translator(cfg.translator)
        try:
            return run_online(doc, cfg, owned)
        finally:
            owned.close()
    log = RevisionLog(doc_id=doc.id)
    output: List[str] = []
    for n in range(1, len(doc.tokens) + 1):
        try:
            output, stats = merge_with_backoff(output, doc.tokens[:n], translator, cfg.merge)
        except Exception as exc:
            raise SimulationError(log, exc) from exc
        log.entries.append(
            LogEntry(
                t=n - 1,
                input_len=n,
                k_extra=stats.extra_retranslations,
                match_len=stats.match_len,
                window_len=stats.window_len_out,
                output=tuple(output),
                displayed=tuple(apply_mask(output, cfg.mask)),
            )
        )
    return log


def run_offline(
    doc: Document, cfg: SimulationConfig, translator: Optional[Translator] = None
) -> List[str]:
    return run_online(doc, cfg, translator).final_output


def run_corpus(
    docs: Sequence[Document], cfg: SimulationConfig, translator: Optional[Translator] = None,
    workers: int = 1,
) -> List[RevisionLog]:
    """Simulate each document independently; logs come back in document order."""
    if translator is None:
        owned = build_translator(cfg.translator)
        try:
            return run_corpus(docs, cfg, owned, workers)
        finally:
            owned.close()
    if workers <= 1:
        return [run_online(d, cfg, translator) for d in docs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda d: run_online(d, cfg, translator), docs))
