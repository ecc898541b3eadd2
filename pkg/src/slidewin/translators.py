"""Translator contract, deterministic mock translators and remote MT clients.

A translator is any callable mapping a token sequence to a token sequence.
Every call is a stateless, full-window retranslation.

Wire protocols:

* line protocol: the child process reads one space-joined source line on
  stdin and answers with one target line on stdout, strictly alternating,
  UTF-8, newline terminated;
* HTTP: ``POST`` of ``{"src": "<string>"}`` answered by ``{"tgt": "<string>"}``.
"""

from __future__ import annotations

import json
import logging
import os
import queue
import random
import shlex
import socket
import subprocess
import threading
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Union

from slidewin.textnorm import detokenize, tokenize

logger = logging.getLogger(__name__)

KINDS = ("identity", "dictionary", "noisy", "subprocess", "http")
REMOTE_KINDS = ("subprocess", "http")
DEFAULT_TIMEOUT = 30.0
HTTP_RETRIES = 2
URL_ENV_VAR = "SLIDEWIN_MT_URL"


class TranslatorError(RuntimeError):
    retryable = False


class TranslatorTimeout(TranslatorError):
    retryable = True


class ProtocolError(TranslatorError):
    def __init__(self, message: str, payload: Union[str, bytes, None] = None):
        super().__init__(f"{message}; raw payload: {payload!r}")
        self.payload = payload


class TranslatorExited(TranslatorError):
    def __init__(self, command: Sequence[str], status: Optional[int]):
        super().__init__(f"translator process {shlex.join(command)!r} exited with status {status}")
        self.status = status


@dataclass(frozen=True)
class TranslationRequest:
    source_tokens: tuple
    stream_id: str = ""
    sequence_number: int = 0

    def __post_init__(self):
        object.__setattr__(self, "source_tokens", tuple(self.source_tokens))
        if not self.source_tokens:
            raise ValueError("translation request has no source tokens")


@dataclass(frozen=True)
class TranslatorSpec:
    """Which translator to build and how.

    ``params`` by kind: ``table`` (dictionary, noisy); ``rate``, ``seed``,
    ``vocab_size`` (noisy); ``command`` (subprocess); ``url`` (http);
    ``timeout`` (remote kinds).
    """

    kind: str = "identity"
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown translator kind {self.kind!r}; expected one of {KINDS}")
        if self.kind in REMOTE_KINDS:
            timeout = self.params.get("timeout", DEFAULT_TIMEOUT)
            if not timeout > 0:
                raise ValueError(f"timeout must be > 0, got {timeout}")
        if self.kind == "subprocess" and not self.params.get("command"):
            raise ValueError("subprocess translator needs a command")
        if self.kind == "http" and not (self.params.get("url") or os.environ.get(URL_ENV_VAR)):
            raise ValueError(f"http translator needs a url (or ${URL_ENV_VAR})")
        if self.kind == "noisy" and not 0 <= self.params.get("rate", 0.0) <= 1:
            raise ValueError(f"noise rate must lie in [0, 1], got {self.params['rate']}")


class IdentityTranslator:
    def __call__(self, tokens: Sequence[str]) -> List[str]:
        return list(tokens)

    def close(self):
        pass


class DictionaryTranslator:
    """Token-by-token lookup; unknown tokens pass through unchanged."""

    def __init__(self, table: Optional[Mapping[str, str]] = None):
        self.table = dict(table or {})

    def __call__(self, tokens: Sequence[str]) -> List[str]:
        return [self.table.get(t, t) for t in tokens]

    def close(self):
        pass


class NoisyTranslator(DictionaryTranslator):
    """Dictionary lookup followed by random token substitutions.

    The random stream is seeded from ``seed`` and the full source window, so
    the same window always gets the same noise, while a window extended by
    one token gets fresh noise everywhere.
    """

    def __init__(self, table=None, rate: float = 0.1, seed: int = 0, vocab_size: int = 1000):
        super().__init__(table)
        self.rate = rate
        self.seed = seed
        self.vocab_size = vocab_size

    def __call__(self, tokens: Sequence[str]) -> List[str]:
        out = super().__call__(tokens)
        if self.rate <= 0:
            return out
        rng = random.Random(f"{self.seed}\x1f{' '.join(tokens)}")
        for pos in range(len(out)):
            if rng.random() < self.rate:
                out[pos] = f"<n{rng.randrange(self.vocab_size)}>"
        return out


class LineProtocolClient:
    """Talks to a long-running child process over its standard streams.

    Access is serialized by a lock. A timeout leaves the pipe out of step
    with the requests, so the client refuses further calls after one.
    """

    def __init__(self, command: Union[str, Sequence[str]], timeout: float = DEFAULT_TIMEOUT):
        self.command = shlex.split(command) if isinstance(command, str) else list(command)
        self.timeout = timeout
        self._lock = threading.Lock()
        self._lines: "queue.Queue[Optional[str]]" = queue.Queue()
        self._broken = False
        try:
            self._proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as exc:
            raise TranslatorError(f"cannot start translator {shlex.join(self.command)!r}: {exc}") from exc
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()

    def _pump(self):
        for line in self._proc.stdout:
            self._lines.put(line)
        self._lines.put(None)

    def __call__(self, tokens: Sequence[str]) -> List[str]:
        with self._lock:
            if self._broken:
                raise ProtocolError("line protocol desynchronized by an earlier timeout")
            try:
                self._proc.stdin.write(detokenize(tokens) + "\n")
                self._proc.stdin.flush()
            except (BrokenPipeError, OSError):
                raise TranslatorExited(self.command, self._proc.wait(timeout=5)) from None
            try:
                line = self._lines.get(timeout=self.timeout)
            except queue.Empty:
                self._broken = True
                raise TranslatorTimeout(
                    f"no reply from {shlex.join(self.command)!r} within {self.timeout}s"
                ) from None
            if line is None:
                raise TranslatorExited(self.command, self._proc.wait(timeout=5))
            if not line.endswith("\n"):
                raise ProtocolError("reply not newline-terminated", line)
            return tokenize(line)

    def close(self):
        if self._proc.poll() is None:
            try:
                self._proc.stdin.close()
                self._proc.wait(timeout=5)
            except (OSError, subprocess.TimeoutExpired):
                self._proc.kill()
                self._proc.wait()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class HttpClient:
    """JSON-over-HTTP client with a small retry budget for transient failures."""

    def __init__(self, url: str, timeout: float = DEFAULT_TIMEOUT, retries: int = HTTP_RETRIES):
        self.url = url
        self.timeout = timeout
        self.retries = retries

    def _post(self, body: bytes) -> bytes:
        req = urllib.request.Request(
            self.url, data=body, headers={"Content-Type": "application/json"}, method="POST"
        )
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                return resp.read()
        except urllib.error.HTTPError as exc:
            err = TranslatorError(f"{self.url}: HTTP {exc.code}")
            err.retryable = exc.code >= 500
            raise err from exc
        except (socket.timeout, TimeoutError) as exc:
            raise TranslatorTimeout(f"{self.url}: timed out after {self.timeout}s") from exc
        except urllib.error.URLError as exc:
            if isinstance(exc.reason, (socket.timeout, TimeoutError)):
                raise TranslatorTimeout(f"{self.url}: timed out after {self.timeout}s") from exc
            raise TranslatorError(f"cannot reach translator at {self.url}: {exc.reason}") from exc

    def __call__(self, tokens: Sequence[str]) -> List[str]:
        body = json.dumps({"src": detokenize(tokens)}, ensure_ascii=False).encode("utf-8")
        for attempt in range(self.retries + 1):
            try:
                raw = self._post(body)
                break
            except TranslatorError as exc:
                if not exc.retryable or attempt == self.retries:
                    raise
                logger.warning("retrying %s after: %s", self.url, exc)
        try:
            payload = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError):
            raise ProtocolError(f"{self.url}: response is not JSON", raw) from None
        if not isinstance(payload, dict) or not isinstance(payload.get("tgt"), str):
            raise ProtocolError(f"{self.url}: response lacks a string 'tgt' field", raw)
        return tokenize(payload["tgt"])

    def close(self):
        pass


def build_translator(spec: TranslatorSpec):
    p = dict(spec.params)
    if spec.kind == "identity":
        return IdentityTranslator()
    if spec.kind == "dictionary":
        return DictionaryTranslator(p.get("table"))
    if spec.kind == "noisy":
        return NoisyTranslator(
            p.get("table"), rate=p.get("rate", 0.1), seed=p.get("seed", 0),
            vocab_size=p.get("vocab_size", 1000),
        )
    timeout = p.get("timeout", DEFAULT_TIMEOUT)
    if spec.kind == "subprocess":
        return LineProtocolClient(p["command"], timeout=timeout)
    return HttpClient(p.get("url") or os.environ[URL_ENV_VAR], timeout=timeout)


def translate(request: TranslationRequest, spec: TranslatorSpec) -> List[str]:
    """One-shot translation; builds and disposes a translator for the call."""
    translator = build_translator(spec)
    try:
        return list(translator(request.source_tokens))
    finally:
        translator.close()


def load_table(path: str) -> Dict[str, str]:
    """Read a dictionary table: JSON object, or ``src<TAB>tgt`` lines."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if path.endswith(".json"):
        table = json.loads(text)
        if not isinstance(table, dict):
            raise ValueError(f"{path}: expected a JSON object")
        return {str(k): str(v) for k, v in table.items()}
    table = {}
    for n, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValueError(f"{path}:{n}: expected 'source<TAB>target'")
        table[parts[0].strip()] = parts[1].strip()
    return table
