"""Command-line entry point: ``slidewin <subcommand> ...``.

Exit status is 0 on success, 1 on runtime failure and 2 on usage or input
validation errors. Every subcommand accepts ``--config FILE`` (``key=value``
lines or a JSON object keyed by option name); explicit flags win over it.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from typing import Dict, List, Optional, Sequence

from slidewin import align_windows as aw
from slidewin import metrics
from slidewin.merge import MergeParams
from slidewin.simulate import Document, RevisionLog, SimulationConfig, SimulationError, run_online
from slidewin.textnorm import NormalizationConfig, detokenize, normalize_lines
from slidewin.translators import (
    DEFAULT_TIMEOUT,
    KINDS,
    URL_ENV_VAR,
    TranslatorError,
    TranslatorSpec,
    build_translator,
    load_table,
)

logger = logging.getLogger("slidewin")


class UsageError(Exception):
    """Bad flags or inputs; reported with exit status 2."""


def _int_list(text: str) -> List[int]:
    return [int(x) for x in text.replace(",", " ").split()]


def _float_list(text: str) -> List[float]:
    return [float(x) for x in text.replace(",", " ").split()]


def load_config(path: str) -> Dict[str, object]:
    if not os.path.exists(path):
        raise UsageError(f"config file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if path.endswith(".json"):
        data = json.loads(text)
        if not isinstance(data, dict):
            raise UsageError(f"{path}: expected a JSON object")
    else:
        data = {}
        for n, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, eq, value = line.partition("=")
            if not eq:
                raise UsageError(f"{path}:{n}: expected key=value")
            data[key.strip()] = value.strip()
    return {k.replace("-", "_"): v for k, v in data.items()}


def _coerce_bools(parser: argparse.ArgumentParser, values: Dict[str, object]) -> Dict[str, object]:
    flags = {a.dest for a in parser._actions if isinstance(a, (argparse._StoreTrueAction, argparse._StoreFalseAction))}
    out = {}
    for k, v in values.items():
        if k in flags and isinstance(v, str):
            v = v.lower() in ("1", "true", "yes", "on")
        elif isinstance(v, (int, float)) and not isinstance(v, bool):
            v = str(v)
        out[k] = v
    return out


def _add_translator_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("translator")
    g.add_argument("--translator", choices=KINDS, default="identity")
    g.add_argument("--dict", dest="dict_path", help="dictionary table (JSON object or src<TAB>tgt lines)")
    g.add_argument("--noise-rate", type=float, default=0.15)
    g.add_argument("--noise-seed", type=int, help="defaults to --seed")
    g.add_argument("--vocab-size", type=int, default=1000, help="size of the noise token inventory")
    g.add_argument("--command", help="line-protocol translator command")
    g.add_argument("--url", default=os.environ.get(URL_ENV_VAR), help=f"HTTP endpoint (default ${URL_ENV_VAR})")
    g.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT)


def _add_merge_flags(p: argparse.ArgumentParser, grid: bool = False) -> None:
    g = p.add_argument_group("merge")
    if grid:
        g.add_argument("--window-lens", type=_int_list, default=list(metrics.WINDOW_GRID))
        g.add_argument("--thresholds", type=_float_list, default=list(metrics.THRESHOLD_GRID))
    else:
        g.add_argument("--window-len", type=int, default=16)
        g.add_argument("--threshold", type=float, default=0.4)
    g.add_argument("--backoff-cap", type=int, default=5)
    g.add_argument("--mask", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slidewin", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command_name", required=True)

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="key=value or JSON file with option defaults")
        p.add_argument("--seed", type=int, default=0)
        return p

    p = add("preprocess", "normalize source text to look like ASR output")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--keep-punctuation", action="store_true")
    p.add_argument("--keep-case", action="store_true")
    p.add_argument("--punctuation", help="explicit punctuation characters (default: Unicode P* and S*)")

    p = add("join-corpus", "write 'src ||| tgt' lines for the word aligner")
    p.add_argument("src")
    p.add_argument("tgt")
    p.add_argument("output")

    p = add("make-windows", "extract parallel training windows from an aligned corpus")
    p.add_argument("--src", required=True)
    p.add_argument("--tgt", required=True)
    p.add_argument("--align", required=True, help="Pharaoh-format alignment file")
    p.add_argument("--out", required=True)
    p.add_argument("--preset", choices=sorted(aw.WINDOW_PRESETS), default=aw.DEFAULT_PRESET)
    p.add_argument("--min-len", type=int, help="overrides the preset")
    p.add_argument("--max-len", type=int, help="overrides the preset")

    p = add("simulate", "replay a document through online retranslation")
    p.add_argument("doc")
    p.add_argument("--log-out", required=True, help="revision log (JSON lines)")
    p.add_argument("--out", help="final translation (default: stdout)")
    _add_merge_flags(p)
    _add_translator_flags(p)

    p = add("sweep", "grid over window length and threshold")
    p.add_argument("docs", nargs="+")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--curve-masks", type=_int_list, default=list(range(0, 11)))
    p.add_argument("--workers", type=int, default=1)
    _add_merge_flags(p, grid=True)
    _add_translator_flags(p)

    p = add("metrics", "score stored revision logs")
    p.add_argument("logs", nargs="+")
    p.add_argument("--mask", type=int, help="re-mask stored outputs instead of using the displayed column")
    p.add_argument("--out", help="JSON summary (default: stdout)")
    return parser


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        subparser = parser._subparsers._group_actions[0].choices[args.command_name]
        subparser.set_defaults(**_coerce_bools(subparser, load_config(args.config)))
        args = parser.parse_args(argv)
    return args


def _require_file(path: str) -> None:
    if not os.path.isfile(path):
        raise UsageError(f"no such file: {path}")


def _read_lines(path: str) -> List[str]:
    _require_file(path)
    with open(path, encoding="utf-8") as fh:
        return fh.read().splitlines()


def write_manifest(target: str, args: argparse.Namespace) -> str:
    path = target + ".manifest.json" if not os.path.isdir(target) else os.path.join(target, "manifest.json")
    resolved = {k: v for k, v in sorted(vars(args).items()) if k != "verbose"}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(resolved, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def translator_spec(args: argparse.Namespace) -> TranslatorSpec:
    params: Dict[str, object] = {}
    if args.translator in ("dictionary", "noisy") and args.dict_path:
        _require_file(args.dict_path)
        params["table"] = load_table(args.dict_path)
    if args.translator == "noisy":
        params.update(
            rate=args.noise_rate,
            seed=args.seed if args.noise_seed is None else args.noise_seed,
            vocab_size=args.vocab_size,
        )
    if args.translator == "subprocess":
        params.update(command=args.command, timeout=args.timeout)
    if args.translator == "http":
        params.update(url=args.url, timeout=args.timeout)
    try:
        return TranslatorSpec(args.translator, params)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _merge_params(window_len: int, threshold: float, args) -> MergeParams:
    try:
        return MergeParams(window_len, threshold, args.backoff_cap)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_preprocess(args) -> int:
    lines = _read_lines(args.input)
    try:
        cfg = NormalizationConfig(
            strip_punctuation=not args.keep_punctuation,
            lowercase=not args.keep_case,
            punctuation_class=frozenset(args.punctuation) if args.punctuation else None,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    with open(args.output, "w", encoding="utf-8") as fh:
        for line in normalize_lines(lines, cfg):
            fh.write(line + "\n")
    return 0


def cmd_join_corpus(args) -> int:
    src, tgt = _read_lines(args.src), _read_lines(args.tgt)
    if len(src) != len(tgt):
        raise UsageError(f"line counts differ: {args.src} has {len(src)}, {args.tgt} has {len(tgt)}")
    with open(args.output, "w", encoding="utf-8") as fh:
        for line in aw.join_parallel(src, tgt):
            fh.write(line + "\n")
    return 0


def cmd_make_windows(args) -> int:
    src, tgt, align = _read_lines(args.src), _read_lines(args.tgt), _read_lines(args.align)
    if not len(src) == len(tgt) == len(align):
        raise UsageError(
            f"line counts differ: src={len(src)} tgt={len(tgt)} align={len(align)}"
        )
    min_len, max_len = aw.WINDOW_PRESETS[args.preset]
    min_len = args.min_len if args.min_len is not None else min_len
    max_len = args.max_len if args.max_len is not None else max_len
    if not 1 <= min_len <= max_len:
        raise UsageError(f"need 1 <= min-len <= max-len, got {min_len}, {max_len}")
    try:
        links = aw.read_alignments(align)
        corpus = aw.collapse_corpus(list(zip(src, tgt)), links)
    except (aw.AlignmentParseError, aw.CorpusValidationError) as exc:
        raise UsageError(f"{args.align}: {exc}") from exc
    windows = aw.extract_windows(corpus, min_len, max_len, args.seed)
    written = aw.emit_training_pairs(windows, args.out)
    write_manifest(args.out, args)
    print(f"windows={len(windows)} written={written} skipped={len(windows) - written}")
    return 0


def cmd_simulate(args) -> int:
    _require_file(args.doc)
    if args.mask < 0:
        raise UsageError("--mask must be >= 0")
    cfg = SimulationConfig(
        merge=_merge_params(args.window_len, args.threshold, args),
        mask=args.mask,
        translator=translator_spec(args),
    )
    try:
        doc = Document.from_file(args.doc)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    translator = build_translator(cfg.translator)
    try:
        log = run_online(doc, cfg, translator)
    except SimulationError as exc:
        # keep what was produced before the failure
        _write_log(args.log_out, exc.log)
        raise
    finally:
        translator.close()
    _write_log(args.log_out, log)
    final = detokenize(log.final_output) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(final)
    else:
        sys.stdout.write(final)
    write_manifest(args.log_out, args)
    return 0


def _write_log(path: str, log: RevisionLog) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        log.write_jsonl(fh)


def cmd_sweep(args) -> int:
    for path in args.docs:
        _require_file(path)
    if args.mask < 0 or any(m < 0 for m in args.curve_masks):
        raise UsageError("masks must be >= 0")
    if not args.window_lens or not args.thresholds:
        raise UsageError("sweep grid is empty")
    for w in args.window_lens:
        for r in args.thresholds:
            _merge_params(w, r, args)
    spec = translator_spec(args)
    try:
        docs = [Document.from_file(p) for p in args.docs]
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    translator = build_translator(spec)
    try:
        cells = metrics.sweep(
            docs, translator, args.window_lens, args.thresholds, mask=args.mask,
            backoff_cap=args.backoff_cap, curve_masks=args.curve_masks, workers=args.workers,
        )
    finally:
        translator.close()
    os.makedirs(args.out_dir, exist_ok=True)
    outputs = {
        "flicker.tsv": metrics.format_table(cells, "normalized_erasure"),
        "retranslations.tsv": metrics.format_table(cells, "extra_retranslations"),
        "match_ratio.tsv": metrics.format_table(cells, "avg_match_ratio"),
        "summary.json": metrics.cells_to_json(cells),
        "threshold_flicker.csv": metrics.threshold_curve_csv(cells),
        "mask_flicker.csv": metrics.mask_curve_csv(cells),
    }
    for name, text in outputs.items():
        with open(os.path.join(args.out_dir, name), "w", encoding="utf-8") as fh:
            fh.write(text)
    write_manifest(args.out_dir, args)
    sys.stdout.write(outputs["flicker.tsv"])
    return 0


def cmd_metrics(args) -> int:
    logs = []
    for path in args.logs:
        _require_file(path)
        with open(path, encoding="utf-8") as fh:
            try:
                log = RevisionLog.read_jsonl(fh, doc_id=path)
            except (ValueError, KeyError) as exc:
                raise UsageError(f"{path}: malformed revision log: {exc}") from exc
        if not log.entries:
            raise UsageError(f"{path}: revision log is empty")
        logs.append(log)
    if args.mask is not None and args.mask < 0:
        raise UsageError("--mask must be >= 0")
    try:
        summary = metrics.summarize_logs(logs, args.mask)
    except metrics.MetricError as exc:
        raise UsageError(str(exc)) from exc
    text = json.dumps(summary, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        write_manifest(args.out, args)
    else:
        sys.stdout.write(text)
    return 0


COMMANDS = {
    "preprocess": cmd_preprocess,
    "join-corpus": cmd_join_corpus,
    "make-windows": cmd_make_windows,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "metrics": cmd_metrics,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = parse_args(argv)
    except UsageError as exc:
        print(f"slidewin: error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return COMMANDS[args.command_name](args)
    except UsageError as exc:
        print(f"slidewin: error: {exc}", file=sys.stderr)
        return 2
    except (TranslatorError, SimulationError, OSError, UnicodeDecodeError) as exc:
        print(f"slidewin: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
