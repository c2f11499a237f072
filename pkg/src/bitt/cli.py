"""Command line interface.

Subcommands::

    bitt classify  --input corpus.jsonl           # {id, epo, els, ils} per line
    bitt encode    --input corpus.jsonl           # tag sequences per relation group
    bitt decode    --input encoded.jsonl          # triples recovered from tags
    bitt stats     --input corpus.jsonl           # EPO/ELS/ILS counts
    bitt roundtrip --input corpus.jsonl           # encode+decode coverage report
    bitt score     --input pred.jsonl --gold corpus.jsonl
    bitt generate  --count 100 --seed 1           # synthetic corpus

Exit codes: 0 success, 1 input error, 2 internal invariant violation, 64 usage.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections import Counter
from contextlib import contextmanager
from functools import partial
from multiprocessing import Pool
from typing import Callable, Iterable, Iterator, Optional, Sequence

from .corpus_io import (
    CorpusError,
    FormatConfig,
    StatsReport,
    iter_json_lines,
    load_corpus,
    parse_record,
    sentence_to_json,
)
from .decode import MODES, decode_sentence
from .diagnostics import Diagnostics, JsonLinesFormatter
from .encode import PARENT_RULES, encode_sentence
from .evalgen import CoverageReport, MicroScore, SynthConfig, generate_corpus, roundtrip_sentence
from .model import BiTTEncoding, Direction, OverlapFlags, TagParseError, Triple, bies_well_formed
from .overlap import classify

EXIT_OK, EXIT_INPUT, EXIT_INVARIANT, EXIT_USAGE = 0, 1, 2, 64

logger = logging.getLogger("bitt")


class InvariantViolation(RuntimeError):
    pass


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _directions(choice: str) -> tuple[Direction, ...]:
    if choice == "both":
        return (Direction.FORWARD, Direction.BACKWARD)
    return (Direction(choice),)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="input JSONL file (default: stdin)")
    common.add_argument("--output", help="output file (default: stdout)")
    common.add_argument("--format-config", help="preset name (default, nyt, duie) or JSON/YAML field mapping")
    common.add_argument("--direction", choices=("both", "forward", "backward"), default="both")
    common.add_argument("--mode", choices=MODES, default="strict")
    common.add_argument("--parent-rule", choices=PARENT_RULES, default="earliest")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=int, default=1, help="worker processes")
    common.add_argument("--format", choices=("json", "table"), default="json", help="report rendering")
    common.add_argument("--log-level", default="warning")

    parser = _Parser(prog="bitt", description="Bidirectional tree tagging for overlapping relational triples.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True
    sub.add_parser("classify", parents=[common], help="overlap flags per sentence")
    sub.add_parser("encode", parents=[common], help="triples to tag sequences")
    sub.add_parser("decode", parents=[common], help="tag sequences to triples")
    sub.add_parser("stats", parents=[common], help="EPO/ELS/ILS statistics")
    sub.add_parser("roundtrip", parents=[common], help="encode+decode coverage report")
    score = sub.add_parser("score", parents=[common], help="exact-match P/R/F1 of two triple files")
    score.add_argument("--gold", required=True, help="gold JSONL (corpus or triple records)")
    gen = sub.add_parser("generate", parents=[common], help="synthetic corpus")
    gen.add_argument("--count", type=int, default=100)
    gen.add_argument("--entities", type=int, nargs="+", default=[2, 8], metavar="N", help="count or MIN MAX")
    gen.add_argument("--labels", type=int, nargs="+", default=[1, 3], metavar="K", help="count or MIN MAX")
    gen.add_argument("--density", type=float, nargs="+", default=[0.1, 1.0], metavar="D", help="value or MIN MAX")
    gen.add_argument("--cyclic", action="store_true", help="allow cycles inside relation groups")
    gen.add_argument("--antiparallel-prob", type=float, default=0.0)
    gen.add_argument("--duplicate-mention-prob", type=float, default=0.0)
    return parser


@contextmanager
def _open_out(path: Optional[str]):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8") as fh:
            yield fh


def _open_in(path: Optional[str]):
    if path is None:
        return sys.stdin
    try:
        return open(path, encoding="utf-8")
    except OSError as exc:
        raise CorpusError(f"cannot open {path}: {exc}") from exc


def _dump(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=False)


def _ordered_map(func: Callable, items: Iterable, jobs: int) -> Iterator:
    """``map`` that keeps input order, fanned out to ``jobs`` processes."""
    if jobs <= 1:
        yield from map(func, items)
        return
    with Pool(jobs) as pool:
        yield from pool.imap(func, items, chunksize=64)


def _sentences(args, diagnostics):
    stream = _open_in(args.input)
    config = FormatConfig.load(args.format_config)
    return load_corpus(stream, config, diagnostics)


# worker functions live at module level so they pickle


def _classify_one(sentence):
    flags = classify(sentence)
    return {"id": sentence.id, "epo": flags.epo, "els": flags.els, "ils": flags.ils}


def _encode_one(sentence, directions, parent_rule):
    encoding = encode_sentence(sentence, directions, parent_rule)
    for seqs in encoding.groups.values():
        for seq in seqs.values():
            if not bies_well_formed(seq.tags):
                raise InvariantViolation(f"encoder emitted malformed tags for sentence {sentence.id!r}")
    return encoding.to_json()


def _decode_one(obj, mode, directions):
    encoding = BiTTEncoding.from_json(obj)
    diagnostics: Counter = Counter()
    triples = decode_sentence(encoding, mode, diagnostics, directions)
    return {
        "id": encoding.id,
        "triples": [t.as_dict() for t in sorted(triples)],
        "diagnostics": dict(sorted(diagnostics.items())),
    }


def _write_lines(out, records: Iterable[dict]) -> None:
    for rec in records:
        out.write(_dump(rec) + "\n")


def cmd_classify(args, diagnostics):
    with _open_out(args.output) as out:
        _write_lines(out, _ordered_map(_classify_one, _sentences(args, diagnostics), args.jobs))


def cmd_encode(args, diagnostics):
    func = partial(_encode_one, directions=_directions(args.direction), parent_rule=args.parent_rule)
    with _open_out(args.output) as out:
        for rec in _ordered_map(func, _sentences(args, diagnostics), args.jobs):
            for rel, message in rec.get("failed", {}).items():
                diagnostics.emit("encode_failed_group", f"group {rel!r}: {message}", rec["id"])
            out.write(_dump(rec) + "\n")


def cmd_decode(args, diagnostics):
    func = partial(_decode_one, mode=args.mode, directions=_directions(args.direction))

    def records():
        for lineno, obj in iter_json_lines(_open_in(args.input), args.input or "<stdin>"):
            if "tokens" not in obj:
                raise CorpusError(f"line {lineno}: encoded record lacks 'tokens'")
            yield obj

    with _open_out(args.output) as out:
        _write_lines(out, _ordered_map(func, records(), args.jobs))


def cmd_stats(args, diagnostics):
    report = StatsReport()
    for rec in _ordered_map(_classify_one, _sentences(args, diagnostics), args.jobs):
        report.add(OverlapFlags(rec["epo"], rec["els"], rec["ils"]))
    with _open_out(args.output) as out:
        out.write((report.table() if args.format == "table" else _dump(report.to_json())) + "\n")


def cmd_roundtrip(args, diagnostics):
    func = partial(
        roundtrip_sentence, parent_rule=args.parent_rule, mode=args.mode, directions=_directions(args.direction)
    )
    report = CoverageReport()
    for outcome in _ordered_map(func, _sentences(args, diagnostics), args.jobs):
        report.add(outcome)
    report.diagnostics.update(diagnostics)
    with _open_out(args.output) as out:
        out.write((report.table() if args.format == "table" else _dump(report.to_json())) + "\n")


def _triples_of(obj: dict) -> set[Triple]:
    return {Triple(str(t["head"]), str(t["relation"]), str(t["tail"])) for t in obj.get("triples") or ()}


def _read_gold(path: str, config: FormatConfig, diagnostics) -> dict[str, set[Triple]]:
    """Gold triples by id; corpus records go through the loader so skips match ``roundtrip``."""
    gold: dict[str, set[Triple]] = {}
    with _open_in(path) as fh:
        for lineno, obj in iter_json_lines(fh, path):
            if config.tokens_field in obj or config.text_field in obj:
                sentence = parse_record(obj, config, lineno, diagnostics)
                if sentence is not None:
                    gold[sentence.id] = set(sentence.triples)
            else:
                gold[str(obj.get("id", lineno))] = _triples_of(obj)
    return gold


def cmd_score(args, diagnostics):
    config = FormatConfig.load(args.format_config)
    gold = _read_gold(args.gold, config, diagnostics)
    predicted: dict[str, set[Triple]] = {}
    for lineno, obj in iter_json_lines(_open_in(args.input), args.input or "<stdin>"):
        predicted[str(obj.get("id", lineno))] = _triples_of(obj)
    micro = MicroScore()
    for sid in gold.keys() | predicted.keys():
        micro.add(predicted.get(sid, ()), gold.get(sid, ()))
    with _open_out(args.output) as out:
        out.write(_dump(micro.to_json()) + "\n")


def _range(values: Sequence, name: str):
    if len(values) == 1:
        return (values[0], values[0])
    if len(values) == 2:
        return tuple(values)
    raise UsageError(f"--{name} takes one value or MIN MAX")


def cmd_generate(args, diagnostics):
    base = SynthConfig(
        acyclic=not args.cyclic,
        antiparallel_prob=args.antiparallel_prob,
        duplicate_mention_prob=args.duplicate_mention_prob,
    )
    sentences = generate_corpus(
        args.count,
        seed=args.seed,
        base=base,
        entity_range=_range(args.entities, "entities"),
        label_range=_range(args.labels, "labels"),
        density_range=_range(args.density, "density"),
    )
    with _open_out(args.output) as out:
        _write_lines(out, map(sentence_to_json, sentences))


COMMANDS = {
    "classify": cmd_classify,
    "encode": cmd_encode,
    "decode": cmd_decode,
    "stats": cmd_stats,
    "roundtrip": cmd_roundtrip,
    "score": cmd_score,
    "generate": cmd_generate,
}


def _setup_logging(level: str) -> logging.Handler:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(JsonLinesFormatter())
    logger.handlers[:] = [handler]
    logger.setLevel(level.upper())
    logger.propagate = False
    return handler


def run(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    _setup_logging(args.log_level)
    diagnostics = Diagnostics()
    try:
        COMMANDS[args.command](args, diagnostics)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (CorpusError, TagParseError, ValueError, KeyError) as exc:
        logger.error(str(exc), extra={"code": "input_error"})
        return EXIT_INPUT
    except InvariantViolation as exc:
        logger.error(str(exc), extra={"code": "invariant_violation"})
        return EXIT_INVARIANT
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
