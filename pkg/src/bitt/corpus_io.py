"""JSONL corpus loading and overlap-class statistics."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import IO, Iterable, Iterator, Optional, Union

import yaml

from .diagnostics import Diagnostics
from .model import AnnotatedSentence, MentionSpan, Triple, find_mentions
from .overlap import classify


class CorpusError(ValueError):
    """Unreadable or malformed corpus input."""


@dataclass(frozen=True)
class FormatConfig:
    """Maps a source release's field names onto the internal schema.

    Triple items may be objects (looked up by ``head_key`` etc.) or
    ``[head, relation, tail]`` lists. An entity given as an object is read
    from its ``value_key``.
    """

    id_field: str = "id"
    tokens_field: str = "tokens"
    text_field: str = "text"
    triples_field: str = "triples"
    mentions_field: str = "mentions"
    head_key: str = "head"
    relation_key: str = "relation"
    tail_key: str = "tail"
    value_key: str = "@value"
    joiner: str = " "
    tokenizer: str = "whitespace"
    missing_entity: str = "skip_sentence"

    def __post_init__(self):
        if self.tokenizer not in ("whitespace", "chars"):
            raise CorpusError(f"unknown tokenizer {self.tokenizer!r}")
        if self.missing_entity not in ("skip_sentence", "drop_triple"):
            raise CorpusError(f"unknown missing_entity policy {self.missing_entity!r}")

    @classmethod
    def load(cls, source: Union[str, Path, None]) -> "FormatConfig":
        """A preset name, a JSON/YAML file, or None for the defaults."""
        if source is None:
            return cls()
        if str(source) in PRESETS:
            return PRESETS[str(source)]
        try:
            data = yaml.safe_load(Path(source).read_text(encoding="utf-8")) or {}
        except (OSError, yaml.YAMLError) as exc:
            raise CorpusError(f"cannot read format config {source}: {exc}") from exc
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise CorpusError(f"unknown format config keys: {sorted(unknown)}")
        return cls(**data)


PRESETS = {
    "default": FormatConfig(),
    # CasRel-style NYT release: {"text", "triple_list": [[h, r, t], ...]}
    "nyt": FormatConfig(triples_field="triple_list"),
    # DuIE: {"text", "spo_list": [{"subject", "predicate", "object"}]}, character tokens
    "duie": FormatConfig(
        triples_field="spo_list",
        head_key="subject",
        relation_key="predicate",
        tail_key="object",
        joiner="",
        tokenizer="chars",
    ),
}


def _entity(value, config: FormatConfig) -> str:
    if isinstance(value, dict):
        value = value.get(config.value_key, "")
    return str(value)


def _triple(item, config: FormatConfig) -> Triple:
    if isinstance(item, (list, tuple)):
        if len(item) != 3:
            raise CorpusError(f"triple list must have 3 items: {item!r}")
        head, relation, tail = item
    elif isinstance(item, dict):
        try:
            head, relation, tail = item[config.head_key], item[config.relation_key], item[config.tail_key]
        except KeyError as exc:
            raise CorpusError(f"triple missing key {exc}: {item!r}") from None
    else:
        raise CorpusError(f"triple must be an object or list: {item!r}")
    return Triple(_entity(head, config), str(relation), _entity(tail, config))


def parse_record(
    obj: dict, config: FormatConfig, lineno: int, diagnostics: Optional[Diagnostics] = None
) -> Optional[AnnotatedSentence]:
    """One JSON object to a sentence; None if it has no locatable triple."""
    diagnostics = diagnostics if diagnostics is not None else Diagnostics()
    sid = str(obj.get(config.id_field, lineno))
    if config.tokens_field in obj:
        words = [str(w) for w in obj[config.tokens_field]]
    elif config.text_field in obj:
        text = str(obj[config.text_field])
        words = list(text.replace(" ", "")) if config.tokenizer == "chars" else text.split()
    else:
        raise CorpusError(f"record has neither {config.tokens_field!r} nor {config.text_field!r}")

    triples = {_triple(item, config) for item in obj.get(config.triples_field) or ()}
    triples = {t for t in triples if t.head and t.tail}

    raw_mentions = obj.get(config.mentions_field)
    if raw_mentions is not None:
        mentions = [MentionSpan(str(m["entity"]), int(m["begin"]), int(m["end"])) for m in raw_mentions]
        located = {m.entity for m in mentions}
    else:
        mentions = []
        located = set()
        for entity in sorted({e for t in triples for e in (t.head, t.tail)}):
            found = find_mentions(words, entity, config.joiner)
            if found:
                located.add(entity)
                mentions.extend(found)

    kept = {t for t in triples if t.head in located and t.tail in located}
    if len(kept) < len(triples):
        missing = sorted({e for t in triples - kept for e in (t.head, t.tail)} - located)
        if config.missing_entity == "skip_sentence":
            diagnostics.emit("entity_not_found", f"entity {missing[0]!r} not in tokens; sentence skipped", sid)
            return None
        diagnostics.emit("entity_not_found", f"dropped {len(triples) - len(kept)} triple(s): {missing}", sid)
    if not kept:
        diagnostics.emit("no_triples", "no locatable triple; sentence skipped", sid)
        return None
    used = {e for t in kept for e in (t.head, t.tail)}
    mentions = sorted((m for m in mentions if m.entity in used), key=lambda m: (m.begin, m.end, m.entity))
    try:
        return AnnotatedSentence.build(sid, words, kept, mentions, config.joiner)
    except ValueError as exc:
        raise CorpusError(str(exc)) from exc


def iter_json_lines(stream: IO[str], source: str = "<input>") -> Iterator[tuple[int, dict]]:
    for lineno, line in enumerate(stream, 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"{source}:{lineno}: malformed JSON: {exc.msg}") from None
        if not isinstance(obj, dict):
            raise CorpusError(f"{source}:{lineno}: expected a JSON object")
        yield lineno, obj


def load_corpus(
    path: Union[str, Path, IO[str]],
    config: Optional[FormatConfig] = None,
    diagnostics: Optional[Diagnostics] = None,
) -> Iterator[AnnotatedSentence]:
    """Stream sentences from a JSONL file (or an open text stream)."""
    config = config or FormatConfig()
    if hasattr(path, "read"):
        yield from _load_stream(path, "<stream>", config, diagnostics)
        return
    try:
        stream = open(path, encoding="utf-8")
    except OSError as exc:
        raise CorpusError(f"cannot open {path}: {exc}") from exc
    with stream:
        yield from _load_stream(stream, str(path), config, diagnostics)


def _load_stream(stream, source, config, diagnostics):
    for lineno, obj in iter_json_lines(stream, source):
        try:
            sentence = parse_record(obj, config, lineno, diagnostics)
        except (CorpusError, KeyError, TypeError, ValueError) as exc:
            raise CorpusError(f"{source}:{lineno}: {exc}") from None
        if sentence is not None:
            yield sentence


def sentence_to_json(sentence: AnnotatedSentence) -> dict:
    obj = {
        "id": sentence.id,
        "tokens": sentence.words,
        "triples": [t.as_dict() for t in sorted(sentence.triples)],
    }
    if sentence.mentions is not None:
        obj["mentions"] = [{"entity": m.entity, "begin": m.begin, "end": m.end} for m in sentence.mentions]
    return obj


@dataclass
class StatsReport:
    epo: int = 0
    els: int = 0
    ils: int = 0
    union: int = 0
    total: int = 0

    @property
    def overlap_fraction(self) -> float:
        return self.union / self.total if self.total else 0.0

    def add(self, flags) -> None:
        self.total += 1
        self.epo += flags.epo
        self.els += flags.els
        self.ils += flags.ils
        self.union += not flags.normal

    def to_json(self) -> dict:
        return {**asdict(self), "overlap_fraction": round(self.overlap_fraction, 4)}

    def table(self) -> str:
        rows = [
            ("EPO", self.epo),
            ("ELS", self.els),
            ("ILS", self.ils),
            ("EPO+ILS+ELS", self.union),
            ("All sentences", self.total),
        ]
        width = max(len(name) for name, _ in rows)
        lines = [f"{'Category':<{width}}  {'Count':>8}"]
        lines += [f"{name:<{width}}  {count:>8}" for name, count in rows]
        lines.append(f"{'Overlap %':<{width}}  {100 * self.overlap_fraction:>8.1f}")
        return "\n".join(lines)


def corpus_stats(sentences: Iterable[AnnotatedSentence]) -> StatsReport:
    report = StatsReport()
    for sentence in sentences:
        report.add(classify(sentence))
    return report
