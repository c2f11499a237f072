"""Exact-match scoring, synthetic sentences, and round-trip coverage reports."""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Optional, Sequence

from .decode import decode_sentence
from .encode import encode_sentence
from .model import AnnotatedSentence, Direction, MentionSpan, Triple
from .overlap import UnionFind, classify

CLASSES = ("Normal", "EPO", "ELS", "ILS")


def score(predicted: Iterable[Triple], gold: Iterable[Triple]) -> tuple[float, float, float]:
    """Precision, recall and F1 where a triple counts only if head, relation and tail all match."""
    return MicroScore().add(predicted, gold).prf()


@dataclass
class MicroScore:
    correct: int = 0
    predicted: int = 0
    gold: int = 0

    def add(self, predicted: Iterable[Triple], gold: Iterable[Triple]) -> "MicroScore":
        predicted, gold = set(predicted), set(gold)
        self.correct += len(predicted & gold)
        self.predicted += len(predicted)
        self.gold += len(gold)
        return self

    def merge(self, other: "MicroScore") -> "MicroScore":
        self.correct += other.correct
        self.predicted += other.predicted
        self.gold += other.gold
        return self

    def prf(self) -> tuple[float, float, float]:
        p = self.correct / self.predicted if self.predicted else 0.0
        r = self.correct / self.gold if self.gold else 0.0
        f1 = 2 * p * r / (p + r) if p + r else 0.0
        return p, r, f1

    def to_json(self) -> dict:
        p, r, f1 = self.prf()
        return {
            "precision": round(p, 6),
            "recall": round(r, 6),
            "f1": round(f1, 6),
            "correct": self.correct,
            "predicted": self.predicted,
            "gold": self.gold,
        }


@dataclass(frozen=True)
class SynthConfig:
    entities: int = 4
    relation_labels: int = 1
    edge_density: float = 0.5
    acyclic: bool = True
    antiparallel_prob: float = 0.0
    duplicate_mention_prob: float = 0.0
    seed: int = 0
    max_entity_tokens: int = 3
    filler_prob: float = 0.5


def generate_synthetic(config: SynthConfig, sentence_id: Optional[str] = None) -> AnnotatedSentence:
    """A random sentence with entity token runs like ``ent3_a ent3_b``.

    ``edge_density`` is the fraction of (entity pair, label) slots that carry
    a triple. With ``acyclic`` every label's graph is kept a forest, which
    caps the density at ``labels * (n - 1)`` slots.
    """
    n, k = config.entities, config.relation_labels
    if n < 1 or k < 1:
        raise ValueError("need at least one entity and one relation label")
    if not 0.0 <= config.edge_density <= 1.0:
        raise ValueError(f"edge_density {config.edge_density} outside [0, 1]")
    rng = random.Random(config.seed)
    slots = [(a, b, lab) for a in range(n) for b in range(a + 1, n) for lab in range(k)]
    target = round(config.edge_density * len(slots))
    if config.acyclic and target > k * (n - 1):
        raise ValueError(
            f"density {config.edge_density} needs {target} triples but acyclic groups over "
            f"{n} entities and {k} labels hold at most {k * (n - 1)}"
        )

    names = [f"ent{i}" for i in range(n)]
    words: list[str] = []
    mentions: list[MentionSpan] = []
    order = list(range(n))
    rng.shuffle(order)
    placements = order + [i for i in order if rng.random() < config.duplicate_mention_prob]
    if len(placements) > n:
        rng.shuffle(placements)
    entity_text: dict[int, str] = {}
    for i in range(n):
        width = rng.randint(1, config.max_entity_tokens)
        entity_text[i] = " ".join(f"{names[i]}_{chr(ord('a') + j)}" for j in range(width))
    filler = 0
    for i in placements:
        if rng.random() < config.filler_prob:
            words.append(f"w{filler}")
            filler += 1
        begin = len(words)
        words.extend(entity_text[i].split(" "))
        mentions.append(MentionSpan(entity_text[i], begin, len(words)))
    if rng.random() < config.filler_prob:
        words.append(f"w{filler}")

    rng.shuffle(slots)
    forests = [UnionFind() for _ in range(k)]
    chosen = []
    for a, b, lab in slots:
        if len(chosen) == target:
            break
        if config.acyclic and not forests[lab].union(a, b):
            continue
        chosen.append((a, b, lab))
    triples = set()
    for a, b, lab in chosen:
        head, tail = (a, b) if rng.random() < 0.5 else (b, a)
        rel = f"rel{lab}"
        triples.add(Triple(entity_text[head], rel, entity_text[tail]))
        if rng.random() < config.antiparallel_prob:
            triples.add(Triple(entity_text[tail], rel, entity_text[head]))

    used = {e for t in triples for e in (t.head, t.tail)}
    mentions = [m for m in mentions if m.entity in used]
    sid = sentence_id if sentence_id is not None else f"synth-{config.seed}"
    return AnnotatedSentence.build(sid, words, triples, mentions)


def generate_corpus(
    count: int,
    seed: int = 0,
    base: SynthConfig = SynthConfig(),
    entity_range: Optional[tuple[int, int]] = None,
    label_range: Optional[tuple[int, int]] = None,
    density_range: Optional[tuple[float, float]] = None,
) -> Iterator[AnnotatedSentence]:
    """``count`` sentences; shape parameters are drawn per sentence when ranges are given.

    In acyclic mode a drawn density is clipped to what the drawn sizes allow.
    Sentences without any triple are redrawn.
    """
    rng = random.Random(seed)
    produced = 0
    while produced < count:
        n = rng.randint(*entity_range) if entity_range else base.entities
        k = rng.randint(*label_range) if label_range else base.relation_labels
        density = rng.uniform(*density_range) if density_range else base.edge_density
        if base.acyclic and n > 1:
            density = min(density, (k * (n - 1)) / (k * n * (n - 1) / 2))
        config = replace(base, entities=n, relation_labels=k, edge_density=density, seed=rng.getrandbits(48))
        sentence = generate_synthetic(config, sentence_id=f"synth-{seed}-{produced}")
        if sentence.triples:
            produced += 1
            yield sentence


def has_antiparallel(triples: Iterable[Triple]) -> bool:
    triples = set(triples)
    return any(t.head != t.tail and Triple(t.tail, t.relation, t.head) in triples for t in triples)


@dataclass
class SentenceOutcome:
    id: str
    classes: tuple[str, ...]
    gold: frozenset[Triple]
    predicted: frozenset[Triple]
    diagnostics: Counter = field(default_factory=Counter)
    antiparallel: bool = False

    @property
    def recovered(self) -> int:
        return len(self.gold & self.predicted)

    @property
    def lossless(self) -> bool:
        return self.gold == self.predicted


def roundtrip_sentence(
    sentence: AnnotatedSentence,
    parent_rule: str = "earliest",
    mode: str = "strict",
    directions: Sequence[Direction] = (Direction.FORWARD, Direction.BACKWARD),
) -> SentenceOutcome:
    diagnostics: Counter = Counter()
    classes = tuple(classify(sentence).classes())
    encoding = encode_sentence(sentence, directions, parent_rule)
    for _ in encoding.failed:
        diagnostics["encode_failed_group"] += 1
    predicted = decode_sentence(encoding, mode, diagnostics, directions)
    return SentenceOutcome(
        sentence.id,
        classes,
        frozenset(sentence.triples),
        frozenset(predicted),
        diagnostics,
        has_antiparallel(sentence.triples),
    )


@dataclass
class ClassCoverage:
    sentences: int = 0
    triples: int = 0
    recovered: int = 0
    lossless: int = 0

    @property
    def recovery_rate(self) -> float:
        return self.recovered / self.triples if self.triples else 0.0

    @property
    def lossless_fraction(self) -> float:
        return self.lossless / self.sentences if self.sentences else 0.0

    def to_json(self) -> dict:
        return {
            "sentences": self.sentences,
            "triples": self.triples,
            "recovered": self.recovered,
            "lossless": self.lossless,
            "recovery_rate": round(self.recovery_rate, 6),
            "lossless_fraction": round(self.lossless_fraction, 6),
        }


@dataclass
class CoverageReport:
    classes: dict[str, ClassCoverage] = field(default_factory=lambda: {c: ClassCoverage() for c in CLASSES})
    micro: MicroScore = field(default_factory=MicroScore)
    diagnostics: Counter = field(default_factory=Counter)
    antiparallel_sentences: int = 0
    sentences: int = 0

    def add(self, outcome: SentenceOutcome) -> None:
        self.sentences += 1
        for name in outcome.classes:
            cov = self.classes[name]
            cov.sentences += 1
            cov.triples += len(outcome.gold)
            cov.recovered += outcome.recovered
            cov.lossless += outcome.lossless
        self.micro.add(outcome.predicted, outcome.gold)
        self.diagnostics.update(outcome.diagnostics)
        self.antiparallel_sentences += outcome.antiparallel

    def merge(self, other: "CoverageReport") -> "CoverageReport":
        for name, cov in other.classes.items():
            mine = self.classes[name]
            mine.sentences += cov.sentences
            mine.triples += cov.triples
            mine.recovered += cov.recovered
            mine.lossless += cov.lossless
        self.micro.merge(other.micro)
        self.diagnostics.update(other.diagnostics)
        self.antiparallel_sentences += other.antiparallel_sentences
        self.sentences += other.sentences
        return self

    def to_json(self) -> dict:
        return {
            "sentences": self.sentences,
            "classes": {name: cov.to_json() for name, cov in self.classes.items()},
            "micro": self.micro.to_json(),
            "antiparallel_sentences": self.antiparallel_sentences,
            "diagnostics": dict(sorted(self.diagnostics.items())),
        }

    def table(self) -> str:
        header = f"{'Class':<8} {'Sents':>8} {'Triples':>8} {'Recov':>8} {'Rate':>7} {'Lossless':>9}"
        lines = [header]
        for name, cov in self.classes.items():
            lines.append(
                f"{name:<8} {cov.sentences:>8} {cov.triples:>8} {cov.recovered:>8} "
                f"{cov.recovery_rate:>7.4f} {cov.lossless_fraction:>9.4f}"
            )
        p, r, f1 = self.micro.prf()
        lines.append(f"micro P={p:.4f} R={r:.4f} F1={f1:.4f} over {self.sentences} sentences")
        return "\n".join(lines)


def roundtrip_report(
    sentences: Iterable[AnnotatedSentence],
    parent_rule: str = "earliest",
    mode: str = "strict",
    directions: Sequence[Direction] = (Direction.FORWARD, Direction.BACKWARD),
) -> CoverageReport:
    report = CoverageReport()
    for sentence in sentences:
        report.add(roundtrip_sentence(sentence, parent_rule, mode, directions))
    return report
