"""Relation graphs and the EPO / ELS / ILS sentence taxonomy."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from typing import Iterable

from .model import AnnotatedSentence, OverlapFlags, Triple

logger = logging.getLogger(__name__)


class UnionFind:
    """Disjoint sets over hashable items with path halving."""

    def __init__(self):
        self._parent: dict = {}

    def find(self, x):
        parent = self._parent
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a, b) -> bool:
        """Merge the sets of ``a`` and ``b``; False if they were already one set."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self._parent[ra] = rb
        return True


@dataclass(frozen=True)
class RelationGraph:
    """Undirected simple graph of entity pairs with per-pair triple counts.

    A self-loop triple contributes the one-element pair ``frozenset({e})``.
    """

    vertices: frozenset[str]
    multiplicity: dict[frozenset, int]

    @property
    def edges(self) -> list[frozenset]:
        return list(self.multiplicity)

    def degree(self, vertex: str) -> int:
        return sum(1 for pair in self.multiplicity if vertex in pair)

    def has_cycle(self) -> bool:
        uf = UnionFind()
        for pair in self.multiplicity:
            if len(pair) == 1:
                return True
            a, b = pair
            if not uf.union(a, b):
                return True
        return False


def build_relation_graph(triples: Iterable[Triple]) -> RelationGraph:
    mult: Counter = Counter()
    for t in set(triples):
        mult[frozenset((t.head, t.tail))] += 1
    if not mult:
        raise ValueError("relation graph needs at least one triple")
    vertices = frozenset(e for pair in mult for e in pair)
    return RelationGraph(vertices, dict(mult))


def classify_triples(triples: Iterable[Triple], sentence_id: str = "") -> OverlapFlags:
    graph = build_relation_graph(triples)
    epo = any(m >= 2 for m in graph.multiplicity.values())

    # SEO: two distinct entity sets that share an entity
    seen: Counter = Counter()
    for pair in graph.multiplicity:
        seen.update(pair)
    seo = any(c >= 2 for c in seen.values())

    if any(len(pair) == 1 for pair in graph.multiplicity):
        logger.debug("self-loop triple in sentence %r", sentence_id)

    ils = seo and graph.has_cycle()
    return OverlapFlags(epo=epo, els=seo and not ils, ils=ils)


def classify(sentence: AnnotatedSentence) -> OverlapFlags:
    if not sentence.triples:
        raise ValueError(f"sentence {sentence.id!r} has no triples to classify")
    return classify_triples(sentence.triples, sentence.id)
