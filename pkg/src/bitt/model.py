"""Shared domain types and the tag grammar.

A tag is either ``O`` or four hyphen-joined parts ``P1-P2-P3-P4``:

* ``P1`` span position: ``B``, ``I``, ``E``, ``S``
* ``P2`` edge to the binary parent: ``RT`` (root), ``BR`` (brother) or a side
  (``L``/``R``) followed by the node's own role (``1`` head, ``2`` tail)
* ``P3`` parent-side role toward the left child, or ``N``
* ``P4`` parent-side role toward the right child, ``BR``, or ``N``
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple, Optional

P1_VALUES = ("B", "I", "E", "S")
P2_VALUES = ("RT", "BR", "L1", "L2", "R1", "R2")
P3_VALUES = ("N", "1", "2")
P4_VALUES = ("N", "BR", "1", "2")

OUTSIDE = "O"
PAD = "<pad>"

ROOT = "RT"
BROTHER = "BR"
NULL = "N"


class TagParseError(ValueError):
    """Raised for a tag string that does not follow the grammar."""


class EncodingError(ValueError):
    """A relation group cannot be expressed as tag sequences."""


class EntityNotFound(EncodingError):
    def __init__(self, entity: str, sentence_id: str = ""):
        super().__init__(f"entity {entity!r} not found in tokens of sentence {sentence_id!r}")
        self.entity = entity
        self.sentence_id = sentence_id


class Direction(str, enum.Enum):
    FORWARD = "forward"
    BACKWARD = "backward"

    def __str__(self) -> str:
        return self.value


def complement(role: int) -> int:
    """Return the other role of a binary relation (1 <-> 2)."""
    return 3 - role


class Triple(NamedTuple):
    head: str
    relation: str
    tail: str

    def as_dict(self) -> dict:
        return {"head": self.head, "relation": self.relation, "tail": self.tail}


@dataclass(frozen=True)
class Token:
    text: str
    index: int

    def __post_init__(self):
        if not self.text:
            raise ValueError(f"empty token at index {self.index}")


@dataclass(frozen=True)
class MentionSpan:
    entity: str
    begin: int
    end: int

    def overlaps(self, other: "MentionSpan") -> bool:
        return self.begin < other.end and other.begin < self.end


@dataclass(frozen=True)
class OverlapFlags:
    epo: bool = False
    els: bool = False
    ils: bool = False

    def __post_init__(self):
        if self.els and self.ils:
            raise ValueError("a sentence cannot be both ELS and ILS")

    @property
    def normal(self) -> bool:
        return not (self.epo or self.els or self.ils)

    def classes(self) -> list[str]:
        """Names of every class the sentence belongs to."""
        if self.normal:
            return ["Normal"]
        return [name for name, flag in (("EPO", self.epo), ("ELS", self.els), ("ILS", self.ils)) if flag]


@dataclass(frozen=True)
class AnnotatedSentence:
    id: str
    tokens: tuple[Token, ...]
    triples: frozenset[Triple]
    mentions: Optional[tuple[MentionSpan, ...]] = None
    joiner: str = " "

    @classmethod
    def build(
        cls,
        id: str,
        words: Iterable[str],
        triples: Iterable[Triple | tuple],
        mentions: Optional[Iterable[MentionSpan]] = None,
        joiner: str = " ",
    ) -> "AnnotatedSentence":
        tokens = tuple(Token(w, i) for i, w in enumerate(words))
        triples = frozenset(Triple(*t) for t in triples)
        for t in triples:
            if not t.head or not t.tail:
                raise ValueError(f"triple with empty entity: {t}")
        if mentions is not None:
            mentions = tuple(mentions)
            for m in mentions:
                if not 0 <= m.begin < m.end <= len(tokens):
                    raise ValueError(f"mention {m} out of range for {len(tokens)} tokens")
                text = joiner.join(tok.text for tok in tokens[m.begin:m.end])
                if text != m.entity:
                    raise ValueError(f"mention {m} covers {text!r}, not {m.entity!r}")
        return cls(id, tokens, triples, mentions, joiner)

    @property
    def words(self) -> list[str]:
        return [t.text for t in self.tokens]

    def __len__(self) -> int:
        return len(self.tokens)

    def entities(self) -> set[str]:
        return {e for t in self.triples for e in (t.head, t.tail)}

    def spans_of(self, entity: str) -> list[MentionSpan]:
        """All mention spans of ``entity``, from explicit mentions or by token search."""
        if self.mentions is not None:
            spans = [m for m in self.mentions if m.entity == entity]
        else:
            spans = find_mentions(self.words, entity, self.joiner)
        if not spans:
            raise EntityNotFound(entity, self.id)
        return spans


def find_mentions(words: list[str], entity: str, joiner: str = " ") -> list[MentionSpan]:
    """Non-overlapping token runs whose joined text equals ``entity``, left to right."""
    found = []
    i = 0
    n = len(words)
    while i < n:
        if entity.startswith(words[i]):
            text = words[i]
            j = i + 1
            while len(text) < len(entity) and j < n:
                text = text + joiner + words[j]
                j += 1
            if text == entity:
                found.append(MentionSpan(entity, i, j))
                i = j
                continue
        i += 1
    return found


@dataclass(frozen=True)
class BiTTTag:
    """One word's tag. All four parts are ``None`` for the outside tag."""

    p1: Optional[str] = None
    p2: Optional[str] = None
    p3: Optional[str] = None
    p4: Optional[str] = None

    def __post_init__(self):
        parts = (self.p1, self.p2, self.p3, self.p4)
        if all(p is None for p in parts):
            return
        for name, value, alphabet in zip(("P1", "P2", "P3", "P4"), parts, PART_ALPHABETS):
            if value not in alphabet:
                raise TagParseError(f"{name} value {value!r} not in {alphabet}")

    @property
    def is_outside(self) -> bool:
        return self.p1 is None

    @property
    def structure(self) -> tuple[str, str, str]:
        """The (p2, p3, p4) parts shared by every word of an entity."""
        return (self.p2, self.p3, self.p4)

    def with_position(self, p1: str) -> "BiTTTag":
        return BiTTTag(p1, self.p2, self.p3, self.p4)

    def __str__(self) -> str:
        return render_tag(self)


PART_ALPHABETS = (P1_VALUES, P2_VALUES, P3_VALUES, P4_VALUES)
O = BiTTTag()


def parse_tag(text: str) -> BiTTTag:
    if text == OUTSIDE:
        return O
    parts = text.split("-")
    if len(parts) != 4:
        raise TagParseError(f"tag {text!r} must have 4 parts, got {len(parts)}")
    for name, value, alphabet in zip(("P1", "P2", "P3", "P4"), parts, PART_ALPHABETS):
        if value not in alphabet:
            raise TagParseError(f"tag {text!r}: {name} value {value!r} not in {'/'.join(alphabet)}")
    return BiTTTag(*parts)


def render_tag(tag: BiTTTag) -> str:
    if tag.is_outside:
        return OUTSIDE
    return f"{tag.p1}-{tag.p2}-{tag.p3}-{tag.p4}"


def is_structurally_valid(tag: BiTTTag) -> bool:
    """Whether a tag can occur in an encoder output.

    Only roots (``RT``) and brother-linked roots (``BR``) may have a brother
    as right child, and a root's right child is never a role-bearing sibling.
    """
    if tag.is_outside:
        return True
    if tag.p2 in (ROOT, BROTHER):
        return tag.p4 in (NULL, BROTHER)
    return tag.p4 != BROTHER


def enumerate_tags() -> list[BiTTTag]:
    """Every structurally valid tag, ``O`` first."""
    tags = [O]
    for parts in itertools.product(*PART_ALPHABETS):
        tag = BiTTTag(*parts)
        if is_structurally_valid(tag):
            tags.append(tag)
    return tags


def part_inventories(tags: Optional[Iterable[BiTTTag]] = None) -> list[list[str]]:
    """Per-part label inventories for a sequence labeller: seen values plus O and PAD."""
    if tags is None:
        tags = enumerate_tags()
    inventories: list[list[str]] = [[], [], [], []]
    for tag in tags:
        if tag.is_outside:
            continue
        for inv, value in zip(inventories, (tag.p1, tag.p2, tag.p3, tag.p4)):
            if value not in inv:
                inv.append(value)
    return [inv + [OUTSIDE, PAD] for inv in inventories]


@dataclass(frozen=True)
class TagSequence:
    relation: str
    direction: Direction
    tags: tuple[BiTTTag, ...]

    def __len__(self) -> int:
        return len(self.tags)

    def rendered(self) -> list[str]:
        return [render_tag(t) for t in self.tags]

    @classmethod
    def from_strings(cls, relation: str, direction, tags: Iterable[str]) -> "TagSequence":
        return cls(relation, Direction(direction), tuple(parse_tag(t) for t in tags))


def bies_well_formed(tags: Iterable[BiTTTag]) -> bool:
    """Finite-state check of the p1 column plus per-span structural agreement."""
    inside = False
    current = None
    roots = 0
    for tag in tags:
        p1 = tag.p1
        if inside:
            if p1 not in ("I", "E") or tag.structure != current:
                return False
            if p1 == "E":
                inside = False
            continue
        if p1 in ("I", "E"):
            return False
        if p1 in ("B", "S"):
            roots += tag.p2 == ROOT
            if p1 == "B":
                inside, current = True, tag.structure
    return not inside and roots <= 1


@dataclass(frozen=True)
class BiTTEncoding:
    id: str
    tokens: tuple[str, ...]
    groups: dict[str, dict[Direction, TagSequence]] = field(default_factory=dict)
    failed: dict[str, str] = field(default_factory=dict)
    joiner: str = " "

    @property
    def partial(self) -> bool:
        return bool(self.failed)

    def to_json(self) -> dict:
        obj: dict = {"id": self.id, "tokens": list(self.tokens)}
        if self.joiner != " ":
            obj["joiner"] = self.joiner
        obj["groups"] = {
            rel: {str(d): seq.rendered() for d, seq in seqs.items()} for rel, seqs in self.groups.items()
        }
        if self.failed:
            obj["failed"] = dict(self.failed)
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "BiTTEncoding":
        groups = {}
        for rel, seqs in obj.get("groups", {}).items():
            groups[rel] = {Direction(d): TagSequence.from_strings(rel, d, tags) for d, tags in seqs.items()}
        return cls(
            id=str(obj.get("id", "")),
            tokens=tuple(obj["tokens"]),
            groups=groups,
            failed=dict(obj.get("failed", {})),
            joiner=obj.get("joiner", " "),
        )


@dataclass(frozen=True)
class Occurrence:
    """An entity mention as a forest node."""

    entity: str
    begin: int
    end: int


@dataclass(frozen=True)
class RelationForest:
    """Ordered forest over entity occurrences.

    ``role[i]`` is node ``i``'s role in the triple it forms with ``parent[i]``
    (``None`` for roots). Children are listed in attachment order.
    """

    direction: Direction
    nodes: tuple[Occurrence, ...]
    parent: tuple[Optional[int], ...]
    role: tuple[Optional[int], ...]
    children: tuple[tuple[int, ...], ...]
    roots: tuple[int, ...]

    @classmethod
    def from_links(cls, direction, nodes, links: dict[int, tuple[int, int]], roots) -> "RelationForest":
        """Build from ``links[child] = (parent, child_role)``; children keep ``links`` order."""
        parent: list[Optional[int]] = [None] * len(nodes)
        role: list[Optional[int]] = [None] * len(nodes)
        children: list[list[int]] = [[] for _ in nodes]
        for child, (par, r) in links.items():
            parent[child] = par
            role[child] = r
            children[par].append(child)
        return cls(
            Direction(direction),
            tuple(nodes),
            tuple(parent),
            tuple(role),
            tuple(tuple(c) for c in children),
            tuple(roots),
        )

    def edges(self) -> list[tuple[int, int, int]]:
        """(parent, child, child_role) for every forest edge."""
        return [(p, c, self.role[c]) for c, p in enumerate(self.parent) if p is not None]

    def __len__(self) -> int:
        return len(self.nodes)


@dataclass(frozen=True)
class BinaryRelationTree:
    """Left-child/right-sibling form of a forest.

    ``role[i]`` is the node's own role toward its forest parent, ``None`` for
    the root and for brother-linked roots (``brother[i]`` is True for those).
    The parent-side role of every non-brother edge is ``complement(role[child])``.
    """

    direction: Direction
    nodes: tuple[Occurrence, ...]
    root: Optional[int]
    left: tuple[Optional[int], ...]
    right: tuple[Optional[int], ...]
    role: tuple[Optional[int], ...]
    brother: tuple[bool, ...]

    def edges(self) -> list[tuple[int, int, str]]:
        """(parent, child, side) with side ``"L"``, ``"R"`` or ``"BR"``."""
        out = []
        for i in range(len(self.nodes)):
            if self.left[i] is not None:
                out.append((i, self.left[i], "L"))
            r = self.right[i]
            if r is not None:
                out.append((i, r, BROTHER if self.brother[r] else "R"))
        return out

    def node_parts(self, i: int) -> tuple[str, str, str]:
        """The (p2, p3, p4) tag parts of node ``i``."""
        if i == self.root:
            p2 = ROOT
        elif self.brother[i]:
            p2 = BROTHER
        else:
            side = "L" if self._is_left_child(i) else "R"
            p2 = f"{side}{self.role[i]}"
        left = self.left[i]
        p3 = NULL if left is None else str(complement(self.role[left]))
        right = self.right[i]
        if right is None:
            p4 = NULL
        elif self.brother[right]:
            p4 = BROTHER
        else:
            p4 = str(complement(self.role[right]))
        return p2, p3, p4

    def _is_left_child(self, i: int) -> bool:
        return i in self._left_children

    @cached_property
    def _left_children(self) -> frozenset[int]:
        return frozenset(c for c in self.left if c is not None)

    def __len__(self) -> int:
        return len(self.nodes)
