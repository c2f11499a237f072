"""Triples to bidirectional tree tags.

Each relation group is turned into a forest over entity occurrences (once
scanning left to right, once right to left), the forest into a binary tree by
the left-child/right-sibling rule, and the tree into one tag per word.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Optional, Sequence

from .model import (
    O,
    AnnotatedSentence,
    BiTTEncoding,
    BiTTTag,
    BinaryRelationTree,
    Direction,
    EncodingError,
    Occurrence,
    RelationForest,
    TagSequence,
    Triple,
)

PARENT_RULES = ("earliest", "nearest")


def first_positions(sentence: AnnotatedSentence) -> dict[str, int]:
    """Begin index of the first mention of every locatable entity."""
    positions = {}
    for entity in sentence.entities():
        try:
            positions[entity] = min(m.begin for m in sentence.spans_of(entity))
        except EncodingError:
            continue
    return positions


def group_by_relation(
    triples: Iterable[Triple], positions: Optional[Mapping[str, int]] = None
) -> list[tuple[str, tuple[Triple, ...]]]:
    """Partition triples by relation label.

    Triples are ordered by (head position, tail position) with the triple
    itself as tie-break; groups come out in order of first appearance.
    Without ``positions`` the order is lexicographic.
    """
    triples = set(triples)
    if not triples:
        raise ValueError("cannot group an empty triple set")
    positions = positions or {}
    inf = float("inf")

    def key(t: Triple):
        return (positions.get(t.head, inf), positions.get(t.tail, inf), t)

    groups: dict[str, list[Triple]] = {}
    for t in sorted(triples, key=key):
        groups.setdefault(t.relation, []).append(t)
    return [(rel, tuple(ts)) for rel, ts in groups.items()]


def locate_occurrences(
    sentence: AnnotatedSentence, group: Iterable[Triple], direction=Direction.FORWARD
) -> list[Occurrence]:
    """Every mention of every entity in ``group``, sorted for ``direction``.

    Raises EntityNotFound for an unlocatable entity and EncodingError when two
    mentions in the group overlap.
    """
    entities = sorted({e for t in group for e in (t.head, t.tail)})
    occurrences = []
    for entity in entities:
        for span in sentence.spans_of(entity):
            occurrences.append(Occurrence(entity, span.begin, span.end))
    occurrences.sort(key=lambda o: (o.begin, o.end))
    for a, b in zip(occurrences, occurrences[1:]):
        if b.begin < a.end:
            raise EncodingError(
                f"overlapping mentions {a.entity!r}[{a.begin}:{a.end}] and "
                f"{b.entity!r}[{b.begin}:{b.end}] in sentence {sentence.id!r}"
            )
    if Direction(direction) is Direction.BACKWARD:
        occurrences.reverse()
    return occurrences


def _role_table(group: Iterable[Triple]) -> dict[tuple[str, str], int]:
    """``table[(parent, child)]`` = child's role for an edge parent -> child.

    The triple whose head is the parent wins when both directions exist.
    """
    table: dict[tuple[str, str], int] = {}
    for t in group:
        table.setdefault((t.tail, t.head), 1)
    for t in group:
        table[(t.head, t.tail)] = 2
    return table


def build_forest(
    occurrences: Sequence[Occurrence],
    group: Iterable[Triple],
    direction=Direction.FORWARD,
    parent_rule: str = "earliest",
) -> RelationForest:
    """Greedy relation forest over ``occurrences`` (already in scan order).

    A tree is seeded with the first unattached occurrence; one scan over the
    rest attaches every occurrence related to a node already in the tree.
    ``parent_rule`` picks the parent among eligible nodes: the earliest added
    or the nearest in scan order (which is the latest added).
    """
    if parent_rule not in PARENT_RULES:
        raise ValueError(f"unknown parent rule {parent_rule!r}")
    roles = _role_table(group)
    nearest = parent_rule == "nearest"
    links: dict[int, tuple[int, int]] = {}
    roots = []
    remaining = list(range(len(occurrences)))
    while remaining:
        root = remaining[0]
        roots.append(root)
        tree = [root]
        rest = []
        for i in remaining[1:]:
            entity = occurrences[i].entity
            candidates = reversed(tree) if nearest else tree
            for node in candidates:
                role = roles.get((occurrences[node].entity, entity))
                if role is not None:
                    links[i] = (node, role)
                    tree.append(i)
                    break
            else:
                rest.append(i)
        remaining = rest
    return RelationForest.from_links(direction, occurrences, links, roots)


def forest_to_binary(forest: RelationForest) -> BinaryRelationTree:
    n = len(forest)
    left: list[Optional[int]] = [None] * n
    right: list[Optional[int]] = [None] * n
    brother = [False] * n
    for prev, nxt in zip(forest.roots, forest.roots[1:]):
        right[prev] = nxt
        brother[nxt] = True
    for i, kids in enumerate(forest.children):
        if kids:
            left[i] = kids[0]
            for prev, nxt in zip(kids, kids[1:]):
                right[prev] = nxt
    root = forest.roots[0] if forest.roots else None
    return BinaryRelationTree(
        forest.direction, forest.nodes, root, tuple(left), tuple(right), forest.role, tuple(brother)
    )


def tree_to_tags(tree: BinaryRelationTree, sentence_length: int, relation: str = "") -> TagSequence:
    tags: list[BiTTTag] = [O] * sentence_length
    for i, node in enumerate(tree.nodes):
        if node.end > sentence_length or node.begin < 0:
            raise EncodingError(f"span [{node.begin}:{node.end}] outside sentence of length {sentence_length}")
        if any(not tags[k].is_outside for k in range(node.begin, node.end)):
            raise EncodingError(f"span collision at [{node.begin}:{node.end}] for {node.entity!r}")
        p2, p3, p4 = tree.node_parts(i)
        width = node.end - node.begin
        for k in range(node.begin, node.end):
            if width == 1:
                p1 = "S"
            elif k == node.begin:
                p1 = "B"
            elif k == node.end - 1:
                p1 = "E"
            else:
                p1 = "I"
            tags[k] = BiTTTag(p1, p2, p3, p4)
    return TagSequence(relation, tree.direction, tuple(tags))


def encode_group(
    sentence: AnnotatedSentence,
    relation: str,
    group: Sequence[Triple],
    direction=Direction.FORWARD,
    parent_rule: str = "earliest",
) -> TagSequence:
    occurrences = locate_occurrences(sentence, group, direction)
    forest = build_forest(occurrences, group, direction, parent_rule)
    return tree_to_tags(forest_to_binary(forest), len(sentence), relation)


def encode_sentence(
    sentence: AnnotatedSentence,
    directions: Sequence[Direction] = (Direction.FORWARD, Direction.BACKWARD),
    parent_rule: str = "earliest",
) -> BiTTEncoding:
    """Tag sequences for every relation group of ``sentence``.

    A group that cannot be encoded is left out of ``groups`` and its error
    message recorded under ``failed``.
    """
    groups: dict[str, dict[Direction, TagSequence]] = {}
    failed: dict[str, str] = {}
    if sentence.triples:
        for relation, group in group_by_relation(sentence.triples, first_positions(sentence)):
            try:
                groups[relation] = {
                    Direction(d): encode_group(sentence, relation, group, d, parent_rule) for d in directions
                }
            except EncodingError as exc:
                failed[relation] = str(exc)
    return BiTTEncoding(sentence.id, tuple(sentence.words), groups, failed, sentence.joiner)
