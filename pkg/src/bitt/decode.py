"""Tags back to triples: spans, binary tree, forest, triples."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Optional

from .model import (
    BROTHER,
    NULL,
    ROOT,
    BiTTEncoding,
    BiTTTag,
    BinaryRelationTree,
    Direction,
    Occurrence,
    RelationForest,
    TagSequence,
    Triple,
    complement,
)

MODES = ("strict", "lenient")


@dataclass(frozen=True)
class Span:
    begin: int
    end: int
    p2: str
    p3: str
    p4: str


def _note(diagnostics: Optional[Counter], code: str, n: int = 1) -> None:
    if diagnostics is not None and n:
        diagnostics[code] += n


def _vote(run: list[BiTTTag]) -> tuple[str, str, str]:
    # Counter.most_common is stable, so ties go to the first word
    return tuple(Counter(part).most_common(1)[0][0] for part in zip(*(t.structure for t in run)))


def spans_from_tags(
    tags: Iterable[BiTTTag], mode: str = "strict", diagnostics: Optional[Counter] = None
) -> list[Span]:
    """Entity spans of a tag column.

    Strict mode keeps only ``S`` and ``B I* E`` runs whose words agree on
    (p2, p3, p4); anything else is counted as ``malformed_run``. Lenient mode
    closes every run it can, votes on the parts, and keeps dangling I/E words.
    """
    if mode not in MODES:
        raise ValueError(f"unknown decoding mode {mode!r}")
    tags = list(tags)
    strict = mode == "strict"
    spans: list[Span] = []
    run: list[BiTTTag] = []
    start = 0

    def close(end: int, complete: bool) -> None:
        nonlocal run
        if not run:
            return
        if strict:
            if complete and all(t.structure == run[0].structure for t in run):
                spans.append(Span(start, end, *run[0].structure))
            else:
                _note(diagnostics, "malformed_run")
        else:
            spans.append(Span(start, end, *_vote(run)))
        run = []

    for k, tag in enumerate(tags):
        p1 = tag.p1
        if p1 in ("I", "E") and run:
            run.append(tag)
            if p1 == "E":
                close(k + 1, True)
            continue
        close(k, False)
        if p1 is None:
            continue
        start = k
        run = [tag]
        if p1 == "S":
            close(k + 1, True)
        elif p1 == "E":
            # dangling E
            close(k + 1, False)
        elif p1 == "I" and strict:
            close(k + 1, False)
    close(len(tags), False)
    return spans


def tags_to_tree(
    seq: TagSequence,
    mode: str = "strict",
    diagnostics: Optional[Counter] = None,
    tokens: Optional[list[str]] = None,
    joiner: str = " ",
) -> BinaryRelationTree:
    """Rebuild the binary tree of one tag sequence.

    Starting at the root, each open slot claims the nearest unclaimed span
    later in scan order whose p2 carries the slot's side and the complementary
    role (or ``BR`` for a brother slot). Scan order is left to right for
    forward tags and right to left for backward tags.
    """
    direction = Direction(seq.direction)
    spans = spans_from_tags(seq.tags, mode, diagnostics)
    if direction is Direction.BACKWARD:
        spans.reverse()
    n = len(spans)

    def entity(s: Span) -> str:
        if tokens is None:
            return f"[{s.begin}:{s.end}]"
        return joiner.join(tokens[s.begin:s.end])

    nodes = tuple(Occurrence(entity(s), s.begin, s.end) for s in spans)
    left: list[Optional[int]] = [None] * n
    right: list[Optional[int]] = [None] * n
    role: list[Optional[int]] = [None] * n
    brother = [False] * n

    roots = [i for i, s in enumerate(spans) if s.p2 == ROOT]
    if len(roots) > 1:
        _note(diagnostics, "extra_root", len(roots) - 1)
    if roots:
        root = roots[0]
    elif n and mode == "lenient":
        root = 0
        _note(diagnostics, "promoted_root")
    else:
        if n:
            _note(diagnostics, "missing_root")
            _note(diagnostics, "unclaimed_span", n)
        return BinaryRelationTree(direction, nodes, None, (), (), (), ())

    claimed = [False] * n
    claimed[root] = True

    def claim(parent: int, wanted: str) -> Optional[int]:
        for j in range(parent + 1, n):
            if not claimed[j] and spans[j].p2 == wanted:
                claimed[j] = True
                return j
        _note(diagnostics, "unresolved_slot")
        return None

    # depth first; a node's right slot and the whole subtree hanging from it
    # are resolved before its left slot
    stack = [(root, "R")]
    while stack:
        i, slot = stack.pop()
        span = spans[i]
        if slot == "R":
            stack.append((i, "L"))
            if span.p4 == NULL:
                continue
            is_brother = span.p4 == BROTHER
            child = claim(i, BROTHER if is_brother else "R" + str(complement(int(span.p4))))
            if child is not None:
                right[i] = child
                brother[child] = is_brother
                if not is_brother:
                    role[child] = int(spans[child].p2[1])
                stack.append((child, "R"))
        elif span.p3 != NULL:
            child = claim(i, "L" + str(complement(int(span.p3))))
            if child is not None:
                left[i] = child
                role[child] = int(spans[child].p2[1])
                stack.append((child, "R"))

    _note(diagnostics, "unclaimed_span", claimed.count(False))
    keep = [i for i in range(n) if claimed[i]]
    if len(keep) < n:
        remap = {old: new for new, old in enumerate(keep)}

        def r(x):
            return None if x is None else remap[x]

        nodes = tuple(nodes[i] for i in keep)
        left = [r(left[i]) for i in keep]
        right = [r(right[i]) for i in keep]
        role = [role[i] for i in keep]
        brother = [brother[i] for i in keep]
        root = remap[root]
    return BinaryRelationTree(direction, nodes, root, tuple(left), tuple(right), tuple(role), tuple(brother))


def binary_to_forest(tree: BinaryRelationTree, diagnostics: Optional[Counter] = None) -> RelationForest:
    """Inverse left-child/right-sibling transform.

    A right edge that would make a sibling of a forest root without the
    brother annotation (or a brother edge below a non-root) is dropped; its
    child then starts a tree of its own.
    """
    links: dict[int, tuple[int, int]] = {}
    roots: list[int] = []
    if tree.root is None:
        return RelationForest.from_links(tree.direction, tree.nodes, links, roots)

    # (node, forest parent of node); children reached in left-then-right order
    stack = [(tree.root, None)]
    while stack:
        node, parent = stack.pop()
        if parent is None:
            roots.append(node)
        else:
            links[node] = (parent, tree.role[node])
        nxt = tree.right[node]
        if nxt is not None:
            if tree.brother[nxt] and parent is not None:
                _note(diagnostics, "orphan_right_edge")
                stack.append((nxt, None))
            elif not tree.brother[nxt] and parent is None:
                _note(diagnostics, "orphan_right_edge")
                stack.append((nxt, None))
            else:
                stack.append((nxt, parent))
        if tree.left[node] is not None:
            stack.append((tree.left[node], node))
    # the stack pops left subtrees first; restore sibling order by position in scan
    return RelationForest.from_links(tree.direction, tree.nodes, dict(sorted(links.items())), sorted(roots))


def forest_to_triples(forest: RelationForest, relation: str) -> set[Triple]:
    out = set()
    for parent, child, role in forest.edges():
        p, c = forest.nodes[parent].entity, forest.nodes[child].entity
        out.add(Triple(c, relation, p) if role == 1 else Triple(p, relation, c))
    return out


def decode_sequence(
    seq: TagSequence,
    tokens: list[str],
    joiner: str = " ",
    mode: str = "strict",
    diagnostics: Optional[Counter] = None,
) -> set[Triple]:
    tree = tags_to_tree(seq, mode, diagnostics, tokens, joiner)
    return forest_to_triples(binary_to_forest(tree, diagnostics), seq.relation)


def decode_sentence(
    encoding: BiTTEncoding,
    mode: str = "strict",
    diagnostics: Optional[Counter] = None,
    directions: Iterable[Direction] = (Direction.FORWARD, Direction.BACKWARD),
) -> set[Triple]:
    """Union of the triples decoded from every group and direction."""
    directions = {Direction(d) for d in directions}
    tokens = list(encoding.tokens)
    triples: set[Triple] = set()
    for relation, seqs in encoding.groups.items():
        for direction, seq in seqs.items():
            if direction not in directions:
                continue
            if len(seq) != len(tokens):
                _note(diagnostics, "length_mismatch")
                continue
            triples |= decode_sequence(seq, tokens, encoding.joiner, mode, diagnostics)
    return triples
