import itertools
from collections import Counter

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from bitt.decode import (
    Span,
    binary_to_forest,
    decode_sentence,
    spans_from_tags,
    tags_to_tree,
)
from bitt.encode import encode_sentence
from bitt.evalgen import SynthConfig, generate_synthetic
from bitt.model import (
    BiTTEncoding,
    BinaryRelationTree,
    Direction,
    Occurrence,
    TagSequence,
    Triple,
    enumerate_tags,
    parse_tag,
)

from conftest import WORKED_TRIPLES, sentence

F, B = Direction.FORWARD, Direction.BACKWARD


def tags(*texts):
    return [parse_tag(t) for t in texts]


def roundtrip(s, **kw):
    return decode_sentence(encode_sentence(s), **kw)


def test_spans_strict():
    got = spans_from_tags(tags("B-RT-1-N", "E-RT-1-N", "O", "S-L2-N-N"))
    assert got == [Span(0, 2, "RT", "1", "N"), Span(3, 4, "L2", "N", "N")]


def test_spans_strict_drops_broken_runs():
    diag = Counter()
    got = spans_from_tags(tags("B-RT-1-N", "O", "I-L2-N-N", "E-L2-N-N", "B-L2-N-N", "E-L1-N-N"), diagnostics=diag)
    assert got == []
    assert diag["malformed_run"] == 4


def test_spans_lenient_votes_and_keeps_dangling():
    got = spans_from_tags(tags("B-L2-N-N", "I-L1-N-N", "E-L2-N-N", "O", "E-RT-1-N"), mode="lenient")
    assert got == [Span(0, 3, "L2", "N", "N"), Span(4, 5, "RT", "1", "N")]


def test_spans_lenient_closes_unterminated_run():
    got = spans_from_tags(tags("B-RT-1-N", "I-RT-1-N"), mode="lenient")
    assert got == [Span(0, 2, "RT", "1", "N")]


def test_unknown_mode():
    with pytest.raises(ValueError):
        spans_from_tags([], mode="fuzzy")


def test_worked_example_roundtrip(worked):
    assert roundtrip(worked) == WORKED_TRIPLES


def test_worked_example_forward_tree(worked):
    seq = encode_sentence(worked).groups["Contains"][F]
    tree = tags_to_tree(seq, tokens=worked.words)
    name = lambda i: tree.nodes[i].entity
    assert name(tree.root) == "The White House"
    assert name(tree.left[tree.root]) == "Washington"
    assert name(tree.right[tree.left[tree.root]]) == "America"


def test_each_direction_alone(worked):
    enc = encode_sentence(worked)
    assert decode_sentence(enc, directions=(F,)) == WORKED_TRIPLES - {Triple("America", "Contains", "Washington")}
    assert decode_sentence(enc, directions=(B,)) == WORKED_TRIPLES - {
        Triple("Washington", "Contains", "The White House")
    }


def _seq(direction, *texts):
    return TagSequence("r", direction, tuple(tags(*texts)))


def test_missing_root_strict_and_lenient():
    seq = _seq(F, "S-L2-N-N", "S-L1-N-N")
    diag = Counter()
    assert tags_to_tree(seq, diagnostics=diag).root is None
    assert diag["missing_root"] == 1 and diag["unclaimed_span"] == 2
    diag = Counter()
    assert tags_to_tree(seq, mode="lenient", diagnostics=diag).root == 0
    assert diag["promoted_root"] == 1


def test_extra_root_counted():
    diag = Counter()
    tree = tags_to_tree(_seq(F, "S-RT-1-N", "S-L2-N-N", "S-RT-N-N"), diagnostics=diag)
    assert diag["extra_root"] == 1 and diag["unclaimed_span"] == 1
    assert len(tree.nodes) == 2


def test_unresolved_slot_counted():
    diag = Counter()
    tags_to_tree(_seq(F, "S-RT-1-N", "O"), diagnostics=diag)
    assert diag["unresolved_slot"] == 1


def test_backward_claims_to_the_left():
    seq = _seq(B, "S-L1-N-N", "O", "S-RT-2-N")
    assert decode_sentence(BiTTEncoding("x", ("A", "x", "B"), {"r": {B: seq}})) == {Triple("A", "r", "B")}


def test_length_mismatch_skipped():
    enc = BiTTEncoding("x", ("A", "B"), {"r": {F: _seq(F, "S-RT-1-N")}})
    diag = Counter()
    assert decode_sentence(enc, diagnostics=diag) == set()
    assert diag["length_mismatch"] == 1


def test_orphan_right_edges():
    nodes = tuple(Occurrence(x, i, i + 1) for i, x in enumerate("abc"))
    # root's right child lacks the brother flag
    tree = BinaryRelationTree(F, nodes, 0, (None, None, None), (1, None, None), (None, 1, None), (False, False, False))
    diag = Counter()
    forest = binary_to_forest(tree, diag)
    assert list(forest.roots) == [0, 1]
    assert diag["orphan_right_edge"] == 1


def test_antiparallel_pair_alone_roundtrips():
    s = sentence("A x B", [("A", "r", "B"), ("B", "r", "A")])
    assert roundtrip(s) == s.triples


def test_epo_groups_roundtrip():
    s = sentence("T x B", [("T", r, "B") for r in ("adm", "cap", "con")] + [("B", "cty", "T")])
    assert roundtrip(s) == s.triples


def test_known_tag_collision():
    # two different triple sets share both tag columns, so one of them cannot round-trip
    words = "e0 e1 e2 e3"
    a = sentence(words, [("e0", "r", "e3"), ("e1", "r", "e2")])
    b = sentence(words, [("e0", "r", "e2"), ("e1", "r", "e3")])
    assert encode_sentence(a).to_json()["groups"] == encode_sentence(b).to_json()["groups"]
    assert roundtrip(a) != a.triples or roundtrip(b) != b.triples


def test_antiparallel_next_to_third_entity_is_lossy():
    # backward scan attaches B under C, so (B, r, A) is never encoded
    s = sentence("A B C", [("A", "r", "B"), ("A", "r", "C"), ("B", "r", "A")])
    assert roundtrip(s) == s.triples - {Triple("B", "r", "A")}


def _three_entity_forests(label="r"):
    # one or two of the three pairs, every orientation; never a cycle
    pairs = list(itertools.combinations("ABC", 2))
    for k in (1, 2):
        for chosen in itertools.combinations(pairs, k):
            for flips in itertools.product((False, True), repeat=k):
                yield [(b, label, a) if f else (a, label, b) for (a, b), f in zip(chosen, flips)]


@pytest.mark.parametrize("order", list(itertools.permutations("ABC")))
def test_small_forests_roundtrip_exactly(order):
    words = " ".join(order)
    for triples in _three_entity_forests():
        s = sentence(words, triples)
        assert roundtrip(s) == s.triples, triples


@pytest.mark.parametrize("orient", list(itertools.product((False, True), repeat=3)))
def test_triangles_roundtrip(orient):
    pairs = [("A", "B"), ("A", "C"), ("B", "C")]
    triples = [(b, "r", a) if f else (a, "r", b) for (a, b), f in zip(pairs, orient)]
    for order in itertools.permutations("ABC"):
        s = sentence(" x ".join(order), triples)
        assert roundtrip(s) == s.triples


@settings(max_examples=300, deadline=None)
@given(st.integers(2, 9), st.data())
def test_stars_roundtrip(n, data):
    center = data.draw(st.integers(0, n - 1))
    heads = data.draw(st.lists(st.booleans(), min_size=n, max_size=n))
    words = [f"e{i}" for i in range(n)]
    triples = [
        (words[center], "r", words[i]) if heads[i] else (words[i], "r", words[center])
        for i in range(n)
        if i != center
    ]
    s = sentence(words, triples)
    assert roundtrip(s) == s.triples


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.booleans(), st.sampled_from("rq")), min_size=1, max_size=5))
def test_consecutive_pairs_roundtrip(pairs):
    words = [f"e{i}" for i in range(2 * len(pairs))]
    triples = []
    for i, (flip, rel) in enumerate(pairs):
        a, b = words[2 * i], words[2 * i + 1]
        triples.append((b, rel, a) if flip else (a, rel, b))
    s = sentence(words, triples)
    assert roundtrip(s) == s.triples


synth = st.builds(
    SynthConfig,
    entities=st.integers(1, 7),
    relation_labels=st.integers(1, 3),
    edge_density=st.floats(0.0, 1.0),
    acyclic=st.just(False),
    antiparallel_prob=st.floats(0.0, 0.5),
    seed=st.integers(0, 2**32),
)


@settings(max_examples=300, deadline=None)
@given(synth, st.sampled_from(["strict", "lenient"]))
def test_decoded_triples_stay_inside_their_group(config, mode):
    s = generate_synthetic(config)
    for t in roundtrip(s, mode=mode):
        group = {e for g in s.triples if g.relation == t.relation for e in (g.head, g.tail)}
        assert t.head in group and t.tail in group and t.head != t.tail


@settings(max_examples=300, deadline=None)
@given(synth)
def test_gold_tags_decode_without_diagnostics(config):
    s = generate_synthetic(config)
    diag = Counter()
    roundtrip(s, diagnostics=diag)
    assert not diag


ALL_TAGS = enumerate_tags()


@settings(max_examples=300, deadline=None)
@given(
    st.lists(st.sampled_from(ALL_TAGS), min_size=1, max_size=10),
    st.sampled_from(list(Direction)),
    st.sampled_from(["strict", "lenient"]),
)
def test_arbitrary_tags_never_crash(column, direction, mode):
    tokens = tuple(f"w{i}" for i in range(len(column)))
    enc = BiTTEncoding("x", tokens, {"r": {direction: TagSequence("r", direction, tuple(column))}})
    for t in decode_sentence(enc, mode=mode):
        assert t.relation == "r"
