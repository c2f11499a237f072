"""Bidirectional tree tagging (BiTT) for overlapping relational triples."""

from .decode import decode_sentence
from .encode import encode_sentence
from .model import (
    AnnotatedSentence,
    BiTTEncoding,
    BiTTTag,
    Direction,
    EncodingError,
    EntityNotFound,
    MentionSpan,
    OverlapFlags,
    TagSequence,
    Triple,
    parse_tag,
    render_tag,
)
from .overlap import classify

__all__ = [
    "AnnotatedSentence",
    "BiTTEncoding",
    "BiTTTag",
    "Direction",
    "EncodingError",
    "EntityNotFound",
    "MentionSpan",
    "OverlapFlags",
    "TagSequence",
    "Triple",
    "classify",
    "decode_sentence",
    "encode_sentence",
    "parse_tag",
    "render_tag",
]
