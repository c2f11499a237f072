"""Counted diagnostics with an optional structured log record per event."""

from __future__ import annotations

import json
import logging
from collections import Counter
from typing import Optional

logger = logging.getLogger("bitt")


class Diagnostics(Counter):
    """A Counter of diagnostic codes that can also log each event."""

    def emit(self, code: str, message: str, sentence_id: Optional[str] = None, level: int = logging.WARNING):
        self[code] += 1
        logger.log(level, message, extra={"code": code, "sentence_id": sentence_id})


class JsonLinesFormatter(logging.Formatter):
    """``{level, code, sentence_id?, message}`` per line."""

    def format(self, record: logging.LogRecord) -> str:
        obj = {"level": record.levelname.lower(), "code": getattr(record, "code", "log")}
        sentence_id = getattr(record, "sentence_id", None)
        if sentence_id is not None:
            obj["sentence_id"] = sentence_id
        obj["message"] = record.getMessage()
        return json.dumps(obj, ensure_ascii=False)
