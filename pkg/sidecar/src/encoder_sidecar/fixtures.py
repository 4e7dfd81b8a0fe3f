"""Frozen fixture files: one encode response per sentence, keyed by content."""
from __future__ import annotations

import hashlib
import json
import logging
import unicodedata
from pathlib import Path

from .model import HiddenStateEncoder

logger = logging.getLogger(__name__)


def content_hash(text: str) -> str:
    return hashlib.sha256(
        unicodedata.normalize("NFC", text).encode("utf-8")).hexdigest()


def dump_fixtures(sentences_path: str | Path, lang: str, out_path: str | Path,
                  encoder: HiddenStateEncoder) -> int:
    """Encode each nonempty line of the sentences file into a fixture record.

    Returns the number of records written. Empty lines are skipped with a
    warning. Inference is deterministic, so re-running on the same model and
    sentences reproduces the file byte for byte.
    """
    sentences_path = Path(sentences_path)
    out_path = Path(out_path)
    written = 0
    with sentences_path.open(encoding="utf-8") as src, \
            out_path.open("w", encoding="utf-8") as out:
        for lineno, line in enumerate(src, start=1):
            sentence = line.rstrip("\n")
            if not sentence.strip():
                logger.warning("%s:%d: empty sentence skipped", sentences_path, lineno)
                continue
            payload = encoder.encode(lang, sentence)
            record = {"lang": lang, "sha256": content_hash(sentence),
                      "dim": payload["dim"], "tokens": payload["tokens"]}
            out.write(json.dumps(record, ensure_ascii=False) + "\n")
            written += 1
    return written
