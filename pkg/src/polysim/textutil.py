"""Unicode text helpers: content hashing, match normalization, word scanning."""
from __future__ import annotations

import hashlib
import unicodedata
from typing import Iterator


def nfc(text: str) -> str:
    return unicodedata.normalize("NFC", text)


def content_hash(text: str) -> str:
    """sha256 hex digest of the NFC-normalized text (cache / fixture keys)."""
    return hashlib.sha256(nfc(text).encode("utf-8")).hexdigest()


def match_normalize(text: str) -> str:
    """Casefold and strip diacritics, for matching only (surfaces keep their form)."""
    decomposed = unicodedata.normalize("NFD", text.casefold())
    stripped = "".join(ch for ch in decomposed if unicodedata.category(ch) != "Mn")
    return unicodedata.normalize("NFC", stripped)


def _is_word_char(ch: str) -> bool:
    # re's \w drops combining marks, which would split decomposed accents.
    return ch.isalnum() or ch == "_" or unicodedata.category(ch) == "Mn"


def iter_words(text: str) -> Iterator[tuple[int, int, str]]:
    """Yield (start, end, word) character spans of maximal word-character runs."""
    start = None
    for i, ch in enumerate(text):
        if _is_word_char(ch):
            if start is None:
                start = i
        elif start is not None:
            yield start, i, text[start:i]
            start = None
    if start is not None:
        yield start, len(text), text[start:]


def common_prefix_len(a: str, b: str) -> int:
    n = min(len(a), len(b))
    i = 0
    while i < n and a[i] == b[i]:
        i += 1
    return i
