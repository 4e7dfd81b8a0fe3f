"""Translation fan-out: engines, the response cache, and word alignment.

Every instance is rendered into each configured extra language, and the two
target words are located in the translated context by a three-rung ladder:

1. exact   - case/diacritic-normalized search for the isolated-word
             translation, honoring word boundaries (up to 3 consecutive
             tokens when the translation itself is multi-word);
2. fuzzy   - longest-common-prefix match (>= 4 chars, or >= 60% of the
             shorter string), extended to the word boundary;
3. marker  - the source word is wrapped in rare sentinel brackets, the marked
             sentence is re-translated, and the surviving brackets donate the
             target surface.

The first rung that succeeds wins and is recorded per word, so alignment
quality itself can be ablated. Total failure is an encoded outcome (method
"failed"), never an exception. All engine traffic goes through an append-only
cache keyed by (engine, src, tgt, sha256 of the NFC text); the fixture engine
never touches the network and errors on a cache miss.
"""
from __future__ import annotations

import json
import logging
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from .dataset import Instance, MarkedContext
from .errors import CacheIntegrityError, DataError, EngineError, FixtureMissError
from .textutil import common_prefix_len, content_hash, iter_words, match_normalize

logger = logging.getLogger(__name__)

FIXTURE_ENGINE = "fixture"
ENGINE_A = "engine-a"
ENGINE_B = "engine-b"

EXACT = "exact"
FUZZY = "fuzzy"
MARKER = "marker"
FAILED = "failed"

DEFAULT_SENTINELS = ("⟦", "⟧")  # ⟦ ⟧ — rare enough to survive MT

_FUZZY_MIN_PREFIX = 4
_FUZZY_MIN_RATIO = 0.6
_MAX_PHRASE_TOKENS = 3


def validate_engine_id(engine: str) -> str:
    if not engine or engine != engine.lower():
        raise DataError(f"engine id must be nonempty lowercase, got {engine!r}")
    return engine


@dataclass(frozen=True)
class TranslationRecord:
    engine: str
    src_lang: str
    tgt_lang: str
    source_text: str
    translated_text: str
    fetched_at: str

    def key(self) -> tuple[str, str, str, str]:
        return (self.engine, self.src_lang, self.tgt_lang, content_hash(self.source_text))


class TranslationCache:
    """Append-only JSONL cache; concurrent readers, one writer per key.

    Re-recording identical content is a no-op; conflicting content for the
    same key is an integrity error.
    """

    def __init__(self, path: str | Path, writable: bool = True):
        self.path = Path(path)
        self.writable = writable
        self._lock = threading.Lock()
        self._entries: dict[tuple[str, str, str, str], TranslationRecord] = {}
        if self.path.exists():
            self._load()

    def _load(self) -> None:
        with self.path.open(encoding="utf-8") as handle:
            for lineno, line in enumerate(handle, start=1):
                if not line.strip():
                    continue
                try:
                    raw = json.loads(line)
                    record = TranslationRecord(
                        engine=raw["engine"],
                        src_lang=raw["src"],
                        tgt_lang=raw["tgt"],
                        source_text=raw["source_text"],
                        translated_text=raw["translated_text"],
                        fetched_at=raw.get("timestamp", ""),
                    )
                except (ValueError, KeyError) as exc:
                    raise DataError(f"{self.path}:{lineno}: bad cache record ({exc})") from exc
                if raw.get("sha256") and raw["sha256"] != content_hash(record.source_text):
                    raise DataError(f"{self.path}:{lineno}: sha256 does not match source_text")
                existing = self._entries.get(record.key())
                if existing and existing.translated_text != record.translated_text:
                    raise CacheIntegrityError(
                        f"{self.path}:{lineno}: conflicting translations for one key"
                    )
                self._entries[record.key()] = record

    def get(self, engine: str, src: str, tgt: str, text: str) -> TranslationRecord | None:
        return self._entries.get((engine, src, tgt, content_hash(text)))

    def put(self, record: TranslationRecord) -> None:
        with self._lock:
            existing = self._entries.get(record.key())
            if existing is not None:
                if existing.translated_text != record.translated_text:
                    raise CacheIntegrityError(
                        f"conflicting translation for key {record.key()}"
                    )
                return
            if not self.writable:
                raise DataError(f"cache {self.path} opened read-only")
            self._entries[record.key()] = record
            line = json.dumps(
                {
                    "engine": record.engine,
                    "src": record.src_lang,
                    "tgt": record.tgt_lang,
                    "sha256": content_hash(record.source_text),
                    "source_text": record.source_text,
                    "translated_text": record.translated_text,
                    "timestamp": record.fetched_at,
                },
                ensure_ascii=False,
            )
            with self.path.open("a", encoding="utf-8") as handle:
                handle.write(line + "\n")

    def __len__(self) -> int:
        return len(self._entries)


def compact_cache(path: str | Path, out_path: str | Path | None = None) -> int:
    """Rewrite a cache keeping one record per key; returns records kept."""
    cache = TranslationCache(path, writable=False)
    out_path = Path(out_path) if out_path else Path(path)
    records = sorted(cache._entries.values(), key=lambda r: r.key())
    with Path(out_path).open("w", encoding="utf-8") as handle:
        for record in records:
            handle.write(
                json.dumps(
                    {
                        "engine": record.engine,
                        "src": record.src_lang,
                        "tgt": record.tgt_lang,
                        "sha256": content_hash(record.source_text),
                        "source_text": record.source_text,
                        "translated_text": record.translated_text,
                        "timestamp": record.fetched_at,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )
    return len(records)


class TokenBucket:
    """Serializes live requests to a configurable rate (default 5/s)."""

    def __init__(self, rate: float = 5.0, capacity: int = 5):
        self.rate = rate
        self.capacity = capacity
        self._tokens = float(capacity)
        self._stamp = time.monotonic()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = time.monotonic()
                self._tokens = min(self.capacity, self._tokens + (now - self._stamp) * self.rate)
                self._stamp = now
                if self._tokens >= 1.0:
                    self._tokens -= 1.0
                    return
                wait = (1.0 - self._tokens) / self.rate
            time.sleep(wait)


def _default_transport(method: str, url: str, **kwargs) -> dict:
    import requests

    response = requests.request(method, url, timeout=30, **kwargs)
    if response.status_code in (429, 500, 502, 503):
        raise EngineError(
            f"{url} returned {response.status_code}",
            retriable=True,
            retry_after=float(response.headers.get("Retry-After", 0) or 0) or None,
        )
    if response.status_code != 200:
        raise EngineError(f"{url} returned {response.status_code}: {response.text[:200]}")
    return response.json()


class HttpEngineClient:
    """Live HTTPS client; credentials come from env vars named in the config."""

    def __init__(self, engine: str, config: dict | None = None, transport=None,
                 max_retries: int = 3):
        self.engine = validate_engine_id(engine)
        self.config = dict(config or {})
        self.transport = transport or _default_transport
        self.max_retries = max_retries
        self.bucket = TokenBucket(rate=float(self.config.get("rate", 5.0)))

    def _credential(self) -> str:
        env_name = self.config.get(
            "api_key_env",
            "TRANSLATE_A_API_KEY" if self.engine == ENGINE_A else "TRANSLATE_B_API_KEY",
        )
        key = os.environ.get(env_name, "")
        if not key:
            raise EngineError(f"missing credential: set {env_name}")
        return key

    def _request_once(self, src: str, tgt: str, text: str) -> str:
        key = self._credential()
        if self.engine == ENGINE_A:
            url = self.config.get("url", "https://translation.googleapis.com/language/translate/v2")
            payload = self.transport(
                "POST", url,
                params={"key": key},
                json={"q": text, "source": src, "target": tgt, "format": "text"},
            )
            return payload["data"]["translations"][0]["translatedText"]
        if self.engine == ENGINE_B:
            url = self.config.get("url", "https://api.cognitive.microsofttranslator.com/translate")
            payload = self.transport(
                "POST", url,
                params={"api-version": "3.0", "from": src, "to": tgt},
                headers={"Ocp-Apim-Subscription-Key": key},
                json=[{"Text": text}],
            )
            return payload[0]["translations"][0]["text"]
        raise EngineError(f"no HTTP profile for engine {self.engine!r}")

    def translate_text(self, src: str, tgt: str, text: str) -> str:
        delay = 0.5
        for attempt in range(self.max_retries + 1):
            self.bucket.acquire()
            try:
                return self._request_once(src, tgt, text)
            except EngineError as exc:
                if not exc.retriable or attempt == self.max_retries:
                    raise
                time.sleep(exc.retry_after if exc.retry_after else delay)
                delay *= 2.0
        raise EngineError("unreachable")  # pragma: no cover


class FixtureEngineClient:
    """Never touches the network; a miss is always an error."""

    engine = FIXTURE_ENGINE

    def translate_text(self, src: str, tgt: str, text: str) -> str:
        raise FixtureMissError(
            "translation",
            f"engine={FIXTURE_ENGINE} {src}->{tgt} sha256={content_hash(text)[:16]}… "
            f"text={text[:48]!r}",
        )


def make_client(engine: str, config: dict | None = None, transport=None):
    engine = validate_engine_id(engine)
    if engine == FIXTURE_ENGINE:
        return FixtureEngineClient()
    return HttpEngineClient(engine, config=config, transport=transport)


def translate(
    engine: str,
    src_lang: str,
    tgt_lang: str,
    text: str,
    cache: TranslationCache,
    client=None,
) -> TranslationRecord:
    """Cache-through translation; a hit never touches the engine."""
    engine = validate_engine_id(engine)
    if src_lang == tgt_lang:
        raise DataError(f"src and tgt language are both {src_lang!r}")
    hit = cache.get(engine, src_lang, tgt_lang, text)
    if hit is not None:
        return hit
    if client is None:
        client = make_client(engine)
    translated = client.translate_text(src_lang, tgt_lang, text)
    if not translated:
        raise EngineError(f"{engine} returned empty translation")
    record = TranslationRecord(
        engine=engine,
        src_lang=src_lang,
        tgt_lang=tgt_lang,
        source_text=text,
        translated_text=translated,
        fetched_at=time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    )
    cache.put(record)
    return record


def translate_word(
    engine: str,
    src_lang: str,
    tgt_lang: str,
    word: str,
    cache: TranslationCache,
    client=None,
) -> TranslationRecord:
    """Single-token variant of translate (feeds the alignment ladder)."""
    return translate(engine, src_lang, tgt_lang, word, cache, client)


@dataclass(frozen=True)
class AlignedContext:
    text: str
    span1: tuple[int, int] | None
    span2: tuple[int, int] | None
    surface1: str | None
    surface2: str | None
    method1: str
    method2: str

    def __post_init__(self):
        for span, surface in ((self.span1, self.surface1), (self.span2, self.surface2)):
            if span is not None and self.text[span[0] : span[1]] != surface:
                raise DataError(f"aligned span {span} does not match surface {surface!r}")
        if self.span1 is not None and self.span2 is not None:
            if self.span1[0] < self.span2[1] and self.span2[0] < self.span1[1]:
                raise DataError("aligned spans overlap")

    def span(self, index: int) -> tuple[int, int] | None:
        return self.span1 if index == 1 else self.span2

    def surface(self, index: int) -> str | None:
        return self.surface1 if index == 1 else self.surface2

    def method(self, index: int) -> str:
        return self.method1 if index == 1 else self.method2


@dataclass(frozen=True)
class TranslatedView:
    instance_id: str
    tgt_lang: str
    engine: str
    ctx1: AlignedContext
    ctx2: AlignedContext

    def context(self, index: int) -> AlignedContext:
        return self.ctx1 if index == 1 else self.ctx2


@dataclass
class MarkerRetranslator:
    """Re-translates a sentinel-marked source sentence for the third rung."""

    translate_fn: Callable[[str], str]
    sentinels: tuple[str, str] = DEFAULT_SENTINELS

    def surface_for(self, src_text: str, span: tuple[int, int]) -> str | None:
        left, right = self.sentinels
        marked = src_text[: span[0]] + left + src_text[span[0] : span[1]] + right + src_text[span[1] :]
        try:
            translated = self.translate_fn(marked)
        except (EngineError, FixtureMissError) as exc:
            logger.debug("marker re-translation unavailable: %s", exc)
            return None
        l_at = translated.find(left)
        if l_at == -1:
            return None
        r_at = translated.find(right, l_at + len(left))
        if r_at == -1:
            return None
        inner = translated[l_at + len(left) : r_at].strip()
        return inner or None


def _overlaps_any(span: tuple[int, int], claimed: list[tuple[int, int]]) -> bool:
    return any(span[0] < c[1] and c[0] < span[1] for c in claimed)


def _window_match(
    tokens: Sequence[tuple[int, int, str]],
    phrase: str,
    claimed: list[tuple[int, int]],
) -> tuple[int, int] | None:
    """Find consecutive tokens equal (normalized) to the phrase's tokens."""
    want = [match_normalize(w) for _, _, w in iter_words(phrase)]
    if not want or len(want) > _MAX_PHRASE_TOKENS:
        return None
    norms = [match_normalize(w) for _, _, w in tokens]
    for i in range(len(tokens) - len(want) + 1):
        if norms[i : i + len(want)] == want:
            span = (tokens[i][0], tokens[i + len(want) - 1][1])
            if not _overlaps_any(span, claimed):
                return span
    return None


def _exact_match(tokens, translation: str, claimed) -> tuple[int, int] | None:
    span = _window_match(tokens, translation, claimed)
    if span is not None:
        return span
    words = [w for _, _, w in iter_words(translation)]
    if len(words) > 1:
        # phrase too long or absent as a unit: fall back to its head word
        return _window_match(tokens, words[0], claimed)
    return None


def _fuzzy_match(tokens, translation: str, claimed) -> tuple[int, int] | None:
    words = [w for _, _, w in iter_words(translation)]
    if not words:
        return None
    target = match_normalize(words[0])
    best: tuple[int, tuple[int, int]] | None = None
    for start, end, word in tokens:
        if _overlaps_any((start, end), claimed):
            continue
        norm = match_normalize(word)
        prefix = common_prefix_len(norm, target)
        if prefix == 0:
            continue
        # The short-word branch must also cover half the longer string, or
        # 2-char prefixes of function words match long translations.
        threshold_hit = prefix >= _FUZZY_MIN_PREFIX or (
            prefix >= _FUZZY_MIN_RATIO * min(len(norm), len(target))
            and prefix >= 0.5 * max(len(norm), len(target))
        )
        if threshold_hit and (best is None or prefix > best[0]):
            best = (prefix, (start, end))
    return best[1] if best else None


def align_pair(
    src_ctx: MarkedContext,
    translated_text: str,
    word_translations: tuple[str, str],
    marker_fallback: MarkerRetranslator | None = None,
) -> AlignedContext:
    """Locate both target words in a translated context.

    Words are processed in source-span order; a span claimed by one word is
    off-limits to the other. Failure is encoded (method "failed"), never
    raised.
    """
    if not translated_text:
        raise DataError("translated text is empty")
    tokens = list(iter_words(translated_text))
    order = sorted((1, 2), key=lambda i: (src_ctx.span1, src_ctx.span2)[i - 1][0])
    claimed: list[tuple[int, int]] = []
    found: dict[int, tuple[tuple[int, int] | None, str]] = {}
    for index in order:
        src_span = (src_ctx.span1, src_ctx.span2)[index - 1]
        translation = word_translations[index - 1]
        span = _exact_match(tokens, translation, claimed)
        method = EXACT
        if span is None:
            span = _fuzzy_match(tokens, translation, claimed)
            method = FUZZY
        if span is None and marker_fallback is not None:
            surface = marker_fallback.surface_for(src_ctx.text, src_span)
            if surface:
                span = _window_match(tokens, surface, claimed)
                if span is None:
                    span = _fuzzy_match(tokens, surface, claimed)
                method = MARKER
        if span is None:
            found[index] = (None, FAILED)
        else:
            claimed.append(span)
            found[index] = (span, method)
    span1, method1 = found[1]
    span2, method2 = found[2]
    return AlignedContext(
        text=translated_text,
        span1=span1,
        span2=span2,
        surface1=translated_text[span1[0] : span1[1]] if span1 else None,
        surface2=translated_text[span2[0] : span2[1]] if span2 else None,
        method1=method1,
        method2=method2,
    )


def identity_view(instance: Instance, engine: str) -> TranslatedView:
    """The degenerate view of an instance in its own source language."""

    def as_aligned(ctx: MarkedContext) -> AlignedContext:
        return AlignedContext(
            text=ctx.text,
            span1=ctx.span1,
            span2=ctx.span2,
            surface1=ctx.surface1,
            surface2=ctx.surface2,
            method1=EXACT,
            method2=EXACT,
        )

    return TranslatedView(
        instance_id=instance.id,
        tgt_lang=instance.source_lang,
        engine=engine,
        ctx1=as_aligned(instance.context1),
        ctx2=as_aligned(instance.context2),
    )


@dataclass(frozen=True)
class ViewError:
    instance_id: str
    tgt_lang: str
    message: str


@dataclass
class ViewBatch:
    views: list[TranslatedView] = field(default_factory=list)
    errors: list[ViewError] = field(default_factory=list)

    def for_instance(self, instance_id: str) -> dict[str, TranslatedView]:
        return {v.tgt_lang: v for v in self.views if v.instance_id == instance_id}


def _build_one(
    instance: Instance,
    tgt_lang: str,
    engine: str,
    cache: TranslationCache,
    client,
    sentinels: tuple[str, str],
) -> TranslatedView:
    if tgt_lang == instance.source_lang:
        return identity_view(instance, engine)
    src = instance.source_lang
    marker = MarkerRetranslator(
        translate_fn=lambda text: translate(engine, src, tgt_lang, text, cache, client).translated_text,
        sentinels=sentinels,
    )
    w1 = translate_word(engine, src, tgt_lang, instance.word1, cache, client).translated_text
    w2 = translate_word(engine, src, tgt_lang, instance.word2, cache, client).translated_text
    contexts = []
    for ctx in (instance.context1, instance.context2):
        record = translate(engine, src, tgt_lang, ctx.text, cache, client)
        contexts.append(align_pair(ctx, record.translated_text, (w1, w2), marker))
    return TranslatedView(
        instance_id=instance.id,
        tgt_lang=tgt_lang,
        engine=engine,
        ctx1=contexts[0],
        ctx2=contexts[1],
    )


def build_views(
    instances: Sequence[Instance],
    languages: Sequence[str],
    engine: str,
    cache: TranslationCache,
    client=None,
    jobs: int = 1,
    sentinels: tuple[str, str] = DEFAULT_SENTINELS,
) -> ViewBatch:
    """One view per (instance, language); identity views for the source language.

    Per-item engine failures become ledger entries; the rest of the batch is
    returned, ordered by (instance id, language) regardless of scheduling.
    """
    engine = validate_engine_id(engine)
    tasks = [(inst, lang) for inst in instances for lang in dict.fromkeys(languages)]

    def run(task: tuple[Instance, str]):
        inst, lang = task
        try:
            return _build_one(inst, lang, engine, cache, client, sentinels)
        except (EngineError, FixtureMissError, DataError) as exc:
            return ViewError(instance_id=inst.id, tgt_lang=lang, message=str(exc))

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(run, tasks))
    else:
        outcomes = [run(t) for t in tasks]
    batch = ViewBatch()
    for outcome in outcomes:
        if isinstance(outcome, ViewError):
            batch.errors.append(outcome)
        else:
            batch.views.append(outcome)
    batch.views.sort(key=lambda v: (v.instance_id, v.tgt_lang))
    batch.errors.sort(key=lambda e: (e.instance_id, e.tgt_lang))
    return batch


def _aligned_to_record(ctx: AlignedContext) -> dict:
    return {
        "text": ctx.text,
        "span1": list(ctx.span1) if ctx.span1 else None,
        "span2": list(ctx.span2) if ctx.span2 else None,
        "surface1": ctx.surface1,
        "surface2": ctx.surface2,
        "method1": ctx.method1,
        "method2": ctx.method2,
    }


def _aligned_from_record(raw: dict) -> AlignedContext:
    return AlignedContext(
        text=raw["text"],
        span1=tuple(raw["span1"]) if raw.get("span1") else None,
        span2=tuple(raw["span2"]) if raw.get("span2") else None,
        surface1=raw.get("surface1"),
        surface2=raw.get("surface2"),
        method1=raw["method1"],
        method2=raw["method2"],
    )


def view_to_record(view: TranslatedView) -> dict:
    return {
        "instance_id": view.instance_id,
        "tgt_lang": view.tgt_lang,
        "engine": view.engine,
        "ctx1": _aligned_to_record(view.ctx1),
        "ctx2": _aligned_to_record(view.ctx2),
    }


def view_from_record(raw: dict) -> TranslatedView:
    return TranslatedView(
        instance_id=raw["instance_id"],
        tgt_lang=raw["tgt_lang"],
        engine=raw["engine"],
        ctx1=_aligned_from_record(raw["ctx1"]),
        ctx2=_aligned_from_record(raw["ctx2"]),
    )


def write_views(views: Sequence[TranslatedView], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as handle:
        for view in views:
            handle.write(json.dumps(view_to_record(view), ensure_ascii=False) + "\n")


def read_views(path: str | Path) -> list[TranslatedView]:
    views = []
    with Path(path).open(encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                views.append(view_from_record(json.loads(line)))
    return views
