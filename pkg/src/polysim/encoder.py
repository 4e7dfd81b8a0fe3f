"""Contextual token encodings and the in-context similarity channel.

Three interchangeable backends produce per-token vectors with character
offsets: a wire-protocol client speaking newline-delimited JSON to a local
sidecar, a fixture file of frozen responses keyed by (lang, content hash),
and a synthetic-hash backend that derives unit vectors deterministically from
the text itself so every pipeline property is testable offline.

Every response is validated against the TokenEncoding invariants at the trust
boundary; a violating response never reaches scoring. The similarity function
over contextual vectors is cosine (assumed by parallel with the static
embedding channel; the choice is documented, not dictated).
"""
from __future__ import annotations

import hashlib
import json
import math
import shlex
import socket
import subprocess
import threading
from dataclasses import dataclass
from pathlib import Path

from .embedstore import cosine
from .errors import DataError, ExternalServiceError, FixtureMissError, ProtocolError
from .textutil import content_hash

SYNTHETIC_HASH = "synthetic-hash"
FIXTURE_FILE = "fixture-file"
PROTOCOL_CLIENT = "protocol-client"


@dataclass(frozen=True)
class Token:
    span: tuple[int, int]
    vector: tuple[float, ...]


@dataclass(frozen=True)
class TokenEncoding:
    lang: str
    text: str
    tokens: tuple[Token, ...]
    dim: int
    backend_id: str


def validate_payload(lang: str, text: str, payload: dict, backend_id: str) -> TokenEncoding:
    """Check a raw response against the TokenEncoding invariants.

    Raises ProtocolError with a located diagnostic; violations are rejected,
    never repaired.
    """
    if not isinstance(payload, dict):
        raise ProtocolError(f"{backend_id}: response is not an object")
    if "error" in payload:
        raise ProtocolError(f"{backend_id}: remote error {payload.get('error')}: "
                            f"{payload.get('msg', '')}")
    dim = payload.get("dim")
    if not isinstance(dim, int) or dim <= 0:
        raise ProtocolError(f"{backend_id}: bad dim {dim!r}")
    raw_tokens = payload.get("tokens")
    if not isinstance(raw_tokens, list):
        raise ProtocolError(f"{backend_id}: missing tokens list")
    tokens: list[Token] = []
    prev_end = 0
    for i, tok in enumerate(raw_tokens):
        try:
            start, end = int(tok["start"]), int(tok["end"])
            vec = tok["vec"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ProtocolError(f"{backend_id}: token {i} malformed ({exc})") from exc
        if not (0 <= start < end <= len(text)):
            raise ProtocolError(
                f"{backend_id}: token {i} span [{start},{end}) out of range "
                f"for text of length {len(text)}"
            )
        if start < prev_end:
            raise ProtocolError(f"{backend_id}: token {i} overlaps or disorders offsets")
        prev_end = end
        if not isinstance(vec, list) or len(vec) != dim:
            raise ProtocolError(f"{backend_id}: token {i} vector length != dim {dim}")
        values = tuple(float(v) for v in vec)
        if any(not math.isfinite(v) for v in values):
            raise ProtocolError(f"{backend_id}: token {i} vector has NaN/Inf")
        tokens.append(Token(span=(start, end), vector=values))
    return TokenEncoding(lang=lang, text=text, tokens=tuple(tokens), dim=dim,
                         backend_id=backend_id)


def _whitespace_tokens(text: str) -> list[tuple[int, int]]:
    spans = []
    start = None
    for i, ch in enumerate(text):
        if ch.isspace():
            if start is not None:
                spans.append((start, i))
                start = None
        elif start is None:
            start = i
    if start is not None:
        spans.append((start, len(text)))
    return spans


def _hash_unit_vector(seed: int, lang: str, token_text: str, index: int, dim: int) -> list[float]:
    material = f"{seed}|{lang}|{index}|{token_text}".encode("utf-8")
    values: list[float] = []
    block = 0
    while len(values) < dim:
        digest = hashlib.sha256(material + b"#" + str(block).encode()).digest()
        for off in range(0, 32, 8):
            if len(values) >= dim:
                break
            u = int.from_bytes(digest[off : off + 8], "big") / 2.0**64
            values.append(2.0 * u - 1.0)
        block += 1
    norm = math.sqrt(math.fsum(v * v for v in values))
    if norm == 0.0:
        values[0] = 1.0
        norm = 1.0
    return [v / norm for v in values]


class SyntheticHashBackend:
    """Deterministic offline backend: whitespace tokens, hash-derived unit vectors."""

    kind = SYNTHETIC_HASH

    def __init__(self, dim: int = 16, seed: int = 0):
        if dim <= 0:
            raise DataError("synthetic backend dim must be positive")
        self.dim = dim
        self.seed = seed
        self.backend_id = f"synthetic-hash(dim={dim},seed={seed})"

    def raw_encode(self, lang: str, text: str) -> dict:
        tokens = []
        for i, (start, end) in enumerate(_whitespace_tokens(text)):
            vec = _hash_unit_vector(self.seed, lang, text[start:end], i, self.dim)
            tokens.append({"start": start, "end": end, "vec": vec})
        return {"dim": self.dim, "tokens": tokens}


class FixtureFileBackend:
    """Serves frozen responses keyed by lang + sha256 of the NFC text."""

    kind = FIXTURE_FILE

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.backend_id = f"fixture-file({self.path.name})"
        self._entries: dict[tuple[str, str], dict] | None = None

    def _load(self) -> dict[tuple[str, str], dict]:
        if self._entries is None:
            entries: dict[tuple[str, str], dict] = {}
            with self.path.open(encoding="utf-8") as handle:
                for line in handle:
                    if not line.strip():
                        continue
                    record = json.loads(line)
                    entries[(record["lang"], record["sha256"])] = record
            self._entries = entries
        return self._entries

    def raw_encode(self, lang: str, text: str) -> dict:
        key = (lang, content_hash(text))
        record = self._load().get(key)
        if record is None:
            raise FixtureMissError(
                "encoder", f"lang={lang} sha256={key[1][:16]}… text={text[:48]!r}"
            )
        return record


class _LineChannel:
    """One request/response line pair over a socket or a child process."""

    def __init__(self, reader, writer, closer):
        self._reader = reader
        self._writer = writer
        self._closer = closer
        self.lock = threading.Lock()

    def roundtrip(self, message: dict) -> dict:
        data = json.dumps(message, ensure_ascii=False) + "\n"
        with self.lock:
            self._writer.write(data.encode("utf-8"))
            self._writer.flush()
            line = self._reader.readline()
        if not line:
            raise ExternalServiceError("encoder sidecar closed the connection")
        return json.loads(line.decode("utf-8"))

    def close(self):
        self._closer()


def _open_channel(endpoint: str, timeout: float) -> _LineChannel:
    if endpoint.startswith("tcp:"):
        _, host, port = endpoint.split(":", 2)
        sock = socket.create_connection((host, int(port)), timeout=timeout)
        reader = sock.makefile("rb")
        writer = sock.makefile("wb")
        return _LineChannel(reader, writer, sock.close)
    if endpoint.startswith("unix:"):
        sock = socket.socket(socket.AF_UNIX, socket.SOCK_STREAM)
        sock.settimeout(timeout)
        sock.connect(endpoint[len("unix:"):])
        reader = sock.makefile("rb")
        writer = sock.makefile("wb")
        return _LineChannel(reader, writer, sock.close)
    if endpoint.startswith("stdio:"):
        proc = subprocess.Popen(
            shlex.split(endpoint[len("stdio:"):]),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
        )
        return _LineChannel(proc.stdout, proc.stdin, proc.terminate)
    raise DataError(f"unknown encoder endpoint {endpoint!r}; use tcp:, unix: or stdio:")


class ProtocolClientBackend:
    """Client for the sidecar wire protocol, with a bounded in-flight cap."""

    kind = PROTOCOL_CLIENT

    def __init__(self, endpoint: str, timeout: float = 30.0, max_inflight: int = 4):
        self.endpoint = endpoint
        self.timeout = timeout
        self.backend_id = f"protocol-client({endpoint})"
        # stdio owns a single child process; never open a second one.
        self._single = endpoint.startswith("stdio:")
        self._limit = threading.BoundedSemaphore(1 if self._single else max_inflight)
        self._idle: list[_LineChannel] = []
        self._lock = threading.Lock()

    def _checkout(self) -> _LineChannel:
        with self._lock:
            if self._idle:
                return self._idle.pop()
        try:
            return _open_channel(self.endpoint, self.timeout)
        except (OSError, ValueError) as exc:
            raise ExternalServiceError(f"cannot reach encoder at {self.endpoint}: {exc}") from exc

    def _checkin(self, channel: _LineChannel) -> None:
        with self._lock:
            self._idle.append(channel)

    def request(self, message: dict) -> dict:
        with self._limit:
            channel = self._checkout()
            try:
                response = channel.roundtrip(message)
            except (OSError, ValueError) as exc:
                channel.close()
                raise ExternalServiceError(f"encoder request failed: {exc}") from exc
            except ExternalServiceError:
                channel.close()
                raise
            self._checkin(channel)
            return response

    def hello(self) -> dict:
        response = self.request({"op": "hello"})
        if "error" in response:
            raise ProtocolError(f"hello failed: {response}")
        if not isinstance(response.get("dim"), int) or response["dim"] <= 0:
            raise ProtocolError(f"hello returned bad dim: {response}")
        return response

    def raw_encode(self, lang: str, text: str) -> dict:
        return self.request({"op": "encode", "lang": lang, "text": text})

    def close(self) -> None:
        with self._lock:
            for channel in self._idle:
                channel.close()
            self._idle.clear()


def encode(backend, lang: str, text: str) -> TokenEncoding:
    """Obtain a validated TokenEncoding for one sentence from any backend."""
    if not text:
        raise DataError("cannot encode empty text")
    payload = backend.raw_encode(lang, text)
    return validate_payload(lang, text, payload, backend.backend_id)


def word_vector(enc: TokenEncoding, span: tuple[int, int]) -> tuple[float, ...] | None:
    """Mean of the vectors of all tokens intersecting the word span.

    Intersection, not containment: tokenizers may merge punctuation into a
    word's final piece. None when no token touches the span.
    """
    start, end = span
    hit = [t.vector for t in enc.tokens if t.span[0] < end and start < t.span[1]]
    if not hit:
        return None
    n = len(hit)
    return tuple(math.fsum(vec[j] for vec in hit) / n for j in range(enc.dim))


def bert_similarity(
    enc: TokenEncoding, span1: tuple[int, int], span2: tuple[int, int]
) -> float | None:
    """Cosine of the two in-context word vectors; None if either is absent/zero."""
    v1 = word_vector(enc, span1)
    v2 = word_vector(enc, span2)
    if v1 is None or v2 is None:
        return None
    return cosine(v1, v2)


def backend_from_config(config: dict):
    """Build a backend from a declarative descriptor {"kind": ..., ...}."""
    kind = config.get("kind")
    if kind == SYNTHETIC_HASH:
        return SyntheticHashBackend(dim=int(config.get("dim", 16)),
                                    seed=int(config.get("seed", 0)))
    if kind == FIXTURE_FILE:
        return FixtureFileBackend(config["path"])
    if kind == PROTOCOL_CLIENT:
        return ProtocolClientBackend(
            config["endpoint"],
            timeout=float(config.get("timeout", 30.0)),
            max_inflight=int(config.get("max_inflight", 4)),
        )
    raise DataError(f"unknown encoder backend kind {kind!r}")
