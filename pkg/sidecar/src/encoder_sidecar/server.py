"""Serving loops: newline-delimited JSON over stdio or a TCP socket.

Per-request failures become {"error": code, "msg": ...} objects and the
process stays up; only a model-load failure exits nonzero, before any
request is accepted.
"""
from __future__ import annotations

import json
import logging
import socket
import sys
import threading

from .model import EncodeError, HiddenStateEncoder

logger = logging.getLogger(__name__)


def handle_request(encoder: HiddenStateEncoder, raw: str) -> dict:
    try:
        request = json.loads(raw)
    except ValueError as exc:
        return {"error": "bad-json", "msg": str(exc)}
    op = request.get("op")
    if op == "hello":
        return encoder.hello()
    if op == "encode":
        lang = request.get("lang", "")
        text = request.get("text", "")
        try:
            return encoder.encode(lang, text)
        except EncodeError as exc:
            return {"error": "encode-failed", "msg": str(exc)}
        except Exception as exc:  # keep serving on unexpected failures
            logger.exception("encode failed")
            return {"error": "internal", "msg": str(exc)}
    return {"error": "unknown-op", "msg": f"unsupported op {op!r}"}


def serve_stdio(encoder: HiddenStateEncoder) -> None:
    print(f"serving {encoder.model_id} on stdio (dim {encoder.dim})", file=sys.stderr,
          flush=True)
    for line in sys.stdin:
        if not line.strip():
            continue
        response = handle_request(encoder, line)
        sys.stdout.write(json.dumps(response, ensure_ascii=False) + "\n")
        sys.stdout.flush()


def _serve_connection(encoder: HiddenStateEncoder, conn: socket.socket) -> None:
    with conn, conn.makefile("rwb") as stream:
        for line in stream:
            response = handle_request(encoder, line.decode("utf-8"))
            stream.write((json.dumps(response, ensure_ascii=False) + "\n").encode("utf-8"))
            stream.flush()


def serve_tcp(encoder: HiddenStateEncoder, host: str, port: int) -> None:
    sock = socket.socket()
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    sock.bind((host, port))
    sock.listen(8)
    bound = sock.getsockname()
    print(f"listening on {bound[0]}:{bound[1]} (dim {encoder.dim})", file=sys.stderr,
          flush=True)
    while True:
        conn, _ = sock.accept()
        thread = threading.Thread(target=_serve_connection, args=(encoder, conn),
                                  daemon=True)
        thread.start()
