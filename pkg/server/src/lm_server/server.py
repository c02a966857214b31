"""Newline-delimited JSON frame server.

Wire format (version 1):
  request:  {"v": 1, "ctx": [int, ...], "top_n": int}
  response: {"v": 1, "entries": [[int, float], ...], "tail": float}
  error:    {"v": 1, "error": "message"}

Entries are the top-N (token id, probability) pairs sorted by probability
descending with ties broken by ascending id; tail is the summed residual
mass. Probabilities serialize as the shortest round-trippable decimal of the
64-bit float. Request failures become error frames; the process stays up.
"""

from __future__ import annotations

import json
import math
import socketserver
import threading

from .model import CausalLMBackend, ServerConfig

PROTOCOL_VERSION = 1


def answer(backend: CausalLMBackend, top_n_cap: int, line: bytes) -> bytes:
    try:
        try:
            req = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"malformed frame: {exc}") from None
        if not isinstance(req, dict) or req.get("v") != PROTOCOL_VERSION:
            raise ValueError("unsupported protocol version")
        ctx = req.get("ctx")
        top_n = req.get("top_n")
        if not isinstance(ctx, list) or not all(isinstance(t, int) for t in ctx):
            raise ValueError("ctx must be a list of token ids")
        if not isinstance(top_n, int) or top_n < 1:
            raise ValueError("top_n must be a positive integer")
        entries = backend.next_distribution(tuple(ctx))
        n = min(top_n, top_n_cap)
        head = entries[:n]
        tail = math.fsum(p for _, p in entries[n:])
        payload = {
            "v": PROTOCOL_VERSION,
            "entries": [[int(t), float(p)] for t, p in head],
            "tail": tail,
        }
    except Exception as exc:  # noqa: BLE001 - the frame is the error channel
        payload = {"v": PROTOCOL_VERSION, "error": str(exc)}
    return json.dumps(payload, separators=(",", ":")).encode() + b"\n"


class _Handler(socketserver.StreamRequestHandler):
    def handle(self):
        while True:
            line = self.rfile.readline()
            if not line:
                return
            line = line.strip()
            if not line:
                continue
            self.wfile.write(answer(self.server.backend, self.server.top_n_cap, line))
            self.wfile.flush()


class DistributionServer:
    """One model, many connections, one in-flight request per connection."""

    def __init__(self, config: ServerConfig, backend: CausalLMBackend | None = None):
        class _Server(socketserver.ThreadingTCPServer):
            allow_reuse_address = True
            daemon_threads = True

        self.config = config
        self.backend = backend or CausalLMBackend(config)
        self._server = _Server((config.host, config.port), _Handler)
        self._server.backend = self.backend
        self._server.top_n_cap = config.top_n_cap
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    def start(self):
        self._thread.start()
        return self

    @property
    def address(self) -> str:
        host, port = self._server.server_address[:2]
        return f"{host}:{port}"

    def serve_forever(self):
        self._server.serve_forever()

    def close(self):
        self._server.shutdown()
        self._server.server_close()

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.close()
