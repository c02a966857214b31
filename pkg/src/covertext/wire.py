"""Wire protocol for external distribution providers.

Newline-delimited JSON frames over a byte stream:
  request:  {"v": 1, "ctx": [int, ...], "top_n": int}
  response: {"v": 1, "entries": [[int, float], ...], "tail": float}
  error:    {"v": 1, "error": "message"}

Floats are serialized as the shortest round-trippable decimal of the 64-bit
value, so a response parses back to exactly the floats the server computed.
The client replays one probe context at session start and rejects servers
whose two answers differ byte for byte.
"""

from __future__ import annotations

import json
import math
import socket
import socketserver
import threading

from .distributions import DistributionProvider, NextTokenDistribution
from .errors import NondeterministicServer, ProtocolError, ProviderError
from .vocab import Context

PROTOCOL_VERSION = 1
SUM_TOLERANCE = 1e-6
DEFAULT_TOP_N = 512


def handle_request_line(provider: DistributionProvider, line: bytes) -> bytes:
    """Answer one request frame against a provider; total (errors become frames)."""
    try:
        try:
            req = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"malformed frame: {exc}") from None
        if not isinstance(req, dict) or req.get("v") != PROTOCOL_VERSION:
            raise ProtocolError(f"unsupported protocol version: {req!r:.80}")
        ctx = req.get("ctx")
        top_n = req.get("top_n")
        if not isinstance(ctx, list) or not all(isinstance(t, int) for t in ctx):
            raise ProtocolError("ctx must be a list of token ids")
        if not isinstance(top_n, int) or top_n < 1:
            raise ProtocolError("top_n must be a positive integer")
        dist = provider.next_distribution(tuple(ctx))
        head = dist.entries[:top_n]
        tail = math.fsum(p for _, p in dist.entries[top_n:])
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
            self.wfile.write(handle_request_line(self.server.provider, line))
            self.wfile.flush()


class ProviderServer:
    """Serves one provider over TCP; one query stream per connection."""

    def __init__(self, provider: DistributionProvider, host: str = "127.0.0.1", port: int = 0):
        class _Server(socketserver.ThreadingTCPServer):
            allow_reuse_address = True
            daemon_threads = True

        self._server = _Server((host, port), _Handler)
        self._server.provider = provider
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()

    @property
    def address(self) -> str:
        host, port = self._server.server_address[:2]
        return f"{host}:{port}"

    def close(self):
        self._server.shutdown()
        self._server.server_close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def parse_response(line: bytes) -> tuple[list[tuple[int, float]], float]:
    """Validate a response frame; returns (entries, tail)."""
    try:
        resp = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"malformed response frame: {exc}") from None
    if not isinstance(resp, dict) or resp.get("v") != PROTOCOL_VERSION:
        raise ProtocolError("protocol version mismatch")
    if "error" in resp:
        raise ProviderError(f"server error: {resp['error']}")
    entries = resp.get("entries")
    tail = resp.get("tail")
    if not isinstance(entries, list) or not isinstance(tail, (int, float)):
        raise ProtocolError("response must carry entries and tail")
    if tail < 0.0:
        raise ProtocolError(f"negative tail mass {tail}")
    parsed = []
    prev = None
    for item in entries:
        if not (isinstance(item, list) and len(item) == 2):
            raise ProtocolError(f"bad entry {item!r}")
        tok, p = int(item[0]), float(item[1])
        if not p > 0.0:
            raise ProtocolError(f"non-positive probability for token {tok}")
        if prev is not None and (p > prev[1] or (p == prev[1] and tok < prev[0])):
            raise ProtocolError("entries not sorted by (probability desc, id asc)")
        prev = (tok, p)
        parsed.append((tok, p))
    if not parsed:
        raise ProtocolError("response carries no entries")
    total = math.fsum(p for _, p in parsed) + tail
    if abs(total - 1.0) > SUM_TOLERANCE:
        raise ProtocolError(f"entries + tail sum to {total!r}, not 1")
    return parsed, float(tail)


class RemoteProvider(DistributionProvider):
    """Client adapter speaking the wire protocol to an external LM server.

    The received top-N entries are renormalized over themselves; the tail
    never participates in coding. When the server reports tail == 0 and the
    entries already sum to 1, the floats are kept exactly as sent, which
    makes a wire-wrapped provider bit-identical to its in-process twin.
    """

    def __init__(
        self,
        address: str,
        top_n: int = DEFAULT_TOP_N,
        probe_ctx: Context = (),
        vocab_size: int | None = None,
        timeout: float = 30.0,
    ):
        if top_n < 1:
            raise ProviderError("top_n must be >= 1")
        self.top_n = top_n
        self._vocab_size = vocab_size
        host, _, port = address.rpartition(":")
        try:
            self._sock = socket.create_connection((host, int(port)), timeout=timeout)
        except OSError as exc:
            raise ProviderError(f"provider unavailable at {address}: {exc}") from exc
        self._file = self._sock.makefile("rwb")
        self._lock = threading.Lock()
        self._cache: dict = {}

        first = self._exchange(probe_ctx)
        second = self._exchange(probe_ctx)
        if first != second:
            self.close()
            raise NondeterministicServer(
                "probe context returned differing responses; refusing to code against it"
            )

    @property
    def vocabulary(self):
        raise ProviderError("remote providers expose token ids only")

    @property
    def vocab_size(self) -> int | None:
        return self._vocab_size

    def _exchange(self, ctx: Context) -> bytes:
        frame = json.dumps(
            {"v": PROTOCOL_VERSION, "ctx": [int(t) for t in ctx], "top_n": self.top_n},
            separators=(",", ":"),
        ).encode() + b"\n"
        with self._lock:
            try:
                self._file.write(frame)
                self._file.flush()
                line = self._file.readline()
            except OSError as exc:
                raise ProviderError(f"provider connection failed: {exc}") from exc
        if not line:
            raise ProviderError("provider closed the connection")
        return line

    def next_distribution(self, ctx: Context) -> NextTokenDistribution:
        key = tuple(ctx)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        entries, tail = parse_response(self._exchange(key))
        total = math.fsum(p for _, p in entries)
        if tail == 0.0 and abs(total - 1.0) <= 1e-9:
            normalized = tuple(entries)
        else:
            normalized = tuple((t, p / total) for t, p in entries)
        dist = NextTokenDistribution(entries=normalized).validate()
        self._cache[key] = dist
        return dist

    def close(self):
        try:
            self._file.close()
        finally:
            self._sock.close()
