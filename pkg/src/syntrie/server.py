"""Threaded HTTP service exposing completion lookups over snapshots.

Endpoints:

    GET  /api/complete?q=<query>&k=<n>[&structure=<name>]
    GET  /api/stats
    GET  /api/health
    POST /api/reload

Responses are JSON with permissive CORS so a browser demo can run from any
origin.  Errors come back as {"error": ..., "message": ...}.  The service
can host several named structures at once (for side-by-side comparisons)
and optionally serves static files from a web root.
"""

from __future__ import annotations

import json
import mimetypes
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlsplit

from . import snapshot
from .bench import measure

MAX_K = 1000


class CompletionService:
    """Owns the loaded structures; reload swaps them atomically."""

    def __init__(self, paths: dict[str, str], default: str | None = None, webroot: str | None = None):
        if not paths:
            raise ValueError("at least one snapshot path is required")
        self.paths = dict(paths)
        self.default = default if default is not None else next(iter(paths))
        if self.default not in paths:
            raise ValueError(f"default structure {self.default!r} not among snapshots")
        self.webroot = Path(webroot).resolve() if webroot else None
        self._lock = threading.Lock()
        self._structures = {name: snapshot.load(path) for name, path in self.paths.items()}
        self._stats_cache: dict[str, dict] = {}

    def structure(self, name: str | None):
        key = name if name is not None else self.default
        with self._lock:
            return key, self._structures.get(key)

    def reload(self) -> list[str]:
        fresh = {name: snapshot.load(path) for name, path in self.paths.items()}
        with self._lock:
            self._structures = fresh
            self._stats_cache = {}
        return sorted(fresh)

    def stats(self) -> dict:
        with self._lock:
            structures = dict(self._structures)
            cache = self._stats_cache
        out = {}
        for name, st in structures.items():
            if name not in cache:
                m = measure(st)
                cache[name] = {
                    "kind": m.kind,
                    "string_count": m.string_count,
                    "rule_count": m.rule_count,
                    "bytes_total": m.bytes_total,
                    "dict_bytes": m.dict_bytes,
                    "branch_bytes": m.branch_bytes,
                    "rule_trie_bytes": m.rule_trie_bytes,
                    "link_count": m.link_count,
                }
            out[name] = cache[name]
        return {"default": self.default, "structures": out}


def _rewrite_json(ruleset, rewrites):
    return [
        {
            "rule_id": rid,
            "lhs": ruleset[rid].lhs,
            "rhs": ruleset[rid].rhs,
            "start": start,
            "end": end,
        }
        for rid, start, end in rewrites
    ]


class _Handler(BaseHTTPRequestHandler):
    service: CompletionService  # set by make_server

    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _send(self, code: int, payload: dict | bytes, content_type: str = "application/json") -> None:
        body = json.dumps(payload).encode("utf-8") if isinstance(payload, dict) else payload
        self.send_response(code)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.end_headers()
        self.wfile.write(body)

    def _error(self, code: int, error: str, message: str) -> None:
        self._send(code, {"error": error, "message": message})

    def do_OPTIONS(self):
        self._send(204, b"", "text/plain")

    def do_GET(self):
        url = urlsplit(self.path)
        if url.path == "/api/complete":
            self._complete(parse_qs(url.query, keep_blank_values=True))
        elif url.path == "/api/stats":
            self._send(200, self.service.stats())
        elif url.path == "/api/health":
            self._send(200, {"status": "ok"})
        elif self.service.webroot is not None:
            self._static(url.path)
        else:
            self._error(404, "not_found", f"no such endpoint: {url.path}")

    def do_POST(self):
        if urlsplit(self.path).path == "/api/reload":
            try:
                names = self.service.reload()
            except Exception as exc:
                self._error(500, "reload_failed", str(exc))
                return
            self._send(200, {"status": "ok", "structures": names})
        else:
            self._error(404, "not_found", f"no such endpoint: {self.path}")

    def _complete(self, params: dict[str, list[str]]) -> None:
        if "q" not in params:
            self._error(400, "bad_request", "missing required parameter q")
            return
        query = params["q"][0]
        try:
            k = int(params.get("k", ["10"])[0])
        except ValueError:
            self._error(400, "bad_request", "k must be an integer")
            return
        if not 1 <= k <= MAX_K:
            self._error(400, "bad_request", f"k must be in [1, {MAX_K}]")
            return
        name, structure = self.service.structure(params.get("structure", [None])[0])
        if structure is None:
            self._error(400, "bad_request", f"unknown structure {name!r}")
            return
        t0 = time.perf_counter_ns()
        completions = structure.topk(query, k)
        elapsed_us = (time.perf_counter_ns() - t0) / 1000.0
        self._send(
            200,
            {
                "query": query,
                "k": k,
                "structure": name,
                "elapsed_us": elapsed_us,
                "completions": [
                    {
                        "text": c.text,
                        "score": c.score,
                        "rewrites": _rewrite_json(structure.ruleset, c.rewrites),
                    }
                    for c in completions
                ],
            },
        )

    def _static(self, path: str) -> None:
        rel = path.lstrip("/") or "index.html"
        target = (self.service.webroot / rel).resolve()
        if not str(target).startswith(str(self.service.webroot)) or not target.is_file():
            self._error(404, "not_found", f"no such file: {path}")
            return
        ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        self._send(200, target.read_bytes(), ctype)


def make_server(service: CompletionService, host: str = "127.0.0.1", port: int = 8765) -> ThreadingHTTPServer:
    handler = type("BoundHandler", (_Handler,), {"service": service})
    return ThreadingHTTPServer((host, port), handler)


def serve_forever(service: CompletionService, host: str, port: int) -> None:
    server = make_server(service, host, port)
    try:
        server.serve_forever()
    finally:
        server.server_close()
