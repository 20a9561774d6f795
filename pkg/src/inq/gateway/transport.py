"""Two transports, one wire format.

stdio: newline-delimited JSON envelopes on stdin, responses on stdout.
http: the same envelope POSTed to /rpc. Both serialize responses with
the shared encoder, so identical requests produce byte-identical
payloads either way.
"""
from __future__ import annotations

import json
import sys
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .service import InquiryService, encode


def serve_stdio(service: InquiryService, stdin=None, stdout=None) -> int:
    source = stdin if stdin is not None else sys.stdin
    sink = stdout if stdout is not None else sys.stdout
    for line in source:
        line = line.strip()
        if not line:
            continue
        try:
            envelope = json.loads(line)
        except json.JSONDecodeError as exc:
            response = {"id": None,
                        "error": {"code": 400,
                                  "message": f"invalid JSON: {exc.msg}"}}
        else:
            response = service.handle(envelope)
        sink.write(encode(response) + "\n")
        sink.flush()
    return 0


class RpcHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"

    def do_POST(self) -> None:  # noqa: N802 - http.server API
        if self.path != "/rpc":
            self._respond(404, b'{"error":"not found"}')
            return
        try:
            length = int(self.headers.get("Content-Length", "0"))
        except ValueError:
            length = 0
        body = self.rfile.read(length)
        try:
            envelope = json.loads(body.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError):
            response = {"id": None,
                        "error": {"code": 400,
                                  "message": "request body is not JSON"}}
        else:
            response = self.server.service.handle(envelope)
        self._respond(200, encode(response).encode("utf-8"))

    def do_OPTIONS(self) -> None:  # noqa: N802 - CORS preflight
        self.send_response(204)
        self._cors()
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_GET(self) -> None:  # noqa: N802
        self._respond(405, b'{"error":"POST /rpc"}')

    def _respond(self, status: int, payload: bytes) -> None:
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self._cors()
        self.end_headers()
        self.wfile.write(payload)

    def _cors(self) -> None:
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")

    def log_message(self, format: str, *args) -> None:  # noqa: A002
        pass  # keep the wire quiet; telemetry lives in the event log


class RpcServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address: tuple[str, int],
                 service: InquiryService) -> None:
        super().__init__(address, RpcHandler)
        self.service = service


def make_http_server(service: InquiryService, port: int,
                     host: str = "127.0.0.1") -> RpcServer:
    return RpcServer((host, port), service)


def serve_http(service: InquiryService, port: int,
               host: str = "127.0.0.1") -> int:
    server = make_http_server(service, port, host)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0
