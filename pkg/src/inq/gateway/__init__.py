"""CLI and RPC surface binding the engine modules together."""

from .service import InquiryService, RpcError, SessionState, encode
from .transport import make_http_server, serve_http, serve_stdio

__all__ = [
    "InquiryService", "RpcError", "SessionState", "encode",
    "make_http_server", "serve_http", "serve_stdio",
]
