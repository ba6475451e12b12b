"""Transports: in-process loopback and TCP sockets, plus serve/fetch.

Both transports move the same framed bytes, so a fixed seed produces a
bit-identical transcript either way.  Socket servers answer one framed query
per connection, sequentially, and never initiate messages; a null query is
answered with an empty-answer frame before the connection closes.
"""

from __future__ import annotations

import socket
import threading
from dataclasses import dataclass

import numpy as np

from .core import FileLibrary, PirSetting
from .galois import Field
from .server import ServerStorage, answer_token, provision_storage
from .wire import ProtocolError, decode_answer, decode_query, encode_answer, read_frame, write_frame
from .wpir import MPrimeDistribution, wpir_decode, wpir_query


class TransportError(Exception):
    pass


class InProcessTransport:
    """Loopback transport over provisioned in-memory servers."""

    def __init__(self, setting: PirSetting, library: FileLibrary):
        self.setting = setting
        self.field = library.field
        self.library = library
        self._servers = provision_storage(setting, library)

    @property
    def n_servers(self) -> int:
        return self.setting.N

    def exchange(self, server_index: int, query_bytes: bytes) -> bytes:
        storage = self._servers[server_index]
        token = decode_query(query_bytes, self.field)
        return encode_answer(answer_token(token, storage))


@dataclass(frozen=True)
class SocketTransport:
    """Client-side transport to N already-running socket servers."""

    setting: PirSetting
    field: Field
    addresses: tuple[tuple[str, int], ...]
    library: FileLibrary | None = None

    @property
    def n_servers(self) -> int:
        return len(self.addresses)

    def exchange(self, server_index: int, query_bytes: bytes) -> bytes:
        host, port = self.addresses[server_index]
        try:
            with socket.create_connection((host, port), timeout=30) as conn:
                write_frame(conn.makefile("wb", buffering=0), query_bytes)
                reader = conn.makefile("rb")
                return read_frame(lambda n: _read_exactly(reader, n))
        except OSError as exc:
            raise TransportError(f"cannot reach server at {host}:{port}: {exc}") from exc


def _read_exactly(stream, n: int):
    data = stream.read(n)
    if not data:
        return None
    while len(data) < n:
        more = stream.read(n - len(data))
        if not more:
            return None
        data += more
    return data


class PirServer:
    """A long-running socket server for one storage column.

    Handles connections sequentially: read one framed query, answer it,
    close.  Malformed frames or protocol mismatches drop the connection.
    """

    def __init__(self, storage: ServerStorage, address: tuple[str, int]):
        self.storage = storage
        self._sock = socket.create_server(address)
        self.address = self._sock.getsockname()
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None

    def serve_forever(self, max_requests: int | None = None):
        served = 0
        self._sock.settimeout(0.2)
        while not self._stop.is_set():
            if max_requests is not None and served >= max_requests:
                break
            try:
                conn, _ = self._sock.accept()
            except socket.timeout:
                continue
            except OSError:
                break
            with conn:
                try:
                    reader = conn.makefile("rb")
                    payload = read_frame(lambda n: _read_exactly(reader, n))
                    token = decode_query(payload, self.storage.field)
                    answer = answer_token(token, self.storage)
                    write_frame(conn.makefile("wb", buffering=0), encode_answer(answer))
                except (ProtocolError, EOFError, OSError):
                    pass
            served += 1

    def start(self, max_requests: int | None = None):
        self._thread = threading.Thread(target=self.serve_forever,
                                        args=(max_requests,), daemon=True)
        self._thread.start()
        return self

    def stop(self):
        self._stop.set()
        try:
            self._sock.close()
        except OSError:
            pass
        if self._thread is not None:
            self._thread.join(timeout=5)


def serve(setting: PirSetting, server_index: int, library: FileLibrary,
          address: tuple[str, int]) -> PirServer:
    storage = provision_storage(setting, library)[server_index]
    return PirServer(storage, address)


def fetch(addresses, setting: PirSetting, field: Field, theta: int,
          dist: MPrimeDistribution, seed: int) -> np.ndarray:
    """Run one full session over sockets and return the decoded file."""
    transport = SocketTransport(setting=setting, field=field,
                                addresses=tuple(addresses))
    from .experiment import run_session
    transcript, decoded = run_session(setting, theta, dist, seed, transport)
    return decoded
