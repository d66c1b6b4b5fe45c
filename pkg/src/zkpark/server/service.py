"""TCP front end for :class:`ServerState`.

Ops: ``register``, ``state``, ``auth`` plus ``epoch`` (current nu and vk
digest) and ``leaves`` (leaf-log tail for full-sync clients). Every response
carries ``ok``; failures carry ``reason``.
"""

from __future__ import annotations

import logging
import socketserver
import threading
from pathlib import Path

from ..circuit import PublicInputs
from ..errors import CapacityError, DecodeError, NotFoundError
from .config import ServerConfig
from .persist import StateLog
from .state import RejectReason, ServerState
from .wire import from_b64, from_hex32, hex32, parse_addr, path_to_json, recv_message, send_message

log = logging.getLogger(__name__)

LOG_NAME = "state.log"
MAX_LEAVES_PER_REPLY = 4096


def _fail(reason: str, detail: str | None = None) -> dict:
    out = {"ok": False, "reason": reason}
    if detail:
        out["detail"] = detail
    return out


def _int_field(msg: dict, name: str) -> int:
    v = msg.get(name)
    if not isinstance(v, int) or isinstance(v, bool):
        raise DecodeError(f"{name} must be an integer")
    return v


class Dispatcher:
    """Maps decoded JSON requests onto state operations; transport-agnostic."""

    def __init__(self, state: ServerState, vk_digest: bytes = b"", admin_ops: bool = False):
        self.state = state
        self.vk_digest = vk_digest
        self.admin_ops = admin_ops

    def handle(self, msg: dict) -> dict:
        op = msg.get("op")
        handler = getattr(self, f"op_{op}", None) if isinstance(op, str) else None
        if handler is None:
            return _fail("UnknownOp", f"unsupported op {op!r}")
        try:
            return handler(msg)
        except DecodeError as exc:
            return _fail(RejectReason.MALFORMED.value, str(exc))
        except NotFoundError as exc:
            return _fail("NotFound", str(exc))
        except CapacityError as exc:
            return _fail("Capacity", str(exc))

    def op_register(self, msg: dict) -> dict:
        uid = from_b64(msg.get("uid"))
        res = self.state.register(uid, from_hex32(msg.get("commitment")))
        return {"ok": True, "leaf_index": res.leaf_index, "path": path_to_json(res.path), "root": hex32(res.root)}

    def op_state(self, msg: dict) -> dict:
        snap = self.state.query_state(_int_field(msg, "leaf_index"))
        return {
            "ok": True,
            "path": path_to_json(snap.path),
            "root": hex32(snap.root),
            "nu": hex32(snap.nu),
            "epoch_id": snap.epoch_id,
        }

    def op_epoch(self, msg: dict) -> dict:
        ep = self.state.current_epoch()
        return {
            "ok": True,
            "nu": hex32(ep.nu),
            "epoch_id": ep.epoch_id,
            "depth": self.state.depth,
            "vk_digest": self.vk_digest.hex(),
        }

    def op_leaves(self, msg: dict) -> dict:
        start = _int_field(msg, "from")
        leaves = self.state.leaves(start, MAX_LEAVES_PER_REPLY)
        return {"ok": True, "from": start, "leaves": [hex32(x) for x in leaves], "total": self.state.next_index}

    def op_auth(self, msg: dict) -> dict:
        try:
            publics = PublicInputs(from_hex32(msg.get("rh")), from_hex32(msg.get("nu")), from_hex32(msg.get("nf")))
            proof = from_b64(msg.get("proof"))
        except DecodeError as exc:
            return _fail(RejectReason.MALFORMED.value, str(exc))
        result = self.state.authenticate(publics, proof)
        if result.accepted:
            return {"ok": True, "result": "Accept"}
        return _fail(result.reason.value)

    def op_rotate(self, msg: dict) -> dict:
        if not self.admin_ops:
            return _fail("Forbidden", "admin ops are disabled")
        ep = self.state.rotate_epoch()
        return {"ok": True, "epoch_id": ep.epoch_id, "nu": hex32(ep.nu)}


class _Handler(socketserver.BaseRequestHandler):
    def handle(self):
        dispatcher: Dispatcher = self.server.dispatcher
        sock = self.request
        while True:
            try:
                msg = recv_message(sock)
            except DecodeError as exc:
                send_message(sock, _fail(RejectReason.MALFORMED.value, str(exc)))
                return
            except (ConnectionError, OSError):
                return
            if msg is None:
                return
            try:
                send_message(sock, dispatcher.handle(msg))
            except OSError:
                return


class _TCPServer(socketserver.ThreadingTCPServer):
    daemon_threads = True
    allow_reuse_address = True


class ParkingServer:
    """Listening socket, epoch timer thread and the state behind them."""

    def __init__(self, state: ServerState, listen: str = "127.0.0.1:0", vk_digest: bytes = b"", admin_ops: bool = False):
        self.state = state
        self.dispatcher = Dispatcher(state, vk_digest, admin_ops)
        self._tcp = _TCPServer(parse_addr(listen), _Handler)
        self._tcp.dispatcher = self.dispatcher
        self._stop = threading.Event()
        self._threads: list[threading.Thread] = []

    @property
    def address(self) -> str:
        host, port = self._tcp.server_address[:2]
        return f"{host}:{port}"

    def _timer(self):
        while not self._stop.wait(0.5):
            self.state.current_epoch()  # rotates once the epoch has expired

    def start(self) -> ParkingServer:
        for target in (self._tcp.serve_forever, self._timer):
            t = threading.Thread(target=target, daemon=True)
            t.start()
            self._threads.append(t)
        return self

    def serve_forever(self) -> None:
        timer = threading.Thread(target=self._timer, daemon=True)
        timer.start()
        try:
            self._tcp.serve_forever()
        finally:
            self._stop.set()

    def close(self) -> None:
        self._stop.set()
        self._tcp.shutdown()
        self._tcp.server_close()

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.close()


def open_state(cfg: ServerConfig, vk=None, **kwargs) -> ServerState:
    """State backed by ``<data_dir>/state.log``, replaying it if present."""
    data_dir = Path(cfg.data_dir)
    data_dir.mkdir(parents=True, exist_ok=True)
    return ServerState(
        cfg.depth,
        vk=vk,
        log=StateLog(data_dir / LOG_NAME, fsync=cfg.fsync),
        epoch_seconds=cfg.epoch_seconds,
        root_history=cfg.root_history,
        retention_epochs=cfg.retention_epochs,
        **kwargs,
    )


def build_server(cfg: ServerConfig, cache_dir: str | None = None) -> ParkingServer:
    from ..params import keys_for_depth

    _, vk = keys_for_depth(cfg.depth, cache_dir)
    state = open_state(cfg, vk=vk)
    log.info("loaded state: %d leaves, epoch %d", state.next_index, state.epoch.epoch_id)
    return ParkingServer(state, cfg.listen, vk.digest(), cfg.admin_ops)
