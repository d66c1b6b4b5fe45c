"""Vehicle side: key file, registration, state sync and the parking request.

The secret never leaves this module's process: registration sends only the
commitment, and the auth message carries (rh, nu, nf, proof).
"""

from __future__ import annotations

import json
import logging
import os
import socket
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from .circuit import assign_witness
from .errors import ArgumentError, ConnectError, DecodeError, NotFoundError
from .identity import IdentitySecret, commitment, keygen, read_keyfile, write_keyfile
from .merkle import IncrementalMerkleTree, MerklePath, verify_path
from .prover.plonk import prove
from .server.wire import (
    b64,
    from_b64,
    from_hex32,
    hex32,
    parse_addr,
    path_from_json,
    recv_message,
    send_message,
)

log = logging.getLogger(__name__)


class TcpTransport:
    """One request per connection; connect failures are retried with backoff."""

    def __init__(self, addr: str, timeout: float = 30.0, retries: int = 3, backoff: float = 0.2):
        self.addr = parse_addr(addr)
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff
        self.sent_ops: list[str] = []  # for call tracing in tests and --json output

    def request(self, msg: dict) -> dict:
        delay = self.backoff
        last = None
        for attempt in range(self.retries + 1):
            try:
                sock = socket.create_connection(self.addr, timeout=self.timeout)
            except OSError as exc:
                last = exc
                if attempt < self.retries:
                    time.sleep(delay)
                    delay *= 2
                continue
            with sock:
                self.sent_ops.append(msg.get("op", "?"))
                try:
                    send_message(sock, msg)
                    reply = recv_message(sock)
                except OSError as exc:
                    raise ConnectError(f"transport error talking to {self.addr}: {exc}") from None
                if reply is None:
                    raise ConnectError(f"server {self.addr} closed the connection without replying")
                return reply
        raise ConnectError(f"cannot reach server {self.addr[0]}:{self.addr[1]}: {last}")


def make_transport(server: str, via_relay: str | None = None):
    if via_relay:
        from .relay import RelayTransport

        return RelayTransport(via_relay)
    return TcpTransport(server)


@dataclass
class ClientState:
    keyfile: str
    uid_b64: str
    depth: int
    leaf_index: int
    commitment: str
    path: list[str] | None = None
    root: str | None = None
    nu: str | None = None
    epoch_id: int | None = None
    full_sync: bool = False
    vk_digest: str = ""
    leaves: list[str] = field(default_factory=list)  # full-sync mirror of the leaf log

    def uid(self) -> bytes:
        return from_b64(self.uid_b64)

    def merkle_path(self) -> MerklePath:
        if self.path is None:
            raise NotFoundError("no cached Merkle path; run sync first")
        return MerklePath(tuple(from_hex32(s) for s in self.path), self.leaf_index)

    def check(self) -> ClientState:
        if self.path is not None and self.root is not None:
            if not verify_path(from_hex32(self.commitment), self.merkle_path(), from_hex32(self.root)):
                raise DecodeError("cached path does not verify against cached root")
        return self

    def save(self, path: str | os.PathLike) -> None:
        path = Path(path)
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(json.dumps(asdict(self), indent=1), encoding="utf-8")
        os.replace(tmp, path)

    @classmethod
    def load(cls, path: str | os.PathLike) -> ClientState:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
            return cls(**data).check()
        except FileNotFoundError:
            raise NotFoundError(f"no client state at {path}; register first") from None
        except (TypeError, json.JSONDecodeError) as exc:
            raise DecodeError(f"corrupt client state {path}: {exc}") from None


def _expect_ok(reply: dict, what: str) -> dict:
    if not isinstance(reply, dict) or reply.get("ok") is not True:
        reason = reply.get("reason") if isinstance(reply, dict) else None
        if reason == "NotFound":
            raise NotFoundError(f"{what}: {reply.get('detail', 'not found')}")
        raise DecodeError(f"{what} failed: {reason or reply!r}")
    return reply


def _int(reply: dict, name: str) -> int:
    v = reply.get(name)
    if not isinstance(v, int) or isinstance(v, bool):
        raise DecodeError(f"reply field {name} is not an integer")
    return v


def cmd_keygen(keyfile: str | os.PathLike, overwrite: bool = False) -> IdentitySecret:
    if Path(keyfile).exists() and not overwrite:
        raise ArgumentError(f"{keyfile} already exists")
    secret = keygen()
    write_keyfile(keyfile, secret)
    return secret


def cmd_register(
    transport,
    uid: bytes,
    keyfile: str | os.PathLike,
    state_path: str | os.PathLike,
    generate: bool = False,
    full_sync: bool = False,
) -> int:
    """Register a fresh commitment; the state file is only written once the reply checks out."""
    if not Path(keyfile).exists():
        if not generate:
            raise NotFoundError(f"keyfile {keyfile} does not exist (pass --generate to create it)")
        cmd_keygen(keyfile)
    secret = read_keyfile(keyfile)
    cm = commitment(secret, uid).value
    epoch = _expect_ok(transport.request({"op": "epoch"}), "epoch")
    reply = _expect_ok(transport.request({"op": "register", "uid": b64(uid), "commitment": hex32(cm)}), "register")
    index = _int(reply, "leaf_index")
    path = path_from_json(reply.get("path"))
    root = from_hex32(reply.get("root"))
    depth = _int(epoch, "depth")
    if path.index != index or path.depth != depth or not verify_path(cm, path, root):
        raise DecodeError("server returned a path that does not verify")
    state = ClientState(
        keyfile=str(keyfile),
        uid_b64=b64(uid),
        depth=depth,
        leaf_index=index,
        commitment=hex32(cm),
        path=[hex32(s) for s in path.siblings],
        root=hex32(root),
        full_sync=full_sync,
        vk_digest=str(epoch.get("vk_digest", "")),
    )
    state.save(state_path)
    return index


def _sync_light(transport, state: ClientState) -> ClientState:
    reply = _expect_ok(transport.request({"op": "state", "leaf_index": state.leaf_index}), "state")
    path = path_from_json(reply.get("path"))
    root = from_hex32(reply.get("root"))
    nu = from_hex32(reply.get("nu"))
    if path.index != state.leaf_index or not verify_path(from_hex32(state.commitment), path, root):
        raise DecodeError("server state reply does not verify")
    return replace(
        state,
        path=[hex32(s) for s in path.siblings],
        root=hex32(root),
        nu=hex32(nu),
        epoch_id=_int(reply, "epoch_id"),
    )


def _sync_full(transport, state: ClientState) -> ClientState:
    """Tail the leaf log and rebuild the path locally; never asks for our own index."""
    leaves = list(state.leaves)
    while True:
        reply = _expect_ok(transport.request({"op": "leaves", "from": len(leaves)}), "leaves")
        chunk = reply.get("leaves")
        if not isinstance(chunk, list):
            raise DecodeError("leaves reply has no leaf list")
        leaves += [hex32(from_hex32(x)) for x in chunk]
        if not chunk or len(leaves) >= _int(reply, "total"):
            break
    epoch = _expect_ok(transport.request({"op": "epoch"}), "epoch")
    if state.leaf_index >= len(leaves) or leaves[state.leaf_index] != state.commitment:
        raise NotFoundError(f"server leaf log does not hold our commitment at index {state.leaf_index}")
    tree = IncrementalMerkleTree.from_leaves([from_hex32(x) for x in leaves], state.depth)
    path = tree.path(state.leaf_index)
    return replace(
        state,
        leaves=leaves,
        path=[hex32(s) for s in path.siblings],
        root=hex32(tree.root),
        nu=hex32(from_hex32(epoch.get("nu"))),
        epoch_id=_int(epoch, "epoch_id"),
        vk_digest=str(epoch.get("vk_digest", state.vk_digest)),
    )


def cmd_sync(transport, state_path: str | os.PathLike) -> ClientState:
    """Refresh path, root and nu. On any failure the previous cache stays on disk."""
    state = ClientState.load(state_path)
    new = (_sync_full if state.full_sync else _sync_light)(transport, state).check()
    new.save(state_path)
    return new


@dataclass(frozen=True)
class ParkResult:
    accepted: bool
    reason: str | None = None
    retried: bool = False

    def __str__(self):
        return "Accept" if self.accepted else f"Reject({self.reason})"


def build_auth_message(state: ClientState, secret: IdentitySecret, pk) -> dict:
    if state.nu is None:
        raise NotFoundError("no epoch nonce cached; run sync first")
    if state.vk_digest and state.vk_digest != pk.vk_digest.hex():
        raise ArgumentError("local verifying key differs from the server's; refusing to prove")
    witness, publics = assign_witness(pk.cs, secret, state.uid(), state.merkle_path(), from_hex32(state.nu))
    proof = prove(pk, publics, witness)
    return {
        "op": "auth",
        "rh": hex32(publics.rh),
        "nu": hex32(publics.nu),
        "nf": hex32(publics.nf),
        "proof": b64(proof.to_bytes()),
    }


def cmd_park(transport, state_path: str | os.PathLike, cache_dir: str | None = None, keys=None) -> ParkResult:
    """Prove and send. On StaleNullifier, re-sync once and try again."""
    from .params import keys_for_depth

    state = ClientState.load(state_path)
    secret = read_keyfile(state.keyfile)
    pk = keys[0] if keys is not None else keys_for_depth(state.depth, cache_dir)[0]
    if state.full_sync:
        state = cmd_sync(transport, state_path)
    retried = False
    while True:
        reply = transport.request(build_auth_message(state, secret, pk))
        if reply.get("ok") is True:
            return ParkResult(True, None, retried)
        reason = str(reply.get("reason", "Unknown"))
        if reason == "StaleNullifier" and not retried:
            retried = True
            state = cmd_sync(transport, state_path)
            continue
        return ParkResult(False, reason, retried)
