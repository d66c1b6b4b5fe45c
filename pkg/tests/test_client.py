import json
import os
import random
import subprocess
import sys
import threading

import pytest

from helpers import InProcessTransport, running_server
from zkpark.client import (
    ClientState,
    TcpTransport,
    cmd_keygen,
    cmd_park,
    cmd_register,
    cmd_sync,
)
from zkpark.errors import ArgumentError, ConnectError, DecodeError, NotFoundError
from zkpark.identity import read_keyfile
from zkpark.merkle import verify_path
from zkpark.relay import Relay, RelayTransport
from zkpark.server import Dispatcher, ServerState
from zkpark.server.wire import from_hex32, hex32

DEPTH = 2


@pytest.fixture
def world(keys, tmp_path):
    """A depth-2 server state, an in-process transport and client file paths."""
    pk, vk = keys(DEPTH)
    state = ServerState(DEPTH, vk=vk)
    transport = InProcessTransport(Dispatcher(state, vk.digest(), admin_ops=True))
    return {
        "pk": pk,
        "vk": vk,
        "state": state,
        "t": transport,
        "key": tmp_path / "id.key",
        "cs": tmp_path / "client.json",
        "tmp": tmp_path,
    }


def _register(w, uid=b"car-1", full_sync=False, state_path=None):
    return cmd_register(w["t"], uid, w["key"], state_path or w["cs"], generate=True, full_sync=full_sync)


def test_keygen_refuses_overwrite(tmp_path):
    cmd_keygen(tmp_path / "k")
    with pytest.raises(ArgumentError):
        cmd_keygen(tmp_path / "k")
    cmd_keygen(tmp_path / "k", overwrite=True)


def test_register_requires_keyfile_or_generate(world):
    with pytest.raises(NotFoundError):
        cmd_register(world["t"], b"car", world["key"], world["cs"])


def test_register_caches_verified_path(world):
    assert _register(world) == 0
    st = ClientState.load(world["cs"])
    assert verify_path(from_hex32(st.commitment), st.merkle_path(), from_hex32(st.root))
    assert st.depth == DEPTH and st.vk_digest == world["vk"].digest().hex()


def test_reregister_same_uid_new_leaf(world):
    assert _register(world) == 0
    assert _register(world, state_path=world["tmp"] / "second.json") == 1


class Tamper:
    """Wraps a transport and edits selected replies."""

    def __init__(self, inner, op, edit):
        self.inner, self.op, self.edit = inner, op, edit
        self.sent_ops = inner.sent_ops

    def request(self, msg):
        reply = self.inner.request(msg)
        return self.edit(reply) if msg.get("op") == self.op else reply


def test_malformed_register_reply_leaves_state_unchanged(world):
    def bad_path(reply):
        reply["path"]["siblings"][0] = hex32(12345)
        return reply

    world["cs"].write_text("previous")
    with pytest.raises(DecodeError):
        cmd_register(Tamper(world["t"], "register", bad_path), b"car", world["key"], world["cs"], generate=True)
    assert world["cs"].read_text() == "previous"
    with pytest.raises(DecodeError):
        cmd_register(Tamper(world["t"], "register", lambda r: {"ok": True}), b"car", world["key"], world["cs"])
    assert world["cs"].read_text() == "previous"


def test_light_sync(world):
    _register(world)
    world["state"].register(b"other", 777)  # root moves on
    st = cmd_sync(world["t"], world["cs"])
    assert from_hex32(st.root) == world["state"].root
    assert from_hex32(st.nu) == world["state"].epoch.nu
    assert verify_path(from_hex32(st.commitment), st.merkle_path(), from_hex32(st.root))


def test_sync_failure_keeps_cache(world):
    _register(world)
    cmd_sync(world["t"], world["cs"])
    before = world["cs"].read_bytes()

    class Down:
        def request(self, msg):
            raise ConnectError("down")

    with pytest.raises(ConnectError):
        cmd_sync(Down(), world["cs"])
    assert world["cs"].read_bytes() == before

    def lie(reply):
        reply["root"] = hex32(99)
        return reply

    with pytest.raises(DecodeError):
        cmd_sync(Tamper(world["t"], "state", lie), world["cs"])
    assert world["cs"].read_bytes() == before


def test_full_sync_matches_query_state(world):
    for i in range(3):
        world["state"].register(b"n%d" % i, 100 + i)
    _register(world, full_sync=True)
    st = cmd_sync(world["t"], world["cs"])
    snap = world["state"].query_state(st.leaf_index)
    assert from_hex32(st.root) == snap.root
    assert tuple(from_hex32(s) for s in st.path) == snap.path.siblings
    assert len(st.leaves) == 4
    assert "state" not in world["t"].sent_ops


def test_full_sync_detects_lost_leaf(world):
    _register(world, full_sync=True)
    st = ClientState.load(world["cs"])
    st.leaf_index = 1
    st.path = None
    st.save(world["cs"])
    with pytest.raises(NotFoundError):
        cmd_sync(world["t"], world["cs"])


def test_park_happy_then_double(world):
    _register(world)
    cmd_sync(world["t"], world["cs"])
    keys = (world["pk"], world["vk"])
    first = cmd_park(world["t"], world["cs"], keys=keys)
    assert first.accepted and str(first) == "Accept"
    second = cmd_park(world["t"], world["cs"], keys=keys)
    assert not second.accepted and second.reason == "NullifierSeen"
    assert str(second) == "Reject(NullifierSeen)"


def test_park_after_rotation_retries_once(world):
    _register(world)
    cmd_sync(world["t"], world["cs"])
    world["state"].rotate_epoch()
    world["t"].sent_ops.clear()
    res = cmd_park(world["t"], world["cs"], keys=(world["pk"], world["vk"]))
    assert res.accepted and res.retried
    assert world["t"].sent_ops == ["auth", "state", "auth"]


def test_park_stale_twice_surfaces_rejection(world):
    _register(world)
    cmd_sync(world["t"], world["cs"])
    rotating = world["state"]

    class RotateBeforeAuth:
        sent_ops = []

        def request(self, msg):
            if msg["op"] == "auth":
                rotating.rotate_epoch()
            return world["t"].request(msg)

    res = cmd_park(RotateBeforeAuth(), world["cs"], keys=(world["pk"], world["vk"]))
    assert not res.accepted and res.reason == "StaleNullifier" and res.retried


def test_full_sync_park_never_queries_own_index(world):
    _register(world, full_sync=True)
    world["t"].sent_ops.clear()
    res = cmd_park(world["t"], world["cs"], keys=(world["pk"], world["vk"]))
    assert res.accepted
    assert "state" not in world["t"].sent_ops
    assert world["t"].sent_ops[-1] == "auth"


def test_secret_never_on_the_wire(world):
    _register(world)
    cmd_sync(world["t"], world["cs"])
    cmd_park(world["t"], world["cs"], keys=(world["pk"], world["vk"]))
    world["state"].rotate_epoch()
    cmd_park(world["t"], world["cs"], keys=(world["pk"], world["vk"]))
    sk = read_keyfile(world["key"]).sk
    sk_le = sk.to_bytes(32, "little")
    needles = [sk_le.hex(), sk.to_bytes(32, "big").hex(), format(sk, "x"), str(sk)]
    import base64

    needles.append(base64.b64encode(sk_le).decode()[:40])
    wire = json.dumps(world["t"].sent)
    for needle in needles:
        assert needle not in wire
    for msg in world["t"].sent:
        if msg["op"] == "auth":
            proof = base64.b64decode(msg["proof"])
            assert sk_le not in proof and sk.to_bytes(32, "big") not in proof


def test_vk_mismatch_refuses_to_prove(world, keys):
    _register(world)
    cmd_sync(world["t"], world["cs"])
    st = ClientState.load(world["cs"])
    st.vk_digest = "00" * 32
    st.save(world["cs"])
    with pytest.raises(ArgumentError):
        cmd_park(world["t"], world["cs"], keys=(world["pk"], world["vk"]))


def test_state_load_errors(tmp_path):
    with pytest.raises(NotFoundError):
        ClientState.load(tmp_path / "none.json")
    (tmp_path / "bad.json").write_text("{not json")
    with pytest.raises(DecodeError):
        ClientState.load(tmp_path / "bad.json")


def test_tcp_transport_connect_error():
    import socket

    s = socket.socket()
    s.bind(("127.0.0.1", 0))
    port = s.getsockname()[1]
    s.close()
    t = TcpTransport(f"127.0.0.1:{port}", retries=2, backoff=0.01)
    with pytest.raises(ConnectError):
        t.request({"op": "epoch"})


def test_park_through_lossy_relay(world):
    with running_server(world["state"], world["vk"].digest()) as server:
        relay = Relay("127.0.0.1:0", server.address, loss=0.3, latency_ms=5, seed=7)
        thread = threading.Thread(target=relay.serve_forever, daemon=True)
        thread.start()
        try:
            t = RelayTransport(relay.address, attempts=5, attempt_timeout=1.0, rng=random.Random(3))
            cmd_register(t, b"relay-car", world["key"], world["cs"], generate=True)
            cmd_sync(t, world["cs"])
            res = cmd_park(t, world["cs"], keys=(world["pk"], world["vk"]))
            assert res.accepted
            assert t.last_attempts <= 5
            assert relay.frames_dropped > 0
        finally:
            relay.stop()
            thread.join(timeout=2)
            relay.close()


# -- command line ---------------------------------------------------------------------


def _cli(*args, cwd):
    return subprocess.run(
        [sys.executable, "-m", "zkpark.cli", *args], capture_output=True, text=True, cwd=cwd, env=os.environ.copy()
    )


def test_cli_exit_codes(world, tmp_path):
    with running_server(world["state"], world["vk"].digest()) as server:
        srv = ["--server", server.address]
        out = _cli("register", *srv, "--uid", "cli-car", "--generate", "--json", cwd=tmp_path)
        assert out.returncode == 0, out.stderr
        assert json.loads(out.stdout)["leaf_index"] == 0
        assert (tmp_path / "zkpark.key").stat().st_mode & 0o777 == 0o600
        assert _cli("sync", *srv, cwd=tmp_path).returncode == 0
        park = _cli("park", *srv, "--json", cwd=tmp_path)
        assert park.returncode == 0, park.stderr
        assert json.loads(park.stdout) == {"ok": True, "reason": None, "retried": False}
        again = _cli("park", *srv, cwd=tmp_path)
        assert again.returncode == 2 and "Reject(NullifierSeen)" in again.stdout
    down = _cli("sync", "--server", server.address, "--json", cwd=tmp_path)
    assert down.returncode == 3
    assert json.loads(down.stdout)["reason"] == "TransportError"
    missing = _cli("park", "--state", "nope.json", cwd=tmp_path)
    assert missing.returncode == 2
