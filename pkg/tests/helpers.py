"""Shared builders for tests that need real proofs or a running server."""

import contextlib
import threading

from zkpark.circuit import assign_witness
from zkpark.identity import commitment, keygen
from zkpark.prover import prove
from zkpark.server import Dispatcher, ParkingServer, ServerState


def register_user(state, rng, uid=None):
    secret = keygen(rng)
    uid = uid or rng.randbytes(8)
    res = state.register(uid, commitment(secret, uid).value)
    return secret, uid, res.leaf_index


def make_proof(pk, state, secret, uid, leaf_index, rng=None):
    snap = state.query_state(leaf_index)
    witness, publics = assign_witness(pk.cs, secret, uid, snap.path, snap.nu)
    return publics, prove(pk, publics, witness, rng)


class InProcessTransport:
    """Transport that calls a Dispatcher directly, recording every message."""

    def __init__(self, dispatcher: Dispatcher):
        self.dispatcher = dispatcher
        self.sent: list[dict] = []
        self.sent_ops: list[str] = []

    def request(self, msg: dict) -> dict:
        self.sent.append(msg)
        self.sent_ops.append(msg.get("op", "?"))
        return self.dispatcher.handle(msg)


@contextlib.contextmanager
def running_server(state: ServerState, vk_digest: bytes = b"", admin_ops: bool = True):
    server = ParkingServer(state, "127.0.0.1:0", vk_digest, admin_ops).start()
    try:
        yield server
    finally:
        server.close()


def run_threads(target, count):
    results = [None] * count
    barrier = threading.Barrier(count)

    def worker(i):
        barrier.wait()
        results[i] = target()

    threads = [threading.Thread(target=worker, args=(i,)) for i in range(count)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    return results
