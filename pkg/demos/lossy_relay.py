"""Parking through the fragmenting UDP relay on a lossy link.

A 768-byte proof plus its JSON envelope becomes a handful of 244-byte frames.  The
relay drops each frame with the given probability, in both directions, and the
client retransmits the whole message until a reply reassembles.

    python3 demos/lossy_relay.py [--loss 0.3] [--latency-ms 20]
"""

import argparse
import random
import tempfile
import threading
from pathlib import Path

from zkpark.client import cmd_park, cmd_register, cmd_sync
from zkpark.params import keys_for_depth
from zkpark.relay import Relay, RelayTransport
from zkpark.server import ParkingServer, ServerState

DEPTH = 4


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--loss", type=float, default=0.3)
    ap.add_argument("--latency-ms", type=float, default=20)
    ap.add_argument("--vehicles", type=int, default=5)
    args = ap.parse_args()

    pk, vk = keys_for_depth(DEPTH)
    state = ServerState(DEPTH, vk=vk)
    server = ParkingServer(state, "127.0.0.1:0", vk.digest()).start()
    relay = Relay("127.0.0.1:0", server.address, loss=args.loss, latency_ms=args.latency_ms, seed=1)
    thread = threading.Thread(target=relay.serve_forever, daemon=True)
    thread.start()
    work = Path(tempfile.mkdtemp(prefix="zkpark-relay-"))
    try:
        t = RelayTransport(relay.address, attempts=8, attempt_timeout=1.0, rng=random.Random(2))
        for v in range(args.vehicles):
            key, cs = work / f"v{v}.key", work / f"v{v}.json"
            cmd_register(t, b"vehicle-%d" % v, key, cs, generate=True)
            cmd_sync(t, cs)
            res = cmd_park(t, cs, keys=(pk, vk))
            print(f"vehicle {v}: {res}, last request took {t.last_attempts} attempt(s)")
        print(f"relay forwarded {relay.forwarded} messages, dropped {relay.frames_dropped} frames")
        print(f"server: {state.next_index} registrations")
    finally:
        relay.stop()
        thread.join(timeout=2)
        relay.close()
        server.close()


if __name__ == "__main__":
    main()
