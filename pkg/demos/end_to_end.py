"""One vehicle registers, parks, tries to park again and parks in the next epoch.

Runs a server in-process on a loopback port and talks to it over TCP, exactly as
the `zkpark` command line does.  Keys come from the demo setup and are cached, so
the first run spends a few extra seconds on preprocessing.

    python3 demos/end_to_end.py [--depth 8]
"""

import argparse
import tempfile
import time
from pathlib import Path

from zkpark.client import ClientState, TcpTransport, cmd_park, cmd_register, cmd_sync
from zkpark.params import keys_for_depth
from zkpark.server import ParkingServer, ServerState


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--depth", type=int, default=8)
    args = ap.parse_args()

    t0 = time.perf_counter()
    pk, vk = keys_for_depth(args.depth)
    print(f"keys for depth {args.depth}: n_gates={pk.cs.n_gates} ({time.perf_counter() - t0:.1f}s)")

    state = ServerState(args.depth, vk=vk)
    server = ParkingServer(state, "127.0.0.1:0", vk.digest(), admin_ops=True).start()
    work = Path(tempfile.mkdtemp(prefix="zkpark-demo-"))
    key, cs = work / "car.key", work / "car.json"
    try:
        t = TcpTransport(server.address)
        cmd_register(t, b"plate-AB-123", key, cs, generate=True)
        st = ClientState.load(cs)
        print(f"registered at leaf {st.leaf_index}, root {st.root[:16]}...")

        # a few other vehicles join, so the cached path goes stale
        for i in range(3):
            cmd_register(t, b"other-%d" % i, work / f"o{i}.key", work / f"o{i}.json", generate=True)
        cmd_sync(t, cs)
        print(f"synced, root now {ClientState.load(cs).root[:16]}...")

        t0 = time.perf_counter()
        res = cmd_park(t, cs, keys=(pk, vk))
        print(f"park: {res} ({time.perf_counter() - t0:.2f}s incl. proving)")
        print(f"park again same epoch: {cmd_park(t, cs, keys=(pk, vk))}")

        state.rotate_epoch()
        res = cmd_park(t, cs, keys=(pk, vk))
        print(f"park after epoch rotation: {res} (retried={res.retried})")
    finally:
        server.close()


if __name__ == "__main__":
    main()
