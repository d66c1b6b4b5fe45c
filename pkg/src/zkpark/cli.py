"""``zkpark`` command line.

Exit codes: 0 success / Accept, 2 Reject or bad input, 3 transport error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .errors import ConnectError, ReassemblyTimeout, ZkParkError

EXIT_OK = 0
EXIT_REJECT = 2
EXIT_TRANSPORT = 3

DEFAULT_STATE = "zkpark-client.json"
DEFAULT_KEYFILE = "zkpark.key"


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        print(text)


def _uid_bytes(uid: str) -> bytes:
    return uid.encode("utf-8")


def cmd_keygen(args) -> int:
    from .client import cmd_keygen as keygen_file
    from .identity import read_keyfile

    keygen_file(args.keyfile, overwrite=args.force)
    pk = read_keyfile(args.keyfile).public_key()
    _emit(args, {"keyfile": args.keyfile, "public_key": f"{pk:064x}"}, f"wrote {args.keyfile}")
    return EXIT_OK


def cmd_register(args) -> int:
    from .client import cmd_register as register, make_transport

    if not args.uid:
        raise SystemExit("zkpark register: --uid is required")
    t = make_transport(args.server, args.via_relay)
    index = register(t, _uid_bytes(args.uid), args.keyfile, args.state, generate=args.generate, full_sync=args.full_sync)
    _emit(args, {"ok": True, "leaf_index": index}, f"registered at leaf {index}")
    return EXIT_OK


def cmd_sync(args) -> int:
    from .client import cmd_sync as sync, make_transport

    state = sync(make_transport(args.server, args.via_relay), args.state)
    _emit(
        args,
        {"ok": True, "leaf_index": state.leaf_index, "root": state.root, "epoch_id": state.epoch_id},
        f"synced leaf {state.leaf_index}, epoch {state.epoch_id}",
    )
    return EXIT_OK


def cmd_park(args) -> int:
    from .client import cmd_park as park, make_transport

    result = park(make_transport(args.server, args.via_relay), args.state, args.cache_dir)
    _emit(args, {"ok": result.accepted, "reason": result.reason, "retried": result.retried}, str(result))
    return EXIT_OK if result.accepted else EXIT_REJECT


def cmd_bench(args) -> int:
    from .bench import run_bench

    rows = run_bench(args.depth, args.iters, args.out)
    if args.json:
        print(json.dumps([r.__dict__ for r in rows]))
    else:
        for r in rows:
            print(f"{r.phase:<10} depth={r.depth:<3} median={r.median_ms:10.2f} ms  proof={r.proof_bytes} B  n_gates={r.n_gates}")
    return EXIT_OK


def cmd_serve(args) -> int:
    from .server import build_server, load_config

    cfg = load_config(args.config, listen=args.listen, depth=args.depth, epoch_seconds=args.epoch_seconds, data_dir=args.data_dir)
    server = build_server(cfg, args.cache_dir)
    logging.getLogger("zkpark").info("listening on %s (depth %d)", server.address, cfg.depth)
    print(f"listening on {server.address}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    return EXIT_OK


def cmd_params_dump(args) -> int:
    from .poseidon import params_dump

    sys.stdout.write(params_dump())
    return EXIT_OK


def cmd_circuit_dump(args) -> int:
    from .circuit import build_membership_circuit

    sys.stdout.write(build_membership_circuit(args.depth).dump())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="zkpark", description="Anonymous parking authentication with zk-SNARKs.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def client_flags(p):
        p.add_argument("--server", default="127.0.0.1:7700")
        p.add_argument("--state", default=DEFAULT_STATE, help="client state file")
        p.add_argument("--via-relay", metavar="ADDR", help="send through a zkpark-relay at host:port")
        p.add_argument("--json", action="store_true")

    p = sub.add_parser("keygen", help="create a 32-byte secret key file (mode 0600)")
    p.add_argument("--keyfile", default=DEFAULT_KEYFILE)
    p.add_argument("--force", action="store_true", help="overwrite an existing keyfile")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("register", help="register an identity commitment")
    client_flags(p)
    p.add_argument("--keyfile", default=DEFAULT_KEYFILE)
    p.add_argument("--uid", help="vehicle/user identifier (1..64 bytes of UTF-8)")
    p.add_argument("--generate", action="store_true", help="create the keyfile if missing")
    p.add_argument("--full-sync", action="store_true", help="mirror the leaf log instead of querying our own path")
    p.set_defaults(func=cmd_register)

    p = sub.add_parser("sync", help="refresh path, root and epoch nonce")
    client_flags(p)
    p.set_defaults(func=cmd_sync)

    p = sub.add_parser("park", help="prove membership and authenticate")
    client_flags(p)
    p.add_argument("--cache-dir", help="directory for cached proving parameters")
    p.set_defaults(func=cmd_park)

    p = sub.add_parser("bench", help="time setup, preprocess, prove and verify")
    p.add_argument("--depth", type=int, default=20)
    p.add_argument("--iters", type=int, default=3)
    p.add_argument("--out", default="bench.csv")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("serve", help="run the registration and authentication server")
    p.add_argument("--config", help="JSON config file (ZKPARK_* env vars override it)")
    p.add_argument("--listen")
    p.add_argument("--depth", type=int)
    p.add_argument("--epoch-seconds", type=float)
    p.add_argument("--data-dir")
    p.add_argument("--cache-dir")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("params-dump", help="print the Poseidon constants")
    p.set_defaults(func=cmd_params_dump)

    p = sub.add_parser("circuit-dump", help="print the membership circuit gate by gate")
    p.add_argument("--depth", type=int, default=20)
    p.set_defaults(func=cmd_circuit_dump)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    try:
        return args.func(args)
    except (ConnectError, ReassemblyTimeout) as exc:
        _fail(args, "TransportError", exc)
        return EXIT_TRANSPORT
    except (ZkParkError, OSError) as exc:
        _fail(args, type(exc).__name__, exc)
        return EXIT_REJECT


def _fail(args, reason: str, exc: Exception) -> None:
    if getattr(args, "json", False):
        print(json.dumps({"ok": False, "reason": reason, "detail": str(exc)}))
    else:
        print(f"zkpark: {reason}: {exc}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
