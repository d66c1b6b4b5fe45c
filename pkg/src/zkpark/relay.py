"""Roadside-unit stand-in: a lossy, fragmenting store-and-forward proxy.

Vehicles talk to the relay in UDP datagrams, one frame each. A frame is an
8-byte little-endian header ``msg_id u32 | seq u16 | total u16`` followed by
at most 236 payload bytes. The relay reassembles a message, forwards the raw
bytes to the server over TCP, and fragments the reply back. It never parses
the payload.

Loss and latency are injected on every frame in both directions from a
seeded generator, and everything runs on one thread so a fixed seed gives
the same drop pattern for the same traffic.
"""

from __future__ import annotations

import argparse
import heapq
import logging
import random
import select
import socket
import struct
import sys
import time
from collections import OrderedDict
from dataclasses import dataclass

from .errors import ArgumentError, ConnectError, DecodeError, ReassemblyTimeout
from .server.wire import decode_body, encode_message, parse_addr

log = logging.getLogger(__name__)

FRAME_PAYLOAD = 236
HEADER = struct.Struct("<IHH")
MAX_MESSAGE = 64 * 1024
REASSEMBLY_TIMEOUT = 10.0
_RESEND_GAP = 0.05


@dataclass(frozen=True)
class Frame:
    msg_id: int
    seq: int
    total: int
    payload: bytes

    def __post_init__(self):
        if not 0 <= self.seq < self.total:
            raise DecodeError(f"frame seq {self.seq} outside [0, {self.total})")
        if len(self.payload) > FRAME_PAYLOAD:
            raise DecodeError(f"frame payload of {len(self.payload)} bytes exceeds {FRAME_PAYLOAD}")

    def to_bytes(self) -> bytes:
        return HEADER.pack(self.msg_id, self.seq, self.total) + self.payload

    @classmethod
    def from_bytes(cls, data: bytes) -> Frame:
        if len(data) < HEADER.size:
            raise DecodeError("datagram shorter than a frame header")
        msg_id, seq, total = HEADER.unpack_from(data)
        return cls(msg_id, seq, total, bytes(data[HEADER.size:]))


def fragment(message: bytes, msg_id: int = 0) -> list[Frame]:
    if len(message) > MAX_MESSAGE:
        raise ArgumentError(f"message of {len(message)} bytes exceeds {MAX_MESSAGE}")
    total = max(1, -(-len(message) // FRAME_PAYLOAD))
    return [
        Frame(msg_id, i, total, bytes(message[i * FRAME_PAYLOAD:(i + 1) * FRAME_PAYLOAD]))
        for i in range(total)
    ]


def reassemble(frames) -> bytes:
    """Join one message's frames in any order; duplicates are harmless."""
    frames = list(frames)
    if not frames:
        raise ReassemblyTimeout("no frames")
    first = frames[0]
    parts: dict[int, bytes] = {}
    for f in frames:
        if f.msg_id != first.msg_id or f.total != first.total:
            raise DecodeError("frames belong to different messages")
        parts[f.seq] = f.payload
    missing = [s for s in range(first.total) if s not in parts]
    if missing:
        raise ReassemblyTimeout(f"message {first.msg_id} is missing frames {missing}")
    return b"".join(parts[s] for s in range(first.total))


class Reassembler:
    """Per-msg_id buffers that survive retransmissions until they complete or expire."""

    def __init__(self, timeout: float = REASSEMBLY_TIMEOUT, clock=time.monotonic):
        self.timeout = timeout
        self.clock = clock
        self._buffers: dict[int, tuple[int, dict[int, bytes], float]] = {}

    def __len__(self):
        return len(self._buffers)

    def add(self, frame: Frame) -> bytes | None:
        total, parts, started = self._buffers.get(frame.msg_id, (frame.total, {}, self.clock()))
        if total != frame.total:
            raise DecodeError(f"frame total {frame.total} disagrees with buffered {total}")
        parts[frame.seq] = frame.payload
        if len(parts) == total:
            self._buffers.pop(frame.msg_id, None)
            return b"".join(parts[s] for s in range(total))
        self._buffers[frame.msg_id] = (total, parts, started)
        return None

    def expire(self, strict: bool = False) -> list[int]:
        """Drop buffers older than the timeout; ``strict`` raises instead of returning them."""
        now = self.clock()
        dead = [m for m, (_, _, t0) in self._buffers.items() if now - t0 > self.timeout]
        for m in dead:
            del self._buffers[m]
        if strict and dead:
            raise ReassemblyTimeout(f"messages {dead} timed out with frames missing")
        return dead


class LossModel:
    def __init__(self, loss: float, seed: int = 0):
        if not 0.0 <= loss < 1.0:
            raise ArgumentError(f"loss rate must be in [0, 1), got {loss}")
        self.loss = loss
        self._rng = random.Random(seed)

    def drop(self) -> bool:
        return self.loss > 0 and self._rng.random() < self.loss


def forward_upstream(server: tuple[str, int], message: bytes, timeout: float = 30.0) -> bytes:
    """Send one framed message to the server and return its framed reply, verbatim."""
    try:
        with socket.create_connection(server, timeout=timeout) as sock:
            sock.sendall(message)
            head = _read_exact(sock, 4)
            body = _read_exact(sock, int.from_bytes(head, "big"))
            return head + body
    except OSError as exc:
        return encode_message({"ok": False, "reason": "TransportError", "detail": str(exc)})


def _read_exact(sock: socket.socket, n: int) -> bytes:
    buf = bytearray()
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            raise ConnectionError("upstream closed the connection")
        buf += chunk
    return bytes(buf)


class Relay:
    def __init__(
        self,
        listen: str,
        server: str,
        loss: float = 0.0,
        latency_ms: float = 0.0,
        seed: int = 0,
        reassembly_timeout: float = REASSEMBLY_TIMEOUT,
        cache_size: int = 1024,
    ):
        self.server = parse_addr(server)
        self.loss = LossModel(loss, seed)
        self.latency = latency_ms / 1000.0
        self.sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self.sock.bind(parse_addr(listen))
        self.reasm = Reassembler(reassembly_timeout)
        self._responses: OrderedDict[int, tuple[list[Frame], float]] = OrderedDict()
        self._cache_size = cache_size
        self._events: list = []  # heap of (due, counter, kind, payload, addr)
        self._counter = 0
        self._running = False
        self.forwarded = 0
        self.frames_in = 0
        self.frames_dropped = 0

    @property
    def address(self) -> str:
        host, port = self.sock.getsockname()[:2]
        return f"{host}:{port}"

    def _schedule(self, kind: str, payload, addr) -> None:
        self._counter += 1
        heapq.heappush(self._events, (time.monotonic() + self.latency, self._counter, kind, payload, addr))

    def _emit(self, frames: list[Frame], addr) -> None:
        for f in frames:
            if self.loss.drop():
                self.frames_dropped += 1
                continue
            self._schedule("out", f.to_bytes(), addr)

    def _ingest(self, data: bytes, addr) -> None:
        try:
            frame = Frame.from_bytes(data)
        except DecodeError:
            return
        cached = self._responses.get(frame.msg_id)
        if cached is not None:
            frames, last = cached
            now = time.monotonic()
            if now - last >= _RESEND_GAP:
                self._responses[frame.msg_id] = (frames, now)
                self._emit(frames, addr)
            return
        try:
            message = self.reasm.add(frame)
        except DecodeError:
            return
        if message is None:
            return
        reply = forward_upstream(self.server, message)
        self.forwarded += 1
        frames = fragment(reply, frame.msg_id)
        self._responses[frame.msg_id] = (frames, time.monotonic())
        while len(self._responses) > self._cache_size:
            self._responses.popitem(last=False)
        self._emit(frames, addr)

    def step(self, max_wait: float = 0.2) -> None:
        now = time.monotonic()
        while self._events and self._events[0][0] <= now:
            _, _, kind, payload, addr = heapq.heappop(self._events)
            if kind == "in":
                self._ingest(payload, addr)
            else:
                self.sock.sendto(payload, addr)
        wait = max_wait
        if self._events:
            wait = max(0.0, min(wait, self._events[0][0] - time.monotonic()))
        ready, _, _ = select.select([self.sock], [], [], wait)
        if ready:
            try:
                data, addr = self.sock.recvfrom(65535)
            except OSError:
                return
            self.frames_in += 1
            if self.loss.drop():
                self.frames_dropped += 1
            else:
                self._schedule("in", data, addr)
        for msg_id in self.reasm.expire():
            log.debug("reassembly of message %d timed out", msg_id)

    def serve_forever(self) -> None:
        self._running = True
        while self._running:
            self.step()

    def stop(self) -> None:
        self._running = False

    def close(self) -> None:
        self._running = False
        self.sock.close()


class RelayTransport:
    """Client side: whole-message retransmission until a complete reply arrives."""

    def __init__(self, relay: str, attempts: int = 5, attempt_timeout: float = 2.0, rng: random.Random | None = None):
        self.relay = parse_addr(relay)
        self.attempts = attempts
        self.attempt_timeout = attempt_timeout
        self._rng = rng or random.SystemRandom()
        self.last_attempts = 0

    def request(self, msg: dict) -> dict:
        msg_id = self._rng.getrandbits(32)
        frames = fragment(encode_message(msg), msg_id)
        reasm = Reassembler(timeout=self.attempts * self.attempt_timeout + 1)
        with socket.socket(socket.AF_INET, socket.SOCK_DGRAM) as sock:
            for attempt in range(1, self.attempts + 1):
                self.last_attempts = attempt
                for f in frames:
                    sock.sendto(f.to_bytes(), self.relay)
                deadline = time.monotonic() + self.attempt_timeout
                while (left := deadline - time.monotonic()) > 0:
                    ready, _, _ = select.select([sock], [], [], left)
                    if not ready:
                        break
                    try:
                        data = sock.recv(65535)
                        frame = Frame.from_bytes(data)
                    except (OSError, DecodeError):
                        continue
                    if frame.msg_id != msg_id:
                        continue
                    reply = reasm.add(frame)
                    if reply is not None:
                        if len(reply) < 4 or int.from_bytes(reply[:4], "big") != len(reply) - 4:
                            raise DecodeError("relay reply is not a framed message")
                        return decode_body(reply[4:])
        if len(reasm):
            raise ReassemblyTimeout(f"reply from relay {self.relay} still incomplete after {self.attempts} attempts")
        raise ConnectError(f"no reply from relay {self.relay} after {self.attempts} attempts")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="zkpark-relay", description="Lossy fragmenting relay between vehicles and the server.")
    ap.add_argument("--listen", default="127.0.0.1:7701", help="UDP host:port to listen on")
    ap.add_argument("--server", default="127.0.0.1:7700", help="server TCP host:port")
    ap.add_argument("--loss", type=float, default=0.0, help="per-frame drop probability in [0, 1)")
    ap.add_argument("--latency-ms", type=float, default=0.0, help="one-way delay added to every frame")
    ap.add_argument("--seed", type=int, default=0, help="seed for the loss pattern")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(name)s %(message)s")
    try:
        relay = Relay(args.listen, args.server, args.loss, args.latency_ms, args.seed)
    except (ArgumentError, DecodeError, OSError) as exc:
        print(f"zkpark-relay: {exc}", file=sys.stderr)
        return 2
    log.info("relay on udp %s -> tcp %s:%d (loss %.2f, latency %.0f ms)", relay.address, *relay.server, args.loss, args.latency_ms)
    try:
        relay.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        relay.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
