"""Authoritative server state: registrations, epochs, nullifier sets.

All mutation goes through one lock. Proof verification, the expensive part of
``authenticate``, runs with the lock released and the cheap checks are
repeated afterwards, so a rotation or a competing request that lands in
between cannot produce a second Accept.
"""

from __future__ import annotations

import secrets
import threading
import time
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Callable

from ..algebra.field import R
from ..circuit import PublicInputs
from ..errors import ArgumentError, CapacityError, DecodeError, NotFoundError
from ..identity import MAX_UID_BYTES
from ..merkle import IncrementalMerkleTree, MerklePath
from ..prover.keys import VerifyingKey
from ..prover.plonk import Proof, verify
from .persist import EpochRecord, LeafRecord, NullifierRecord, StateLog

ROOT_HISTORY = 64
RETENTION_EPOCHS = 3
DEFAULT_EPOCH_SECONDS = 600.0


class RejectReason(str, Enum):
    MALFORMED = "Malformed"
    STALE_NULLIFIER = "StaleNullifier"
    UNKNOWN_ROOT = "UnknownRoot"
    NULLIFIER_SEEN = "NullifierSeen"
    INVALID_PROOF = "InvalidProof"


@dataclass(frozen=True)
class AuthResult:
    accepted: bool
    reason: RejectReason | None = None

    def __str__(self):
        return "Accept" if self.accepted else f"Reject({self.reason.value})"


ACCEPT = AuthResult(True)


def reject(reason: RejectReason) -> AuthResult:
    return AuthResult(False, reason)


@dataclass(frozen=True)
class RegistrationRecord:
    uid: bytes
    commitment: int
    leaf_index: int
    registered_at: float


@dataclass(frozen=True)
class EpochState:
    epoch_id: int
    nu: int
    started_at: float
    duration: float


@dataclass(frozen=True)
class RegisterResult:
    leaf_index: int
    path: MerklePath
    root: int


@dataclass(frozen=True)
class StateSnapshot:
    path: MerklePath
    root: int
    nu: int
    epoch_id: int


class ServerState:
    def __init__(
        self,
        depth: int,
        vk: VerifyingKey | None = None,
        log: StateLog | None = None,
        epoch_seconds: float = DEFAULT_EPOCH_SECONDS,
        root_history: int = ROOT_HISTORY,
        retention_epochs: int = RETENTION_EPOCHS,
        clock: Callable[[], float] = time.time,
        verifier: Callable[[PublicInputs, Proof], bool] | None = None,
    ):
        if verifier is None:
            if vk is None:
                raise ArgumentError("need a verifying key or a verifier callable")
            verifier = lambda publics, proof: verify(vk, publics, proof)  # noqa: E731
        self.depth = depth
        self.vk = vk
        self.log = log
        self.epoch_seconds = float(epoch_seconds)
        self.retention_epochs = retention_epochs
        self.clock = clock
        self._verify = verifier
        self._lock = threading.RLock()
        self.tree = IncrementalMerkleTree(depth)
        self.records: list[RegistrationRecord] = []
        self._roots: deque[int] = deque(maxlen=root_history)
        self._root_set: dict[int, int] = {}  # root -> multiplicity inside the window
        self.epoch: EpochState | None = None
        self.nullifiers: dict[int, set[int]] = {}
        if log is not None:
            self._replay(log.replay())
        if self.epoch is None:
            self.rotate_epoch()

    # -- recovery ------------------------------------------------------------

    def _replay(self, records) -> None:
        for rec in records:
            if isinstance(rec, LeafRecord):
                self._apply_leaf(rec)
            elif isinstance(rec, EpochRecord):
                self._apply_epoch(EpochState(rec.epoch_id, rec.nu, rec.started_at, rec.duration))
            elif isinstance(rec, NullifierRecord):
                self.nullifiers.setdefault(rec.epoch_id, set()).add(rec.nf)

    def _apply_leaf(self, rec: LeafRecord) -> int:
        index = self.tree.insert(rec.commitment)
        if index != rec.leaf_index:
            raise DecodeError(f"log leaf index {rec.leaf_index} does not match tree position {index}")
        self.records.append(RegistrationRecord(rec.uid, rec.commitment, index, rec.registered_at))
        self._remember_root(self.tree.root)
        return index

    def _remember_root(self, root: int) -> None:
        if len(self._roots) == self._roots.maxlen:
            old = self._roots[0]
            self._root_set[old] -= 1
            if not self._root_set[old]:
                del self._root_set[old]
        self._roots.append(root)
        self._root_set[root] = self._root_set.get(root, 0) + 1

    def _apply_epoch(self, ep: EpochState) -> None:
        self.epoch = ep
        self.nullifiers.setdefault(ep.epoch_id, set())
        for eid in [e for e in self.nullifiers if e <= ep.epoch_id - self.retention_epochs]:
            del self.nullifiers[eid]

    # -- operations ----------------------------------------------------------

    def _tick(self) -> None:
        ep = self.epoch
        if self.epoch_seconds > 0 and self.clock() >= ep.started_at + ep.duration:
            self.rotate_epoch()

    def rotate_epoch(self) -> EpochState:
        with self._lock:
            eid = 0 if self.epoch is None else self.epoch.epoch_id + 1
            nu = secrets.randbelow(R - 1) + 1
            ep = EpochState(eid, nu, self.clock(), self.epoch_seconds)
            if self.log is not None:
                self.log.append(EpochRecord(ep.epoch_id, ep.nu, ep.started_at, ep.duration))
            self._apply_epoch(ep)
            return ep

    def current_epoch(self) -> EpochState:
        with self._lock:
            self._tick()
            return self.epoch

    def register(self, uid: bytes, commitment: int) -> RegisterResult:
        if not isinstance(commitment, int) or not 0 <= commitment < R:
            raise DecodeError("commitment is not a canonical field element")
        if not isinstance(uid, (bytes, bytearray)) or not 1 <= len(uid) <= MAX_UID_BYTES:
            raise DecodeError(f"uid must be 1..{MAX_UID_BYTES} bytes")
        with self._lock:
            rec = LeafRecord(self.tree.next_index, commitment, bytes(uid), self.clock())
            if self.tree.next_index >= self.tree.capacity:
                raise CapacityError(f"tree of depth {self.depth} is full")
            if self.log is not None:
                self.log.append(rec)
            index = self._apply_leaf(rec)
            return RegisterResult(index, self.tree.path(index), self.tree.root)

    def query_state(self, leaf_index: int) -> StateSnapshot:
        with self._lock:
            self._tick()
            path = self.tree.path(leaf_index)  # NotFoundError for unknown indices
            return StateSnapshot(path, self.tree.root, self.epoch.nu, self.epoch.epoch_id)

    def leaves(self, start: int = 0, limit: int | None = None) -> list[int]:
        with self._lock:
            if start < 0 or start > self.tree.next_index:
                raise NotFoundError(f"leaf log has {self.tree.next_index} entries, asked from {start}")
            end = self.tree.next_index if limit is None else min(self.tree.next_index, start + limit)
            return self.tree.leaves[start:end]

    @property
    def root(self) -> int:
        return self.tree.root

    @property
    def next_index(self) -> int:
        return self.tree.next_index

    def root_known(self, root: int) -> bool:
        with self._lock:
            return root in self._root_set

    def nullifier_set(self, epoch_id: int | None = None) -> frozenset[int]:
        with self._lock:
            eid = self.epoch.epoch_id if epoch_id is None else epoch_id
            return frozenset(self.nullifiers.get(eid, ()))

    def _precheck(self, publics: PublicInputs) -> AuthResult | int:
        self._tick()
        if publics.nu != self.epoch.nu:
            return reject(RejectReason.STALE_NULLIFIER)
        if publics.rh not in self._root_set:
            return reject(RejectReason.UNKNOWN_ROOT)
        if publics.nf in self.nullifiers[self.epoch.epoch_id]:
            return reject(RejectReason.NULLIFIER_SEEN)
        return self.epoch.epoch_id

    def authenticate(self, publics: PublicInputs, proof: Proof | bytes) -> AuthResult:
        if not isinstance(proof, Proof):
            try:
                proof = Proof.from_bytes(proof)
            except DecodeError:
                return reject(RejectReason.MALFORMED)
        with self._lock:
            pre = self._precheck(publics)
        if isinstance(pre, AuthResult):
            return pre
        if not self._verify(publics, proof):
            return reject(RejectReason.INVALID_PROOF)
        with self._lock:
            again = self._precheck(publics)
            if isinstance(again, AuthResult):
                return again
            if self.log is not None:
                self.log.append(NullifierRecord(again, publics.nf))
            self.nullifiers[again].add(publics.nf)
            return ACCEPT
