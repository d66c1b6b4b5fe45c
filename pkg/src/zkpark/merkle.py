"""Append-only binary Merkle tree of identity commitments (Poseidon nodes)."""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable, Sequence

from .algebra.field import BYTES, R, decode_int, encode_int
from .errors import ArgumentError, CapacityError, ConfigError, DecodeError, NotFoundError
from .poseidon import hash2_int

DEFAULT_DEPTH = 20
MIN_DEPTH = 2
MAX_DEPTH = 32
EMPTY_LEAF = 0


def zero_hashes(depth: int) -> list[int]:
    """zero[0] = 0, zero[i+1] = H(zero[i], zero[i])."""
    zeros = [EMPTY_LEAF]
    for _ in range(depth):
        zeros.append(hash2_int(zeros[-1], zeros[-1]))
    return zeros


@dataclass(frozen=True)
class MerklePath:
    siblings: tuple[int, ...]
    index: int

    def __post_init__(self):
        object.__setattr__(self, "siblings", tuple(int(s) % R for s in self.siblings))
        if not 0 <= self.index < (1 << len(self.siblings)):
            raise ArgumentError(f"leaf index {self.index} out of range for depth {len(self.siblings)}")

    @property
    def depth(self) -> int:
        return len(self.siblings)

    def index_bits(self) -> list[int]:
        """Direction bits from the leaf upwards; 1 means the running node is a right child."""
        return [(self.index >> i) & 1 for i in range(self.depth)]


def fold_path(leaf: int, path: MerklePath) -> int:
    cur = int(leaf) % R
    for i, sib in enumerate(path.siblings):
        if (path.index >> i) & 1:
            cur = hash2_int(sib, cur)
        else:
            cur = hash2_int(cur, sib)
    return cur


def verify_path(leaf, path: MerklePath, root) -> bool:
    return fold_path(int(leaf), path) == int(root) % R


class IncrementalMerkleTree:
    """Fixed-depth tree filled left to right; empty leaves are 0.

    ``last_insert_hashes`` records how many node hashes the latest insert
    computed (always exactly ``depth``).
    """

    def __init__(self, depth: int = DEFAULT_DEPTH):
        if not MIN_DEPTH <= depth <= MAX_DEPTH:
            raise ConfigError(f"tree depth must be in [{MIN_DEPTH}, {MAX_DEPTH}], got {depth}")
        self.depth = depth
        self.zero_cache = zero_hashes(depth)
        self.filled_subtrees = list(self.zero_cache[:depth])
        self.next_index = 0
        self.root = self.zero_cache[depth]
        self.leaves: list[int] = []
        self.last_insert_hashes = 0
        # levels[i] holds every materialised node at height i (level 0 = leaves)
        self._levels: list[list[int]] = [[] for _ in range(depth + 1)]

    @property
    def capacity(self) -> int:
        return 1 << self.depth

    def __len__(self) -> int:
        return self.next_index

    def insert(self, leaf) -> int:
        if self.next_index >= self.capacity:
            raise CapacityError(f"tree of depth {self.depth} is full")
        leaf = int(leaf) % R
        index = self.next_index
        idx = index
        cur = leaf
        self._set_node(0, idx, cur)
        hashes = 0
        for level in range(self.depth):
            if idx & 1 == 0:
                self.filled_subtrees[level] = cur
                cur = hash2_int(cur, self.zero_cache[level])
            else:
                cur = hash2_int(self.filled_subtrees[level], cur)
            hashes += 1
            idx >>= 1
            self._set_node(level + 1, idx, cur)
        self.leaves.append(leaf)
        self.root = cur
        self.next_index += 1
        self.last_insert_hashes = hashes
        return index

    def _set_node(self, level: int, idx: int, value: int) -> None:
        nodes = self._levels[level]
        if idx == len(nodes):
            nodes.append(value)
        else:
            nodes[idx] = value

    def _node(self, level: int, idx: int) -> int:
        nodes = self._levels[level]
        return nodes[idx] if idx < len(nodes) else self.zero_cache[level]

    def path(self, index: int) -> MerklePath:
        if not 0 <= index < self.next_index:
            raise NotFoundError(f"no leaf at index {index}")
        siblings = [self._node(level, (index >> level) ^ 1) for level in range(self.depth)]
        return MerklePath(tuple(siblings), index)

    # -- persistence: one 32-byte field encoding per leaf ----------------------

    @classmethod
    def from_leaves(cls, leaves: Iterable[int], depth: int = DEFAULT_DEPTH) -> IncrementalMerkleTree:
        tree = cls(depth)
        for leaf in leaves:
            tree.insert(leaf)
        return tree

    def save_leaf_log(self, path: str | os.PathLike) -> None:
        with open(path, "wb") as fh:
            fh.write(encode_leaves(self.leaves))

    @classmethod
    def load_leaf_log(cls, path: str | os.PathLike, depth: int = DEFAULT_DEPTH) -> IncrementalMerkleTree:
        with open(path, "rb") as fh:
            return cls.from_leaves(decode_leaves(fh.read()), depth)


def encode_leaves(leaves: Sequence[int]) -> bytes:
    return b"".join(encode_int(v) for v in leaves)


def decode_leaves(data: bytes) -> list[int]:
    if len(data) % BYTES:
        raise DecodeError(f"leaf log length {len(data)} is not a multiple of {BYTES}")
    return [decode_int(data[i:i + BYTES]) for i in range(0, len(data), BYTES)]


def append_leaf_record(path: str | os.PathLike, leaf: int) -> None:
    with open(path, "ab") as fh:
        fh.write(encode_int(leaf))
