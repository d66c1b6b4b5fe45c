"""Deterministic demo keys per tree depth, shared by server and client.

Both sides derive the SRS from the same public seed, so they agree on the
verifying key without shipping it around; the client still compares vk
digests with the server before proving. The SRS is cached on disk because
regenerating it is the slowest part of start-up.
"""

from __future__ import annotations

import logging
import os
from functools import lru_cache
from pathlib import Path

from .circuit import build_membership_circuit
from .errors import DecodeError
from .prover.keys import BLINDING_MARGIN, ProvingKey, VerifyingKey, preprocess
from .prover.srs import SRS, trusted_setup

log = logging.getLogger(__name__)

#: public seed: anyone can recompute tau, so these keys are for demos and tests only
DEMO_SRS_SEED = b"zkpark-demo-srs-v1"


def default_cache_dir() -> Path:
    return Path(os.environ.get("ZKPARK_CACHE_DIR", Path.home() / ".cache" / "zkpark"))


def load_srs(max_degree: int, cache_dir: str | os.PathLike | None = None) -> SRS:
    cache = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    path = cache / f"srs-{max_degree}.bin"
    if path.exists():
        try:
            return SRS.from_bytes(path.read_bytes())
        except DecodeError:
            log.warning("ignoring corrupt SRS cache %s", path)
    srs = trusted_setup(max_degree, DEMO_SRS_SEED)
    try:
        cache.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_bytes(srs.to_bytes())
        os.replace(tmp, path)
    except OSError as exc:
        log.warning("could not write SRS cache: %s", exc)
    return srs


@lru_cache(maxsize=4)
def keys_for_depth(depth: int, cache_dir: str | None = None) -> tuple[ProvingKey, VerifyingKey]:
    cs = build_membership_circuit(depth)
    srs = load_srs(cs.n_gates + BLINDING_MARGIN - 1, cache_dir)
    return preprocess(cs, srs)
