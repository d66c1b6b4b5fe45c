"""Universal setup, preprocessing, proving and verification."""

from .keys import ProvingKey, VerifyingKey, preprocess
from .plonk import PROOF_BYTES, Proof, derive_challenges, deserialize, prove, serialize, verify
from .srs import SRS, trusted_setup
from .transcript import Transcript

__all__ = [
    "SRS",
    "trusted_setup",
    "ProvingKey",
    "VerifyingKey",
    "preprocess",
    "Proof",
    "PROOF_BYTES",
    "prove",
    "verify",
    "serialize",
    "deserialize",
    "derive_challenges",
    "Transcript",
]
