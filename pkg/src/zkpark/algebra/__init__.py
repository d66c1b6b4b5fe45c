"""Scalar field, polynomials, FFT domains and BN254 group arithmetic."""

from .curve import P, G1Point, G2Point, msm, pairing_check
from .field import GENERATOR, R, FieldElement, batch_inverse, inv_mod
from .poly import (
    EvaluationDomain,
    Polynomial,
    fft,
    ifft,
    vanishing_poly_eval,
)

__all__ = [
    "P",
    "R",
    "GENERATOR",
    "FieldElement",
    "Polynomial",
    "EvaluationDomain",
    "G1Point",
    "G2Point",
    "batch_inverse",
    "inv_mod",
    "fft",
    "ifft",
    "vanishing_poly_eval",
    "msm",
    "pairing_check",
]
