"""Thin adapter over the compiled BN254 backend shipped with ``zksnake``.

Only bulk kernels go through here: large FFTs, multi-scalar multiplication
and the pairing product. Every input point is validated in Python before it
reaches the backend, because the backend aborts the process (a Rust panic)
on off-curve coordinates instead of raising.
"""

from __future__ import annotations

try:  # pragma: no cover - exercised implicitly
    from zksnake._algebra import ec_bn254 as _ec
    from zksnake._algebra import polynomial_bn254 as _poly
except ImportError:  # pragma: no cover
    _ec = None
    _poly = None

_GT_ONE = None


def available() -> bool:
    return _ec is not None


def require():
    if _ec is None:
        raise RuntimeError("the zksnake BN254 backend is not installed")
    return _ec


def fft(values: list[int], n: int) -> list[int]:
    return _poly.fft(values, n)


def ifft(values: list[int], n: int) -> list[int]:
    return _poly.ifft(values, n)


def g1(x: int, y: int):
    return require().PointG1(x, y)


def g1_identity():
    return require().PointG1.identity()


def g1_generator():
    return require().g1()


def g2(x0: int, x1: int, y0: int, y1: int):
    return require().PointG2(x0, x1, y0, y1)


def g2_generator():
    return require().g2()


def msm_g1(points: list, scalars: list[int]):
    if not points:
        return g1_identity()
    return _ec.multiscalar_mul_g1(points, scalars)


def batch_mul_g1(points: list, scalars: list[int]) -> list:
    return _ec.batch_multi_scalar_g1(points, scalars)


def gt_one():
    global _GT_ONE
    if _GT_ONE is None:
        _GT_ONE = _ec.pairing(g1_identity(), g2_generator())
    return _GT_ONE


def pairing_product_is_one(g1_points: list, g2_points: list) -> bool:
    return _ec.multi_pairing(g1_points, g2_points) == gt_one()
