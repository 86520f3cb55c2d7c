"""Explicit constants from the local L^inf-L^q (Moser) estimate and the two-sided comparison of h_q with h_1.

Only the ``p -> 1`` limits are fully explicit; the sharp Sobolev constant
``T_{N,p}`` for ``p > 1`` has no formula here and is never computed.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

from .closed_forms import Exponent, unit_ball_volume
from .errors import PreconditionError

LOG2 = math.log(2.0)


def isoperimetric_constant(N: int) -> float:
    return N * unit_ball_volume(N) ** (1.0 / N)


def talenti_limit(N: int) -> float:
    if N < 2:
        raise PreconditionError("N must be >= 2")
    return 1.0 / isoperimetric_constant(N)


def sobolev_conjugate(N: int, p: float) -> float:
    return N * p / (N - p)


def _check_moser_range(N: int, p: float, q: float) -> None:
    if N < 2:
        raise PreconditionError("N must be >= 2")
    if not (1.0 <= p < min(2.0, N)):
        raise PreconditionError(f"need 1 <= p < min(2, N), got p={p}")
    if not (p <= q <= sobolev_conjugate(N, p)):
        raise PreconditionError(f"need p <= q <= p* = {sobolev_conjugate(N, p):g}, got q={q}")


def A_const(N: int, p: float, q: float) -> float:
    _check_moser_range(N, p, q)
    ps = sobolev_conjugate(N, p)
    first = (p - 1.0) / q * N * (N - p) / p**2 * math.log(ps / p)
    second = N / p * (p - 1.0) / q * math.log(q / p)
    return math.exp(first) * math.exp(second)


def _b_series_ratio(N: int) -> float:
    return 1.0 - 1.0 / N


def B_exponent_sum(N: int, terms: Optional[int] = None) -> float:
    """``sum_{i < terms} (i + 2) x^i`` with ``x = 1 - 1/N`` (full series when ``terms`` is None)."""
    x = _b_series_ratio(N)
    if terms is None:
        return (2.0 - x) / (1.0 - x) ** 2
    return math.fsum((i + 2) * x**i for i in range(terms))


def B_tail(N: int, terms: int) -> float:
    """Exact remainder ``sum_{i >= terms} (i + 2) x^i``."""
    x = _b_series_ratio(N)
    return x**terms * ((terms + 2) / (1.0 - x) + x / (1.0 - x) ** 2)


def B_const(N: int, p: float, q: float) -> float:
    """``exp((p/q) log 2 sum (i+2)(1-1/N)^i)``; equals ``2^(p N (N+1)/q)``."""
    _check_moser_range(N, p, q)
    return math.exp(p / q * LOG2 * B_exponent_sum(N))


@dataclass(frozen=True)
class BPartial:
    lower: float  # truncated product
    upper: float  # truncated product times the exact tail factor


def B_partial(N: int, p: float, q: float, terms: int) -> BPartial:
    _check_moser_range(N, p, q)
    if terms < 1:
        raise PreconditionError("truncation must be >= 1")
    s = B_exponent_sum(N, terms)
    lower = math.exp(p / q * LOG2 * s)
    upper = math.exp(p / q * LOG2 * (s + B_tail(N, terms)))
    return BPartial(lower, upper)


def moser_constant(N: int, q: float) -> float:
    """Limit as ``p -> 1`` of the local bound constant: ``B_{N,1,q} (4 / (N w_N^(1/N)))^(N/q)``.

    Defined for ``1 <= q < N/(N-1)``; ``q = 1`` is the boundary value.
    """
    if N < 2:
        raise PreconditionError("N must be >= 2")
    if not (1.0 <= q < N / (N - 1)):
        raise PreconditionError(f"need 1 <= q < N/(N-1), got q={q}")
    B = math.exp(LOG2 * B_exponent_sum(N) / q)
    return B * (4.0 / isoperimetric_constant(N)) ** (N / q)


@dataclass(frozen=True)
class ComparisonConstants:
    """Constants in ``lower * h1^s <= h_q <= upper * h1^s`` with ``s = N/q - (N-1)``.

    For ``q < 1`` only the upper bound exists (``lower`` is None).
    """

    lower: Optional[float]
    upper: float
    one_sided: bool


def comparison_constants(N: int, q: float) -> ComparisonConstants:
    e = Exponent(N, q)
    if N < 2:
        raise PreconditionError("N must be >= 2")
    iso = isoperimetric_constant(N) ** (N - N / e.q)
    if q == 1:
        return ComparisonConstants(1.0, 1.0, False)
    if q < 1:
        return ComparisonConstants(None, iso, True)
    return ComparisonConstants(iso, 3.0 * 2**N * moser_constant(N, q), False)


@dataclass(frozen=True)
class ConstantBundle:
    N: int
    q: float
    talenti_limit: float
    A: Optional[float]
    B: Optional[float]
    C_moser: Optional[float]
    C_lower: Optional[float]
    C_upper: float

    def to_dict(self) -> dict:
        return asdict(self)


def constant_bundle(N: int, q: float) -> ConstantBundle:
    cc = comparison_constants(N, q)
    if q >= 1:
        A = A_const(N, 1.0, q)
        B = math.exp(LOG2 * B_exponent_sum(N) / q)
        C = moser_constant(N, q)
    else:
        A = B = C = None
    return ConstantBundle(N, q, talenti_limit(N), A, B, C, cc.lower, cc.upper)
