"""Closed-form values: balls, the exponent window, phi_beta, disjoint unions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .errors import ExponentError, PreconditionError

RIDGE_RATIO = (math.sqrt(7.0) - 2.0) / 3.0
TWO_BALL_GRID = 2001


def unit_ball_volume(N: int) -> float:
    """Volume of the unit ball in R^N."""
    return math.pi ** (N / 2.0) / math.gamma(N / 2.0 + 1.0)


@dataclass(frozen=True)
class Exponent:
    """Dimension ``N`` and exponent ``q`` with ``0 < q < N/(N-1)``.

    For ``N = 1`` any ``q > 0`` is allowed, including ``math.inf``.
    """

    N: int
    q: float

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ExponentError(f"dimension must be a positive integer, got {self.N}")
        object.__setattr__(self, "N", int(self.N))
        q = float(self.q)
        if not q > 0 or math.isnan(q):
            raise ExponentError(f"q must be positive, got {self.q}")
        if self.N >= 2 and not q < self.critical:
            raise ExponentError(
                f"q={q:g} is outside 0 < q < N/(N-1) = {self.critical:g} for N={self.N}: "
                "at q = N/(N-1) the constant is the sharp isoperimetric constant for every set, "
                "and for larger q shrinking balls drive it to 0"
            )
        object.__setattr__(self, "q", q)

    @property
    def critical(self) -> float:
        return math.inf if self.N == 1 else self.N / (self.N - 1)

    @property
    def inv_q(self) -> float:
        return 0.0 if math.isinf(self.q) else 1.0 / self.q

    @property
    def comparison_power(self) -> float:
        """Power ``N/q - (N-1)`` carried by ``h_1`` in the comparison bounds."""
        return self.N * self.inv_q - (self.N - 1)


def _exp(e) -> Exponent:
    return e if isinstance(e, Exponent) else Exponent(2, e)


def hq_ball(e: Exponent, R: float) -> float:
    e = _exp(e)
    if not R > 0:
        raise PreconditionError("radius must be positive")
    w = unit_ball_volume(e.N)
    return e.N * w ** (1.0 - e.inv_q) * R ** (e.N - 1 - e.N * e.inv_q)


def q_limit_value(N: int) -> float:
    """Value at the critical exponent: the sharp isoperimetric constant (2 for N = 1, q = inf)."""
    if N == 1:
        return 2.0
    if N < 1:
        raise PreconditionError("N must be >= 1")
    return N * unit_ball_volume(N) ** (1.0 / N)


@dataclass(frozen=True)
class PhiParams:
    a: float
    b: float
    c: float
    d: float
    beta: float

    def __post_init__(self):
        if self.a < 0 or self.b < 0:
            raise PreconditionError("a, b must be nonnegative")
        if not (self.c > 0 and self.d > 0 and self.beta > 0):
            raise PreconditionError("c, d, beta must be positive")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return (self.a + t * self.b) / (self.c + t**self.beta * self.d) ** (1.0 / self.beta)


@dataclass(frozen=True)
class PhiMin:
    value: float
    t_star: Optional[float]
    attained: bool
    boundary: Optional[str] = None  # "t->0" or "t->inf" when the infimum sits at an end


def phi_beta_min(p: PhiParams) -> PhiMin:
    """Infimum over ``t > 0`` of ``(a + t b) / (c + t^beta d)^(1/beta)``."""
    a, b, c, d, beta = p.a, p.b, p.c, p.d, p.beta
    if beta >= 1:
        left = a / c ** (1.0 / beta)
        right = b / d ** (1.0 / beta)
        return PhiMin(min(left, right), None, False, "t->0" if left <= right else "t->inf")
    if a == 0:
        return PhiMin(0.0, None, False, "t->0")
    if b == 0:
        return PhiMin(0.0, None, False, "t->inf")
    k = beta / (1.0 - beta)
    value = ((c ** (1.0 / beta) / a) ** k + (d ** (1.0 / beta) / b) ** k) ** ((beta - 1.0) / beta)
    t_star = ((a / c) * (d / b)) ** (1.0 / (1.0 - beta))
    return PhiMin(value, t_star, True)


def combine_disjoint(values: Sequence[float], e) -> float:
    """Constant of a disjoint union from the constants of its pieces.

    ``q >= 1``: the minimum. ``q < 1``: the power combination
    ``(sum v_i^(-q/(1-q)))^((q-1)/q)``, which is 0 as soon as one piece has 0.
    """
    e = _exp(e)
    vals = [float(v) for v in values]
    if not vals:
        raise PreconditionError("need at least one component value")
    if any(v < 0 for v in vals):
        raise PreconditionError("component values must be nonnegative")
    q = e.q
    if q >= 1:
        return min(vals)
    if any(v == 0 for v in vals):
        return 0.0
    k = q / (1.0 - q)
    return sum(v ** (-k) for v in vals) ** ((q - 1.0) / q)


def balls_ratio(radii, q: float):
    """Perimeter over area^(1/q) for disjoint planar disks with the given radii (last axis)."""
    radii = np.asarray(radii, dtype=float)
    P = 2.0 * math.pi * radii.sum(axis=-1)
    A = math.pi * (radii**2).sum(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = P / A ** (1.0 / q)
    return np.where(A > 0, out, np.inf)


@dataclass(frozen=True)
class TwoBallResult:
    value: float
    radii: tuple
    method: str  # "analytic" or "grid"


def two_ball_h(r: float, R: float, q: float, force_grid: bool = False) -> TwoBallResult:
    """Generalized Cheeger constant of two disjoint planar disks with radii ``r <= R``.

    By the isoperimetric inequality the competitors reduce to one disk per
    component, so this minimizes ``2 pi (r1 + r2) / (pi (r1^2 + r2^2))^(1/q)``
    over ``[0, r] x [0, R]`` minus the origin.
    """
    if not (0 < r <= R):
        raise PreconditionError("need 0 < r <= R")
    Exponent(2, q)
    if not force_grid and q == 0.5 and r / R < RIDGE_RATIO:
        return TwoBallResult(2.0 / (math.pi * R**3), (0.0, R), "analytic")

    t = np.linspace(0.0, r, TWO_BALL_GRID)
    s = np.linspace(0.0, R, TWO_BALL_GRID)
    T, S = np.meshgrid(t, s, indexing="ij")
    vals = balls_ratio(np.stack([T, S], axis=-1), q)
    i, j = np.unravel_index(np.argmin(vals), vals.shape)
    best_x = np.array([t[i], s[j]])
    best = float(vals[i, j])

    res = minimize(
        lambda x: float(balls_ratio(x, q)),
        best_x,
        method="Nelder-Mead",
        bounds=[(0.0, r), (0.0, R)],
        options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 4000},
    )
    if res.fun < best:
        best, best_x = float(res.fun), res.x
    return TwoBallResult(best, (float(best_x[0]), float(best_x[1])), "grid")


def lambda_upper_proxy_two_balls(r: float, R: float, q: float) -> float:
    """Upper bound for the sharp Poincare constant of two disjoint disks, ``q < 1``.

    Each disk's Poincare constant is at most its Cheeger constant and the
    union rule is increasing in each entry, so combining the disk values bounds
    the union's constant from above.
    """
    if q >= 1:
        raise PreconditionError("the proxy is only meaningful for q < 1")
    if not (0 < r <= R):
        raise PreconditionError("need 0 < r <= R")
    e = Exponent(2, q)
    return combine_disjoint([hq_ball(e, r), hq_ball(e, R)], e)


@dataclass(frozen=True)
class Decomposition:
    cheeger_factor: float
    isop_factor: float
    product: float


def decompose_ratio(P: float, A: float, e) -> Decomposition:
    """Split ``P / A^(1/q)`` into a Cheeger-ratio power times an isoperimetric-ratio power."""
    e = _exp(e)
    if not (P > 0 and A > 0):
        raise PreconditionError("perimeter and area must be positive")
    N = e.N
    cf = (P / A) ** e.comparison_power
    isop = (P / A ** ((N - 1) / N)) ** (N - N * e.inv_q)
    return Decomposition(cf, isop, cf * isop)


@dataclass(frozen=True)
class SpectralBounds:
    classical: float
    generalized: float
    constant: float


def cheeger_spectral_bounds(h1: float, hq: float, e) -> SpectralBounds:
    """Lower bounds for the first Dirichlet eigenvalue from ``h_1`` and from ``h_q``.

    ``classical = (h1/2)^2``; ``generalized = hq^(2/s) / C`` with ``s = N/q - (N-1)``
    and ``C = 4 K^(2/s)``, ``K`` the constant in ``h_q <= K h_1^s``.
    """
    from .constants import comparison_constants

    e = _exp(e)
    if h1 < 0 or hq < 0:
        raise PreconditionError("Cheeger constants are nonnegative")
    s = e.comparison_power
    K = comparison_constants(e.N, e.q).upper
    C = 4.0 * K ** (2.0 / s)
    return SpectralBounds((h1 / 2.0) ** 2, hq ** (2.0 / s) / C, C)
