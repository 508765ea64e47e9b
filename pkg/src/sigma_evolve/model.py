"""Model parameters, norm setups and the exact constants built from them.

Admissibility checks are exact: every quantity entering a theorem condition
is a `fractions.Fraction`.  Floating-point parameters are fine for the
numerics modules but are rejected here whenever exactness is required.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from numbers import Integral, Rational as _RationalABC
from typing import Union

Rational = Fraction

RationalLike = Union[int, Fraction, str]

#: relative tolerance used to classify float parameters as visco-elastic
REGIME_RTOL = 1e-12


class ExactArithmeticError(TypeError):
    """Raised when a condition evaluation would require exact rationals."""


class Regime(Enum):
    STRUCTURAL = "structural"      # delta in (sigma/2, sigma)
    VISCO_ELASTIC = "visco-elastic"  # delta = sigma


def as_rational(x: RationalLike, name: str = "value") -> Fraction:
    """Convert ints, Fractions and 'num/den' strings; reject floats."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, Integral):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x)
    raise ExactArithmeticError(
        f"{name}={x!r} is not an exact rational; admissibility conditions "
        "require exact arithmetic (pass int, Fraction or 'num/den')")


def is_rational(x) -> bool:
    return isinstance(x, (_RationalABC, Integral)) and not isinstance(x, bool)


def positive_part(s):
    """[s]^+ = max(s, 0), preserving exact input types."""
    zero = s - s
    return s if s > zero else zero


def ceil_min_int(s) -> int:
    """Smallest integer k with k >= s."""
    return math.ceil(s)


@dataclass(frozen=True)
class ModelParams:
    """Parameters (sigma, delta, mu, n) of the damped evolution equation.

    sigma >= 1 is the leading order, delta in (sigma/2, sigma] the damping
    order, mu > 0 the damping coefficient and n >= 1 the space dimension.
    Exact rational sigma/delta enable the admissibility module; floats are
    accepted for the numerics modules.
    """

    sigma: Union[float, Fraction]
    delta: Union[float, Fraction]
    mu: Union[float, Fraction] = 1
    n: int = 1

    def __post_init__(self):
        if not (self.sigma >= 1):
            raise ValueError(f"sigma must be >= 1, got {self.sigma}")
        if not (self.delta > self.sigma / 2 and self.delta <= self.sigma):
            raise ValueError(
                f"delta must lie in (sigma/2, sigma] = "
                f"({self.sigma / 2}, {self.sigma}], got {self.delta}")
        if not (self.mu > 0):
            raise ValueError(f"mu must be positive, got {self.mu}")
        if not isinstance(self.n, Integral) or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")

    def regime(self) -> Regime:
        if self.is_exact:
            return Regime.VISCO_ELASTIC if self.delta == self.sigma else Regime.STRUCTURAL
        if abs(float(self.delta) - float(self.sigma)) <= REGIME_RTOL * float(self.sigma):
            return Regime.VISCO_ELASTIC
        return Regime.STRUCTURAL

    @property
    def is_exact(self) -> bool:
        return is_rational(self.sigma) and is_rational(self.delta)

    def exact(self) -> "ModelParams":
        """A copy with sigma, delta, mu coerced to exact rationals."""
        return ModelParams(as_rational(self.sigma, "sigma"),
                           as_rational(self.delta, "delta"),
                           as_rational(self.mu, "mu"), self.n)


@dataclass(frozen=True)
class NormSetup:
    """Integrability pair (q, m) and the Young exponent r.

    r is fixed by 1 + 1/q = 1/r + 1/m.  The theorems require m < q; m = q is
    tolerated here as the degenerate L^q-L^q channel (r = 1) used by the
    linear-decay measurements, and is rejected by the admissibility code.
    """

    q: Fraction
    m: Fraction
    r: Fraction = field(init=False)

    def __init__(self, q: RationalLike, m: RationalLike = 1):
        q = as_rational(q, "q")
        m = as_rational(m, "m")
        if not (q > 1):
            raise ValueError(f"q must lie in (1, inf), got {q}")
        if not (1 <= m <= q):
            raise ValueError(f"m must lie in [1, q] = [1, {q}], got {m}")
        inv_r = 1 + Fraction(1, 1) / q - Fraction(1, 1) / m
        # m <= q gives 1/r in (0, 1]
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "r", 1 / inv_r)

    @property
    def inv_r(self) -> Fraction:
        return 1 / self.r

    @property
    def strict(self) -> bool:
        """True when m < q, as the global-existence theorems require."""
        return self.m < self.q


def _exact_model(params: ModelParams) -> tuple[Fraction, Fraction]:
    if not params.is_exact:
        raise ExactArithmeticError(
            "kappa constants need exact rational sigma and delta; "
            f"got sigma={params.sigma!r}, delta={params.delta!r}")
    return as_rational(params.sigma, "sigma"), as_rational(params.delta, "delta")


def _require_strict(setup: NormSetup) -> None:
    if not setup.strict:
        raise ValueError(f"m < q required, got m = q = {setup.q}")


def damping_gap(params: ModelParams) -> Fraction:
    """1 - sigma/(2 delta), exactly; lies in (0, 1/2] for the valid range."""
    sigma, delta = _exact_model(params)
    return 1 - sigma / (2 * delta)


def kappa1(params: ModelParams, setup: NormSetup) -> Fraction:
    """1 + (1 + floor(n/2)) (1 - sigma/(2 delta)) (1 + 1/q - 1/m)."""
    _require_strict(setup)
    gap = damping_gap(params)
    return 1 + (1 + params.n // 2) * gap * setup.inv_r


def kappa2(params: ModelParams, setup: NormSetup) -> Fraction:
    """(2 + floor(n/2)) (1 - sigma/(2 delta)) (1 + 1/q - 1/m)."""
    _require_strict(setup)
    gap = damping_gap(params)
    return (2 + params.n // 2) * gap * setup.inv_r
