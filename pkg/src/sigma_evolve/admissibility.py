"""Exact admissible-exponent intervals for the global-existence theorems.

Every condition is evaluated in rational arithmetic and reported separately,
so a report shows which hypothesis shaped (or emptied) the admissible range
of the nonlinearity power p.  The five variants cover the energy solutions
(s = 2 delta), low-regularity Sobolev solutions (s < 2 delta), higher
regularity up to and beyond the embedding threshold s = 2 delta + n/q, and
the |u_t|^p nonlinearity in the large-regularity range.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Optional

from .model import (ModelParams, NormSetup, as_rational, ceil_min_int, kappa1,
                    kappa2)
from .analysis import solution_exponent


class Theorem(Enum):
    T2_1 = "T2_1"  # |u|^p, energy space, s = 2 delta
    T2_2 = "T2_2"  # |u|^p, 0 < s < 2 delta
    T2_3 = "T2_3"  # |u|^p, 2 delta < s <= 2 delta + n/q
    T2_4 = "T2_4"  # |u|^p, s > 2 delta + n/q
    T2_5 = "T2_5"  # |u_t|^p, s > 2 delta + n/q


class GateError(ValueError):
    """A regime gate of the requested theorem is violated."""

    def __init__(self, gate: str, message: str):
        super().__init__(message)
        self.gate = gate


@dataclass(frozen=True)
class RationalInterval:
    """Interval with exact rational (or infinite) endpoints.

    lower/upper of None encode -inf/+inf; infinite endpoints are always open.
    """

    lower: Optional[Fraction]
    upper: Optional[Fraction]
    lower_open: bool = False
    upper_open: bool = False

    def __post_init__(self):
        if self.lower is not None and self.upper is not None:
            if self.lower > self.upper:
                raise ValueError(f"empty interval [{self.lower}, {self.upper}]")
            if self.lower == self.upper and (self.lower_open or self.upper_open):
                raise ValueError("degenerate open interval")
        if self.lower is None and not self.lower_open:
            object.__setattr__(self, "lower_open", True)
        if self.upper is None and not self.upper_open:
            object.__setattr__(self, "upper_open", True)

    @classmethod
    def at_least(cls, lower, open_: bool = False) -> "RationalInterval":
        return cls(as_rational(lower, "lower"), None, open_, True)

    def contains(self, x) -> bool:
        x = as_rational(x, "x")
        if self.lower is not None:
            if x < self.lower or (self.lower_open and x == self.lower):
                return False
        if self.upper is not None:
            if x > self.upper or (self.upper_open and x == self.upper):
                return False
        return True

    def intersect(self, other: "RationalInterval") -> Optional["RationalInterval"]:
        """Intersection, or None when empty."""
        if self.lower is None:
            lo, lo_open = other.lower, other.lower_open
        elif other.lower is None or self.lower > other.lower:
            lo, lo_open = self.lower, self.lower_open
        elif other.lower > self.lower:
            lo, lo_open = other.lower, other.lower_open
        else:
            lo, lo_open = self.lower, self.lower_open or other.lower_open
        if self.upper is None:
            hi, hi_open = other.upper, other.upper_open
        elif other.upper is None or self.upper < other.upper:
            hi, hi_open = self.upper, self.upper_open
        elif other.upper < self.upper:
            hi, hi_open = other.upper, other.upper_open
        else:
            hi, hi_open = self.upper, self.upper_open or other.upper_open
        if lo is not None and hi is not None:
            if lo > hi or (lo == hi and (lo_open or hi_open)):
                return None
        return RationalInterval(lo, hi, lo_open, hi_open)

    def __str__(self):
        left = "(" if self.lower_open else "["
        right = ")" if self.upper_open else "]"
        lo = "-inf" if self.lower is None else str(self.lower)
        hi = "inf" if self.upper is None else str(self.upper)
        return f"{left}{lo}, {hi}{right}"


def intersect_all(intervals) -> Optional[RationalInterval]:
    result = RationalInterval(None, None)
    for iv in intervals:
        if iv is None:
            return None
        result = result.intersect(iv)
        if result is None:
            return None
    return result


@dataclass
class Condition:
    name: str
    rendering: str
    interval: Optional[RationalInterval]  # None = empty contribution

    @property
    def satisfiable(self) -> bool:
        return self.interval is not None


@dataclass
class TheoremReport:
    theorem: Theorem
    params: ModelParams
    setup: NormSetup
    s: Optional[Fraction]
    conditions: list[Condition] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def result(self) -> Optional[RationalInterval]:
        return intersect_all(c.interval for c in self.conditions)

    def to_jsonable(self) -> dict:
        res = self.result
        return {
            "theorem": self.theorem.value,
            "sigma": str(self.params.sigma),
            "delta": str(self.params.delta),
            "n": self.params.n,
            "q": str(self.setup.q),
            "m": str(self.setup.m),
            "s": None if self.s is None else str(self.s),
            "conditions": [
                {
                    "name": c.name,
                    "rendering": c.rendering,
                    "interval": None if c.interval is None else str(c.interval),
                }
                for c in self.conditions
            ],
            "result": None if res is None else str(res),
            "empty": res is None,
            "notes": sorted(self.notes),
        }


def _regime_gate(theorem: Theorem, params: ModelParams, setup: NormSetup,
                 s: Optional[Fraction]) -> Optional[Fraction]:
    if not setup.strict:
        raise GateError("m<q", f"theorems require m < q, got m = q = {setup.q}")
    two_delta = 2 * as_rational(params.delta, "delta")
    threshold = two_delta + Fraction(params.n) / setup.q
    if theorem is Theorem.T2_1:
        if s is not None and s != two_delta:
            raise GateError("s=2delta",
                            f"T2_1 fixes s = 2 delta = {two_delta}, got {s}")
        return two_delta
    if s is None:
        raise GateError("s-required", f"{theorem.value} needs the regularity s")
    if theorem is Theorem.T2_2 and not (0 < s < two_delta):
        raise GateError("0<s<2delta",
                        f"T2_2 needs 0 < s < {two_delta}, got {s}")
    if theorem is Theorem.T2_3 and not (two_delta < s <= threshold):
        raise GateError("2delta<s<=2delta+n/q",
                        f"T2_3 needs s in ({two_delta}, {threshold}], got {s}")
    if theorem in (Theorem.T2_4, Theorem.T2_5) and not (s > threshold):
        raise GateError("s>2delta+n/q",
                        f"{theorem.value} needs s > {threshold}, got {s}")
    return s


def admissible_p(theorem: Theorem, params: ModelParams, setup: NormSetup,
                 s=None) -> TheoremReport:
    """Exact admissible interval for p and a per-condition report.

    Conditions are intersected: the perturbation-exponent bound (the max of
    the two branches over n - 2 m delta kappa), the Gagliardo-Nirenberg
    dimension window, the fractional chain/powers constraint where the
    theorem carries one, and the explicit dimension gates.
    """
    params = params.exact()
    if s is not None:
        s = as_rational(s, "s")
    s = _regime_gate(theorem, params, setup, s)
    sigma = as_rational(params.sigma, "sigma")
    delta = as_rational(params.delta, "delta")
    n, q, m = Fraction(params.n), setup.q, setup.m
    report = TheoremReport(theorem, params, setup, s)

    kappa = kappa2(params, setup) if theorem is Theorem.T2_5 else kappa1(params, setup)
    kappa_name = "kappa2" if theorem is Theorem.T2_5 else "kappa1"

    # perturbation exponent condition
    denom = n - 2 * m * delta * kappa
    if theorem is Theorem.T2_1:
        second = n - (m / q) * n + 2 * m * delta
    elif theorem is Theorem.T2_5:
        second = n - (m / q) * n + m * (s - sigma)
    else:
        second = n - (m / q) * n + m * s
    first = 2 * m * delta * (1 + kappa)
    if denom <= 0:
        report.conditions.append(Condition(
            "exponent",
            f"p > 1 + max({first}, {second}) / ({n} - 2 m delta {kappa_name}) "
            f"with nonpositive denominator {denom}",
            None))
        report.notes.append("dimension too small for this theorem: "
                            f"n - 2 m delta {kappa_name} = {denom} <= 0")
    else:
        if first == second:
            report.notes.append(
                "exponent condition: both max branches tie at "
                f"{first}; the result is unchanged")
        lower = 1 + max(first, second) / denom
        report.conditions.append(Condition(
            "exponent",
            f"p > 1 + max({first}, {second}) / {denom} = {lower}",
            RationalInterval.at_least(lower, open_=True)))

    # Gagliardo-Nirenberg dimension window
    base = RationalInterval.at_least(q / m)
    if theorem in (Theorem.T2_4, Theorem.T2_5):
        report.conditions.append(Condition(
            "gn-range", f"p >= q/m = {q / m}", base))
        if n > 2 * m * delta * kappa:
            report.conditions.append(Condition(
                "dimension", f"n = {n} > 2 m delta {kappa_name} "
                f"= {2 * m * delta * kappa}", RationalInterval(None, None)))
        else:
            report.conditions.append(Condition(
                "dimension", f"n = {n} <= 2 m delta {kappa_name} "
                f"= {2 * m * delta * kappa}", None))
            report.notes.append("dimension too small for this theorem: "
                                f"n <= 2 m delta {kappa_name}")
    else:
        if theorem is Theorem.T2_1:
            gate, wide_hi = 2 * q * delta, 2 * q * q * delta / (q - m)
            upper = None if n <= gate else n / (n - gate)
        elif theorem is Theorem.T2_2:
            gate, wide_hi = q * s, q * q * s / (q - m)
            upper = None if n <= gate else n / (n - gate)
        else:  # T2_3
            gate, wide_hi = q * s, q * s + 2 * m * q * delta / (q - m)
            upper = None if n <= gate else 1 + 2 * q * delta / (n - gate)
        if n <= gate:
            report.conditions.append(Condition(
                "gn-range", f"n = {n} <= {gate}: p in {base}", base))
        elif n <= wide_hi:
            iv = base.intersect(RationalInterval(None, upper))
            report.conditions.append(Condition(
                "gn-range",
                f"n = {n} in ({gate}, {wide_hi}]: p in [{q / m}, {upper}]", iv))
        else:
            report.conditions.append(Condition(
                "gn-range", f"n = {n} > {wide_hi}: no admissible p", None))
            report.notes.append("dimension above the Gagliardo-Nirenberg window")

    # fractional chain rule / fractional powers constraints
    if theorem is Theorem.T2_3:
        lower = 1 + ceil_min_int(s - 2 * delta)
        report.conditions.append(Condition(
            "fractional-chain", f"p > 1 + ceil(s - 2 delta) = {lower}",
            RationalInterval.at_least(Fraction(lower), open_=True)))
        report.notes.append(
            "gn-range reading: the dimension window is interpreted as "
            "n in (qs, qs + 2mq delta/(q-m)] (condition as printed omits 'n')")
    if theorem in (Theorem.T2_4, Theorem.T2_5):
        lower = 1 + s - 2 * delta
        report.conditions.append(Condition(
            "fractional-powers", f"p > 1 + s - 2 delta = {lower}",
            RationalInterval.at_least(lower, open_=True)))

    return report


#: decay channels reported per theorem (label, derivative order key)
def decay_rate_bundle(theorem: Theorem, params: ModelParams, setup: NormSetup,
                      s=None) -> list[tuple[str, Fraction]]:
    """Exact large-time decay exponents of the solution channels.

    These are the same envelope exponents the analysis module consumes.  The
    regime gates of the theorem must hold; an empty admissible interval is
    reported in the notes of admissible_p but does not block the exponents,
    which are well-defined for any in-gate parameters.
    """
    params = params.exact()
    if s is not None:
        s = as_rational(s, "s")
    s = _regime_gate(theorem, params, setup, s)
    delta = as_rational(params.delta, "delta")
    inv_r = setup.inv_r
    e_u = solution_exponent(params, inv_r, 0, "u1->u")
    e_ut = solution_exponent(params, inv_r, 0, "u1->ut")
    if theorem is Theorem.T2_1:
        sigma = as_rational(params.sigma, "sigma")
        return [
            ("u", e_u),
            ("|D|^sigma u", e_u - sigma / (2 * delta)),
            ("u_t", e_ut),
            ("|D|^{2delta} u", e_u - 1),
        ]
    if theorem is Theorem.T2_2:
        return [("u", e_u), ("|D|^s u", e_u - s / (2 * delta))]
    return [
        ("u", e_u),
        ("|D|^s u", e_u - s / (2 * delta)),
        ("u_t", e_ut),
        ("|D|^{s-2delta} u_t", 1 + e_ut - s / (2 * delta)),
    ]
