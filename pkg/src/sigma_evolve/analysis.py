"""Theoretical decay exponents, power-law fitting and bound verdicts.

Exponent formulas are evaluated type-preservingly: exact rational inputs
give exact rational exponents, which is what the consistency checks between
the L^r family and its L^1 / L^inf endpoints rely on.  Fits regress
log(value) against log(1+t), matching the (1+t)-power envelopes, and only
ever test bound respect: the estimates are upper bounds, equality is not
claimed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import quad

from .model import ModelParams, Regime
from .symbols import multiplier_arrays

#: default slack added to theoretical exponents before declaring a violation
BOUND_SLACK = 0.1

#: residual level above which a power-law fit is not trusted
RESIDUAL_GATE = 0.05


class ExponentialDecay:
    """Marker for channels decaying like e^{-ct} instead of a power."""

    def __repr__(self):
        return "ExponentialDecay"


EXPONENTIAL_DECAY = ExponentialDecay()


class Estimate(Enum):
    # localized kernel norms, structural and (low zone) visco-elastic
    L1_K0_LOW = "l1-k0-low"
    L1_K1_LOW = "l1-k1-low"
    L1_K0_HIGH = "l1-k0-high"
    L1_K1_HIGH = "l1-k1-high"
    L1_K0 = "l1-k0"
    L1_K1 = "l1-k1"
    LINF_K0_LOW = "linf-k0-low"
    LINF_K1_LOW = "linf-k1-low"
    LINF_K0_HIGH = "linf-k0-high"
    LINF_K1_HIGH = "linf-k1-high"
    LINF_K0 = "linf-k0"
    LINF_K1 = "linf-k1"
    # interpolated L^r kernel norms (r from the spec record)
    LR_K0 = "lr-k0"
    LR_K1 = "lr-k1"
    LR_K0_LOW = "lr-k0-low"
    LR_K1_LOW = "lr-k1-low"
    # L^p-L^q solution estimates off the conjugate line (structural only)
    LPQ_U_FROM_U0 = "lpq-u-from-u0"
    LPQ_U_FROM_U1 = "lpq-u-from-u1"
    LPQ_UT_FROM_U0 = "lpq-ut-from-u0"
    LPQ_UT_FROM_U1 = "lpq-ut-from-u1"
    # (L^m cap L^q)-L^q solution estimates, delta in (sigma/2, sigma]
    COMBINED_U_FROM_U0 = "combined-u-from-u0"
    COMBINED_U_FROM_U1 = "combined-u-from-u1"
    COMBINED_U = "combined-u"
    COMBINED_UT_FROM_U0 = "combined-ut-from-u0"
    COMBINED_UT_FROM_U1 = "combined-ut-from-u1"
    COMBINED_UT = "combined-ut"
    # visco-elastic high-frequency channel: exponential decay marker
    HIGH_FREQ_EXPONENTIAL = "high-freq-exponential"


class TimeRegime(Enum):
    SMALL_T = "small-t"
    LARGE_T = "large-t"


@dataclass(frozen=True)
class EstimateSpec:
    estimate_id: Estimate
    a: object = 0
    time_regime: TimeRegime = TimeRegime.LARGE_T
    r: Optional[object] = None  # L^r / L^p-L^q families; math.inf allowed


class RegimeError(ValueError):
    """Parameters violate a hypothesis of the requested estimate."""


def _floor_half(n: int) -> int:
    return n // 2


def _gap(params: ModelParams):
    # 1 - sigma/(2 delta), type preserving
    return 1 - params.sigma / (2 * params.delta)


def _inv_r_value(r):
    if r is None:
        raise RegimeError("this estimate family needs the exponent r")
    if r == math.inf:
        return 0
    if not (r >= 1):
        raise RegimeError(f"r must lie in [1, inf], got {r}")
    return 1 / r


def _require_structural(params: ModelParams, what: str) -> None:
    if params.regime() is not Regime.STRUCTURAL:
        raise RegimeError(
            f"{what} requires structural damping delta < sigma; "
            "the visco-elastic case only provides L^q-L^q high-frequency "
            "bounds with exponential decay")


def solution_exponent(params: ModelParams, inv_r, a, channel: str):
    """Large-time (L^m cap L^q)-L^q envelope exponents, by data channel.

    channel is one of 'u0->u', 'u1->u', 'u0->ut', 'u1->ut'; inv_r is
    1 + 1/q - 1/m (equal to 1 for the plain L^q-L^q estimates).
    """
    fl = _floor_half(params.n)
    gap = _gap(params)
    spread = (params.n / (2 * params.delta)) * (1 - inv_r)
    if channel == "u0->u":
        return (2 + fl) * gap * inv_r - spread - a / (2 * params.delta)
    if channel == "u1->u":
        return 1 + (1 + fl) * gap * inv_r - spread - a / (2 * params.delta)
    if channel == "u0->ut":
        return ((1 + fl) * gap * inv_r - spread
                - (a + 2 * (params.sigma - params.delta)) / (2 * params.delta))
    if channel == "u1->ut":
        return (2 + fl) * gap * inv_r - spread - a / (2 * params.delta)
    raise ValueError(f"unknown channel {channel!r}")


def weight_exponents(params: ModelParams, inv_r, s) -> dict:
    """Exponents of the solution-space weights (u, |D|^s u, u_t, ... channels)."""
    e1 = solution_exponent(params, inv_r, 0, "u1->u")
    e3 = solution_exponent(params, inv_r, 0, "u1->ut")
    return {
        "u": e1,
        "ds_u": e1 - s / (2 * params.delta),
        "dsigma_u": e1 - params.sigma / (2 * params.delta),
        "ut": e3,
        "ds_ut": 1 + e3 - s / (2 * params.delta),
    }


def theoretical_exponent(spec: EstimateSpec, params: ModelParams,
                         setup=None, a=None):
    """Exact envelope exponent for one estimate, or the exponential marker.

    The kernel-norm families take the derivative order from the spec record;
    the combined solution estimates read 1/r off `setup`.  Out-of-regime
    parameters raise RegimeError naming the violated hypothesis.
    """
    est = spec.estimate_id
    a = spec.a if a is None else a
    if a < 0:
        raise RegimeError("derivative order a must be nonnegative")
    small = spec.time_regime is TimeRegime.SMALL_T
    n, sigma, delta = params.n, params.sigma, params.delta
    fl = _floor_half(n)
    gap = _gap(params)
    two_delta = 2 * delta

    if est is Estimate.HIGH_FREQ_EXPONENTIAL:
        if params.regime() is not Regime.VISCO_ELASTIC:
            raise RegimeError("the exponential high-frequency channel is the "
                              "delta = sigma estimate")
        return EXPONENTIAL_DECAY

    if est in (Estimate.L1_K0_LOW, Estimate.L1_K1_LOW,
               Estimate.LINF_K0_LOW, Estimate.LINF_K1_LOW,
               Estimate.LR_K0_LOW, Estimate.LR_K1_LOW):
        is_k1 = est in (Estimate.L1_K1_LOW, Estimate.LINF_K1_LOW,
                        Estimate.LR_K1_LOW)
        shift = 1 if is_k1 else 0
        if small:
            return shift
        if est in (Estimate.L1_K0_LOW, Estimate.L1_K1_LOW):
            inv_r = 1
        elif est in (Estimate.LINF_K0_LOW, Estimate.LINF_K1_LOW):
            inv_r = 0
        else:
            inv_r = _inv_r_value(spec.r)
        return (shift + (2 - shift + fl) * gap * inv_r
                - (n / two_delta) * (1 - inv_r) - a / two_delta)

    gap_high = 2 * (sigma - delta)
    if est in (Estimate.L1_K0_HIGH, Estimate.L1_K1_HIGH,
               Estimate.LINF_K0_HIGH, Estimate.LINF_K1_HIGH):
        _require_structural(params, est.value)
        if est is Estimate.L1_K0_HIGH:
            return -a / gap_high if small else -a / two_delta
        if est is Estimate.L1_K1_HIGH:
            return 1 - a / two_delta if small else 1 - a / gap_high
        if est is Estimate.LINF_K0_HIGH:
            return -(n + a) / gap_high
        return 1 - (n + a) / gap_high

    if est in (Estimate.L1_K0, Estimate.L1_K1, Estimate.LINF_K0,
               Estimate.LINF_K1, Estimate.LR_K0, Estimate.LR_K1):
        _require_structural(params, est.value)
        if est in (Estimate.L1_K0, Estimate.L1_K1):
            inv_r = 1
        elif est in (Estimate.LINF_K0, Estimate.LINF_K1):
            inv_r = 0
        else:
            inv_r = _inv_r_value(spec.r)
        is_k1 = est in (Estimate.L1_K1, Estimate.LINF_K1, Estimate.LR_K1)
        shift = 1 if is_k1 else 0
        if small:
            return shift - (n / gap_high) * (1 - inv_r) - a / gap_high
        return (shift + (2 - shift + fl) * gap * inv_r
                - (n / two_delta) * (1 - inv_r) - a / two_delta)

    if est in (Estimate.LPQ_U_FROM_U0, Estimate.LPQ_U_FROM_U1,
               Estimate.LPQ_UT_FROM_U0, Estimate.LPQ_UT_FROM_U1):
        _require_structural(params, est.value)
        inv_r = _inv_r_value(spec.r)
        from_u1 = est in (Estimate.LPQ_U_FROM_U1, Estimate.LPQ_UT_FROM_U1)
        shift = 1 if from_u1 else 0
        if est in (Estimate.LPQ_U_FROM_U0, Estimate.LPQ_U_FROM_U1):
            if small:
                return shift - (n / gap_high) * (1 - inv_r) - a / gap_high
            return (shift + (2 - shift + fl) * gap * inv_r
                    - (n / two_delta) * (1 - inv_r) - a / two_delta)
        if small:
            return shift - (n / gap_high) * (1 - inv_r) - (a + two_delta) / gap_high
        channel = "u1->ut" if from_u1 else "u0->ut"
        return solution_exponent(params, inv_r, a, channel)

    if est in (Estimate.COMBINED_U_FROM_U0, Estimate.COMBINED_U_FROM_U1,
               Estimate.COMBINED_U, Estimate.COMBINED_UT_FROM_U0,
               Estimate.COMBINED_UT_FROM_U1, Estimate.COMBINED_UT):
        if setup is None:
            raise RegimeError("combined estimates need a NormSetup (q, m)")
        inv_r = setup.inv_r
        if est is Estimate.COMBINED_U_FROM_U0:
            return solution_exponent(params, inv_r, a, "u0->u")
        if est is Estimate.COMBINED_U_FROM_U1:
            return solution_exponent(params, inv_r, a, "u1->u")
        if est is Estimate.COMBINED_U:
            return solution_exponent(params, inv_r, a, "u1->u")
        if est is Estimate.COMBINED_UT_FROM_U0:
            return solution_exponent(params, inv_r, a, "u0->ut")
        if est is Estimate.COMBINED_UT_FROM_U1:
            return solution_exponent(params, inv_r, a, "u1->ut")
        return solution_exponent(params, inv_r, a, "u1->ut")

    raise ValueError(f"unhandled estimate {est}")


class Verdict(Enum):
    WITHIN_BOUND = "WithinBound"
    VIOLATES_BOUND = "ViolatesBound"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class DecayFit:
    fitted_exponent: float
    window: tuple[float, float]
    residual_rms: float
    theoretical_exponent: float
    verdict: Verdict
    intercept: float = 0.0


def fit_decay_exponent(times: Sequence[float], values: Sequence[float],
                       window: tuple[float, float],
                       theoretical: float, slack: float = BOUND_SLACK) -> DecayFit:
    """Least-squares slope of log(value) against log(1+t) inside `window`.

    Violation requires both a trusted fit (residual rms below the gate) and
    a fitted exponent above theoretical + slack; large residuals are
    declared inconclusive (the series is then not a power law at all).
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    lo, hi = window
    mask = (times >= lo) & (times <= hi)
    if mask.sum() < 10:
        raise ValueError(f"need at least 10 samples in window {window}, "
                         f"have {int(mask.sum())}")
    if np.any(values[mask] <= 0):
        raise ValueError("values must be positive for a log-log fit")
    x = np.log1p(times[mask])
    y = np.log(values[mask])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    rms = float(np.sqrt(np.mean(resid ** 2)))
    if rms >= RESIDUAL_GATE:
        verdict = Verdict.INCONCLUSIVE
    elif slope > float(theoretical) + slack:
        verdict = Verdict.VIOLATES_BOUND
    else:
        verdict = Verdict.WITHIN_BOUND
    return DecayFit(float(slope), (float(lo), float(hi)), rms,
                    float(theoretical), verdict, float(intercept))


@dataclass
class GevreyFit:
    c: float
    c_lower: float
    c_upper: float
    intercept: float
    samples: int

    def __float__(self):
        return self.c


def gevrey_fit(params: ModelParams, t_list: Sequence[float],
               xi_list: Sequence[float]) -> GevreyFit:
    """Smoothing rate c in |k0(t,xi)| <= C exp(-c |xi|^{2(sigma-delta)} t).

    Regresses -log|k0| on |xi|^{2(sigma-delta)} t over the sample grid
    (t = 0 rows are excluded; they carry no information).  Raises when the
    lower 2-sigma confidence bound on c fails to be positive, or in the
    visco-elastic regime where this channel does not exist.
    """
    _require_structural(params, "Gevrey smoothing")
    sigma, delta = float(params.sigma), float(params.delta)
    xi = np.asarray(xi_list, dtype=float)
    if np.any(xi < 2.0):
        raise ValueError("gevrey_fit samples the high zone |xi| >= 2 only")
    ts = np.asarray([t for t in t_list if t > 0], dtype=float)
    if ts.size == 0:
        raise ValueError("need positive times")
    xs, ys = [], []
    for t in ts:
        k0 = multiplier_arrays(params, float(t), xi)[0]
        good = np.abs(k0) > 1e-300
        xs.append((xi[good] ** (2 * (sigma - delta))) * t)
        ys.append(-np.log(np.abs(k0[good])))
    x = np.concatenate(xs)
    y = np.concatenate(ys)
    if x.size < 3:
        raise ValueError("not enough usable samples")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    dof = max(x.size - 2, 1)
    se = math.sqrt(float(np.sum(resid ** 2)) / dof /
                   float(np.sum((x - x.mean()) ** 2)))
    fit = GevreyFit(float(slope), float(slope - 2 * se), float(slope + 2 * se),
                    float(intercept), int(x.size))
    if fit.c_lower <= 0:
        raise ValueError(
            f"no positive smoothing rate: c = {fit.c:.3e} +- {2 * se:.3e}")
    return fit


@dataclass
class IntegralLemmaReport:
    alpha: float
    beta: float
    regime: str
    times: np.ndarray
    values: np.ndarray
    envelope: np.ndarray
    ratios: np.ndarray
    bounded: bool = field(init=False)

    def __post_init__(self):
        finite = np.all(np.isfinite(self.ratios))
        if self.times.size >= 3:
            x = np.log1p(self.times[-3:])
            y = np.log(self.ratios[-3:])
            tail_slope = float(np.polyfit(x, y, 1)[0])
        else:
            tail_slope = 0.0
        self.bounded = bool(finite and tail_slope <= 0.02)


def integral_lemma_check(alpha: float, beta: float,
                         t_list: Sequence[float]) -> IntegralLemmaReport:
    """Quadrature check of int_0^t (1+t-tau)^-alpha (1+tau)^-beta dtau.

    Classifies the envelope by max(alpha, beta): above 1 the integral decays
    like (1+t)^-min, at exactly 1 an extra log(2+t) appears, below 1 the
    growth is (1+t)^{1-alpha-beta}; the report records the ratio of the
    measured integral to the envelope at each requested time.
    """
    ts = np.asarray(list(t_list), dtype=float)
    if np.any(ts <= 0) or np.any(np.diff(ts) <= 0):
        raise ValueError("t_list must be positive ascending")
    vals = np.empty(ts.shape)
    for i, t in enumerate(ts):
        vals[i], _ = quad(lambda tau: (1 + t - tau) ** (-alpha)
                          * (1 + tau) ** (-beta), 0.0, t, limit=200)
    top = max(alpha, beta)
    if top > 1:
        env = (1 + ts) ** (-min(alpha, beta))
        regime = "max>1"
    elif top == 1:
        env = (1 + ts) ** (-min(alpha, beta)) * np.log(2 + ts)
        regime = "max=1"
    else:
        env = (1 + ts) ** (1 - alpha - beta)
        regime = "max<1"
    return IntegralLemmaReport(alpha, beta, regime, ts, vals, env, vals / env)
