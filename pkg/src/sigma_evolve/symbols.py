"""Characteristic roots and Fourier multipliers of the linear flow.

Each Fourier mode solves  v'' + |xi|^{2 delta} v' + |xi|^{2 sigma} v = 0,
so v(t) = k0(t,|xi|) v(0) + k1(t,|xi|) v'(0) with

    k0 = (lam1 e^{lam2 t} - lam2 e^{lam1 t}) / (lam1 - lam2),
    k1 = (e^{lam1 t} - e^{lam2 t}) / (lam1 - lam2),

where lam_{1,2} solve lam^2 + |xi|^{2 delta} lam + |xi|^{2 sigma} = 0.  On the
coalescing locus |xi|^{4 delta} = 4 |xi|^{2 sigma} the limit formulas
k0 = (1 - lam t) e^{lam t}, k1 = t e^{lam t} apply.  The implementations below
use expm1/sinc forms that stay accurate through the locus; the division by
lam1 - lam2 is never performed near cancellation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ModelParams

#: width of the coalescing band, relative to |xi|^{4 delta}
COALESCENCE_RTOL = 1e-9

#: constant in the asserted exponential envelopes (validated by sampling)
ENVELOPE_C = 0.25

#: frequency zones where envelopes are asserted
LOW_ZONE_MAX = 0.5
HIGH_ZONE_MIN = 2.0


class NormalizationError(ValueError):
    """The closed multiplier formulas assume mu = 1."""


def _require_normalized(params: ModelParams) -> None:
    if float(params.mu) != 1.0:
        raise NormalizationError(
            f"multiplier formulas assume mu = 1 (got mu = {params.mu}); "
            "rescale time to normalize the damping coefficient")


@dataclass(frozen=True)
class CharRoots:
    lambda1: complex
    lambda2: complex
    discriminant: float
    coalesced: bool


@dataclass(frozen=True)
class MultiplierValue:
    k0: complex
    k1: complex
    dt_k0: complex
    dt_k1: complex


def characteristic_roots(params: ModelParams, xi_abs: float) -> CharRoots:
    """Roots of lam^2 + |xi|^{2 delta} lam + |xi|^{2 sigma} = 0 for mu = 1.

    lambda1 carries the '+' branch of the quadratic formula (the slowly
    decaying root for large frequencies); for a positive discriminant it is
    computed as -2 |xi|^{2 sigma} / (|xi|^{2 delta} + sqrt(disc)) and
    lambda2 = |xi|^{2 sigma} / lambda1, both free of subtractive cancellation.
    """
    _require_normalized(params)
    if xi_abs < 0:
        raise ValueError("xi_abs must be nonnegative")
    sigma, delta = float(params.sigma), float(params.delta)
    a = xi_abs ** (2 * delta)
    b = xi_abs ** (2 * sigma)
    disc = a * a - 4 * b
    coalesced = abs(disc) <= COALESCENCE_RTOL * a * a
    if xi_abs == 0.0:
        return CharRoots(0j, 0j, 0.0, True)
    if coalesced:
        lam = complex(-a / 2)
        return CharRoots(lam, lam, disc, True)
    if disc < 0:
        root = np.sqrt(-disc)
        lam1 = complex(-a / 2, root / 2)
        return CharRoots(lam1, lam1.conjugate(), disc, False)
    root = np.sqrt(disc)
    lam1 = -2 * b / (a + root)
    lam2 = b / lam1
    return CharRoots(complex(lam1), complex(lam2), disc, False)


def _multiplier_grid(sigma: float, delta: float, t: float, xi_abs):
    """Vectorized (k0, k1) over an array of |xi|; real float64 output.

    Complex-root zone:  k0 = e^{-at/2} (cos(wt) + (at/2) sinc(wt)),
                        k1 = e^{-at/2} t sinc(wt),      w = sqrt(4b - a^2)/2.
    Real-root zone:     with s = sqrt(a^2 - 4b)/2, lam1 = -2b/(a + 2s) and
                        m = expm1(-2st)/(2s)  (m -> -t on the double root),
                        k0 = e^{lam1 t} (1 + lam1 m),  k1 = -e^{lam1 t} m.
    Both forms hit the coalescence limits smoothly.
    """
    xi = np.asarray(xi_abs, dtype=float)
    a = xi ** (2 * delta)
    b = xi ** (2 * sigma)
    disc = a * a - 4 * b

    k0 = np.empty(xi.shape, dtype=float)
    k1 = np.empty(xi.shape, dtype=float)

    neg = disc < 0
    if np.any(neg):
        an, bn = a[neg], b[neg]
        w = np.sqrt(bn - an * an / 4)
        decay = np.exp(-an * t / 2)
        sinc = np.sinc(w * t / np.pi)   # sin(wt)/(wt)
        k0[neg] = decay * (np.cos(w * t) + (an * t / 2) * sinc)
        k1[neg] = decay * t * sinc

    pos = ~neg
    if np.any(pos):
        ap, bp = a[pos], b[pos]
        s = np.sqrt(np.maximum(ap * ap - 4 * bp, 0.0)) / 2
        denom = ap + 2 * s
        lam1 = np.where(denom > 0, -2 * bp / np.where(denom > 0, denom, 1.0), 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            m = np.where(s > 0, np.expm1(-2 * s * t) / np.where(s > 0, 2 * s, 1.0), -t)
        e1 = np.exp(lam1 * t)
        k0[pos] = e1 * (1 + lam1 * m)
        k1[pos] = -e1 * m

    return k0, k1


def multiplier_arrays(params: ModelParams, t: float, xi_abs):
    """(k0, k1, dt_k0, dt_k1) over an array of |xi|.

    The time derivatives are produced through the exact closed relations
    dt_k0 = -|xi|^{2 sigma} k1 and dt_k1 = k0 - |xi|^{2 delta} k1.
    """
    _require_normalized(params)
    if t < 0:
        raise ValueError("t must be nonnegative")
    sigma, delta = float(params.sigma), float(params.delta)
    xi = np.asarray(xi_abs, dtype=float)
    k0, k1 = _multiplier_grid(sigma, delta, t, xi)
    a = xi ** (2 * delta)
    b = xi ** (2 * sigma)
    dt_k0 = -b * k1
    dt_k1 = k0 - a * k1
    return k0, k1, dt_k0, dt_k1


def multipliers(params: ModelParams, t: float, xi_abs: float) -> MultiplierValue:
    """Multiplier tuple at a single (t, |xi|); see multiplier_arrays."""
    roots = characteristic_roots(params, xi_abs)
    if roots.coalesced and xi_abs > 0.0:
        # double-root limit evaluated directly inside the coalescing band
        lam = roots.lambda1.real
        e = np.exp(lam * t)
        k0, k1 = (1 - lam * t) * e, t * e
        a = xi_abs ** (2 * float(params.delta))
        b = xi_abs ** (2 * float(params.sigma))
        return MultiplierValue(complex(k0), complex(k1),
                               complex(-b * k1), complex(k0 - a * k1))
    k0, k1, dt_k0, dt_k1 = multiplier_arrays(params, t, np.asarray([xi_abs]))
    return MultiplierValue(complex(k0[0]), complex(k1[0]),
                           complex(dt_k0[0]), complex(dt_k1[0]))


def multiplier_envelope(params: ModelParams, t: float, xi_abs: float):
    """Analytic envelope pair (bound for |k0|, bound for |k1|).

    Small frequencies (|xi| <= 1/2) decay like exp(-c |xi|^{2 delta} t);
    large frequencies (|xi| >= 2) like exp(-c |xi|^{2(sigma-delta)} t), with
    the module constant c = 1/4.  The bounds hold up to a moderate constant
    (the sampled worst case is below 1.1); no envelope is asserted in the
    middle zone.
    """
    _require_normalized(params)
    sigma, delta = float(params.sigma), float(params.delta)
    if xi_abs <= LOW_ZONE_MAX:
        rate = xi_abs ** (2 * delta)
    elif xi_abs >= HIGH_ZONE_MIN:
        rate = xi_abs ** (2 * (sigma - delta))
    else:
        raise ValueError(
            f"|xi| = {xi_abs} lies in the middle zone "
            f"({LOW_ZONE_MAX}, {HIGH_ZONE_MIN}); no envelope is asserted there")
    e = np.exp(-ENVELOPE_C * rate * t)
    return e, t * e
