"""Command-line front end: experiment configs in, stable CSV/JSON out.

Subcommands: roots | kernel-norms | linear-decay | semilinear | admissible-p
| gevrey.  Configs are JSON; admissibility parameters are exact rationals
written as "num/den" strings, everything else plain decimals.  Outputs are
deterministic for a fixed config and seed: JSON is emitted with sorted keys,
CSV floats with 17 significant digits.

Exit codes: 0 success, 2 malformed config, 3 unsupported kernel zone,
4 admissibility regime-gate violation, 10 semilinear blow-up.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import admissibility, analysis, hankel, propagator, semilinear, symbols
from .model import ExactArithmeticError, ModelParams, NormSetup, as_rational

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ZONE = 3
EXIT_GATE = 4
EXIT_BLOWUP = 10


class ConfigError(ValueError):
    pass


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) if isinstance(v, float) else str(v)
                              for v in row))
    path.write_text("\n".join(lines) + "\n")


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _load_config(path: str, required: set[str], optional: set[str]) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(cfg) - required - optional
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    missing = required - set(cfg)
    if missing:
        raise ConfigError(f"missing config keys: {sorted(missing)}")
    return cfg


def _float_params(cfg: dict) -> ModelParams:
    try:
        return ModelParams(float(cfg["sigma"]), float(cfg["delta"]),
                           float(cfg.get("mu", 1.0)), int(cfg.get("n", 1)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def _meta(cfg: dict, args) -> dict:
    return {"config": cfg, "seed": args.seed, "threads": args.threads}


def cmd_roots(cfg: dict, out: Path, args) -> int:
    params = _float_params(cfg)
    xi_values = cfg.get("xi_values")
    if not isinstance(xi_values, list) or not xi_values:
        raise ConfigError("xi_values must be a nonempty list")
    rows = []
    for xi in xi_values:
        roots = symbols.characteristic_roots(params, float(xi))
        rows.append((float(xi), roots.lambda1.real, roots.lambda1.imag,
                     roots.lambda2.real, roots.lambda2.imag,
                     roots.discriminant, int(roots.coalesced)))
    _write_csv(out / "roots.csv",
               ["xi_abs", "re_l1", "im_l1", "re_l2", "im_l2",
                "discriminant", "coalesced"], rows)
    print(f"roots: {len(rows)} rows -> {out / 'roots.csv'}")
    return EXIT_OK


_KERNEL_ESTIMATES = {
    ("K0", "low"): (analysis.Estimate.L1_K0_LOW, analysis.Estimate.LINF_K0_LOW),
    ("K1", "low"): (analysis.Estimate.L1_K1_LOW, analysis.Estimate.LINF_K1_LOW),
    ("K0", "high"): (analysis.Estimate.L1_K0_HIGH, analysis.Estimate.LINF_K0_HIGH),
    ("K1", "high"): (analysis.Estimate.L1_K1_HIGH, analysis.Estimate.LINF_K1_HIGH),
    ("K0", "all"): (analysis.Estimate.L1_K0, analysis.Estimate.LINF_K0),
    ("K1", "all"): (analysis.Estimate.L1_K1, analysis.Estimate.LINF_K1),
}


def cmd_kernel_norms(cfg: dict, out: Path, args) -> int:
    params = _float_params(cfg)
    which = cfg.get("which", "K1")
    zone = cfg.get("zone", "low")
    a = float(cfg.get("a", 0.0))
    times = [float(t) for t in cfg["times"]]
    series = hankel.kernel_norms(params, a, which, zone, times)
    l1_est = _KERNEL_ESTIMATES[(which, zone)][0]
    rows = []
    for t, l1, linf in zip(series.times, series.l1_values, series.linf_values):
        regime = (analysis.TimeRegime.LARGE_T if t >= 1
                  else analysis.TimeRegime.SMALL_T)
        theta = float(analysis.theoretical_exponent(
            analysis.EstimateSpec(l1_est, a, regime), params))
        rows.append((float(t), float(l1), float(linf), theta,
                     float(l1) / float(t) ** theta))
    _write_csv(out / "kernel_norms.csv",
               ["t", "l1", "linf", "theoretical_exponent", "bound_ratio"], rows)
    print(f"kernel-norms: {len(rows)} rows -> {out / 'kernel_norms.csv'} "
          f"(max quadrature error {series.quadrature_error_estimate:.3e})")
    return EXIT_OK


def _decay_channels(params, setup, have_u1: bool):
    """(channel, derivative order, estimate) triples for the decay command."""
    combined_u = (analysis.Estimate.COMBINED_U if have_u1
                  else analysis.Estimate.COMBINED_U_FROM_U0)
    combined_ut = (analysis.Estimate.COMBINED_UT if have_u1
                   else analysis.Estimate.COMBINED_UT_FROM_U0)
    return [("u", 0.0, combined_u), ("ut", 0.0, combined_ut),
            ("dsigma_u", float(params.sigma), combined_u)]


def cmd_linear_decay(cfg: dict, out: Path, args) -> int:
    params = _float_params(cfg)
    q = Fraction(str(cfg.get("q", 2)))
    m = Fraction(str(cfg.get("m", 1)))
    if m > q:
        raise ConfigError(f"m = {m} exceeds q = {q}")
    setup = NormSetup(q, m)
    grid = propagator.Grid(params.n,
                           int(cfg.get("grid_points",
                                       propagator.DEFAULT_POINTS[params.n])),
                           float(cfg.get("box_length", propagator.DEFAULT_BOX)))
    amplitude = float(cfg.get("amplitude", 1.0))
    width = float(cfg.get("width", 1.0))
    u1_kind = cfg.get("u1", "zero")
    data = propagator.gaussian_state(
        grid, amplitude, width,
        velocity_amplitude=amplitude if u1_kind == "gaussian" else 0.0)
    horizon = float(cfg.get("horizon", 400.0))
    times = np.geomspace(1.0, horizon, int(cfg.get("num_times", 33)))
    window = tuple(cfg.get("window", [10.0, horizon]))

    qf = float(setup.q)
    state = data
    box_limit = grid.box_length / 4.0
    rows, valid_until = [], 0.0
    for t in times:
        state = propagator.evolve_linear(params, state, float(t))
        spread = propagator.spatial_spread(state.u)
        if spread < box_limit:
            valid_until = float(t)
        rows.append((float(t),
                     propagator.lq_norm(state.u, qf),
                     propagator.lq_norm(state.ut, qf),
                     propagator.lq_norm(
                         propagator.fractional_derivative(state.u,
                                                          float(params.sigma)),
                         qf),
                     spread))
    _write_csv(out / "linear_decay.csv",
               ["t", "u", "ut", "dsigma_u", "spread"], rows)

    window = (window[0], min(window[1], valid_until))
    fits = {}
    arr = np.asarray(rows, dtype=float)
    for idx, (name, a, est) in enumerate(_decay_channels(params, setup,
                                                         u1_kind == "gaussian")):
        values = arr[:, idx + 1]
        theo = float(analysis.theoretical_exponent(
            analysis.EstimateSpec(est, a), params, setup))
        try:
            fit = analysis.fit_decay_exponent(arr[:, 0], values, window, theo)
            fits[name] = {
                "fitted_exponent": fit.fitted_exponent,
                "residual_rms": fit.residual_rms,
                "theoretical_exponent": fit.theoretical_exponent,
                "verdict": fit.verdict.value,
                "window": list(fit.window),
            }
        except ValueError as exc:
            fits[name] = {"verdict": analysis.Verdict.INCONCLUSIVE.value,
                          "theoretical_exponent": theo, "reason": str(exc)}
    payload = {"fits": fits, "valid_until": valid_until, "meta": _meta(cfg, args)}
    _write_json(out / "linear_decay.json", payload)
    print(f"linear-decay: {len(rows)} samples -> {out / 'linear_decay.json'}")
    for name, fit in sorted(fits.items()):
        print(f"  {name}: {fit['verdict']}"
              + (f" fitted={fit['fitted_exponent']:.4f}"
                 f" theoretical={fit['theoretical_exponent']:.4f}"
                 if "fitted_exponent" in fit else ""))
    return EXIT_OK


def cmd_semilinear(cfg: dict, out: Path, args) -> int:
    params = _float_params(cfg)
    setup = NormSetup(Fraction(str(cfg.get("q", 2))),
                      Fraction(str(cfg.get("m", 1))))
    kind = {"power-u": semilinear.NonlinearityKind.POWER_U,
            "power-ut": semilinear.NonlinearityKind.POWER_UT}[
                cfg.get("kind", "power-u")]
    nl = semilinear.Nonlinearity(kind, float(cfg["p"]))
    grid = propagator.Grid(params.n,
                           int(cfg.get("grid_points", 4096)),
                           float(cfg.get("box_length", propagator.DEFAULT_BOX)))
    data = propagator.gaussian_state(grid, float(cfg.get("amplitude", 0.1)),
                                     float(cfg.get("width", 1.0)))
    s = float(cfg.get("s", 2 * float(params.delta)))
    report = semilinear.run(params, data, nl, setup, s,
                            float(cfg.get("horizon", 50.0)))
    _write_csv(out / "semilinear.csv",
               ["t"] + list(semilinear.CHANNELS) + ["x_norm"],
               [(float(t),) + tuple(float(report.channels[c][i])
                                    for c in semilinear.CHANNELS)
                + (float(report.x_norm_series[i]),)
                for i, t in enumerate(report.times)])
    payload = {
        "blew_up": report.blew_up,
        "data_norm": report.data_norm,
        "x_norm": report.x_norm,
        "steps": len(report.step_sizes),
        "meta": _meta(cfg, args),
    }
    _write_json(out / "semilinear.json", payload)
    print(f"semilinear: {len(report.times)} records, x-norm {report.x_norm:.6g}, "
          f"blow-up {report.blew_up} -> {out / 'semilinear.json'}")
    return EXIT_BLOWUP if report.blew_up else EXIT_OK


def cmd_admissible_p(cfg: dict, out: Path, args) -> int:
    try:
        theorem = admissibility.Theorem(cfg["theorem"])
    except ValueError:
        raise ConfigError(f"unknown theorem {cfg['theorem']!r}") from None
    try:
        params = ModelParams(as_rational(cfg["sigma"], "sigma"),
                             as_rational(cfg["delta"], "delta"),
                             as_rational(cfg.get("mu", 1), "mu"),
                             int(cfg["n"]))
        setup = NormSetup(as_rational(cfg["q"], "q"), as_rational(cfg["m"], "m"))
        s = cfg.get("s")
        if s is not None:
            s = as_rational(s, "s")
    except (ExactArithmeticError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    report = admissibility.admissible_p(theorem, params, setup, s)
    payload = report.to_jsonable()
    payload["meta"] = _meta(cfg, args)
    _write_json(out / "admissible_p.json", payload)
    print(f"admissible-p {theorem.value}: result {payload['result']} "
          f"-> {out / 'admissible_p.json'}")
    return EXIT_OK


def cmd_gevrey(cfg: dict, out: Path, args) -> int:
    params = _float_params(cfg)
    fit = analysis.gevrey_fit(params, [float(t) for t in cfg["t_values"]],
                              [float(x) for x in cfg["xi_values"]])
    payload = {"c": fit.c, "c_lower": fit.c_lower, "c_upper": fit.c_upper,
               "intercept": fit.intercept, "samples": fit.samples,
               "meta": _meta(cfg, args)}
    _write_json(out / "gevrey.json", payload)
    print(f"gevrey: c = {fit.c:.6g} (lower {fit.c_lower:.6g}) "
          f"-> {out / 'gevrey.json'}")
    return EXIT_OK


_COMMANDS = {
    "roots": (cmd_roots, {"sigma", "delta", "xi_values"},
              {"mu", "n"}),
    "kernel-norms": (cmd_kernel_norms, {"sigma", "delta", "times"},
                     {"mu", "n", "a", "which", "zone"}),
    "linear-decay": (cmd_linear_decay, {"sigma", "delta"},
                     {"mu", "n", "q", "m", "grid_points", "box_length",
                      "amplitude", "width", "u1", "horizon", "num_times",
                      "window"}),
    "semilinear": (cmd_semilinear, {"sigma", "delta", "p"},
                   {"mu", "n", "q", "m", "s", "kind", "grid_points",
                    "box_length", "amplitude", "width", "horizon"}),
    "admissible-p": (cmd_admissible_p, {"theorem", "sigma", "delta", "n",
                                        "q", "m"},
                     {"mu", "s"}),
    "gevrey": (cmd_gevrey, {"sigma", "delta", "t_values", "xi_values"},
               {"mu", "n"}),
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="sigma-evolve",
        description="Numerical laboratory for structurally damped "
                    "sigma-evolution equations")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--out", default=".")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int,
                       default=int(os.environ.get("SIGMA_EVOLVE_THREADS", "0")))
    args = parser.parse_args(argv)
    func, required, optional = _COMMANDS[args.command]
    out = Path(args.out)
    try:
        cfg = _load_config(args.config, required, optional)
        out.mkdir(parents=True, exist_ok=True)
        return func(cfg, out, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except hankel.UnsupportedZoneError as exc:
        print(f"unsupported zone: {exc}", file=sys.stderr)
        return EXIT_ZONE
    except admissibility.GateError as exc:
        print(f"regime gate violated ({exc.gate}): {exc}", file=sys.stderr)
        return EXIT_GATE
    except (ValueError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
