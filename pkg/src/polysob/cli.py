"""Command-line front end: deterministic tabular output plus figures.

Subcommands: constants, identities, green, quotient-slope, probe-iopt,
pohozaev-regimes, giraud.  Curves go to CSV (17 significant digits,
bit-identical across runs at fixed config), summaries to JSON echoing a
hash of the resolved configuration, and report paths render a matplotlib
figure next to the delimited output unless --no-plot is given.

Exit codes: 0 success, 1 usage or configuration error, 2 a mathematical
verification embedded in the run failed.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import geometry, giraud, green, quotient, radial, regimes
from .constants import (
    DimensionPair,
    bubble_crit_mass,
    bubble_scale,
    c_green,
    c_small,
    critical_exponent,
    sharp_constant,
    sphere_area,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFY = 2

DEFAULT_PRECISION = 40


class UsageError(ValueError):
    pass


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _write_csv(path: str, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) if isinstance(v, float) else v for v in row])


def _emit_json(obj: dict, path: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _dims(args) -> DimensionPair:
    if args.n is None or args.k is None:
        raise UsageError("this subcommand needs --n and --k")
    try:
        return DimensionPair(args.n, args.k)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _load_config(args) -> dict:
    if not args.config:
        raise UsageError("this subcommand needs --config <path>")
    try:
        with open(args.config) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"unreadable config {args.config}: {exc}") from exc


def _eps_grid(grid_cfg) -> list[float]:
    if isinstance(grid_cfg, list):
        return [float(e) for e in grid_cfg]
    start = float(grid_cfg.get("start", 0.004))
    stop = float(grid_cfg.get("stop", 0.02))
    count = int(grid_cfg.get("count", 10))
    return list(np.geomspace(start, stop, count))


def _manifold(cfg: dict):
    try:
        return geometry.manifold_from_config(cfg)
    except (KeyError, ValueError) as exc:
        raise UsageError(f"bad manifold descriptor: {exc}") from exc


def _precision(args) -> int:
    if args.precision is not None:
        return args.precision
    env = os.environ.get("POLYSOB_PRECISION")
    if env:
        try:
            return int(env)
        except ValueError as exc:
            raise UsageError(f"bad POLYSOB_PRECISION={env!r}") from exc
    return DEFAULT_PRECISION


def _parallel_map(fn, items, jobs: int):
    """Order-preserving map, optionally on a thread pool."""
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_constants(args) -> int:
    d = _dims(args)
    mass = bubble_crit_mass(d)
    k_const = sharp_constant(d)
    payload = {
        "n": d.n,
        "k": d.k,
        "two_star": str(critical_exponent(d)),
        "two_star_float": float(critical_exponent(d)),
        "dimension_product": d.big_pi,
        "a_nk": f"{d.big_pi}^(-1/{d.k})",
        "a_nk_float": bubble_scale(d).to_float(),
        "c_nk": str(c_small(d)),
        "c_nk_float": float(c_small(d)),
        "green_singularity_constant": repr(c_green(d)),
        "green_singularity_constant_float": c_green(d).to_float(),
        "sphere_area": repr(sphere_area(d.n)),
        "sphere_area_float": sphere_area(d.n).to_float(),
        "bubble_crit_mass": repr(mass),
        "bubble_crit_mass_float": mass.to_float(),
        "K": k_const,
        "inv_K": 1.0 / k_const,
    }
    _emit_json(payload, args.out)
    return EXIT_OK


def cmd_identities(args) -> int:
    certs = []
    if args.sweep:
        pairs = [(n, k) for n in range(3, args.sweep + 1)
                 for k in range(1, n) if 2 * k < n]
    else:
        d = _dims(args)
        pairs = [(d.n, d.k)]
    for n, k in pairs:
        d = DimensionPair(n, k)
        certs.append(radial.verify_bubble_identity(d).to_dict())
        certs.extend(c.to_dict() for c in radial.verify_kernel_identity(d))
    payload = {"certificates": certs,
               "all_residuals_zero": all(c["residual_zero"] for c in certs)}
    _emit_json(payload, args.out)
    return EXIT_OK if payload["all_residuals_zero"] else EXIT_VERIFY


def _parse_grid(text: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError("--r-grid must be start:stop:count")
    try:
        return float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise UsageError(f"bad --r-grid {text!r}") from exc


def cmd_green(args) -> int:
    d = _dims(args)
    alpha = args.alpha
    if alpha <= 0:
        raise UsageError("--alpha must be positive")
    start, stop, count = _parse_grid(args.r_grid)
    if not (0 < start < stop and count >= 2):
        raise UsageError("--r-grid needs 0 < start < stop and count >= 2")
    grid = (np.linspace(start, stop, count) if args.linear
            else np.geomspace(start, stop, count))
    kernel = green.gamma_fn(d, mp_dps=_precision(args))
    p = d.n - 2 * d.k
    q_env = 6.0
    rows = []
    for r in grid:
        g_val = green.gamma_alpha(kernel, alpha, float(r))
        rows.append({
            "r": float(r),
            "gamma": g_val,
            "r_pow_singular_scaled": r**p * g_val,
        })
    c_env = max(abs(row["r_pow_singular_scaled"])
                * (1.0 + (alpha * row["r"]) ** q_env) for row in rows)
    for row in rows:
        row["envelope_bound"] = (c_env * row["r"] ** (-p)
                                 / (1.0 + (alpha * row["r"]) ** q_env))
    lim = green.singular_limit(kernel)
    exact = c_green(d).to_float()
    resolved = {"n": d.n, "k": d.k, "alpha": alpha, "r_grid": args.r_grid,
                "linear": bool(args.linear), "precision": _precision(args)}
    summary = {
        "config_hash": _config_hash(resolved),
        "n": d.n, "k": d.k, "alpha": alpha,
        "singular_limit_extrapolated": lim,
        "singular_constant_exact": exact,
        "singular_relative_gap": abs(lim / exact - 1.0),
        "decay_slope": green.decay_slope(kernel),
        "min_decay_rate": kernel.min_decay_rate,
        "rows": len(rows),
    }
    if args.out:
        _write_csv(args.out, ["r", "gamma", "r_pow_singular_scaled", "envelope_bound"],
                   [[row["r"], row["gamma"], row["r_pow_singular_scaled"],
                     row["envelope_bound"]] for row in rows])
        _emit_json(summary, _sidecar(args.out, ".json"))
        if not args.no_plot:
            from . import plots
            plots.green_kernel_figure(rows, d.n, d.k, alpha, _sidecar(args.out, ".png"))
    else:
        _emit_json(summary, None)
    return EXIT_OK


def _sidecar(out_path: str, ext: str) -> str:
    stem, _ = os.path.splitext(out_path)
    return stem + ext


def cmd_quotient_slope(args) -> int:
    cfg = _load_config(args)
    m = _manifold(cfg.get("manifold", {}))
    try:
        d = DimensionPair(int(cfg.get("n", m.n)), int(cfg["k"]))
    except (KeyError, ValueError) as exc:
        raise UsageError(f"bad dimensions in config: {exc}") from exc
    if d.n != m.n:
        raise UsageError("manifold dimension and n disagree")
    b_coeff = float(cfg.get("B", 0.0))
    eps_grid = _eps_grid(cfg.get("eps_grid", {}))
    epsrel = float(cfg.get("quadrature_rel_tol", 1e-11))
    fam = quotient.TestFunctionFamily(m, d)
    samples = _parallel_map(
        lambda e: quotient.quotient_eval(fam, e, b_coeff, epsrel),
        sorted(eps_grid), args.jobs)
    curve = quotient.QuotientCurve(m, d, b_coeff, samples)
    fit = quotient.slope_fit(curve)
    inv_k = 1.0 / sharp_constant(d)
    try:
        pred = quotient.predicted_slope(m, d)
        rel_gap = abs(fit.slope / pred - 1.0) if pred != 0 else None
    except ValueError:
        pred, rel_gap = None, None
    summary = {
        "manifold": cfg.get("manifold", {}),
        "n": d.n, "k": d.k, "B": b_coeff,
        "intercept": fit.intercept,
        "intercept_sigma": fit.intercept_sigma,
        "intercept_rel_gap": abs(fit.intercept / inv_k - 1.0),
        "slope": fit.slope,
        "slope_sigma": fit.slope_sigma,
        "slope_statistically_zero": fit.slope_is_zero,
        "predicted_slope": pred,
        "relative_gap": rel_gap,
        "inv_sharp_constant": inv_k,
        "regime": fit.regime,
        "config_hash": _config_hash(cfg),
    }
    csv_rows = []
    for s in curve.sorted_samples():
        th = quotient.theta_eps(d, s.eps)
        csv_rows.append([s.eps, th.value if th.value is not None else float("nan"),
                         s.value, s.error])
    if args.out:
        _write_csv(args.out, ["eps", "theta_eps", "Q", "err"], csv_rows)
        _emit_json(summary, _sidecar(args.out, ".json"))
        if not args.no_plot:
            from . import plots
            plots.quotient_figure(
                [{"theta_eps": r[1], "Q": r[2]} for r in csv_rows],
                summary, _sidecar(args.out, ".png"))
    else:
        _emit_json(summary, None)
    slope_tol = cfg.get("slope_tolerance")
    if slope_tol is not None and rel_gap is not None and rel_gap > float(slope_tol):
        return EXIT_VERIFY
    icept_tol = cfg.get("intercept_tolerance")
    if icept_tol is not None and summary["intercept_rel_gap"] > float(icept_tol):
        return EXIT_VERIFY
    return EXIT_OK


def cmd_probe_iopt(args) -> int:
    cfg = _load_config(args)
    m = _manifold(cfg.get("manifold", {}))
    try:
        d = DimensionPair(int(cfg.get("n", m.n)), int(cfg["k"]))
        b_coeff = float(cfg["B"])
    except (KeyError, ValueError) as exc:
        raise UsageError(f"bad config: {exc}") from exc
    eps_grid = _eps_grid(cfg.get("eps_grid", {"start": 1e-3, "stop": 0.08, "count": 10}))
    try:
        probe = quotient.probe_iopt(m, d, b_coeff, eps_grid)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    summary = {
        "manifold": cfg.get("manifold", {}),
        "n": d.n, "k": d.k, "B": b_coeff,
        "violated": probe.violated,
        "witness_eps": probe.witness_eps,
        "margin": probe.margin,
        "sharp_bound": probe.sharp_bound,
        "note": probe.note,
        "config_hash": _config_hash(cfg),
    }
    if args.out:
        _write_csv(args.out, ["eps", "Q", "err"],
                   [[s.eps, s.value, s.error] for s in probe.samples])
        _emit_json(summary, _sidecar(args.out, ".json"))
        if not args.no_plot:
            from . import plots
            plots.probe_figure([{"eps": s.eps, "Q": s.value} for s in probe.samples],
                               probe.sharp_bound, _sidecar(args.out, ".png"))
    else:
        _emit_json(summary, None)
    expect = cfg.get("expect_violation")
    if expect is not None and bool(expect) != probe.violated:
        return EXIT_VERIFY
    return EXIT_OK


def cmd_pohozaev_regimes(args) -> int:
    cfg = _load_config(args)
    m = _manifold(cfg.get("manifold", {}))
    try:
        d = DimensionPair(int(cfg.get("n", m.n)), int(cfg["k"]))
    except (KeyError, ValueError) as exc:
        raise UsageError(f"bad config: {exc}") from exc
    params = [regimes.BlowupParams(float(p["alpha"]), float(p["mu"]))
              for p in cfg.get("params",
                               [{"alpha": 1.0, "mu": x}
                                for x in (1e-2, 1e-3, 1e-4)])]
    rows = regimes.balance_table(m, d, params)
    tol = float(cfg.get("pohozaev_tolerance", 1e-6))
    residuals = []
    for prof in regimes.standard_profiles(d)[: int(cfg.get("n_profiles", 3))]:
        rep = regimes.pohozaev_check(prof, d, 1.0, h=float(cfg.get("h", 0.01)))
        residuals.append(rep.relative)
    summary = {
        "manifold": cfg.get("manifold", {}),
        "n": d.n, "k": d.k,
        "pohozaev_relative_residuals": residuals,
        "pohozaev_tolerance": tol,
        "diagnoses": [r.diagnosis for r in rows],
        "config_hash": _config_hash(cfg),
    }
    csv_rows = [[r.alpha, r.mu, r.term_curvature, r.term_l2, r.theta,
                 r.theta_prime, r.regime_gradient] for r in rows]
    if args.out:
        _write_csv(args.out, ["alpha", "mu", "term_curvature", "term_l2",
                              "theta", "theta_prime", "regime"], csv_rows)
        _emit_json(summary, _sidecar(args.out, ".json"))
        if not args.no_plot:
            from . import plots
            plots.balance_figure([{
                "alpha": r.alpha, "mu": r.mu,
                "term_curvature": r.term_curvature, "term_l2": r.term_l2,
                "theta": r.theta, "theta_prime": r.theta_prime} for r in rows],
                _sidecar(args.out, ".png"))
    else:
        _emit_json(summary, None)
    return EXIT_OK if all(res < tol for res in residuals) else EXIT_VERIFY


def cmd_giraud(args) -> int:
    cfg = _load_config(args) if args.config else {}
    cases = cfg.get("cases", [
        {"a": 2.0, "b": 2.0, "p": 7.0, "q": 7.0, "n": 5},
        {"a": 2.0, "b": 3.0, "p": 7.0, "q": 7.0, "n": 5},
        {"a": 3.0, "b": 3.0, "p": 7.0, "q": 7.0, "n": 5},
    ])
    tol = float(cfg.get("exponent_tolerance", 0.1))
    mc_check = None
    if cfg.get("monte_carlo"):
        mc_cfg = cfg["monte_carlo"] if isinstance(cfg["monte_carlo"], dict) else {}
        case = cases[0]
        x_ker = giraud.EnvelopeKernel(int(case["n"]), case["a"], case["p"],
                                      float(mc_cfg.get("alpha", 2.0)))
        y_ker = giraud.EnvelopeKernel(int(case["n"]), case["b"], case["q"],
                                      float(mc_cfg.get("alpha", 2.0)))
        sep = float(mc_cfg.get("separation", 1.0))
        quad_val = giraud.convolve_radial(x_ker, y_ker, sep)
        mc_val = giraud.mc_convolve(x_ker, y_ker, sep,
                                    n_samples=int(mc_cfg.get("samples", 2_000_000)),
                                    seed=args.seed)
        mc_check = {
            "separation": sep,
            "quadrature": quad_val.value,
            "monte_carlo": mc_val.value,
            "mc_stderr": mc_val.error,
            "sigmas": abs(mc_val.value - quad_val.value) / mc_val.error,
            "seed": args.seed,
        }
    fits = []
    failed = False
    for case in cases:
        try:
            fit = giraud.regime_verify(case["a"], case["b"], case["p"],
                                       case["q"], int(case["n"]))
        except giraud.FitFailure as exc:
            fits.append({"error": str(exc), "case": case})
            failed = True
            continue
        entry = fit.to_dict()
        entry["samples"] = fit.samples
        entry["case"] = case
        fits.append(entry)
        if fit.exponent_gap > tol:
            failed = True
    payload = {"fits": fits, "exponent_tolerance": tol,
               "config_hash": _config_hash(cfg)}
    if mc_check is not None:
        payload["monte_carlo_check"] = mc_check
        if mc_check["sigmas"] > 3.0:
            failed = True
    if args.out:
        _emit_json(payload, args.out)
        if not args.no_plot:
            from . import plots
            plots.giraud_figure([f for f in fits if "error" not in f],
                                _sidecar(args.out, ".png"))
    else:
        _emit_json(payload, None)
    return EXIT_VERIFY if failed else EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polysob",
        description=("numerical laboratory for sharp higher-order Sobolev "
                     "constants, polyharmonic bubbles and screened Green kernels"),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_nk=False):
        p.add_argument("--n", type=int, default=None, help="space dimension")
        p.add_argument("--k", type=int, default=None, help="operator half-order")
        p.add_argument("--config", type=str, default=None, help="JSON config path")
        p.add_argument("--out", type=str, default=None, help="output path")
        p.add_argument("--precision", type=int, default=None,
                       help="extended-precision digits (env POLYSOB_PRECISION)")
        p.add_argument("--jobs", type=int, default=1, help="parallel workers")
        p.add_argument("--seed", type=int, default=1234, help="Monte-Carlo seed")
        p.add_argument("--no-plot", action="store_true",
                       help="skip the figure next to the CSV output")

    p = sub.add_parser("constants", help="closed-form constants for (n, k)")
    common(p)
    p.set_defaults(fn=cmd_constants)

    p = sub.add_parser("identities", help="exact bubble and kernel identities")
    common(p)
    p.add_argument("--sweep", type=int, default=None, metavar="NMAX",
                   help="verify all pairs 2 <= 2k < n <= NMAX")
    p.set_defaults(fn=cmd_identities)

    p = sub.add_parser("green", help="screened polyharmonic kernel curves")
    common(p)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--r-grid", type=str, default="0.01:10:200",
                   help="start:stop:count")
    p.add_argument("--linear", action="store_true",
                   help="linear instead of logarithmic r grid")
    p.set_defaults(fn=cmd_green)

    p = sub.add_parser("quotient-slope", help="quotient curve and slope fit")
    common(p)
    p.set_defaults(fn=cmd_quotient_slope)

    p = sub.add_parser("probe-iopt", help="search for an optimal-inequality violation")
    common(p)
    p.set_defaults(fn=cmd_probe_iopt)

    p = sub.add_parser("pohozaev-regimes", help="blow-up balance table and identity check")
    common(p)
    p.set_defaults(fn=cmd_pohozaev_regimes)

    p = sub.add_parser("giraud", help="convolution regime fits")
    common(p)
    p.set_defaults(fn=cmd_giraud)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
