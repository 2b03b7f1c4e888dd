"""Figure rendering for the report paths.

Every CSV-emitting subcommand can drop a matplotlib figure next to its
delimited output; all rendering is file-based (Agg backend, no display).
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def _new_axes(title: str, xlabel: str, ylabel: str):
    fig, ax = plt.subplots(figsize=(6.4, 4.4), dpi=150)
    ax.set_title(title, fontsize=10)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, which="both", alpha=0.3, linewidth=0.5)
    return fig, ax


def _finish(fig, path: str):
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def green_kernel_figure(rows: list[dict], n: int, k: int, alpha: float, path: str) -> str:
    """Kernel curve with the scaled singularity plateau and the envelope."""
    rs = [row["r"] for row in rows]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.6, 4.2), dpi=150)
    ax1.loglog(rs, [abs(row["gamma"]) for row in rows], label="|Gamma_alpha|")
    ax1.loglog(rs, [row["envelope_bound"] for row in rows], "--",
               label="envelope bound")
    ax1.set_xlabel("r")
    ax1.set_ylabel("kernel")
    ax1.set_title(f"screened polyharmonic kernel  n={n} k={k} alpha={alpha}",
                  fontsize=9)
    ax1.legend(fontsize=8)
    ax1.grid(True, which="both", alpha=0.3, linewidth=0.5)
    ax2.semilogx(rs, [row["r_pow_singular_scaled"] for row in rows])
    ax2.set_xlabel("r")
    ax2.set_ylabel(f"r^{n - 2 * k} Gamma_alpha")
    ax2.set_title("singularity-scaled kernel", fontsize=9)
    ax2.grid(True, which="both", alpha=0.3, linewidth=0.5)
    return _finish(fig, path)


def quotient_figure(samples: list[dict], summary: dict, path: str) -> str:
    """Quotient against theta with the fitted line and the prediction."""
    thetas = [s["theta_eps"] for s in samples]
    qs = [s["Q"] for s in samples]
    fig, ax = _new_axes(
        f"Sobolev quotient vs theta ({summary.get('manifold', '')})",
        "theta_eps", "Q(eps)")
    ax.plot(thetas, qs, "o", ms=4, label="measured")
    icpt, slope = summary["intercept"], summary["slope"]
    ts = [0.0] + sorted(thetas)
    ax.plot(ts, [icpt + slope * t for t in ts], "-", lw=1,
            label=f"fit: slope {slope:.4g}")
    if summary.get("predicted_slope") is not None:
        ax.plot(ts, [icpt + summary["predicted_slope"] * t for t in ts], "--",
                lw=1, label=f"predicted slope {summary['predicted_slope']:.4g}")
    ax.axhline(summary["inv_sharp_constant"], color="k", lw=0.6, alpha=0.6,
               label="1/K(n,k)")
    ax.legend(fontsize=8)
    return _finish(fig, path)


def probe_figure(samples: list[dict], sharp_bound: float, path: str) -> str:
    eps = [s["eps"] for s in samples]
    qs = [s["Q"] for s in samples]
    fig, ax = _new_axes("optimal-inequality probe", "eps", "Q(eps)")
    ax.semilogx(eps, qs, "o-", ms=4, label="Q(eps)")
    ax.axhline(sharp_bound, color="r", lw=1, label="1/K(n,k)")
    ax.legend(fontsize=8)
    return _finish(fig, path)


def balance_figure(rows: list[dict], path: str) -> str:
    ams = [r["alpha"] * r["mu"] for r in rows]
    fig, ax = _new_axes("Pohozaev balance terms", "alpha*mu", "term size")
    for key, style in [("term_curvature", "o-"), ("term_l2", "s-"),
                       ("theta", ":"), ("theta_prime", "--")]:
        vals = [abs(r[key]) for r in rows]
        if any(v > 0 for v in vals):
            ax.loglog(ams, vals, style, ms=4, label=key)
    ax.legend(fontsize=8)
    return _finish(fig, path)


def giraud_figure(fits: list[dict], path: str) -> str:
    fig, ax = _new_axes("convolution regime fits", "d (or alpha)", "Z")
    for fit in fits:
        if fit.get("samples"):
            xs = [s[0] for s in fit["samples"]]
            zs = [s[1] for s in fit["samples"]]
            ax.loglog(xs, zs, "o-", ms=4,
                      label=f"{fit['regime']}: {fit['fitted_exponent']:.3f} "
                            f"(expected {fit['expected_exponent']:.3f})")
    ax.legend(fontsize=8)
    return _finish(fig, path)
