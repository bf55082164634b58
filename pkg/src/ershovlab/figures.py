"""Matplotlib renderings of the CSV reports.

Figures are a convenience view; the CSV files remain the exact record
(floats appear here only at the moment of drawing).  matplotlib is
imported lazily with the Agg backend so headless runs and non-plotting
code paths never pay for it.
"""

from __future__ import annotations

from pathlib import Path


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _finish(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    _plt().close(fig)
    return path


def default_figure_path(csv_path: str | Path) -> Path:
    p = Path(csv_path)
    return p.with_suffix(p.suffix + ".png") if p.suffix != ".csv" else p.with_suffix(".png")


def save_density_figure(series, extrema, path: str | Path, title: str = "partial densities") -> Path:
    plt = _plt()
    fig, ax = plt.subplots(figsize=(7, 4))
    ns = range(1, series.universe + 1)
    ax.plot(list(ns), [series.count(n) / n for n in ns], lw=0.8)
    if extrema is not None:
        ax.axvspan(extrema.lo, extrema.hi, alpha=0.1, color="grey", label="window")
        ax.plot([extrema.argmax], [float(extrema.max_value)], "^", color="tab:red")
        ax.plot([extrema.argmin], [float(extrema.min_value)], "v", color="tab:blue")
    ax.set_xlabel("n")
    ax.set_ylabel("rho_n")
    ax.set_title(title)
    return _finish(fig, path)


def save_profile_figure(profile, path: str | Path) -> Path:
    plt = _plt()
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(range(len(profile.counts)), profile.counts, width=1.0)
    ax.set_xlabel("element")
    ax.set_ylabel("mind changes")
    ax.set_title(f"mind-change profile (max {profile.maximum})")
    return _finish(fig, path)


def save_diffrep_figure(result, path: str | Path) -> Path:
    plt = _plt()
    fig, ax = plt.subplots(figsize=(7, 4))
    ss = [row.s for row in result.rows]
    ax.plot(ss, [float(r.u) for r in result.rows], label="odd-layer sum u_s", lw=0.9)
    ax.plot(ss, [float(r.v) for r in result.rows], label="even-layer sum v_s", lw=0.9)
    ax.plot(ss, [float(r.rho_a) for r in result.rows], "--", label="rho_s(A)", lw=0.9)
    ax.set_xlabel("prefix length s")
    ax.legend()
    ax.set_title("difference representation (residuals all exactly 0)")
    return _finish(fig, path)


def save_tracking_figure(result, path: str | Path) -> Path:
    plt = _plt()
    fig, axes = plt.subplots(1, 2, figsize=(11, 4))
    b = result.b
    xs = []
    ys = []
    step = max(1, b.universe // 4000)
    for n in range(1, b.universe + 1, step):
        xs.append(n)
        ys.append(b.count(n) / n)
    axes[0].plot(xs, ys, lw=0.8, label="rho_y(B)")
    for lo, hi, p, dq in result.intervals:
        axes[0].hlines(p / dq, lo, min(hi, b.universe), color="tab:red", lw=1.2)
    axes[0].set_xscale("log")
    axes[0].set_xlabel("y")
    axes[0].set_title("built set density vs level targets")
    axes[0].legend()
    lv = [r.level for r in result.tracking]
    axes[1].plot(lv, [float(r.error) for r in result.tracking], "o-", label="|rho_mx(B) - rho_x(A)|")
    axes[1].plot(lv, [float(r.bound) for r in result.tracking], "--", label="1/x")
    axes[1].set_xlabel("level x")
    axes[1].set_yscale("log")
    axes[1].legend()
    axes[1].set_title("tracking ledger")
    return _finish(fig, path)


def save_modulus_figure(mp, path: str | Path) -> Path:
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(range(len(mp.values)), mp.values, "o-")
    ax.set_xlabel("level x")
    ax.set_ylabel("m(x)")
    ax.set_title(f"modulus growth (bound {mp.bound.name})")
    return _finish(fig, path)


def save_sequences_figure(seqs, labels, path: str | Path, title: str = "sequences") -> Path:
    plt = _plt()
    fig, ax = plt.subplots(figsize=(7, 4))
    for seq, label in zip(seqs, labels):
        ax.plot(range(len(seq.values)), [float(v) for v in seq.values], ".-", label=label, lw=0.8)
    ax.set_xlabel("n")
    ax.legend()
    ax.set_title(title)
    return _finish(fig, path)


def save_certificate_figure(cert, path: str | Path) -> Path:
    plt = _plt()
    fig, ax = plt.subplots(figsize=(7, 4))
    step = max(1, cert.horizon // 4000)
    zs = list(range(0, cert.horizon, step))
    ax.plot(zs, [int(cert.b_changes[z]) for z in zs], ".", ms=2, label="staged-set changes")
    ax.plot(zs, [int(cert.f_values[z]) for z in zs], lw=0.8, label="f(z)", color="tab:red")
    ax.set_xscale("symlog")
    ax.set_yscale("symlog")
    ax.set_xlabel("z")
    ax.legend()
    ax.set_title(
        f"mind-change certificate (agree: {int(cert.limit_agrees.sum())}/{cert.horizon})"
    )
    return _finish(fig, path)


def save_suite_figure(report, path: str | Path) -> Path:
    plt = _plt()
    fig, ax = plt.subplots(figsize=(7, 0.45 * max(4, len(report.checks))))
    names = [c.name for c in report.checks]
    vals = [1 if c.passed else 0 for c in report.checks]
    colors = ["tab:green" if v else "tab:red" for v in vals]
    ax.barh(range(len(names)), [1] * len(names), color=colors)
    ax.set_yticks(range(len(names)))
    ax.set_yticklabels(names, fontsize=8)
    ax.set_xticks([])
    ax.set_title(f"suite {report.name}: {'PASS' if report.passed else 'FAIL'}")
    return _finish(fig, path)
