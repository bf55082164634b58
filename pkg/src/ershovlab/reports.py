"""CSV report writers.

All rational columns are written as exact lowest-terms strings (``str`` of
a Fraction), so a zero residual prints as exactly ``0``.  Every report
carries the window or horizon that produced its numbers.
"""

from __future__ import annotations

import csv
from pathlib import Path

from .constructions import TransferCertificate, TransferResult
from .density import DensitySeries, LimsupDifferenceReport, WindowExtrema
from .reals import DiffRepResult
from .tables import Classification, MindChangeProfile


def _open(path: str | Path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_density_csv(
    series: DensitySeries, extrema: WindowExtrema | None, path: str | Path
) -> Path:
    path = _open(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "rho_n"])
        for n in range(1, series.universe + 1):
            w.writerow([n, str(series.rho(n))])
        if extrema is not None:
            w.writerow([])
            w.writerow(["window", "max", "argmax", "min", "argmin"])
            w.writerow(
                [
                    f"[{extrema.lo},{extrema.hi}]",
                    str(extrema.max_value),
                    extrema.argmax,
                    str(extrema.min_value),
                    extrema.argmin,
                ]
            )
    return path


def write_extrema_csv(extrema: WindowExtrema, path: str | Path) -> Path:
    path = _open(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["window", "max", "argmax", "min", "argmin"])
        w.writerow(
            [
                f"[{extrema.lo},{extrema.hi}]",
                str(extrema.max_value),
                extrema.argmax,
                str(extrema.min_value),
                extrema.argmin,
            ]
        )
    return path


def write_profile_csv(
    profile: MindChangeProfile, classification: Classification, path: str | Path
) -> Path:
    path = _open(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "changes", "monotone"])
        for x, (c, m) in enumerate(zip(profile.counts, profile.monotone)):
            w.writerow([x, c, int(m)])
        w.writerow([])
        w.writerow(["minimal_level", "is_ce", "bound", "is_f_ce", "certified"])
        w.writerow(
            [
                classification.minimal_level,
                int(classification.is_ce),
                classification.bound_name or "",
                "" if classification.is_f_ce is None else int(classification.is_f_ce),
                int(classification.certified),
            ]
        )
    return path


def write_diffrep_csv(result: DiffRepResult, path: str | Path) -> Path:
    path = _open(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["s", "rho_s_A", "u_s", "v_s", "residual"])
        for row in result.rows:
            w.writerow([row.s, str(row.rho_a), str(row.u), str(row.v), str(row.residual)])
    return path


def write_tracking_csv(result: TransferResult, path: str | Path) -> Path:
    path = _open(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "m_x", "rho_x_A", "rho_mx_B", "error", "bound_1_over_x", "ok"])
        for row in result.tracking:
            w.writerow(
                [
                    row.level,
                    row.stage,
                    str(row.rho_a),
                    str(row.rho_b),
                    str(row.error),
                    str(row.bound),
                    int(row.ok),
                ]
            )
        w.writerow([])
        e = result.b_extrema
        w.writerow(["window", "max", "argmax", "min", "argmin"])
        w.writerow(
            [f"[{e.lo},{e.hi}]", str(e.max_value), e.argmax, str(e.min_value), e.argmin]
        )
    return path


def write_certificate_csv(cert: TransferCertificate, path: str | Path) -> Path:
    path = _open(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["z", "f_z", "g_changes", "B_changes", "bound_ok", "limit_agrees"])
        for z, fz, gc, bc, ok, agree in cert.rows():
            w.writerow([z, fz, gc, bc, int(ok), int(agree)])
    return path


def write_limsup_csv(report: LimsupDifferenceReport, path: str | Path) -> Path:
    path = _open(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(
            [
                "window",
                "difference_estimate",
                "oscillation",
                "limsup_a",
                "limsup_b",
                "residual",
                "tolerance",
                "limit_plausible",
            ]
        )
        w.writerow(
            [
                f"[{report.window[0]},{report.window[1]}]",
                str(report.difference_estimate),
                str(report.oscillation),
                str(report.limsup_a),
                str(report.limsup_b),
                str(report.residual),
                str(report.tolerance),
                int(report.limit_plausible),
            ]
        )
    return path


def write_modulus_csv(mp, path: str | Path) -> Path:
    path = _open(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["level", "m", "settle_floor", "bound_at_stage"])
        for rec in mp.records:
            w.writerow([rec.level, rec.stage, rec.settle_floor, rec.bound_at_stage])
    return path


def write_suite_csv(report, path: str | Path) -> Path:
    path = _open(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["suite", "check", "passed", "detail", "window", "runtime_s"])
        for c in report.checks:
            w.writerow(
                [report.name, c.name, int(c.passed), c.detail, c.window, f"{c.runtime:.3f}"]
            )
    return path
