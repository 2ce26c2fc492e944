"""Deterministic serialization of experiment outputs.

Reports are emitted as canonical JSON (sorted keys, minimal separators,
shortest round-trip floats) and plot-ready CSV, both byte-stable given
the experiment config. Run manifests carry the non-deterministic
envelope (timestamps, runtime, thread count) so the data files can be
compared byte for byte across re-runs.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from datetime import datetime, timezone
from typing import Mapping, Sequence

import numpy as np

from . import __version__
from .experiments import ExperimentReport, MarginalResult
from .laws import NegligibilityReport

__all__ = [
    "canonical_json_bytes",
    "write_json",
    "plot_rows",
    "write_plot_csv",
    "render_report_text",
    "render_conditions_text",
    "conditions_dict",
    "build_manifest",
    "sha256_hex",
]

PLOT_COLUMNS = ("prime", "u", "x", "empirical_cdf", "oracle_cdf")
PLOT_SCHEMA_VERSION = 1


def canonical_json_bytes(obj) -> bytes:
    """Sorted-key, minimal-separator JSON with a trailing newline.

    Floats use repr (shortest round-trip); non-finite values must have
    been converted upstream (json would serialize them unportably).
    """
    return (json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False) + "\n").encode()


def write_json(path, obj) -> None:
    with open(path, "wb") as fh:
        fh.write(canonical_json_bytes(obj))


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _fmt(v) -> str:
    """Shortest round-trip decimal for floats; plain str otherwise."""
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    return str(v)


def _marginal_plot_rows(m: MarginalResult, max_points: int) -> list[tuple]:
    if m.samples is None or len(m.samples) == 0:
        return []
    xs = np.sort(np.asarray(m.samples, dtype=np.float64))
    n = xs.size
    if n > max_points:
        idx = np.unique(np.linspace(0, n - 1, max_points).round().astype(np.int64))
    else:
        idx = np.arange(n)
    grid = xs[idx]
    ecdf = (idx + 1) / n
    if m.oracle_cdf is not None:
        oracle = np.asarray(m.oracle_cdf(grid), dtype=np.float64)
    elif m.oracle_samples is not None:
        ora = np.sort(np.asarray(m.oracle_samples, dtype=np.float64))
        oracle = np.searchsorted(ora, grid, side="right") / ora.size
    else:
        oracle = None
    rows = []
    for j in range(grid.size):
        rows.append(
            (
                m.prime,
                m.u,
                float(grid[j]),
                float(ecdf[j]),
                float(oracle[j]) if oracle is not None else None,
            )
        )
    return rows


def plot_rows(report: ExperimentReport, max_points: int = 512) -> list[tuple]:
    """(prime, u, x, empirical_cdf, oracle_cdf) rows for every marginal.

    x runs over the sorted sample values (subsampled evenly past
    max_points); the oracle column evaluates the analytic CDF when one
    exists and the oracle-sample ECDF otherwise.
    """
    rows: list[tuple] = []
    for m in report.marginals:
        rows.extend(_marginal_plot_rows(m, max_points))
    return rows


def write_plot_csv(report: ExperimentReport, path, max_points: int = 512) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(PLOT_COLUMNS)
        for row in plot_rows(report, max_points):
            writer.writerow([_fmt(v) for v in row])


def _table(rows: list[Sequence[str]]) -> str:
    """Left-aligned fixed-width text table."""
    if not rows:
        return ""
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows)


def _num(v, digits=6) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.{digits}g}"
    return str(v)


def render_report_text(report: ExperimentReport) -> str:
    """Aligned-column rendering of one experiment report."""
    out = [f"experiment {report.kind}: {report.status.upper()}"]
    if report.advisory:
        unmet = report.extras.get("hypothesis_unmet")
        why = f" ({unmet['condition']})" if isinstance(unmet, Mapping) else ""
        out.append(f"ADVISORY: hypothesis unmet or nothing asserted{why}")
    rows = [["prime", "u", "n", "mean", "variance", "ks_p", "oracle_p", "verdict"]]
    for m in report.marginals:
        verdict = "pass" if m.passed else ("FAIL" if m.passed is False else "skip")
        rows.append(
            [
                str(m.prime) if m.prime is not None else "-",
                _num(m.u, 4),
                str(m.n_steps),
                _num(m.mean),
                _num(m.variance),
                _num(m.ks.pvalue, 4) if m.ks else "-",
                _num(m.ks_oracle.pvalue, 4) if m.ks_oracle else "-",
                verdict,
            ]
        )
    out.append(_table(rows))
    if report.covariances:
        rows = [["left", "right", "empirical", "predicted", "std_error", "verdict"]]
        for c in report.covariances:
            rows.append(
                [
                    c.left,
                    c.right,
                    _num(c.empirical),
                    _num(c.predicted),
                    _num(c.std_error),
                    "pass" if c.within_band else "FAIL",
                ]
            )
        out.append(_table(rows))
    notes = [m.note for m in report.marginals if m.note]
    for note in dict.fromkeys(notes):
        out.append(f"note: {note}")
    return "\n".join(out) + "\n"


def conditions_dict(
    report: NegligibilityReport, boundaries: Mapping[int, float] | None = None
) -> dict:
    """JSON form of a condition-check report plus optional boundary column."""
    doc = report.to_dict()
    if boundaries:
        for row in doc["rows"]:
            row["frequent_boundary"] = boundaries.get(row["n"])
    doc["verdict"] = "holds" if report.consistent else "fails"
    return doc


def render_conditions_text(
    report: NegligibilityReport, boundaries: Mapping[int, float] | None = None
) -> str:
    """Aligned table of the negligibility check, one row per n."""
    rows = [
        [
            "n",
            "boundary",
            "frequent_max",
            "remainder",
            "ratio_sqrt_n",
            "excess_remainder",
            "excess_ratio",
        ]
    ]
    for n, fmax, rem, ratio, erem, eratio in report.rows:
        b = boundaries.get(n) if boundaries else None
        rows.append(
            [
                str(n),
                _num(b, 6) if b is not None else "-",
                str(fmax),
                _num(rem),
                _num(ratio),
                _num(erem),
                _num(eratio),
            ]
        )
    lines = [
        _table(rows),
        f"remainder trend: {report.trend}; excess trend: {report.excess_trend}",
        f"excess second-moment sum: {_num(report.second_moment_sum)}",
        f"verdict: {'holds' if report.consistent else 'fails'}"
        " (theorem condition uses the excess form)",
    ]
    return "\n".join(lines) + "\n"


def build_manifest(
    config_path: str,
    config_bytes: bytes,
    report: ExperimentReport,
    outputs: Mapping[str, str],
    seed: int,
    threads: int,
) -> dict:
    """Run-envelope record: config provenance, versions, outputs, runtime.

    The manifest carries the timestamps and runtime so report.json and
    plots.csv stay byte-identical across re-runs.
    """
    return {
        "config_path": str(config_path),
        "config_sha256": sha256_hex(config_bytes),
        "resolved_config": report.config,
        "kind": report.kind,
        "status": report.status,
        "master_seed": seed,
        "threads": threads,
        "tool_version": __version__,
        "created_utc": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "runtime_seconds": round(report.runtime_seconds, 3),
        "plot_schema_version": PLOT_SCHEMA_VERSION,
        "outputs": dict(outputs),
    }


def rows_to_csv_text(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    """CSV text with shortest round-trip numeric formatting."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()
