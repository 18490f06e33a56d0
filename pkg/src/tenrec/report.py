"""Run results: recovered tensors, per-iteration trace, final metrics."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field


@dataclass
class RecoveryReport:
    """Outcome of one solver run.

    ``tensors`` maps result names to arrays ('Z' for completion; 'L', 'E',
    'N' for robust PCA).  ``trace`` holds one dict per iteration; the keys
    written to CSV are fixed per solver, extra keys (per-pair subproblem
    objectives, descent bookkeeping) stay in memory.
    """

    tensors: dict
    trace: list
    metrics: dict = field(default_factory=dict)
    converged: bool = False
    iterations: int = 0
    wall_seconds: float = 0.0
    notes: dict = field(default_factory=dict)

    @property
    def descent_violations(self):
        return self.notes.get("descent_violations", 0)


TRACE_COLUMNS_COMPLETION = ("iter", "inf_norm_diff", "lagrangian", "seconds")
TRACE_COLUMNS_RPCA = TRACE_COLUMNS_COMPLETION + ("E_l1", "N_fro", "residual_fro")


def write_trace_csv(path, trace, columns):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in trace:
            writer.writerow([repr(row[c]) if isinstance(row[c], float) else row[c] for c in columns])


METRIC_COLUMNS = ("method", "sr_or_noise", "psnr", "ssim", "fsim", "ergas")


def metric_row(method, sr_or_noise, values):
    """One metrics-table row; the FSIM column is always reported as n/a."""
    return {
        "method": method,
        "sr_or_noise": sr_or_noise,
        "psnr": values.get("psnr", "n/a"),
        "ssim": values.get("ssim", "n/a"),
        "fsim": "n/a",
        "ergas": values.get("ergas", "n/a"),
    }


def write_metrics_csv(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=METRIC_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
