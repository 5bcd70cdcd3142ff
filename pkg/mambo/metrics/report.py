"""
Best / Avg report across retained checkpoints

Per evaluation set: one row per checkpoint (rank by dev loss, training epoch
in parentheses), then Best / Avg, population std and max-min range. With
more than one set, the means of the per-set Best and Avg EERs follow.
"""

import math
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .det import best_avg, compute_eer, compute_min_tdcf, join_scores

AMBIGUITY_NOTE = ("# Best is taken per evaluation set independently; "
                  "the best checkpoint may differ between sets.")


@dataclass
class CheckpointResult:
    rank: int
    epoch: Optional[int]
    source: str
    eer: float
    min_tdcf: Optional[float] = None


@dataclass
class SetReport:
    name: str
    rows: list = field(default_factory=list)

    def eers(self):
        return [r.eer for r in self.rows]

    def tdcfs(self):
        return [r.min_tdcf for r in self.rows if r.min_tdcf is not None]

    def summary(self, values):
        best, avg = best_avg(values)
        return best, avg, float(np.std(values)), max(values) - min(values)


def evaluate_set(name, entries, score_sets, coeffs=None, epochs=None):
    """
    Metrics of one evaluation set for each checkpoint's scores.

    Args:
        name: set name
        entries: protocol entries of the set
        score_sets: list of (source, mapping utt_id -> score), rank order
        coeffs: optional CostCoefficients
        epochs: optional training epoch per rank

    Returns:
        SetReport
    """
    report = SetReport(name)
    for i, (source, scores) in enumerate(score_sets):
        records = join_scores(scores, entries, source)
        eer, _ = compute_eer(records)
        tdcf = compute_min_tdcf(records, coeffs) if coeffs is not None else None
        epoch = epochs[i] if epochs is not None and i < len(epochs) else None
        report.rows.append(CheckpointResult(i + 1, epoch, source, eer, tdcf))
    return report


def format_report(reports):
    """Plain-text table for a list of SetReport"""
    lines = [AMBIGUITY_NOTE]
    for rep in reports:
        with_tdcf = len(rep.tdcfs()) == len(rep.rows)
        lines.append(f"[{rep.name}]")
        header = f"{'rank':>4}  {'epoch':>7}  {'EER(%)':>8}"
        if with_tdcf:
            header += f"  {'min_tDCF':>8}"
        lines.append(header + "  source")
        for r in rep.rows:
            epoch = f"({r.epoch})" if r.epoch is not None else "(-)"
            row = f"{r.rank:>4}  {epoch:>7}  {100 * r.eer:>8.2f}"
            if with_tdcf:
                row += f"  {r.min_tdcf:>8.4f}"
            lines.append(row + f"  {os.path.basename(r.source)}")
        best, avg, std, span = rep.summary(rep.eers())
        lines.append(f"EER(%) Best / Avg = {100 * best:.2f} / {100 * avg:.2f}  "
                     f"std={100 * std:.2f} range={100 * span:.2f}")
        if with_tdcf:
            best, avg, std, span = rep.summary(rep.tdcfs())
            lines.append(f"min_tDCF Best / Avg = {best:.4f} / {avg:.4f}  "
                         f"std={std:.4f} range={span:.4f}")
    if len(reports) > 1:
        bests, avgs = zip(*(best_avg(rep.eers()) for rep in reports))
        lines.append("[all sets]")
        lines.append(f"mean EER(%) Best / Avg = {100 * math.fsum(bests) / len(bests):.2f} / "
                     f"{100 * math.fsum(avgs) / len(avgs):.2f}")
    return '\n'.join(lines) + '\n'
