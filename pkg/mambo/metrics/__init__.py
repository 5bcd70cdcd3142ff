"""
Metrics - DET sweep, EER, min t-DCF and Best / Avg reporting
"""

from .det import (
    ScoreRecord, CostCoefficients, SweepCounts, join_scores, sweep_counts, det_sweep,
    compute_eer, compute_min_tdcf, best_avg,
)
from .scores import format_scores, write_scores, parse_scores, read_scores
from .report import CheckpointResult, SetReport, evaluate_set, format_report

__all__ = [
    'ScoreRecord', 'CostCoefficients', 'SweepCounts', 'join_scores', 'sweep_counts',
    'det_sweep', 'compute_eer', 'compute_min_tdcf', 'best_avg',
    'format_scores', 'write_scores', 'parse_scores', 'read_scores',
    'CheckpointResult', 'SetReport', 'evaluate_set', 'format_report',
]
