"""
Detection metrics from empirical operating points.

Scores are oriented so that higher means bonafide. At threshold theta:
  Pmiss = #(bonafide with score < theta) / #bonafide
  Pfa   = #(spoof with score >= theta)   / #spoof

The sweep visits -inf, every distinct score and +inf. Comparisons between
operating points are made on integer counts, so results are exact and no
interpolation is involved.
"""

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, FormatError, NonFiniteError, ShapeError
from ..data.protocol import Key


@dataclass
class ScoreRecord:
    utt_id: str
    score: float
    key: str


@dataclass
class CostCoefficients:
    """
    Constrained tandem cost C0 + C1 * Pmiss + C2 * Pfa, coefficients
    supplied already normalized.
    """
    C0: float
    C1: float
    C2: float

    def validate(self):
        for name in ('C0', 'C1', 'C2'):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ConfigError(f"t-DCF coefficient {name} must be finite and >= 0, got {value}")
        if self.C1 <= 0 and self.C2 <= 0:
            raise ConfigError("t-DCF needs C1 > 0 or C2 > 0")
        return self


@dataclass
class SweepCounts:
    """Integer counts at every sweep threshold (ascending)"""
    thresholds: np.ndarray
    misses: np.ndarray
    false_alarms: np.ndarray
    n_bonafide: int
    n_spoof: int

    @property
    def p_miss(self):
        return self.misses / self.n_bonafide

    @property
    def p_fa(self):
        return self.false_alarms / self.n_spoof


def join_scores(scores, entries, source="scores"):
    """
    Attach protocol keys to scores.

    Args:
        scores: mapping utt_id -> score
        entries: ProtocolEntry list

    Returns:
        list: ScoreRecord for every protocol entry
    """
    missing = [e.utt_id for e in entries if e.utt_id not in scores]
    if missing:
        raise FormatError(f"{source}: no score for {len(missing)} protocol ids, first {missing[0]!r}")
    return [ScoreRecord(e.utt_id, float(scores[e.utt_id]), e.key) for e in entries]


def _split(records):
    bona, spoof = [], []
    for r in records:
        if not r.utt_id:
            raise FormatError("score record with an empty utterance id")
        if not math.isfinite(r.score):
            raise NonFiniteError(f"score for {r.utt_id} is {r.score}")
        if r.key == Key.BONAFIDE:
            bona.append(r.score)
        elif r.key == Key.SPOOF:
            spoof.append(r.score)
        else:
            raise FormatError(f"record {r.utt_id} has unknown key {r.key!r}")
    if not bona or not spoof:
        raise ShapeError(f"detection metrics need both classes, got "
                         f"{len(bona)} bonafide and {len(spoof)} spoof")
    return np.sort(np.asarray(bona, dtype=np.float64)), np.sort(np.asarray(spoof, dtype=np.float64))


def sweep_counts(records):
    """Miss and false-alarm counts at every sweep threshold"""
    bona, spoof = _split(records)
    thresholds = np.concatenate(([-np.inf], np.unique(np.concatenate((bona, spoof))), [np.inf]))
    misses = np.searchsorted(bona, thresholds, side='left')
    false_alarms = len(spoof) - np.searchsorted(spoof, thresholds, side='left')
    return SweepCounts(thresholds, misses, false_alarms, len(bona), len(spoof))


def det_sweep(records):
    """
    Empirical DET operating points.

    Returns:
        list: (threshold, Pmiss, Pfa) with thresholds ascending
    """
    counts = sweep_counts(records)
    return [(float(t), float(m), float(f))
            for t, m, f in zip(counts.thresholds, counts.p_miss, counts.p_fa)]


def compute_eer(records):
    """
    Equal error rate at the operating point closest to Pmiss = Pfa.

    Returns:
        tuple: (eer in [0, 1], threshold); ties go to the lower threshold
    """
    c = sweep_counts(records)
    gap = np.abs(c.misses * c.n_spoof - c.false_alarms * c.n_bonafide)
    i = int(np.argmin(gap))
    eer = (c.misses[i] / c.n_bonafide + c.false_alarms[i] / c.n_spoof) / 2.0
    return float(eer), float(c.thresholds[i])


def tdcf_curve(counts, coeffs):
    return coeffs.C0 + coeffs.C1 * counts.p_miss + coeffs.C2 * counts.p_fa


def compute_min_tdcf(records, coeffs):
    """
    Minimum over thresholds of C0 + C1 * Pmiss + C2 * Pfa.

    Returns:
        float
    """
    coeffs.validate()
    return float(np.min(tdcf_curve(sweep_counts(records), coeffs)))


def best_avg(values):
    """
    Best (minimum) and mean of a metric across checkpoints.

    Returns:
        tuple: (best, avg)
    """
    values = [float(v) for v in values]
    if not values:
        raise ShapeError("best_avg needs at least one value")
    return min(values), math.fsum(values) / len(values)
