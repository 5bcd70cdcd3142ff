"""
Score files: one `<utt_id> <score>` line per utterance, six decimals,
sorted by utterance id.
"""

import math

from ..errors import FormatError


def format_scores(scores):
    return ''.join(f"{utt} {scores[utt]:.6f}\n" for utt in sorted(scores))


def write_scores(path, scores):
    """Write a mapping utt_id -> score"""
    for utt, score in scores.items():
        if not utt or any(c.isspace() for c in utt):
            raise FormatError(f"utterance id {utt!r} cannot be written to a score file")
        if not math.isfinite(score):
            raise FormatError(f"score for {utt} is {score}")
    with open(path, 'w', encoding='utf-8') as f:
        f.write(format_scores(scores))


def parse_scores(text, source="scores"):
    scores = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        fields = line.split()
        if not fields:
            continue
        if len(fields) != 2:
            raise FormatError(f"{source} line {lineno}: expected '<utt_id> <score>', got {line.strip()!r}")
        try:
            score = float(fields[1])
        except ValueError:
            raise FormatError(f"{source} line {lineno}: score {fields[1]!r} is not a number")
        if not math.isfinite(score):
            raise FormatError(f"{source} line {lineno}: score is {fields[1]}")
        if fields[0] in scores:
            raise FormatError(f"{source} line {lineno}: duplicate utterance id {fields[0]!r}")
        scores[fields[0]] = score
    return scores


def read_scores(path):
    """Read a score file into a mapping utt_id -> score"""
    with open(path, 'r', encoding='utf-8') as f:
        return parse_scores(f.read(), source=str(path))
