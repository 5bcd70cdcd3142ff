"""
Labeled datasets: manifest + protocol + feature files.

Manifest lines are `<utt_id> <feature path>`, paths relative to the
manifest's directory.
"""

import logging
import os

import numpy as np
import torch

from ..errors import FormatError
from .features import read_features
from ..platform import get_profile
from .protocol import Key, protocol_keys, read_protocol
from .shaping import DEFAULT_T_FIXED, crop_or_pad

logger = logging.getLogger(__name__)


def parse_manifest(text, source="manifest"):
    """
    Parse manifest text.

    Returns:
        list: (utt_id, path) in file order
    """
    items = []
    seen = set()
    for lineno, line in enumerate(text.splitlines(), 1):
        fields = line.split()
        if not fields:
            continue
        if len(fields) != 2:
            raise FormatError(f"{source} line {lineno}: expected '<utt_id> <path>', got {line.strip()!r}")
        if fields[0] in seen:
            raise FormatError(f"{source} line {lineno}: duplicate utterance id {fields[0]!r}")
        seen.add(fields[0])
        items.append((fields[0], fields[1]))
    return items


def read_manifest(path):
    """Manifest entries with paths resolved against the manifest's directory"""
    with open(path, 'r', encoding='utf-8') as f:
        items = parse_manifest(f.read(), source=str(path))
    root = os.path.dirname(os.path.abspath(path))
    return [(utt, os.path.join(root, rel)) for utt, rel in items]


def write_manifest(path, items):
    with open(path, 'w', encoding='utf-8') as f:
        for utt, rel in items:
            f.write(f"{utt} {rel}\n")


class LabeledDataset:
    """
    In-memory utterances with their labels.

    Args:
        ids: utterance ids
        features: list of (T, F) float32 arrays
        labels: list of 0 (bonafide) / 1 (spoof), or None when unlabeled
    """

    def __init__(self, ids, features, labels=None):
        if len(ids) != len(features) or (labels is not None and len(labels) != len(ids)):
            raise FormatError("dataset ids, features and labels differ in length")
        dims = {x.shape[1] for x in features}
        if len(dims) > 1:
            raise FormatError(f"dataset mixes feature dims {sorted(dims)}")
        self.ids = list(ids)
        self.features = list(features)
        self.labels = None if labels is None else np.asarray(labels, dtype=np.int64)

    def __len__(self):
        return len(self.ids)

    @property
    def input_dim(self):
        return self.features[0].shape[1] if self.features else 0

    def batch(self, indices, T_fixed=DEFAULT_T_FIXED, rng=None):
        """
        Stack utterances into a fixed-length batch.

        Args:
            indices: utterance positions
            T_fixed: frames per utterance
            rng: numpy Generator for train-mode crops, None for eval

        Returns:
            tuple: (features (B, T_fixed, F) in the production dtype, labels (B,) or None)
        """
        x = np.stack([crop_or_pad(self.features[i], T_fixed, rng) for i in indices])
        labels = None if self.labels is None else torch.from_numpy(self.labels[list(indices)])
        return torch.from_numpy(np.ascontiguousarray(x)).to(get_profile().dtype()), labels

    @classmethod
    def from_synth(cls, utterances):
        return cls([u.entry.utt_id for u in utterances], [u.features for u in utterances],
                   [u.entry.label for u in utterances])


def load_dataset(manifest_path, protocol_path=None):
    """
    Read every utterance listed in a manifest.

    Args:
        manifest_path: manifest file
        protocol_path: optional protocol supplying labels; every manifest id
            must appear in it

    Returns:
        LabeledDataset
    """
    items = read_manifest(manifest_path)
    labels = None
    if protocol_path is not None:
        keyed = protocol_keys(read_protocol(protocol_path))
        missing = [utt for utt, _ in items if utt not in keyed]
        if missing:
            raise FormatError(f"{protocol_path}: no key for {len(missing)} manifest ids, "
                              f"first {missing[0]!r}")
        labels = [Key.LABEL[keyed[utt]] for utt, _ in items]
    features = [read_features(path) for _, path in items]
    logger.debug("loaded %s utterances=%d", manifest_path, len(items))
    return LabeledDataset([utt for utt, _ in items], features, labels)
