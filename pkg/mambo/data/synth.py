"""
Synthetic Feature Generator

Stands in for front-end feature dumps with planted spoofing artifacts:

- Bonafide: first-order autoregressive noise over frames (coefficient 0.9,
  unit stationary variance) times fixed per-dim scales, plus white noise.
- Spoof: the same base plus an artifact of one of n_attacks dataset-level
  attack signatures, chosen uniformly among
    local   a burst over a run of adjacent frames at a random offset, in the
            attack's dims, flipping sign every frame
    global  a rank-1 offset (all frames x a sparse dim pattern)
    joint   both

Signatures and per-dim scales depend only on the seed, so splits generated
with one seed share their attacks. Each utterance has its own generator
seeded by (seed, split, index), which makes the content independent of
generation order.
"""

import logging
import os
import zlib
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from .dataset import write_manifest
from .features import write_features
from .protocol import Key, ProtocolEntry, write_protocol

logger = logging.getLogger(__name__)

AR_COEFF = 0.9
ARTIFACT_TYPES = ('local', 'global', 'joint')

# seed-sequence stream tags
_STREAM_DATASET = 1
_STREAM_LABELS = 2
_STREAM_UTTERANCE = 3


@dataclass
class SynthSpec:
    """
    Synthetic dataset description.

    Args:
        n_bonafide, n_spoof: utterance counts
        T: frames per utterance
        F: feature dims
        local_magnitude: burst amplitude
        local_frames: length of the burst in adjacent frames
        local_dims: dims in each attack's burst pattern
        global_magnitude: rank-1 offset amplitude
        global_dims: dims in each attack's offset pattern
        noise_level: white-noise std added on top of the base
        n_attacks: number of attack signatures
        seed: dataset seed
        split: split name; splits of one seed differ in content, share attacks
    """
    n_bonafide: int = 200
    n_spoof: int = 200
    T: int = 208
    F: int = 1024
    local_magnitude: float = 3.0
    local_frames: int = 16
    local_dims: int = 16
    global_magnitude: float = 1.0
    global_dims: int = 32
    noise_level: float = 0.1
    n_attacks: int = 4
    seed: int = 0
    split: str = 'train'

    def validate(self):
        """Raise ConfigError unless every invariant holds"""
        if self.n_bonafide < 1 or self.n_spoof < 1:
            raise ConfigError(f"need at least one utterance per class, got "
                              f"n_bonafide={self.n_bonafide} n_spoof={self.n_spoof}")
        if self.T < 1 or self.F < 1:
            raise ConfigError(f"degenerate feature shape T={self.T} F={self.F}")
        for name in ('local_magnitude', 'global_magnitude', 'noise_level'):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0, got {getattr(self, name)}")
        if not 1 <= self.local_frames <= self.T:
            raise ConfigError(f"local_frames must lie in [1, T={self.T}], got {self.local_frames}")
        if not 1 <= self.local_dims <= self.F:
            raise ConfigError(f"local_dims must lie in [1, F={self.F}], got {self.local_dims}")
        if not 1 <= self.global_dims <= self.F:
            raise ConfigError(f"global_dims must lie in [1, F={self.F}], got {self.global_dims}")
        if self.n_attacks < 1 or self.n_attacks > 99:
            raise ConfigError(f"n_attacks must lie in [1, 99], got {self.n_attacks}")
        if not self.split or any(c.isspace() for c in self.split):
            raise ConfigError(f"split must be a non-empty word, got {self.split!r}")
        return self


@dataclass
class AttackSignature:
    """Dataset-level artifact pattern of one spoofing system"""
    name: str
    local_dims: np.ndarray
    local_signs: np.ndarray
    global_pattern: np.ndarray


@dataclass
class SynthUtterance:
    entry: ProtocolEntry
    features: np.ndarray
    artifact: str = '-'


def _split_tag(split):
    return zlib.crc32(split.encode('utf-8'))


def attack_signatures(spec):
    """Attack signatures and per-dim scales fixed by spec.seed"""
    rng = np.random.default_rng(np.random.SeedSequence([spec.seed, _STREAM_DATASET]))
    scales = 0.5 + rng.random(spec.F)
    attacks = []
    for a in range(spec.n_attacks):
        local_dims = np.sort(rng.choice(spec.F, size=spec.local_dims, replace=False))
        local_signs = rng.choice([-1.0, 1.0], size=spec.local_dims)
        pattern = np.zeros(spec.F)
        dims = rng.choice(spec.F, size=spec.global_dims, replace=False)
        weights = rng.standard_normal(spec.global_dims)
        pattern[dims] = weights / np.sqrt(np.mean(weights ** 2))
        attacks.append(AttackSignature(f"A{a + 1:02d}", local_dims, local_signs, pattern))
    return attacks, scales


def _base(rng, spec, scales):
    e = rng.standard_normal((spec.T, spec.F))
    x = np.empty_like(e)
    x[0] = e[0]
    innovation = np.sqrt(1.0 - AR_COEFF ** 2)
    for t in range(1, spec.T):
        x[t] = AR_COEFF * x[t - 1] + innovation * e[t]
    return x * scales + spec.noise_level * rng.standard_normal((spec.T, spec.F))


def _plant(x, rng, spec, attack, artifact):
    if artifact in ('local', 'joint'):
        start = int(rng.integers(spec.T - spec.local_frames + 1))
        frames = np.arange(start, start + spec.local_frames)
        # sign flips every frame; the base is smooth so the burst is the only
        # high-frequency content
        alternating = np.where(np.arange(spec.local_frames) % 2 == 0, 1.0, -1.0)
        burst = spec.local_magnitude * alternating[:, None] * attack.local_signs[None, :]
        x[np.ix_(frames, attack.local_dims)] += burst
    if artifact in ('global', 'joint'):
        x += spec.global_magnitude * rng.uniform(0.5, 1.5) * attack.global_pattern[None, :]
    return x


def synth_generate(spec):
    """
    Generate a labeled synthetic split.

    Args:
        spec: SynthSpec

    Returns:
        list: SynthUtterance sorted by utterance id
    """
    spec.validate()
    attacks, scales = attack_signatures(spec)
    tag = _split_tag(spec.split)
    total = spec.n_bonafide + spec.n_spoof
    keys = np.array([Key.BONAFIDE] * spec.n_bonafide + [Key.SPOOF] * spec.n_spoof)
    keys = np.random.default_rng(np.random.SeedSequence([spec.seed, tag, _STREAM_LABELS])).permutation(keys)

    prefix = spec.split.upper()
    utterances = []
    for i in range(total):
        rng = np.random.default_rng(np.random.SeedSequence([spec.seed, tag, _STREAM_UTTERANCE, i]))
        x = _base(rng, spec, scales)
        entry = ProtocolEntry(utt_id=f"{prefix}_{i:05d}", key=str(keys[i]), speaker=f"SYN_{prefix}")
        artifact = '-'
        if entry.key == Key.SPOOF:
            attack = attacks[int(rng.integers(spec.n_attacks))]
            artifact = ARTIFACT_TYPES[int(rng.integers(len(ARTIFACT_TYPES)))]
            x = _plant(x, rng, spec, attack, artifact)
            entry.attack = attack.name
        utterances.append(SynthUtterance(entry, x.astype(np.float32), artifact))
    logger.info("synth split=%s bonafide=%d spoof=%d T=%d F=%d",
                spec.split, spec.n_bonafide, spec.n_spoof, spec.T, spec.F)
    return utterances


def write_synth(spec, out_dir):
    """
    Generate a split and write it to disk.

    Layout:
        out_dir/features/<utt>.mbft
        out_dir/protocol.txt
        out_dir/manifest.txt     lines "<utt> features/<utt>.mbft"

    Returns:
        list: SynthUtterance
    """
    utterances = synth_generate(spec)
    feature_dir = os.path.join(out_dir, 'features')
    os.makedirs(feature_dir, exist_ok=True)
    manifest = []
    for utt in utterances:
        rel = f"features/{utt.entry.utt_id}.mbft"
        write_features(os.path.join(out_dir, rel), utt.features)
        manifest.append((utt.entry.utt_id, rel))
    write_protocol(os.path.join(out_dir, 'protocol.txt'), [u.entry for u in utterances])
    write_manifest(os.path.join(out_dir, 'manifest.txt'), manifest)
    return utterances
