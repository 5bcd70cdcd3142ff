#!/usr/bin/env python3
"""
Toy Learnability Experiment - train a small MamBo on synthetic features

Checks that the full pipeline can learn the planted artifacts:
- 400 train / 100 dev / 200 eval utterances, F=64, T=208
- MAMBO3 with the HYDRA mixer, N=1, L=3, D=32
- the default recipe with peak lr raised to 1e-3 for the toy scale
- a control run with both artifact magnitudes set to 0, whose EER should
  sit near 0.5

Exits 1 when either run misses its range.

Usage:
    python toy_learnability.py [--out runs/toy] [--seed 7] [--epochs 10]
"""

import argparse
import os
import sys
import time
from dataclasses import replace

import torch

script_dir = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, os.path.dirname(script_dir))

from mambo.backbone import BackboneConfig, Topology, score_features
from mambo.backbone.checkpoint import load_checkpoint
from mambo.data import LabeledDataset, SynthSpec, synth_generate
from mambo.metrics import ScoreRecord, compute_eer
from mambo.mixers import MixerConfig, MixerKind
from mambo.training import TrainConfig, train_run

TARGET_EER = 0.05
CONTROL_RANGE = (0.4, 0.6)


def split(spec, name, n_bonafide, n_spoof):
    utts = synth_generate(replace(spec, split=name, n_bonafide=n_bonafide, n_spoof=n_spoof))
    return utts, LabeledDataset.from_synth(utts)


def eval_eer(checkpoint_path, utterances, T_fixed):
    model = load_checkpoint(checkpoint_path).build_model()
    model.eval()
    ds = LabeledDataset.from_synth(utterances)
    records = []
    with torch.no_grad():
        for start in range(0, len(ds), 32):
            indices = range(start, min(start + 32, len(ds)))
            x, _ = ds.batch(indices, T_fixed)
            for i, s in zip(indices, score_features(x, model).score.tolist()):
                records.append(ScoreRecord(ds.ids[i], s, utterances[i].entry.key))
    return compute_eer(records)[0]


def run(tag, spec, backbone, train_cfg, out_dir):
    print(f"\n=== {tag} ===")
    _, train = split(spec, 'train', 200, 200)
    _, dev = split(spec, 'dev', 50, 50)
    eval_utts, _ = split(spec, 'eval', 100, 100)

    started = time.time()
    log = train_run(backbone, train_cfg, train, dev, os.path.join(out_dir, tag), T_fixed=spec.T)
    for rec in log.epochs:
        print(f"  {rec.line()}")

    eers = [eval_eer(os.path.join(out_dir, tag, c.path), eval_utts, spec.T) for c in log.checkpoints]
    print(f"  eval EER per checkpoint (%): {', '.join(f'{100 * e:.2f}' for e in eers)}")
    print(f"  best={100 * min(eers):.2f}%  time={time.time() - started:.0f}s")
    return min(eers)


def experiment(out_dir, seed=7, epochs=10):
    """
    Train the toy model on planted and on zero-magnitude data.

    Returns:
        tuple: (planted best eval EER, control best eval EER), fractions
    """
    spec = SynthSpec(T=208, F=64, seed=seed)
    backbone = BackboneConfig(topology=Topology.MAMBO3, L=3, N=1, D=32, input_dim=64,
                              mixer=MixerConfig(kind=MixerKind.HYDRA))
    train_cfg = TrainConfig(peak_lr=1e-3, max_epochs=epochs,
                            patience=min(7, epochs), seed=seed)

    planted = run('planted', spec, backbone, train_cfg, out_dir)
    control = run('control', replace(spec, local_magnitude=0.0, global_magnitude=0.0),
                  backbone, train_cfg, out_dir)
    return planted, control


def main():
    parser = argparse.ArgumentParser(description="Toy learnability check")
    parser.add_argument('--out', default='runs/toy', help='Output directory')
    parser.add_argument('--seed', type=int, default=7, help='Seed (default: 7)')
    parser.add_argument('--epochs', type=int, default=10, help='Max epochs (default: 10)')
    args = parser.parse_args()

    planted, control = experiment(args.out, args.seed, args.epochs)
    planted_ok = planted <= TARGET_EER
    control_ok = CONTROL_RANGE[0] <= control <= CONTROL_RANGE[1]

    print("\n=== Summary ===")
    print(f"  planted artifacts: best eval EER {100 * planted:.2f}% "
          f"(target <= {100 * TARGET_EER:.0f}%) {'✓' if planted_ok else '❌'}")
    print(f"  control:           best eval EER {100 * control:.2f}% "
          f"(expected {100 * CONTROL_RANGE[0]:.0f}-{100 * CONTROL_RANGE[1]:.0f}%) {'✓' if control_ok else '❌'}")
    if not (planted_ok and control_ok):
        sys.exit(1)


if __name__ == '__main__':
    main()
