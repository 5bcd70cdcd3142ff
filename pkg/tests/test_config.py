#!/usr/bin/env python3
"""
Test experiment config parsing and emission
"""

import sys
import os
import tempfile
from dataclasses import replace

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from mambo.errors import ConfigError
from mambo.mixers import MixerKind
from mambo.backbone import Topology
from mambo.config import ExperimentConfig, parse_experiment, emit_experiment, load_experiment, save_experiment

TOY = """
[backbone]
topology = MAMBO3
mixer = HYDRA
L = 3
D = 32
input_dim = 64

[mixer]
state_dim = 16
head_dim = 8

[train]
peak_lr = 1e-3
max_epochs = 10
noise_snr_db = 15

[synth]
n_bonafide = 200
n_spoof = 200
F = 64
seed = 7

[data]
synth_dev_bonafide = 50
synth_dev_spoof = 50

[output]
run_dir = runs/toy
"""


def test_parse():
    print("\n" + "=" * 60)
    print("Test: Experiment Parsing")
    print("=" * 60)

    cfg = parse_experiment(TOY, base_dir='/work')
    assert cfg.backbone.topology == Topology.MAMBO3 and cfg.backbone.mixer.kind == MixerKind.HYDRA
    assert cfg.backbone.L == 3 and cfg.backbone.N == 1 and cfg.backbone.D == 32
    assert cfg.backbone.mixer.state_dim == 16 and cfg.backbone.mixer_config().model_dim == 32
    assert cfg.train.peak_lr == 1e-3 and cfg.train.patience == 7 and cfg.train.noise_snr_db == 15.0
    assert cfg.synth.F == 64 and cfg.synth.seed == 7
    assert cfg.resolve(cfg.output.run_dir) == '/work/runs/toy'
    assert cfg.resolve('/abs/path') == '/abs/path'
    print("✓ sections map onto their dataclasses; missing keys default")

    dev = cfg.synth_split('dev')
    assert dev.split == 'dev' and dev.n_bonafide == 50 and dev.seed == 7
    assert cfg.synth_split('train').n_bonafide == 200
    seeded = cfg.with_seed(3)
    assert seeded.train.seed == 3 and seeded.synth.seed == 3 and cfg.train.seed == 0
    print("✓ dev split sizes and seed override")


def test_emit_roundtrip():
    for cfg in (ExperimentConfig(), parse_experiment(TOY)):
        text = emit_experiment(cfg)
        again = parse_experiment(text)
        assert again == cfg
        assert emit_experiment(again) == text
    print("✓ parse(emit(cfg)) == cfg and emit is a fixed point")

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, 'exp.cfg')
        cfg = parse_experiment(TOY)
        save_experiment(path, cfg)
        loaded = load_experiment(path)
        assert loaded.base_dir == tmp
        assert replace(loaded, base_dir='.') == cfg
    print("✓ file save/load resolves against the file's directory")


def test_rejects_bad_documents():
    print("\n" + "=" * 60)
    print("Test: Config Errors")
    print("=" * 60)

    bad_docs = {
        'unknown section': "[model]\nD = 8\n",
        'unknown key': "[train]\nlearning_rate = 0.1\n",
        'not an int': "[backbone]\nL = five\n",
        'unknown topology': "[backbone]\ntopology = MAMBO7\n",
        'unknown mixer': "[backbone]\nmixer = S4\n",
        'heads do not divide D': "[backbone]\nD = 10\n",
        'patience > max_epochs': "[train]\nmax_epochs = 5\npatience = 7\n",
        'synth F mismatch': "[synth]\nF = 64\n",
        'incomplete file data': "[data]\ntrain_manifest = train.txt\n",
        'not INI': "D = 8\n",
    }
    for what, text in bad_docs.items():
        try:
            parse_experiment(text, source='bad.cfg')
            assert False, f"{what} accepted"
        except ConfigError as e:
            assert 'bad.cfg' in str(e) or what in ('heads do not divide D', 'patience > max_epochs',
                                                   'synth F mismatch', 'incomplete file data'), str(e)
    print(f"✓ {len(bad_docs)} malformed documents rejected")


def main():
    print("=" * 60)
    print("MamBo Config Test")
    print("=" * 60)

    try:
        test_parse()
        test_emit_roundtrip()
        test_rejects_bad_documents()

        print("\n" + "=" * 60)
        print("✓ All config tests passed!")
        print("=" * 60)

    except Exception as e:
        print(f"\n❌ Test failed: {e}")
        import traceback
        traceback.print_exc()
        sys.exit(1)


if __name__ == "__main__":
    main()
