#!/usr/bin/env python3
"""
Test focal loss, the lr schedule, AdamW, gradients and the run loop
"""

import sys
import os
import math
import tempfile

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import torch
import torch.nn.functional as F

from mambo.errors import ConfigError, NonFiniteError
from mambo.mixers import MixerConfig, MixerKind
from mambo.backbone import BackboneConfig, Topology, assemble_backbone, load_checkpoint
from mambo.data import SynthSpec, LabeledDataset, synth_generate
from mambo.training import (
    TrainConfig, focal_loss, lr_schedule, warmup_steps, OptimizerState, AdamW, adamw_step, decays,
    loss_and_grads, check_gradients, add_noise, EarlyStopping, TopKRetention,
    read_checkpoint_index, train_run,
)
from mambo.backbone.checkpoint import Checkpoint

F64 = torch.float64
LN2 = math.log(2.0)


def toy_config(topology=Topology.MAMBO1, kind=MixerKind.MAMBA, L=2, N=1, D=8, input_dim=6):
    return BackboneConfig(
        topology=topology, L=L, N=N, D=D, input_dim=input_dim, n_attn_heads=2, ffn_mult=2,
        mixer=MixerConfig(kind=kind, state_dim=4, head_dim=4, expand=2, conv_width=4))


def test_focal_loss():
    print("\n" + "=" * 60)
    print("Test: Focal Loss")
    print("=" * 60)

    zero = torch.zeros(1, 2, dtype=F64)
    assert abs(float(focal_loss(zero, [0], 0.0, (1.0, 1.0))) - LN2) < 1e-9
    assert abs(float(focal_loss(zero, [1], 2.0, (1.0, 1.0))) - 0.25 * LN2) < 1e-9
    print("✓ (0,0): ln 2 at gamma=0, 0.25 ln 2 at gamma=2")

    logits = torch.randn(16, 2, dtype=F64)
    labels = torch.randint(0, 2, (16,))
    ce = F.cross_entropy(logits, labels)
    assert abs(float(focal_loss(logits, labels, 0.0, (1.0, 1.0))) - float(ce)) < 1e-12
    print("✓ gamma=0, alpha=1 is cross-entropy")

    alpha = (0.75, 0.25)
    assert float(focal_loss(torch.tensor([[1.0, -1.0]], dtype=F64), [1], 2.0, alpha)) > 0
    margins = torch.linspace(-6, 6, 25, dtype=F64)
    losses = [float(focal_loss(torch.stack([m, -m])[None], [0], 2.0, alpha)) for m in margins]
    assert all(a > b for a, b in zip(losses, losses[1:]))
    assert all(v >= 0 for v in losses)
    print("✓ nonnegative and decreasing in the true-class probability")

    huge = torch.tensor([[60.0, -60.0]], dtype=F64)
    assert math.isfinite(float(focal_loss(huge, [1], 2.0, alpha)))
    print("✓ stable for large margins")

    for gamma, a in ((-1.0, alpha), (2.0, (0.0, 1.0)), (2.0, (1.5, 0.5))):
        try:
            focal_loss(zero, [0], gamma, a)
            assert False, f"gamma={gamma} alpha={a} accepted"
        except ConfigError:
            pass


def test_lr_schedule():
    print("\n" + "=" * 60)
    print("Test: Warmup + Cosine Schedule")
    print("=" * 60)

    cfg = TrainConfig()
    assert warmup_steps(100, 0.1) == 10
    assert lr_schedule(0, 100, cfg) == 0.0
    assert abs(lr_schedule(10, 100, cfg) - 1e-5) < 1e-9
    assert abs(lr_schedule(5, 100, cfg) - 0.5e-5) < 1e-9
    assert abs(lr_schedule(55, 100, cfg) - 0.5e-5) < 1e-9
    assert abs(lr_schedule(100, 100, cfg)) < 1e-9
    print("✓ 0 at start, peak at warmup end, half at decay midpoint, 0 at the end")

    values = [lr_schedule(s, 100, cfg) for s in range(10, 101)]
    assert all(a >= b for a, b in zip(values, values[1:]))
    assert abs(lr_schedule(11, 100, cfg) - lr_schedule(10, 100, cfg)) < 1e-7
    print("✓ nonincreasing after warmup and continuous at the boundary")

    for step, total in ((-1, 100), (101, 100), (0, 0)):
        try:
            lr_schedule(step, total, cfg)
            assert False, f"step={step} total={total} accepted"
        except ConfigError:
            pass


def test_adamw_first_step():
    print("\n" + "=" * 60)
    print("Test: AdamW")
    print("=" * 60)

    cfg = TrainConfig()
    params = {'w': torch.ones(2, 2, dtype=F64)}
    state = OptimizerState()
    adamw_step(params, {'w': torch.ones(2, 2, dtype=F64)}, state, 0.1, cfg)
    expected = 1 - 0.1 * (1 / (1 + 1e-8)) - 0.005
    assert torch.allclose(params['w'], torch.full((2, 2), expected, dtype=F64), rtol=0, atol=1e-9)
    assert state.step == 1
    print(f"✓ first step -> {expected:.9f}")


def test_adamw_trace():
    """Two scripted steps against a scalar recomputation"""
    cfg = TrainConfig(weight_decay=0.0)
    params = {'w': torch.tensor([2.0], dtype=F64)}
    state = OptimizerState()
    theta, m, v = 2.0, 0.0, 0.0
    for t, (g, lr) in enumerate(((0.5, 0.01), (-1.5, 0.02)), 1):
        adamw_step(params, {'w': torch.tensor([g], dtype=F64)}, state, lr, cfg)
        m = 0.9 * m + 0.1 * g
        v = 0.95 * v + 0.05 * g * g
        theta -= lr * (m / (1 - 0.9 ** t)) / (math.sqrt(v / (1 - 0.95 ** t)) + 1e-8)
        assert abs(float(params['w'][0]) - theta) < 1e-12
    print("✓ two-step trace matches the scalar recurrence")

    params = {'w': torch.zeros(3, dtype=F64)}
    adamw_step(params, {'w': torch.tensor([1e-3, -4.0, 7e3], dtype=F64)}, OptimizerState(), 0.1, cfg)
    assert torch.allclose(params['w'], torch.tensor([-0.1, 0.1, -0.1], dtype=F64), rtol=1e-4)
    print("✓ first update has magnitude lr regardless of gradient scale")


def test_adamw_rejects_nonfinite():
    cfg = TrainConfig()
    params = {'a': torch.ones(2, dtype=F64), 'b': torch.ones(2, dtype=F64)}
    state = OptimizerState()
    grads = {'a': torch.ones(2, dtype=F64), 'b': torch.tensor([1.0, float('nan')], dtype=F64)}
    try:
        adamw_step(params, grads, state, 0.1, cfg)
        assert False, "NaN gradient accepted"
    except NonFiniteError:
        pass
    assert torch.equal(params['a'], torch.ones(2, dtype=F64)) and state.step == 0 and not state.m
    print("✓ non-finite gradient rejected before any parameter moves")


def test_weight_decay_selection():
    _, model = assemble_backbone(toy_config(kind=MixerKind.MAMBA2))
    opt = AdamW(model, TrainConfig())
    assert 'head.proj.weight' in opt.decay and 'head.proj.bias' not in opt.decay
    assert not any(n.endswith(('A_log', 'dt_bias', '.D')) or 'norm' in n for n in opt.decay)
    assert decays('layers.0.sub1.blocks.0.in_proj.weight', torch.zeros(2, 2))
    print("✓ decay skips biases, gains and SSM scalars")


def test_head_bias_gradient():
    """d loss / d head bias = mean(softmax - onehot) for plain cross-entropy"""
    cfg = TrainConfig(focal_gamma=0.0, focal_alpha_bonafide=1.0, focal_alpha_spoof=1.0)
    _, model = assemble_backbone(toy_config(), seed=4)
    model = model.double()
    x = torch.randn(4, 6, 6, dtype=F64)
    y = torch.tensor([0, 1, 1, 0])
    _, grads = loss_and_grads(model, (x, y), cfg)
    with torch.no_grad():
        probs = torch.softmax(model(x).logits, dim=-1)
    expected = (probs - F.one_hot(y, 2).to(F64)).mean(0)
    assert torch.allclose(grads['head.proj.bias'], expected, rtol=1e-9, atol=1e-12)
    print("✓ head-bias gradient identity")


def test_gradients_match_finite_differences():
    print("\n" + "=" * 60)
    print("Test: Finite-Difference Gradients (16 combinations)")
    print("=" * 60)

    cfg = TrainConfig()
    gen = torch.Generator().manual_seed(0)
    x = torch.randn(2, 6, 6, generator=gen, dtype=F64)
    y = torch.tensor([0, 1])
    for topology in Topology.ALL:
        for kind in MixerKind.ALL:
            _, model = assemble_backbone(toy_config(topology, kind, L=2, N=2), seed=7)
            model = model.double()
            checks = check_gradients(model, (x, y), cfg, h=1e-4)
            n_params = sum(1 for p in model.parameters() if p.requires_grad)
            assert len(checks) == n_params
            for name, analytic, numeric in checks:
                tol = 1e-4 * max(abs(analytic), abs(numeric)) + 1e-7
                assert abs(analytic - numeric) <= tol, \
                    f"{topology}/{kind} {name}: analytic={analytic!r} numeric={numeric!r}"
            print(f"✓ {topology}/{kind}: {len(checks)} tensors")


def test_noise_augmentation():
    rng = np.random.default_rng(0)
    x = torch.ones(3, 50, 4)
    noisy = add_noise(x, 20.0, rng)
    assert noisy.shape == x.shape and noisy.dtype == x.dtype
    snr = 10 * torch.log10(x.pow(2).mean((1, 2)) / (noisy - x).pow(2).mean((1, 2)))
    assert bool(((snr > 17) & (snr < 33)).all()), snr
    again = add_noise(x, 20.0, np.random.default_rng(0))
    assert torch.equal(noisy, again)
    print("✓ per-utterance SNR in range and seeded")


def test_early_stopping():
    print("\n" + "=" * 60)
    print("Test: Early Stopping and Top-k")
    print("=" * 60)

    stopper = EarlyStopping(7)
    losses = (3.0, 2.0, 2.1, 2.2, 2.3, 2.4, 2.5, 2.6, 2.7, 2.8)
    stopped = next(e for e, l in enumerate(losses, 1) if stopper.update(e, l))
    assert stopped == 9 and stopper.best_epoch == 2
    print("✓ patience 7 after an epoch-2 best stops at epoch 9")


def test_topk_retention():
    _, model = assemble_backbone(toy_config(L=1))
    ck = Checkpoint.from_model(model, epoch=0)
    with tempfile.TemporaryDirectory() as tmp:
        keep = TopKRetention(2, tmp)
        results = [keep.offer(e, l, ck) for e, l in enumerate((0.5, 0.4, 0.6, 0.3, 0.4), 1)]
        assert results == [True, True, False, True, False]
        keep.write_index()
        records = read_checkpoint_index(tmp)
        assert [(r.epoch, r.dev_loss) for r in records] == [(4, 0.3), (2, 0.4)]
        on_disk = sorted(os.listdir(os.path.join(tmp, 'checkpoints')))
        assert on_disk == ['epoch_002.mbck', 'epoch_004.mbck']
    print("✓ keeps the k lowest losses; ties keep the earlier epoch")


def synth_sets(seed=0):
    def split(name, n):
        spec = SynthSpec(n_bonafide=n, n_spoof=n, T=12, F=6, local_frames=4, local_dims=2, global_dims=3,
                         seed=seed, split=name)
        return LabeledDataset.from_synth(synth_generate(spec))
    return split('train', 6), split('dev', 3)


def test_train_run_deterministic():
    print("\n" + "=" * 60)
    print("Test: Training Run")
    print("=" * 60)

    backbone = toy_config(Topology.MAMBO3, MixerKind.GDN, L=2)
    train_cfg = TrainConfig(peak_lr=1e-3, max_epochs=3, patience=2, batch_size=4, topk=2, seed=11)
    train_set, dev_set = synth_sets()
    with tempfile.TemporaryDirectory() as tmp:
        runs = []
        for name in ('a', 'b'):
            out = os.path.join(tmp, name)
            log = train_run(backbone, train_cfg, train_set, dev_set, out, T_fixed=10)
            with open(os.path.join(out, 'run.log')) as f:
                lines = f.read().splitlines()
            blobs = {r.path: open(os.path.join(out, r.path), 'rb').read() for r in log.checkpoints}
            runs.append((lines, blobs))
        assert runs[0] == runs[1]
        assert len(runs[0][0]) == len(log.epochs) <= 3
        assert runs[0][0][0].startswith('epoch=1 train_loss=')
        assert 1 <= len(log.checkpoints) <= 2
        best = load_checkpoint(os.path.join(tmp, 'a', log.best.path))
        assert best.metadata['epoch'] == log.best.epoch and best.metadata['seed'] == 11
    print("✓ identical seed and config give identical logs and checkpoints")


def main():
    print("=" * 60)
    print("MamBo Training Test")
    print("=" * 60)

    try:
        test_focal_loss()
        test_lr_schedule()
        test_adamw_first_step()
        test_adamw_trace()
        test_adamw_rejects_nonfinite()
        test_weight_decay_selection()
        test_head_bias_gradient()
        test_gradients_match_finite_differences()
        test_noise_augmentation()
        test_early_stopping()
        test_topk_retention()
        test_train_run_deterministic()

        print("\n" + "=" * 60)
        print("✓ All training tests passed!")
        print("=" * 60)

    except Exception as e:
        print(f"\n❌ Test failed: {e}")
        import traceback
        traceback.print_exc()
        sys.exit(1)


if __name__ == "__main__":
    main()
