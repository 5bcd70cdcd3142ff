"""
Training Loop - epochs, early stopping, top-k checkpoint retention

Run directory:
  run.log                    one line per epoch
  checkpoints/epoch_XXX.mbck at most topk files, the lowest dev losses
  checkpoints.txt            retained checkpoints ranked by dev loss
"""

import logging
import math
import os
from dataclasses import dataclass, field

import numpy as np
import torch

from ..backbone.checkpoint import Checkpoint, save_checkpoint
from ..backbone.model import assemble_backbone
from ..data.shaping import DEFAULT_T_FIXED
from ..errors import NonFiniteError, ShapeError
from ..platform import get_profile
from .augment import add_noise
from .grads import batch_loss, loss_and_grads
from .optim import AdamW
from .schedule import lr_schedule

logger = logging.getLogger(__name__)

CHECKPOINT_DIR = 'checkpoints'
CHECKPOINT_INDEX = 'checkpoints.txt'
RUN_LOG = 'run.log'


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    dev_loss: float
    lr: float

    def line(self):
        return (f"epoch={self.epoch} train_loss={self.train_loss:.8g} "
                f"dev_loss={self.dev_loss:.8g} lr={self.lr:.8g}")


@dataclass
class CheckpointRecord:
    """A retained checkpoint"""
    epoch: int
    dev_loss: float
    path: str


@dataclass
class RunLog:
    epochs: list = field(default_factory=list)
    checkpoints: list = field(default_factory=list)
    stopped_early: bool = False

    @property
    def best(self):
        return self.checkpoints[0] if self.checkpoints else None


class EarlyStopping:
    """
    Stop once `patience` consecutive epochs fail to beat the best dev loss.
    """

    def __init__(self, patience):
        self.patience = patience
        self.best = math.inf
        self.best_epoch = None
        self.stale = 0

    def update(self, epoch, dev_loss):
        """Record an epoch; True when training should stop"""
        if dev_loss < self.best:
            self.best, self.best_epoch, self.stale = dev_loss, epoch, 0
        else:
            self.stale += 1
        return self.stale >= self.patience


class TopKRetention:
    """
    Keep the k lowest-dev-loss checkpoints on disk.

    Ties keep the earlier epoch.

    Args:
        k: files to keep
        run_dir: run directory
    """

    def __init__(self, k, run_dir):
        self.k = k
        self.run_dir = run_dir
        self.records = []
        os.makedirs(os.path.join(run_dir, CHECKPOINT_DIR), exist_ok=True)

    def offer(self, epoch, dev_loss, checkpoint):
        """Write the checkpoint if it ranks in the top k; returns whether it was kept"""
        ranked = sorted(self.records + [CheckpointRecord(epoch, dev_loss, None)],
                        key=lambda r: (r.dev_loss, r.epoch))
        if ranked.index(next(r for r in ranked if r.path is None)) >= self.k:
            return False
        path = os.path.join(CHECKPOINT_DIR, f"epoch_{epoch:03d}.mbck")
        save_checkpoint(os.path.join(self.run_dir, path), checkpoint)
        self.records.append(CheckpointRecord(epoch, dev_loss, path))
        self.records.sort(key=lambda r: (r.dev_loss, r.epoch))
        for evicted in self.records[self.k:]:
            os.remove(os.path.join(self.run_dir, evicted.path))
            logger.debug("evicted %s dev_loss=%.6g", evicted.path, evicted.dev_loss)
        del self.records[self.k:]
        return True

    def write_index(self):
        """checkpoints.txt: rank epoch dev_loss file"""
        with open(os.path.join(self.run_dir, CHECKPOINT_INDEX), 'w', encoding='utf-8') as f:
            for rank, r in enumerate(self.records, 1):
                f.write(f"{rank} {r.epoch} {r.dev_loss!r} {r.path}\n")


def read_checkpoint_index(run_dir):
    """Parse checkpoints.txt into CheckpointRecord (rank order)"""
    records = []
    with open(os.path.join(run_dir, CHECKPOINT_INDEX), 'r', encoding='utf-8') as f:
        for line in f:
            fields = line.split()
            if fields:
                records.append(CheckpointRecord(int(fields[1]), float(fields[2]), fields[3]))
    return records


def evaluate_loss(model, dataset, cfg, T_fixed=DEFAULT_T_FIXED):
    """Mean focal loss over a dataset, eval-mode crops, no augmentation"""
    model.eval()
    total = 0.0
    with torch.no_grad():
        for start in range(0, len(dataset), cfg.batch_size):
            indices = range(start, min(start + cfg.batch_size, len(dataset)))
            x, y = dataset.batch(indices, T_fixed)
            total += float(batch_loss(model, (x, y), cfg)) * len(indices)
    return total / len(dataset)


def train_run(backbone_cfg, train_cfg, train_set, dev_set, out_dir, T_fixed=DEFAULT_T_FIXED):
    """
    Train one model and keep its best checkpoints.

    Args:
        backbone_cfg: BackboneConfig
        train_cfg: TrainConfig
        train_set, dev_set: LabeledDataset with labels
        out_dir: run directory (created)
        T_fixed: frames per utterance

    Returns:
        RunLog
    """
    train_cfg.validate()
    backbone_cfg.validate()
    if len(train_set) == 0 or len(dev_set) == 0:
        raise ShapeError("train and dev sets must be nonempty")
    get_profile()

    os.makedirs(out_dir, exist_ok=True)
    _, model = assemble_backbone(backbone_cfg, seed=train_cfg.seed)
    optimizer = AdamW(model, train_cfg)
    retention = TopKRetention(train_cfg.topk, out_dir)
    stopper = EarlyStopping(train_cfg.patience)
    log = RunLog()

    steps_per_epoch = -(-len(train_set) // train_cfg.batch_size)
    total_steps = train_cfg.max_epochs * steps_per_epoch
    log_path = os.path.join(out_dir, RUN_LOG)
    open(log_path, 'w').close()
    logger.info("train topology=%s mixer=%s params=%d steps=%d",
                backbone_cfg.topology, backbone_cfg.mixer.kind,
                sum(p.numel() for p in model.parameters()), total_steps)

    step = 0
    try:
        for epoch in range(1, train_cfg.max_epochs + 1):
            rng = np.random.default_rng(np.random.SeedSequence([train_cfg.seed, epoch]))
            order = rng.permutation(len(train_set))
            running = 0.0
            lr = 0.0
            for start in range(0, len(order), train_cfg.batch_size):
                indices = order[start:start + train_cfg.batch_size]
                x, y = train_set.batch(indices, T_fixed, rng)
                if train_cfg.noise_snr_db is not None:
                    x = add_noise(x, train_cfg.noise_snr_db, rng)
                step += 1
                lr = lr_schedule(step, total_steps, train_cfg)
                loss, grads = loss_and_grads(model, (x, y), train_cfg)
                optimizer.step(grads, lr)
                running += loss * len(indices)

            dev_loss = evaluate_loss(model, dev_set, train_cfg, T_fixed)
            if not math.isfinite(dev_loss):
                raise NonFiniteError(f"dev loss is {dev_loss} at epoch {epoch}")
            record = EpochRecord(epoch, running / len(train_set), dev_loss, lr)
            log.epochs.append(record)
            with open(log_path, 'a', encoding='utf-8') as f:
                f.write(record.line() + '\n')

            checkpoint = Checkpoint.from_model(model, epoch=epoch, dev_loss=dev_loss, seed=train_cfg.seed)
            kept = retention.offer(epoch, dev_loss, checkpoint)
            logger.info("epoch=%d train_loss=%.6g dev_loss=%.6g lr=%.3g kept=%s",
                        epoch, record.train_loss, dev_loss, lr, kept)
            if stopper.update(epoch, dev_loss):
                log.stopped_early = epoch < train_cfg.max_epochs
                logger.info("early stop at epoch=%d best_epoch=%d", epoch, stopper.best_epoch)
                break
    finally:
        retention.write_index()
        log.checkpoints = list(retention.records)
    return log
