"""
Training - focal loss, AdamW, warmup-cosine schedule and the run loop
"""

from .config import TrainConfig
from .loss import focal_loss
from .schedule import lr_schedule, warmup_steps
from .optim import OptimizerState, AdamW, adamw_step, decays
from .grads import batch_loss, loss_and_grads, check_gradients
from .augment import add_noise
from .loop import (
    EpochRecord, CheckpointRecord, RunLog, EarlyStopping, TopKRetention,
    read_checkpoint_index, evaluate_loss, train_run,
)

__all__ = [
    'TrainConfig', 'focal_loss', 'lr_schedule', 'warmup_steps',
    'OptimizerState', 'AdamW', 'adamw_step', 'decays',
    'batch_loss', 'loss_and_grads', 'check_gradients', 'add_noise',
    'EpochRecord', 'CheckpointRecord', 'RunLog', 'EarlyStopping', 'TopKRetention',
    'read_checkpoint_index', 'evaluate_loss', 'train_run',
]
