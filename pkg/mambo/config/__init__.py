"""
Config - experiment documents tying backbone, training and data together
"""

from .experiment import (
    DataConfig, OutputConfig, ExperimentConfig,
    parse_experiment, emit_experiment, load_experiment, save_experiment,
)

__all__ = [
    'DataConfig', 'OutputConfig', 'ExperimentConfig',
    'parse_experiment', 'emit_experiment', 'load_experiment', 'save_experiment',
]
