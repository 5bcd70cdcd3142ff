"""
Experiment Configuration

One INI document per experiment. Keys are the field names of the owning
dataclass; missing keys take their defaults, unknown sections or keys are
rejected.

  [backbone]  BackboneConfig fields, with `mixer = <KIND>`
  [mixer]     MixerConfig fields other than kind and model_dim
  [train]     TrainConfig fields
  [data]      feature manifests, protocols and T_fixed
  [synth]     SynthSpec fields used when no manifests are given
  [output]    run directory

Relative paths resolve against the directory of the config file.
"""

import configparser
import io
import os
from dataclasses import dataclass, field, fields, replace
from typing import Optional

from ..backbone.config import BackboneConfig
from ..data.shaping import DEFAULT_T_FIXED
from ..data.synth import SynthSpec
from ..errors import ConfigError
from ..mixers.config import MixerConfig
from ..training.config import TrainConfig

MIXER_SKIP = ('kind', 'model_dim')
SYNTH_SKIP = ('split',)


@dataclass
class DataConfig:
    """
    Dataset locations.

    Args:
        train_manifest, train_protocol: training split
        dev_manifest, dev_protocol: validation split
        T_fixed: frames per utterance after crop/tile
        synth_dev_bonafide, synth_dev_spoof: dev split sizes when data is synthesized
    """
    train_manifest: str = ''
    train_protocol: str = ''
    dev_manifest: str = ''
    dev_protocol: str = ''
    T_fixed: int = DEFAULT_T_FIXED
    synth_dev_bonafide: int = 50
    synth_dev_spoof: int = 50

    @property
    def uses_files(self):
        return bool(self.train_manifest)

    def validate(self):
        if self.T_fixed < 1:
            raise ConfigError(f"T_fixed must be >= 1, got {self.T_fixed}")
        if self.uses_files:
            for name in ('train_protocol', 'dev_manifest', 'dev_protocol'):
                if not getattr(self, name):
                    raise ConfigError(f"[data] {name} is required when train_manifest is set")
        elif self.synth_dev_bonafide < 1 or self.synth_dev_spoof < 1:
            raise ConfigError("synthetic dev split needs at least one utterance per class")
        return self


@dataclass
class OutputConfig:
    run_dir: str = 'runs/default'


@dataclass
class ExperimentConfig:
    """Everything one `train` invocation needs"""
    backbone: BackboneConfig = field(default_factory=BackboneConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    data: DataConfig = field(default_factory=DataConfig)
    synth: SynthSpec = field(default_factory=SynthSpec)
    output: OutputConfig = field(default_factory=OutputConfig)
    base_dir: str = '.'

    def resolve(self, path):
        """Absolute path for a config-relative path"""
        if not path or os.path.isabs(path):
            return path
        return os.path.normpath(os.path.join(self.base_dir, path))

    def validate(self):
        self.backbone.validate()
        self.train.validate()
        self.data.validate()
        if not self.data.uses_files:
            self.synth.validate()
            if self.synth.F != self.backbone.input_dim:
                raise ConfigError(f"[synth] F={self.synth.F} differs from [backbone] "
                                  f"input_dim={self.backbone.input_dim}")
        return self

    def synth_split(self, split):
        """SynthSpec for the train or dev split"""
        if split == 'dev':
            return replace(self.synth, split='dev', n_bonafide=self.data.synth_dev_bonafide,
                           n_spoof=self.data.synth_dev_spoof)
        return replace(self.synth, split=split)

    def with_seed(self, seed):
        """Copy with the run seed and the synthetic-data seed set"""
        return replace(self, train=replace(self.train, seed=seed), synth=replace(self.synth, seed=seed))


def _format(value):
    if value is None:
        return 'none'
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _convert(ftype, raw, where):
    try:
        if ftype == Optional[float]:
            return None if raw.strip().lower() in ('', 'none') else float(raw)
        if ftype is int:
            return int(raw)
        if ftype is float:
            return float(raw)
        return raw.strip()
    except ValueError:
        raise ConfigError(f"{where}: cannot read {raw!r} as {getattr(ftype, '__name__', ftype)}")


def _section_fields(cls, skip=()):
    return {f.name: f for f in fields(cls) if f.name not in skip}


def _layout():
    """section -> (dataclass, skipped fields)"""
    return {
        'backbone': (BackboneConfig, ('mixer',)),
        'mixer': (MixerConfig, MIXER_SKIP),
        'train': (TrainConfig, ()),
        'data': (DataConfig, ()),
        'synth': (SynthSpec, SYNTH_SKIP),
        'output': (OutputConfig, ()),
    }


def parse_experiment(text, source="config", base_dir='.'):
    """
    Parse an experiment document.

    Returns:
        ExperimentConfig (validated)
    """
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as e:
        raise ConfigError(f"{source}: {e}")

    layout = _layout()
    values = {name: {} for name in layout}
    mixer_kind = MixerConfig().kind
    for section in parser.sections():
        if section not in layout:
            raise ConfigError(f"{source}: unknown section [{section}]")
        cls, skip = layout[section]
        known = _section_fields(cls, skip)
        for key, raw in parser.items(section):
            where = f"{source} [{section}] {key}"
            if section == 'backbone' and key == 'mixer':
                mixer_kind = raw.strip()
                continue
            if key not in known:
                raise ConfigError(f"{source}: unknown key '{key}' in [{section}]")
            values[section][key] = _convert(known[key].type, raw, where)

    try:
        mixer = MixerConfig(kind=mixer_kind, **values['mixer'])
        cfg = ExperimentConfig(
            backbone=BackboneConfig(mixer=mixer, **values['backbone']),
            train=TrainConfig(**values['train']),
            data=DataConfig(**values['data']),
            synth=SynthSpec(**values['synth']),
            output=OutputConfig(**values['output']),
            base_dir=base_dir,
        )
    except ConfigError as e:
        raise ConfigError(f"{source}: {e}")
    return cfg.validate()


def emit_experiment(cfg):
    """Serialize every field; parse(emit(cfg)) == cfg"""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    for section, (cls, skip) in _layout().items():
        if section == 'mixer':
            obj = cfg.backbone.mixer
        else:
            obj = getattr(cfg, section)
        parser.add_section(section)
        if section == 'backbone':
            for name in _section_fields(cls, skip):
                parser.set(section, name, _format(getattr(obj, name)))
            parser.set(section, 'mixer', obj.mixer.kind)
            continue
        for name in _section_fields(cls, skip):
            parser.set(section, name, _format(getattr(obj, name)))
    out = io.StringIO()
    parser.write(out)
    return out.getvalue()


def load_experiment(path):
    """Read an experiment file; relative paths resolve against its directory"""
    with open(path, 'r', encoding='utf-8') as f:
        text = f.read()
    return parse_experiment(text, source=str(path), base_dir=os.path.dirname(os.path.abspath(path)))


def save_experiment(path, cfg):
    with open(path, 'w', encoding='utf-8') as f:
        f.write(emit_experiment(cfg))
