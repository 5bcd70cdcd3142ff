"""
Checkpoint File Format (MBCK1)

All integers little-endian.

┌───────────────────────────────────────────────────────────┐
│ Magic "MBCK1" (5 bytes)                                   │
├───────────────────────────────────────────────────────────┤
│ Config length (u32) | config block, ASCII key=value lines │
│ Meta length (u32)   | metadata block, same encoding       │
├───────────────────────────────────────────────────────────┤
│ Blob count (u32)                                          │
│ per blob:                                                 │
│   name length (u16) | name (UTF-8)                        │
│   ndim (u8) | dims (u32 each)                             │
│   data (float32 LE, row-major)                            │
└───────────────────────────────────────────────────────────┘

Config keys are the BackboneConfig field names; mixer fields appear as
`mixer` (the kind) and `mixer.<field>`. Floats are written with repr() so
they parse back to the same value.
"""

import logging
import struct
from collections import OrderedDict
from dataclasses import fields

import numpy as np
import torch

from ..errors import BadMagicError, ConfigError, FormatError, TruncatedError
from ..mixers.config import MixerConfig
from .config import BackboneConfig

logger = logging.getLogger(__name__)

MAGIC = b"MBCK1"
MAX_NDIM = 8
META_TYPES = {'epoch': int, 'seed': int, 'dev_loss': float}


def _format_value(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _encode_block(pairs):
    return ''.join(f"{k}={_format_value(v)}\n" for k, v in pairs).encode('ascii')


def _decode_block(raw, what):
    try:
        text = raw.decode('ascii')
    except UnicodeDecodeError:
        raise FormatError(f"{what} block is not ASCII")
    pairs = OrderedDict()
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line:
            continue
        key, sep, value = line.partition('=')
        if not sep:
            raise FormatError(f"{what} block line {lineno}: expected key=value, got {line!r}")
        pairs[key] = value
    return pairs


def config_pairs(cfg):
    """Ordered (key, value) pairs describing a BackboneConfig"""
    pairs = []
    for f in fields(BackboneConfig):
        if f.name == 'mixer':
            pairs.append(('mixer', cfg.mixer.kind))
            for mf in fields(MixerConfig):
                if mf.name not in ('kind', 'model_dim'):
                    pairs.append((f'mixer.{mf.name}', getattr(cfg.mixer, mf.name)))
        else:
            pairs.append((f.name, getattr(cfg, f.name)))
    return pairs


def config_from_pairs(pairs):
    """Inverse of config_pairs; unknown or missing keys raise FormatError"""
    pairs = dict(pairs)
    expected = {k for k, _ in config_pairs(BackboneConfig())}
    unknown = sorted(set(pairs) - expected)
    missing = sorted(expected - set(pairs))
    if unknown or missing:
        raise FormatError(f"checkpoint config mismatch: unknown={unknown} missing={missing}")

    def typed(cls, name, raw):
        kind = {f.name: f.type for f in fields(cls)}[name]
        try:
            return {int: int, float: float, 'int': int, 'float': float}.get(kind, str)(raw)
        except ValueError:
            raise FormatError(f"checkpoint config {name}={raw!r} is not a valid {kind}")

    mixer = MixerConfig(kind=pairs['mixer'], **{
        mf.name: typed(MixerConfig, mf.name, pairs[f'mixer.{mf.name}'])
        for mf in fields(MixerConfig) if mf.name not in ('kind', 'model_dim')})
    try:
        return BackboneConfig(mixer=mixer, **{
            f.name: typed(BackboneConfig, f.name, pairs[f.name])
            for f in fields(BackboneConfig) if f.name != 'mixer'}).validate()
    except ConfigError as e:
        raise FormatError(f"checkpoint carries an invalid config: {e}")


class _Reader:
    """Cursor over checkpoint bytes with truncation diagnostics"""

    def __init__(self, data, source):
        self.data = data
        self.pos = 0
        self.source = source

    def take(self, n, what):
        end = self.pos + n
        if end > len(self.data):
            raise TruncatedError(
                f"{self.source}: truncated in {what} (need {end} bytes, have {len(self.data)})")
        chunk = self.data[self.pos:end]
        self.pos = end
        return chunk

    def unpack(self, fmt, what):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))


class Checkpoint:
    """
    Trained parameters with their architecture and training metadata.

    Args:
        config: BackboneConfig
        state: mapping name -> tensor (state_dict order)
        metadata: dict with optional epoch, dev_loss, seed
    """

    def __init__(self, config, state, metadata=None):
        self.config = config
        self.state = OrderedDict((k, v.detach().to(torch.float32).cpu().clone()) for k, v in state.items())
        self.metadata = dict(metadata or {})

    @classmethod
    def from_model(cls, model, **metadata):
        return cls(model.cfg, model.state_dict(), metadata)

    def build_model(self):
        """Fresh MamboBackbone holding these parameters"""
        from .model import assemble_backbone
        _, model = assemble_backbone(self.config)
        expected = model.state_dict()
        missing = [name for name in expected if name not in self.state]
        unexpected = [name for name in self.state if name not in expected]
        if missing or unexpected:
            raise FormatError(
                f"checkpoint parameters do not fit the config: missing={missing} "
                f"unexpected={unexpected}")
        for name, tensor in self.state.items():
            if tensor.shape != expected[name].shape:
                raise FormatError(
                    f"checkpoint parameter {name} has shape {tuple(tensor.shape)}, "
                    f"the config needs {tuple(expected[name].shape)}")
        model.load_state_dict(self.state)
        return model

    def to_bytes(self):
        out = [MAGIC]
        for pairs in (config_pairs(self.config), sorted(self.metadata.items())):
            block = _encode_block(pairs)
            out.append(struct.pack('<I', len(block)))
            out.append(block)
        out.append(struct.pack('<I', len(self.state)))
        for name, tensor in self.state.items():
            raw_name = name.encode('utf-8')
            if tensor.dim() > MAX_NDIM:
                raise FormatError(f"parameter {name} has {tensor.dim()} dims (max {MAX_NDIM})")
            out.append(struct.pack('<H', len(raw_name)))
            out.append(raw_name)
            out.append(struct.pack(f'<B{tensor.dim()}I', tensor.dim(), *tensor.shape))
            out.append(tensor.contiguous().numpy().astype('<f4').tobytes())
        return b''.join(out)

    @staticmethod
    def from_bytes(data, source="checkpoint"):
        """
        Parse checkpoint bytes.

        Raises:
            BadMagicError, TruncatedError, FormatError
        """
        if len(data) < len(MAGIC) and MAGIC.startswith(bytes(data)):
            raise TruncatedError(f"{source}: truncated magic ({len(data)} < {len(MAGIC)} bytes)")
        if data[:len(MAGIC)] != MAGIC:
            raise BadMagicError(f"{source}: not an MBCK1 checkpoint (bad magic)")
        r = _Reader(data, source)
        r.take(len(MAGIC), "magic")

        (n,) = r.unpack('<I', "config length")
        config = config_from_pairs(_decode_block(r.take(n, "config block"), "config"))
        (n,) = r.unpack('<I', "metadata length")
        metadata = {}
        for key, raw in _decode_block(r.take(n, "metadata block"), "metadata").items():
            try:
                metadata[key] = META_TYPES.get(key, str)(raw)
            except ValueError:
                raise FormatError(f"{source}: metadata {key}={raw!r} is malformed")

        (count,) = r.unpack('<I', "blob count")
        state = OrderedDict()
        for i in range(count):
            (name_len,) = r.unpack('<H', f"blob {i} name length")
            name = r.take(name_len, f"blob {i} name").decode('utf-8', errors='replace')
            (ndim,) = r.unpack('<B', f"blob {name} ndim")
            if ndim > MAX_NDIM:
                raise FormatError(f"{source}: blob {name} declares {ndim} dims (max {MAX_NDIM})")
            dims = r.unpack(f'<{ndim}I', f"blob {name} dims")
            size = int(np.prod(dims, dtype=np.int64)) if ndim else 1
            raw = r.take(4 * size, f"blob {name} data")
            array = np.frombuffer(raw, dtype='<f4').astype(np.float32).reshape(dims)
            state[name] = torch.from_numpy(array.copy())
        if r.pos != len(data):
            raise FormatError(f"{source}: {len(data) - r.pos} trailing bytes after last blob")
        return Checkpoint(config, state, metadata)

    def __repr__(self):
        return (f"Checkpoint({self.config.topology}/{self.config.mixer.kind} "
                f"blobs={len(self.state)} meta={self.metadata})")


def save_checkpoint(path, checkpoint):
    """Write a checkpoint file; returns the bytes written"""
    data = checkpoint.to_bytes()
    with open(path, 'wb') as f:
        f.write(data)
    logger.debug("wrote %s (%d bytes)", path, len(data))
    return data


def load_checkpoint(path):
    """Read and parse a checkpoint file"""
    with open(path, 'rb') as f:
        data = f.read()
    return Checkpoint.from_bytes(data, source=str(path))
