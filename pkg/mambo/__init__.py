"""
MamBo - Hybrid SSM-Attention backbones for audio deepfake detection

Four layer topologies (Mamba, Mamer, Mamba-Transformer, Mamba-Mamer) over four
sequence mixers (Mamba, Mamba2, Hydra, Gated DeltaNet), with the training
harness, feature/protocol I/O, a synthetic feature generator and the
anti-spoofing metric suite (EER, min t-DCF).
"""

__version__ = "0.1.0"
__author__ = "MamBo Contributors"
