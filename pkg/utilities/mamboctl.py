#!/usr/bin/env python3
"""
mamboctl - MamBo experiment control utility

Usage:
    mamboctl synth --out DIR [--split NAME] [--F N] [--seed N]
    mamboctl train CONFIG [--seed N] [--out DIR]
    mamboctl score CHECKPOINT MANIFEST --out SCORES
    mamboctl metrics SCORES PROTOCOL [--tdcf-c0 X --tdcf-c1 X --tdcf-c2 X]
    mamboctl report --set NAME PROTOCOL SCORES... [--run DIR]
    mamboctl inspect CHECKPOINT

Dependencies:
    pip install -r requirements.txt
"""

import os
import sys

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from mambo.cli import main  # noqa: E402

if __name__ == '__main__':
    main()
