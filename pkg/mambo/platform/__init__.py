"""
Platform - runtime profile and artifact digests
"""

from .detection import RuntimeProfile, NumericPath, get_profile
from .digest import DigestBackend

__all__ = ['RuntimeProfile', 'NumericPath', 'get_profile', 'DigestBackend']
