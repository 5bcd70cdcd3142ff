"""
Util - small helpers shared across subpackages
"""

from .checks import check_finite, as_batch

__all__ = ['check_finite', 'as_batch']
