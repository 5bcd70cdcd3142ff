"""
Digest Backend - SHA-256 fingerprints for run artifacts

Checkpoints and score files are fingerprinted so two runs can be compared
byte-for-byte without diffing binaries. Uses the `cryptography` hash
primitives.
"""

try:
    from cryptography.hazmat.primitives import hashes
    HAS_CRYPTOGRAPHY = True
except ImportError:
    HAS_CRYPTOGRAPHY = False

from ..errors import MissingDependencyError

CHUNK_SIZE = 1 << 20


class DigestBackend:
    """SHA-256 over artifact files"""

    @staticmethod
    def _new():
        if not HAS_CRYPTOGRAPHY:
            raise MissingDependencyError("cryptography library not available")
        return hashes.Hash(hashes.SHA256())

    @staticmethod
    def file_sha256(path):
        """
        SHA-256 of a file, read in chunks.

        Args:
            path: file to hash

        Returns:
            str: hex digest
        """
        h = DigestBackend._new()
        with open(path, 'rb') as f:
            while True:
                chunk = f.read(CHUNK_SIZE)
                if not chunk:
                    break
                h.update(chunk)
        return h.finalize().hex()
