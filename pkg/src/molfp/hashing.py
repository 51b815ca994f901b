"""Stable 32-bit feature hashing.

Every hashed fingerprint family routes its feature tuples through
:func:`stable_hash32` so that outputs are byte-identical across runs,
processes, and platforms.  The hash is CRC-32 over a fixed big-endian
serialization of the integer tuple; it is non-cryptographic and only
needs good dispersion modulo the vector length.
"""

from __future__ import annotations

import struct
import zlib

# Domain tags keep feature spaces of different families disjoint even
# when their raw tuples coincide.
TAG_ATOM_INVARIANT = 1
TAG_ECFP = 2
TAG_ATOM_TYPE = 3
TAG_ATOM_PAIR = 4
TAG_TORSION = 5
TAG_PATH_ATOM = 6
TAG_PATH = 7


def stable_hash32(*values: int) -> int:
    """Hash a tuple of integers to a 32-bit code.

    Values may be negative (formal charges); each is packed as a
    big-endian signed 64-bit integer before the CRC.
    """
    return zlib.crc32(struct.pack(f">{len(values)}q", *values))
