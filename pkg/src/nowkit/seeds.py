"""Deterministic seed fan-out.

All randomness in a run flows from one base seed; per-stage streams are
derived by hashing the base seed together with stage tags, so adding or
reordering stages never perturbs the others.
"""

from __future__ import annotations

import hashlib


def derive_seed(base: int, *tags: object) -> int:
    """64-bit stream seed from a base seed and a sequence of stage tags."""
    h = hashlib.sha256()
    h.update(str(int(base)).encode())
    for tag in tags:
        h.update(b"\x1f")
        h.update(str(tag).encode())
    return int.from_bytes(h.digest()[:8], "big")
