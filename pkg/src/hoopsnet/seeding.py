"""Seed derivation: every random stream is ``derive_seed(base, *stream_id)``.

The parts are joined as text and hashed with BLAKE2b (8-byte digest), so a
single base seed reproduces every downstream stream regardless of the order in
which tasks run.
"""

from __future__ import annotations

import hashlib

MASK64 = (1 << 64) - 1


def derive_seed(base: int, *stream) -> int:
    text = "\x1f".join(str(p) for p in (int(base) & MASK64, *stream))
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")
