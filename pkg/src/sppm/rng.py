"""Counter-based random streams addressable by path.

Every stochastic operation in this package draws from an RngStream, a
value-like handle identified by (master_seed, path) where the path is a
tuple of (label, index) pairs.  Two streams with the same identity yield
bit-identical draws, and distinct paths give statistically independent
Philox keys, so results do not depend on execution order or thread
scheduling: a trial replayed alone produces the same numbers it produced
inside a parallel batch.
"""

from __future__ import annotations

import hashlib
import threading
from dataclasses import dataclass, field

import numpy as np

_PATH_SEP = b"\x1f"

# Reusing one Philox per thread and resetting its state is ~5x cheaper
# than constructing a fresh bit generator per draw, and produces
# bit-identical output.  Hot loops draw millions of times.
_local = threading.local()


def _digest(master_seed: int, path: tuple[tuple[str, int], ...]) -> bytes:
    h = hashlib.blake2b(digest_size=16)
    h.update(int(master_seed).to_bytes(8, "little", signed=True))
    for label, index in path:
        h.update(_PATH_SEP)
        h.update(label.encode())
        h.update(int(index).to_bytes(8, "little", signed=True))
    return h.digest()


def _thread_generator(key_words: tuple[int, int]) -> np.random.Generator:
    cached = getattr(_local, "pair", None)
    if cached is None:
        bg = np.random.Philox(key=1)
        cached = (bg, np.random.Generator(bg), dict(bg.state))
        _local.pair = cached
    bg, gen, template = cached
    state = template["state"]
    state["key"] = np.array(key_words, dtype=np.uint64)
    state["counter"] = np.zeros(4, dtype=np.uint64)
    template["buffer_pos"] = 4
    template["has_uint32"] = 0
    template["uinteger"] = 0
    bg.state = template
    return gen


@dataclass(frozen=True)
class RngStream:
    """Immutable handle on one substream of a master seed."""

    master_seed: int
    path: tuple[tuple[str, int], ...] = field(default_factory=tuple)

    def child(self, label: str, index: int = 0) -> "RngStream":
        """Derive the substream addressed by one more path segment."""
        return RngStream(self.master_seed, self.path + ((label, int(index)),))

    def generator(self, *, shared: bool = True) -> np.random.Generator:
        """A numpy Generator positioned at the start of this stream.

        Each call restarts the stream, so a rerun replays identically.
        With shared=True (the default, cheap path) the object is a
        thread-local singleton: it is only valid until the calling
        thread's next generator() call, so draw from it before touching
        another stream.  Pass shared=False to get an independent
        generator that can be held across calls; both paths produce
        bit-identical draws.
        """
        d = _digest(self.master_seed, self.path)
        words = (
            int.from_bytes(d[:8], "little"),
            int.from_bytes(d[8:], "little"),
        )
        if shared:
            return _thread_generator(words)
        return np.random.Generator(np.random.Philox(key=np.array(words, dtype=np.uint64)))

    def token(self) -> int:
        """Stable 64-bit identifier for this stream (reporting only)."""
        return int.from_bytes(_digest(self.master_seed, self.path)[:8], "little")
