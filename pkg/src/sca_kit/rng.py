"""Deterministic, counter-based random streams.

Every stochastic routine asks for a generator keyed by ``(seed, stream)``.
The key is fed to numpy's Philox counter-based bit generator, so streams
need no shared state and can be created independently inside worker
processes.
"""

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def _label_hash(stream: str) -> int:
    digest = hashlib.blake2b(stream.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def seeded_rng(seed: int, stream: str = "") -> np.random.Generator:
    """Return a generator for the stream ``stream`` under ``seed``.

    The 128-bit Philox key is ``seed`` (taken modulo 2**64) in the low word
    and a BLAKE2b hash of the label in the high word, so distinct labels
    give unrelated streams and the sequence does not depend on the platform.
    """
    key = (int(seed) & _MASK64) | (_label_hash(stream) << 64)
    return np.random.Generator(np.random.Philox(key=key))


def derive_seed(seed: int, label: str) -> int:
    """Child 64-bit seed for a named sub-task (e.g. one run of a consensus)."""
    payload = f"{int(seed) & _MASK64}:{label}".encode("utf-8")
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "little")
