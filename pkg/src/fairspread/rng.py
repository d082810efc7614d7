"""Deterministic randomness plumbing.

All randomness in the package flows from integer master seeds. Sub-streams
are derived either by integer spawn keys (for numbered substreams such as
Monte Carlo samples or binary-search probes) or by hashed string labels
(for named stages such as "greedy" or "probe"). The derivation is stable
across platforms and independent of execution order, which is what makes
parallel sampling reproducible.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK63 = (1 << 63) - 1


def derive_seed(master_seed: int, *labels) -> int:
    """Derive a child seed from a master seed and a sequence of labels.

    Labels may be ints or strings; the derivation hashes their canonical
    encoding, so ("probe", 3) and ("probe", 4) give unrelated streams.
    """
    h = hashlib.sha256()
    h.update(int(master_seed).to_bytes(16, "little", signed=True))
    for lab in labels:
        if isinstance(lab, (int, np.integer)):
            h.update(b"i" + int(lab).to_bytes(16, "little", signed=True))
        else:
            enc = str(lab).encode("utf-8")
            h.update(b"s" + len(enc).to_bytes(4, "little") + enc)
    return int.from_bytes(h.digest()[:8], "little") & _MASK63


def spawn_rng(master_seed: int, *labels) -> np.random.Generator:
    """Generator for the sub-stream named by ``labels``."""
    return np.random.default_rng(derive_seed(master_seed, *labels))


def sample_block_rng(master_seed: int) -> np.random.Generator:
    """Counter-based generator for blocks of per-sample draws.

    The returned Philox generator emits draws in a fixed layout: sample
    ``s`` of an estimator owns the contiguous block of draws starting at
    position ``s * draws_per_sample``. Because Philox is counter-based,
    any worker can reproduce any sample's block independently, so results
    never depend on how samples are partitioned across workers.
    """
    return np.random.Generator(np.random.Philox(key=master_seed & ((1 << 128) - 1)))
