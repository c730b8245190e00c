"""Counter-based random streams.

Replicas are grouped into fixed-size blocks. Block ``j`` of a run with
master seed ``m`` owns the Philox stream keyed by ``(m, j)``, and replicas
inside a block are drawn in order. Any subset of replicas can therefore be
regenerated on its own, and results do not depend on how blocks are
scheduled across threads.
"""

import numpy as np

from .errors import ConfigError

BLOCK_SIZE = 256
_MASK64 = (1 << 64) - 1


def check_seed(seed) -> int:
    if seed is None:
        raise ConfigError("a master seed is required", "seed")
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise ConfigError(f"must be an integer, got {seed!r}", "seed")
    seed = int(seed)
    if not 0 <= seed <= _MASK64:
        raise ConfigError("must lie in [0, 2**64)", "seed")
    return seed


def block_rng(master_seed: int, block: int) -> np.random.Generator:
    """Generator for replica block ``block``."""
    key = (check_seed(master_seed) << 64) | (int(block) & _MASK64)
    return np.random.Generator(np.random.Philox(key=key))


def replica_rng(master_seed: int, replica: int) -> np.random.Generator:
    """Generator positioned at the start of ``replica``.

    Only exact for the first replica of a block; use ``blocks_for`` to
    regenerate arbitrary ranges.
    """
    if replica % BLOCK_SIZE:
        raise ConfigError("replica streams start at block boundaries", "replica")
    return block_rng(master_seed, replica // BLOCK_SIZE)


def blocks_for(start: int, stop: int):
    """Yield (block, first_replica, count) covering replicas [start, stop)."""
    if start < 0 or stop < start:
        raise ConfigError(f"invalid replica range [{start}, {stop})", "replicas")
    first = start // BLOCK_SIZE
    last = (stop - 1) // BLOCK_SIZE if stop > start else first - 1
    for blk in range(first, last + 1):
        yield blk, blk * BLOCK_SIZE, BLOCK_SIZE


def run_blocks(draw, start, stop, master_seed, threads=1):
    """Run ``draw(rng, count)`` over the blocks covering replicas [start, stop).

    ``draw`` returns a dict of arrays with ``count`` rows. Each block is drawn
    from its own start, so leading replicas before ``start`` are generated and
    discarded; trailing ones are never drawn. Results are concatenated in
    replica order whatever the thread count.
    """
    master_seed = check_seed(master_seed)
    jobs = []
    for blk, first, size in blocks_for(start, stop):
        count = min(first + size, stop) - first
        skip = max(start - first, 0)
        jobs.append((blk, count, skip))

    def one(job):
        blk, count, skip = job
        out = draw(block_rng(master_seed, blk), count)
        return {k: v[skip:] for k, v in out.items()}

    if threads is None or threads <= 1 or len(jobs) <= 1:
        parts = [one(j) for j in jobs]
    else:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            parts = list(pool.map(one, jobs))
    if not parts:
        raise ConfigError("empty replica range", "reps")
    return {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}
