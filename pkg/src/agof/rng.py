"""Counter-based random streams.

Every stochastic routine in the package draws from a Philox generator keyed
by ``(seed, domain, *path)``.  Streams for distinct paths are statistically
independent and can be opened in any order, so results never depend on how
work is scheduled across threads.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError

# Domain tags keep streams for different purposes disjoint even when the
# user reuses one seed everywhere.
DOMAIN_DRAW = 0
DOMAIN_EM = 1
DOMAIN_BOOTSTRAP = 2
DOMAIN_MC_SAMPLE = 3
DOMAIN_MC_BOOTSTRAP = 4

_MAX_SEED = 2**64 - 1


def check_seed(seed: int) -> int:
    """Validate a user-provided seed (integer in [0, 2**64))."""
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise DomainError(f"seed must be an integer, got {seed!r}")
    if not 0 <= int(seed) <= _MAX_SEED:
        raise DomainError(f"seed must lie in [0, 2**64), got {seed}")
    return int(seed)


def stream(seed: int, *path: int) -> np.random.Generator:
    """Open the Philox stream addressed by ``(seed, *path)``.

    The path entries become the SeedSequence spawn key, so ``stream(s, a, b)``
    is reproducible and independent of every other path.
    """
    seed = check_seed(seed)
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(int(q) for q in path))
    return np.random.Generator(np.random.Philox(ss))


def child_seed(seed: int, *path: int) -> int:
    """Derive a 64-bit seed addressed by ``(seed, *path)``.

    Used when a sub-component wants a plain integer seed of its own rather
    than an open generator.
    """
    seed = check_seed(seed)
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(int(q) for q in path))
    return int(ss.generate_state(1, np.uint64)[0])
