"""Keyed derivation of independent random substreams.

Every stochastic component in this package derives its stream from a master
seed through a tuple of small integer keys (via ``numpy.random.SeedSequence``
spawn keys). Streams are therefore reproducible, independent of evaluation
order, and adding a new consumer never perturbs an existing one.

Key layout used by the solvers and the experiment harness:

    (0,)                         theta sampling (shared across trials)
    (0, trial)                   theta sampling when resampled per trial
    (1, policy, budget, trial)   root of one policy run
      + (0,)                     invitation outcomes observed by the run
      + (1, node, epoch)         one marginal-benefit evaluation
      + (2,)                     baseline tie/choice randomness

``epoch`` counts how many accepted invitations have invalidated the node's
cached estimate, so re-evaluating an untouched candidate replays the exact
same stream (see the policies module).
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError


def as_seedseq(seed) -> np.random.SeedSequence:
    """Normalize an int or SeedSequence into a SeedSequence."""
    if isinstance(seed, np.random.SeedSequence):
        return seed
    if isinstance(seed, (int, np.integer)):
        if seed < 0:
            raise ValidationError(f"seed must be non-negative, got {seed}")
        return np.random.SeedSequence(int(seed))
    raise ValidationError(f"expected an integer seed or SeedSequence, got {type(seed).__name__}")


def substream(ss: np.random.SeedSequence, *key: int) -> np.random.SeedSequence:
    """Child SeedSequence addressed by appending `key` to the spawn key."""
    path = tuple(ss.spawn_key) + tuple(int(k) for k in key)
    return np.random.SeedSequence(entropy=ss.entropy, spawn_key=path)


def generator(seed) -> np.random.Generator:
    """PCG64 generator for the given seed, int, or SeedSequence."""
    return np.random.Generator(np.random.PCG64(as_seedseq(seed)))
