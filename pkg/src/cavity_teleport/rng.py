"""Per-trial random streams derived from ``(base_seed, trial_index)``.

Each trial owns an independent generator keyed only by its index, so
splitting trials across chunks or workers never changes a trial's draws.
"""

import numpy as np


def trial_rng(base_seed: int, trial: int) -> np.random.Generator:
    seq = np.random.SeedSequence(int(base_seed), spawn_key=(int(trial),))
    return np.random.Generator(np.random.PCG64(seq))
