"""Seeded random streams.

All randomness goes through :func:`make_rng`, which wraps NumPy's PCG64
bit generator (O'Neill 2014, 128-bit LCG state with XSL-RR output).
Gaussian variates are produced by the Box-Muller transform on that
stream's uniform doubles so that the normal sampler does not depend on
NumPy's internal ziggurat tables.

Each stochastic channel of a run gets its own stream, derived from the run
seed by a fixed offset, so that e.g. enabling demand noise never shifts the
draws used for the demand itself.
"""

import numpy as np

DEMAND_OFFSET = 0
NOISE_OFFSET = 1000
MODEL_OFFSET = 2000
SHUFFLE_OFFSET = 3000
TUNING_OFFSET = 4000


def derive_seed(seed, offset, index=0):
    return int(seed) + int(offset) + int(index)


def make_rng(seed):
    return np.random.Generator(np.random.PCG64(int(seed)))


def box_muller(rng, size, loc=0.0, scale=1.0):
    """Draw ``size`` normal variates from ``rng`` using Box-Muller.

    Two uniforms are consumed per pair of variates; an odd ``size`` discards
    the second variate of the last pair.
    """
    size = int(size)
    if size <= 0:
        return np.empty(0)
    n_pairs = (size + 1) // 2
    u = rng.random((n_pairs, 2))
    # map [0, 1) to (0, 1] so log never sees zero
    u1 = 1.0 - u[:, 0]
    u2 = u[:, 1]
    radius = np.sqrt(-2.0 * np.log(u1))
    theta = 2.0 * np.pi * u2
    z = np.empty(2 * n_pairs)
    z[0::2] = radius * np.cos(theta)
    z[1::2] = radius * np.sin(theta)
    return loc + scale * z[:size]
