"""Counter-based random streams.

All randomness in the package flows through Philox generators keyed by
(seed, stream tag).  Streams with distinct tags are statistically
independent, and a stream's output never depends on how work is split
across workers or on the order in which other streams are consumed.
"""

import numpy as np

# fixed tags so that unrelated subsystems never collide on a stream
TAG_U0 = 1
TAG_ROUNDING = 2
TAG_GRAPH = 3
TAG_TREE_MC = 4
TAG_SDE = 5
TAG_XI = 6
TAG_OPTIMIZER = 7
TAG_POPULATION = 8


def stream(seed, tag, sub=0):
    """Return a Generator for the (seed, tag, sub) stream."""
    key = np.array([np.uint64(seed), np.uint64(tag) << np.uint64(32) | np.uint64(sub)],
                   dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
