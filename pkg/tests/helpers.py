import numpy as np

from ncgeom.cyclic import CyclicFunction


def rand_fn(rng, N, real=False):
    vals = rng.normal(size=N)
    if not real:
        vals = vals + 1j * rng.normal(size=N)
    return CyclicFunction(vals)


def neg_fn(rng, N):
    return CyclicFunction(-rng.uniform(0.5, 2.0, N))
