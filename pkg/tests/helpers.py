import numpy as np


def shell_points(rng, n, r_lo=0.5, r_hi=2.0):
    d = rng.normal(size=(n, 3))
    d /= np.linalg.norm(d, axis=-1, keepdims=True)
    return d * rng.uniform(r_lo, r_hi, size=(n, 1))
