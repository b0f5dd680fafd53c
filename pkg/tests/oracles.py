"""Independent reference computations used by the tests.

Nothing here shares code with the library paths it checks.
"""

import math

import numpy as np
from scipy import optimize


def crossing_point_delta(specs, lo, hi, grid=200_001):
    """Overlap by explicit crossing points: locate every sign change of every
    pairwise density difference, then add cdf increments of whichever density
    is lowest on each piece."""
    xs = np.linspace(lo, hi, grid)
    dens = [s.pdf(xs) for s in specs]
    cuts = {lo, hi}
    for a in range(len(specs)):
        for b in range(a + 1, len(specs)):
            diff = dens[a] - dens[b]
            idx = np.nonzero(np.sign(diff[:-1]) * np.sign(diff[1:]) < 0)[0]
            for j in idx:
                g = lambda x: float(specs[a].pdf(x) - specs[b].pdf(x))
                cuts.add(optimize.brentq(g, xs[j], xs[j + 1], xtol=1e-15, rtol=1e-15))
    cuts = sorted(cuts)
    total = 0.0
    for x0, x1 in zip(cuts, cuts[1:]):
        mid = 0.5 * (x0 + x1)
        m = min(range(len(specs)), key=lambda i: float(specs[i].pdf(mid)))
        total += float(specs[m].cdf(x1) - specs[m].cdf(x0))
    # tails outside [lo, hi]: the lowest density there is the one with least tail mass
    total += min(float(s.cdf(lo)) for s in specs)
    total += min(1.0 - float(s.cdf(hi)) for s in specs)
    return total


def naive_kde(data, h, reflect, x):
    total = 0.0
    for xm in data:
        total += math.exp(-0.5 * ((x - xm) / h) ** 2)
        if reflect:
            total += math.exp(-0.5 * ((x + xm) / h) ** 2)
    return total / (len(data) * h * math.sqrt(2 * math.pi))


def naive_single(i, datasets, bandwidths, reflect=None):
    """Double loop over points and kernels, everything recomputed from scratch."""
    k = len(datasets)
    reflect = reflect or [False] * k
    acc = 0.0
    for x in datasets[i - 1]:
        vals = [naive_kde(datasets[m], bandwidths[m], reflect[m], x) for m in range(k)]
        acc += min(vals) / vals[i - 1]
    return acc / len(datasets[i - 1])
