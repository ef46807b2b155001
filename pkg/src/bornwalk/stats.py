"""Pearson chi-square goodness-of-fit with small-expected-count pooling."""

from __future__ import annotations

import numpy as np
from scipy.stats import chi2 as _chi2_dist

from .errors import ConfigInvalid, DegenerateExpected

POOL_THRESHOLD = 5.0  # minimum expected count per category


def chi_square(counts, expected) -> tuple[float, float]:
    """Pearson statistic and upper-tail p-value of counts against expected shares.

    Categories whose expected count falls below 5 are pooled into their
    smallest adjacent category until all pass; degrees of freedom are
    (pooled categories - 1). Raises DegenerateExpected when the expected
    distribution puts all mass in one category (the test is undefined).
    """
    obs = np.asarray(counts, dtype=float)
    exp_share = np.asarray(
        expected.a if hasattr(expected, "a") else expected, dtype=float
    )
    if obs.ndim != 1 or obs.shape != exp_share.shape:
        raise ConfigInvalid("counts and expected must be 1-d vectors of equal length")
    if np.any(obs < 0) or not np.all(obs == np.floor(obs)):
        raise ConfigInvalid("counts must be nonnegative integers")
    total = obs.sum()
    if total < 1:
        raise ConfigInvalid("need at least one observation")
    if np.count_nonzero(exp_share) < 2:
        raise DegenerateExpected("expected distribution has all mass in one category")

    obs = list(obs)
    exp = list(exp_share * total)
    while len(exp) > 1 and min(exp) < POOL_THRESHOLD:
        i = int(np.argmin(exp))
        if i == 0:
            nb = 1
        elif i == len(exp) - 1:
            nb = i - 1
        else:
            nb = i - 1 if exp[i - 1] <= exp[i + 1] else i + 1
        exp[nb] += exp[i]
        obs[nb] += obs[i]
        del exp[i], obs[i]
    if len(exp) < 2:
        raise DegenerateExpected("pooling left a single category")

    stat = float(sum((o - e) ** 2 / e for o, e in zip(obs, exp)))
    p = float(_chi2_dist.sf(stat, len(exp) - 1))
    return stat, p
