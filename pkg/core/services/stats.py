"""
Win-rate statistics: exact binomial tails, best-result marks and Wilson
score intervals.

Draws count half a win, so win counts may end in .5; for the exact tests
they are rounded half-up to whole games.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import binom, norm


def whole_wins(wins):
    return int(math.floor(wins + 0.5))


def binomial_lower_tail(k, n, p):
    """P(X <= k) for X ~ Binomial(n, p)."""
    return float(binom.cdf(k, n, p))


def binomial_upper_tail(k, n, p):
    """P(X >= k) for X ~ Binomial(n, p)."""
    return float(binom.sf(k - 1, n, p))


def binomial_best(wins, games, alpha=0.05):
    """
    Marks for one table column: True for every entry whose win count is not
    significantly below the best rate (one-tailed exact binomial test at
    level `alpha`, the best rate taken as the null).
    """
    if len(wins) != len(games):
        raise ValueError("wins and games must have the same length")
    if not wins:
        return []
    for w, n in zip(wins, games):
        if n < 1 or w < 0 or w > n:
            raise ValueError(f"bad count {w}/{n}")
    rates = [w / n for w, n in zip(wins, games)]
    best = max(rates)
    marks = []
    for w, n, rate in zip(wins, games, rates):
        if rate == best:
            marks.append(True)
            continue
        marks.append(binomial_lower_tail(whole_wins(w), n, best) >= alpha)
    return marks


def wilson_interval(wins, games, confidence=0.99):
    """Wilson score interval for a win rate; (0, 1) when there are no games."""
    if games <= 0:
        return 0.0, 1.0
    z = norm.ppf(1.0 - (1.0 - confidence) / 2.0)
    p = wins / games
    z2 = z * z
    denom = 1.0 + z2 / games
    centre = (p + z2 / (2.0 * games)) / denom
    half = z * math.sqrt(p * (1.0 - p) / games + z2 / (4.0 * games * games)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def wilson_coverage(games, p, confidence=0.99):
    """Exact probability that the Wilson interval of Binomial(games, p) contains p."""
    ks = np.arange(games + 1)
    pmf = binom.pmf(ks, games, p)
    covered = 0.0
    for k, mass in zip(ks, pmf):
        lo, hi = wilson_interval(int(k), games, confidence)
        if lo <= p <= hi:
            covered += mass
    return float(covered)


def simulated_wilson_coverage(games, p, trials, rng, confidence=0.99):
    """Fraction of `trials` synthetic coin-flip samples whose interval contains p."""
    counts = rng.binomial(games, p, size=trials)
    hits = 0
    for k in counts:
        lo, hi = wilson_interval(int(k), games, confidence)
        hits += lo <= p <= hi
    return hits / trials


@dataclass(frozen=True)
class RatePoint:
    """One point of a win-rate curve, with its interval and tests against a baseline."""
    label: object
    wins: float
    games: int
    low: float
    high: float
    p_above: float | None = None
    p_below: float | None = None

    @property
    def rate(self):
        return self.wins / self.games if self.games else 0.0


def rate_point(label, wins, games, baseline=None, confidence=0.99):
    low, high = wilson_interval(wins, games, confidence)
    p_above = p_below = None
    if baseline is not None and games > 0:
        k = whole_wins(wins)
        p_above = binomial_upper_tail(k, games, baseline)
        p_below = binomial_lower_tail(k, games, baseline)
    return RatePoint(label, wins, games, low, high, p_above, p_below)
