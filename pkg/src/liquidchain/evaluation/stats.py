"""Welch t-test and one-way ANOVA with p-values from the regularised incomplete beta.

Pure Python/NumPy; the incomplete beta is evaluated by its continued
fraction (modified Lentz) to a relative tolerance of 1e-12.
"""

import math
from dataclasses import dataclass, asdict

import numpy as np

from ..exceptions import DegenerateInputError, DomainError

CF_TOL = 1e-12
CF_MAX_ITER = 10_000
_TINY = 1e-300


def _betacf(a, b, x):
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = _TINY if abs(d) < _TINY else d
        c = 1.0 + aa / c
        c = _TINY if abs(c) < _TINY else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = _TINY if abs(d) < _TINY else d
        c = 1.0 + aa / c
        c = _TINY if abs(c) < _TINY else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < CF_TOL:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc(a, b, x):
    """Regularised incomplete beta ``I_x(a, b)``."""
    if a <= 0 or b <= 0:
        raise DomainError("betainc needs a, b > 0")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(log_front)
    # the continued fraction converges fast for x < (a+1)/(a+b+2); use symmetry otherwise
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_sf(t, df):
    """Upper tail ``P(T > t)`` of Student's t."""
    if math.isinf(t):
        return 0.0 if t > 0 else 1.0
    tail = 0.5 * betainc(0.5 * df, 0.5, df / (df + t * t))
    return tail if t > 0 else 1.0 - tail


def f_sf(f, dfn, dfd):
    """Upper tail ``P(F > f)`` of the F distribution."""
    if f <= 0:
        return 1.0
    if math.isinf(f):
        return 0.0
    return betainc(0.5 * dfd, 0.5 * dfn, dfd / (dfd + dfn * f))


@dataclass
class TestResult:
    statistic: float
    pvalue: float
    df: float

    def to_dict(self):
        return asdict(self)


def welch_ttest(a, b, alternative="two-sided"):
    """Welch's unequal-variance t-test with Welch-Satterthwaite degrees of freedom.

    ``alternative`` is ``"two-sided"``, ``"greater"`` (mean(a) > mean(b)) or
    ``"less"``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise DomainError("each sample needs at least 2 values")
    va, vb = a.var(ddof=1) / a.size, b.var(ddof=1) / b.size
    diff = a.mean() - b.mean()
    se2 = va + vb
    if se2 == 0:
        if diff == 0:
            return TestResult(0.0, 1.0, float(a.size + b.size - 2))
        t = math.copysign(math.inf, diff)
        df = float(a.size + b.size - 2)
    else:
        t = diff / math.sqrt(se2)
        df = se2 ** 2 / (va ** 2 / (a.size - 1) + vb ** 2 / (b.size - 1))
    if alternative == "two-sided":
        p = 1.0 if t == 0 else min(1.0, 2.0 * t_sf(abs(t), df))
    elif alternative == "greater":
        p = t_sf(t, df)
    elif alternative == "less":
        p = t_sf(-t, df)
    else:
        raise DomainError(f"unknown alternative {alternative!r}")
    return TestResult(float(t), float(p), float(df))


def anova(groups):
    """One-way ANOVA F-test across ``groups``; ``df`` is (between, within)."""
    groups = [np.asarray(g, dtype=float) for g in groups]
    if len(groups) < 2 or any(g.size < 2 for g in groups):
        raise DomainError("ANOVA needs at least 2 groups of at least 2 values")
    pooled = np.concatenate(groups)
    if np.all(pooled == pooled[0]):
        raise DegenerateInputError("all values identical; F is undefined")
    grand = pooled.mean()
    k, n = len(groups), pooled.size
    ss_between = sum(g.size * (g.mean() - grand) ** 2 for g in groups)
    ss_within = sum(((g - g.mean()) ** 2).sum() for g in groups)
    dfb, dfw = k - 1, n - k
    if ss_within == 0:
        return TestResult(math.inf, 0.0, (dfb, dfw))
    f = (ss_between / dfb) / (ss_within / dfw)
    return TestResult(float(f), float(f_sf(f, dfb, dfw)), (dfb, dfw))


def holm(pvalues):
    """Holm step-down adjusted p-values, in input order."""
    p = np.asarray(pvalues, dtype=float)
    m = p.size
    order = np.argsort(p, kind="stable")
    adjusted = np.empty(m)
    running = 0.0
    for rank, idx in enumerate(order):
        running = max(running, min(1.0, (m - rank) * p[idx]))
        adjusted[idx] = running
    return adjusted
