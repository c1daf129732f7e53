"""Shannon and conditional entropy of exact or floating mass vectors."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence


def log(x) -> float:
    """Natural log that stays finite for tiny Fractions."""
    if isinstance(x, Fraction):
        if x <= 0:
            raise ValueError("log of a non-positive number")
        return math.log(x.numerator) - math.log(x.denominator)
    return math.log(x)


def plogp(m) -> float:
    """-m log m with the convention 0 log 0 = 0."""
    if m == 0:
        return 0.0
    return -float(m) * log(m)


def shannon_entropy(masses: Iterable) -> float:
    """H = -sum m log m over atoms with positive mass."""
    total = 0.0
    comp = 0.0
    for m in masses:
        if m < 0:
            raise ValueError(f"negative mass {m}")
        # Kahan summation keeps 2^20-term sums accurate to ~1e-15
        y = plogp(m) - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


def conditional_entropy(joint: Sequence[Sequence]) -> float:
    """H(alpha | beta) from joint[i][j] = mu(A_i n B_j)."""
    cols = len(joint[0]) if joint else 0
    out = 0.0
    for j in range(cols):
        b = sum(row[j] for row in joint)
        if b == 0:
            continue
        for row in joint:
            m = row[j]
            if m < 0:
                raise ValueError(f"negative mass {m}")
            if m > 0:
                out -= float(m) * (log(m) - log(b))
    return out


def exp_inequality_check(p: Sequence, a: Sequence[float], tol: float = 1e-12) -> bool:
    """sum p_i (a_i - log p_i) <= log sum exp(a_i)."""
    if len(p) != len(a):
        raise ValueError("length mismatch")
    lhs = sum(float(pi) * (ai - log(pi)) for pi, ai in zip(p, a) if pi > 0)
    return lhs <= logsumexp(a) + tol


def logsumexp(a: Sequence[float]) -> float:
    m = max(a)
    return m + math.log(sum(math.exp(x - m) for x in a))
