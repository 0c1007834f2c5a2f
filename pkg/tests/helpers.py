"""Small constructors and independent oracles shared by the tests."""
from fractions import Fraction

import numpy as np

from dmscope.imageio import LabelMap, RawImage, normalize


def image_from_levels(levels):
    return normalize(RawImage(np.asarray(levels, dtype=np.uint8)))


def labels(rows, class_count, ignore=255):
    return LabelMap(np.asarray(rows), class_count, ignore)


def cdf_oracle(p, q, width=1.0):
    """Earth mover's distance of two 1-D mass vectors in exact rationals."""
    p = [Fraction(x) for x in p]
    q = [Fraction(x) for x in q]
    tp, tq = sum(p), sum(q)
    acc = Fraction(0)
    total = Fraction(0)
    for a, b in zip(p, q):
        acc += a / tp - b / tq
        total += abs(acc)
    return float(total * Fraction(width))


def tau_oracle(a, b):
    """Tau-b straight from its definition, in exact rationals squared."""
    k = len(a)
    s = n_a = n_b = 0
    for i in range(k):
        for j in range(i + 1, k):
            sa = (a[i] > a[j]) - (a[i] < a[j])
            sb = (b[i] > b[j]) - (b[i] < b[j])
            s += sa * sb
            n_a += sa == 0
            n_b += sb == 0
    n_p = k * (k - 1) // 2
    return Fraction(s), (n_p - n_a) * (n_p - n_b)
