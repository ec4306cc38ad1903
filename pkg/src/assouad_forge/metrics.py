"""Projections, covering numbers and the Hausdorff distance on finite sets.

One-dimensional sets are plain ascending lists of Scalars with no duplicates.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass

import gmpy2
from gmpy2 import mpfr

from .scalar import Scalar, cos_sin, scalar


class EmptySetError(ValueError):
    pass


def merge_sorted(values) -> list[Scalar]:
    out: list[Scalar] = []
    for v in sorted(values):
        if not out or v != out[-1]:
            out.append(v)
    return out


def project(points, theta) -> list[Scalar]:
    """{x cos(theta) + y sin(theta)}, ascending, exact duplicates merged."""
    theta = theta if isinstance(theta, Scalar) else scalar(theta)
    cos, sin = cos_sin(theta)
    return merge_sorted(x * cos + y * sin for x, y in points)


def window(P: list[Scalar], x: Scalar, R: Scalar) -> list[Scalar]:
    """P restricted to the closed ball [x - R, x + R]."""
    lo = bisect_left(P, x - R)
    hi = bisect_right(P, x + R)
    return P[lo:hi]


def greedy_count(P: list[Scalar], r: Scalar, lo: int = 0, hi: int | None = None,
                 closed: bool = True) -> int:
    """Greedy left-to-right cover of P[lo:hi] by intervals of length r.

    With ``closed`` the intervals are [s, s + r]; otherwise they are [s, s + r),
    i.e. points grouped together must span strictly less than r (the count for
    open sets of diameter at most r).
    """
    if hi is None:
        hi = len(P)
    count = 0
    i = lo
    step = bisect_right if closed else bisect_left
    while i < hi:
        count += 1
        i = step(P, P[i] + r, i + 1, hi)
    return count


def cover_count_1d(P: list[Scalar], r, window_spec=None, closed: bool = True) -> int:
    """Minimal number of length-r intervals covering P (or P within a closed ball)."""
    r = r if isinstance(r, Scalar) else scalar(r)
    if r <= 0:
        raise ValueError("r must be positive")
    if window_spec is None:
        return greedy_count(P, r, closed=closed)
    x, R = window_spec
    if R <= 0:
        raise ValueError("R must be positive")
    lo = bisect_left(P, x - R)
    hi = bisect_right(P, x + R)
    return greedy_count(P, r, lo, hi, closed=closed)


def in_ball(points, center, R) -> list:
    cx, cy = center
    R2 = R * R
    return [(x, y) for x, y in points if (x - cx) ** 2 + (y - cy) ** 2 <= R2]


def grid_boxes(points, r) -> set:
    """Occupied boxes of side r/sqrt(2) (diameter r) anchored at the origin."""
    side = r / gmpy2.sqrt(2)
    return {(int(gmpy2.floor(x / side)), int(gmpy2.floor(y / side))) for x, y in points}


def cover_count_2d(points, r, window_spec=None) -> int:
    """Grid surrogate for the 2-D covering number; within a factor 9 of the optimum."""
    r = r if isinstance(r, Scalar) else scalar(r)
    if r <= 0:
        raise ValueError("r must be positive")
    if window_spec is not None:
        center, R = window_spec
        points = in_ball(points, center, R)
    return len(grid_boxes(points, r))


def _directed(A: list[Scalar], B: list[Scalar]) -> Scalar:
    # max over a in A of the distance to the nearest b in B; both ascending
    worst = mpfr(0)
    j = 0
    nb = len(B)
    for a in A:
        while j + 1 < nb and B[j + 1] <= a:
            j += 1
        d = abs(a - B[j])
        if j + 1 < nb:
            d2 = B[j + 1] - a
            if d2 < d:
                d = d2
        if d > worst:
            worst = d
    return worst


def hausdorff(A: list[Scalar], B: list[Scalar]) -> Scalar:
    """Hausdorff distance between two finite ascending sets (linear merge)."""
    if not A or not B:
        raise EmptySetError("Hausdorff distance needs two non-empty sets")
    return max(_directed(A, B), _directed(B, A))


@dataclass(frozen=True)
class SimilarityMap1:
    scale: Scalar
    offset: Scalar

    def __call__(self, x: Scalar) -> Scalar:
        return self.scale * x + self.offset

    def inverse(self) -> "SimilarityMap1":
        return SimilarityMap1(1 / self.scale, -self.offset / self.scale)


def apply_similarity(T: SimilarityMap1, P: list[Scalar]) -> list[Scalar]:
    if T.scale <= 0:
        raise ValueError("similarity scale must be positive")
    return [T(x) for x in P]


def normalize(P: list[Scalar]) -> tuple[SimilarityMap1, list[Scalar]]:
    """The map x -> (x - min P) / diam P and the image of P (min 0, max 1)."""
    if len(P) < 2 or P[-1] == P[0]:
        raise ValueError("cannot normalise a set of zero diameter")
    lo, diam = P[0], P[-1] - P[0]
    T = SimilarityMap1(1 / diam, -lo / diam)
    image = [(x - lo) / diam for x in P]
    return T, image


def diameter(P: list[Scalar]) -> Scalar:
    return P[-1] - P[0] if P else mpfr(0)
