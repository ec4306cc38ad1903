"""Finite pieces of the planar set F.

Each cluster F_{k,n} couples Y_n(c), a stack of ever smaller copies of the
self-similar set E_m(c), with Z_n = {2^-i} through their increasing bijection,
then stretches the coupling by (h(g), v(g)), rotates it so that the Y axis
points along theta_k and translates it to (2^-g, 4^-g) on the parabola.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import gmpy2
from gmpy2 import mpfr

from .parallel import ordered_map
from .profile import Profile, contraction_of, evaluate
from .scalar import PrecisionError, Scalar, cos_sin, precision, scalar
from .scheduler import DirectionSequence, pair_index, unpair

Point = tuple  # (x, y) pair of Scalars


def _check_distinct(values: list[Scalar], what: str) -> None:
    for a, b in zip(values, values[1:]):
        if a == b:
            raise PrecisionError(
                f"{what}: two points collide at {precision()} bits; raise the precision")


def e_set(c, n: int) -> list[Scalar]:
    """E_n(c): the 2^n points S_{i_1}...S_{i_n}(0), ascending.

    Each point is summed term by term (largest term first) so E_n(c) is an
    exact subset of E_{n+1}(c) at any precision.
    """
    c = c if isinstance(c, Scalar) else scalar(c)
    if c == 0:
        raise ValueError("e_set is degenerate at c = 0; use the two-point convention")
    if not (0 < c <= mpfr("0.5")):
        raise ValueError(f"contraction must lie in (0, 1/2], got {c}")
    if n < 1:
        raise ValueError("n must be >= 1")
    one_minus = 1 - c
    values = [mpfr(0)]
    for j in range(1, n + 1):
        term = one_minus * c ** (j - 1)
        values = values + [v + term for v in values]
    values.sort()
    _check_distinct(values, f"E_{n}({c})")
    return values


def z_set(n: int, c) -> list[Scalar]:
    """Z_n ascending: {2^-i : i = 1..2^(n+1)-2}, or {0, 1} when c = 0."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if c == 0:
        return [mpfr(0), mpfr(1)]
    top = 2 ** (n + 1) - 2
    return [gmpy2.exp2(-i) for i in range(top, 0, -1)]


def y_set(c, n: int) -> list[Scalar]:
    """Y_n(c) ascending: union over m <= n of 9^(-2^m) + 16^(-2^m) E_m(c); {0, 1/2} when c = 0."""
    c = c if isinstance(c, Scalar) else scalar(c)
    if n < 1:
        raise ValueError("n must be >= 1")
    if c == 0:
        return [mpfr(0), mpfr("0.5")]
    values = []
    for m in range(1, n + 1):
        shift = mpfr(9) ** (-(2 ** m))
        scale = gmpy2.exp2(-4 * 2 ** m)
        values.extend(shift + scale * e for e in e_set(c, m))
    values.sort()
    _check_distinct(values, f"Y_{n}({c})")
    return values


def f_prime(c, n: int) -> list[Point]:
    """F'_n: rank pairing of Y_n(c) with Z_n."""
    ys = y_set(c, n)
    zs = z_set(n, c)
    assert len(ys) == len(zs)
    return list(zip(ys, zs))


def scale_fns(i: int) -> tuple[Scalar, Scalar]:
    """(v(i), h(i)) = (20^-i, 20^-i / ln(i+1))."""
    if i < 1:
        raise ValueError("i must be >= 1")
    v = mpfr(20) ** (-i)
    return v, v / gmpy2.log(mpfr(i + 1))


def translation(g: int) -> Point:
    return gmpy2.exp2(-g), gmpy2.exp2(-2 * g)


@dataclass(frozen=True)
class Cluster:
    k: int
    n: int
    g: int
    c: Scalar
    theta: Scalar
    points: tuple = field(repr=False)

    @property
    def v(self) -> Scalar:
        return scale_fns(self.g)[0]

    @property
    def h(self) -> Scalar:
        return scale_fns(self.g)[1]

    def finest_feature(self) -> Scalar:
        """Smallest length scale resolved by the cluster's Y coordinate."""
        if self.c == 0:
            return self.h / 2
        return gmpy2.exp2(-4 * 2 ** self.n) * self.c ** self.n * self.h


def cluster(theta, k: int, n: int, g: int, c) -> Cluster:
    """R_theta(h(g) y, v(g) z) + (2^-g, 4^-g) for every (y, z) in F'_n."""
    theta = theta if isinstance(theta, Scalar) else scalar(theta)
    c = c if isinstance(c, Scalar) else scalar(c)
    v, h = scale_fns(g)
    tx, ty = translation(g)
    cos, sin = cos_sin(theta)
    pts = []
    for y, z in f_prime(c, n):
        a, b = h * y, v * z
        pts.append((tx + a * cos - b * sin, ty + a * sin + b * cos))
    return Cluster(k, n, g, c, theta, tuple(pts))


def required_precision(n: int, g: int, c) -> int:
    """Mantissa bits needed to keep the finest feature of cluster (n, g, c)
    64 bits above the rounding of its absolute coordinates (~2^-g)."""
    if c == 0:
        fine = 0.0
    else:
        lc = float(gmpy2.log2(c))
        fine = -(2 ** (n + 2)) + n * lc
    fine += -g * math.log2(20) - math.log2(math.log(g + 1)) - 1
    return int(math.ceil(-g + 1 - fine)) + 64


@dataclass(frozen=True)
class Truncation:
    clusters: tuple
    profile: Profile
    G_max: int
    mantissa_bits: int
    origin: Point = (mpfr(0), mpfr(0))

    def points(self) -> list[Point]:
        out = [self.origin]
        for cl in self.clusters:
            out.extend(cl.points)
        return out

    def find(self, k: int, n: int) -> Cluster:
        for cl in self.clusters:
            if cl.k == k and cl.n == n:
                return cl
        raise KeyError(f"cluster (k={k}, n={n}) is not in the truncation")

    def finest_feature(self) -> Scalar:
        return min(cl.finest_feature() for cl in self.clusters)


def schedule_pairs(G_max: int, depth_max: int | None = None) -> list[tuple[int, int]]:
    pairs = [unpair(g) for g in range(1, G_max + 1)]
    if depth_max is not None:
        pairs = [(k, n) for k, n in pairs if n <= depth_max]
    return pairs


def _cluster_task(task):
    theta, k, n, g, c = task
    return cluster(theta, k, n, g, c)


def plan(profile: Profile, seq: DirectionSequence, pairs) -> list[tuple]:
    tasks = []
    for k, n in pairs:
        if k > len(seq):
            raise IndexError(f"direction sequence has {len(seq)} entries; cluster needs theta_{k}")
        theta = seq[k].theta
        c = contraction_of(evaluate(profile, theta))
        tasks.append((theta, k, n, pair_index(k, n), c))
    return tasks


def build_f(profile: Profile, seq: DirectionSequence, G_max: int | None = None,
            pairs=None, depth_max: int | None = None, workers: int | None = 1) -> Truncation:
    """Truncation of F: the origin plus every cluster with g <= G_max (or the
    explicit (k, n) pairs), ordered by g."""
    if pairs is None:
        if G_max is None or G_max < 1:
            raise ValueError("G_max must be >= 1")
        pairs = schedule_pairs(G_max, depth_max)
    else:
        pairs = list(pairs)
        if not pairs:
            raise ValueError("empty cluster list")
        gs = [pair_index(k, n) for k, n in pairs]
        if len(set(gs)) != len(gs):
            raise ValueError("duplicate (k, n) pairs")
        G_max = max(gs)
    tasks = sorted(plan(profile, seq, pairs), key=lambda t: t[3])
    need = max(required_precision(n, g, c) for _, _, n, g, c in tasks)
    if precision() < need:
        raise PrecisionError(f"cluster geometry needs {need} mantissa bits, working precision is {precision()}")
    clusters = ordered_map(_cluster_task, tasks, workers)
    return Truncation(tuple(clusters), profile, G_max, precision())


def precision_for(profile: Profile, seq: DirectionSequence, pairs) -> int:
    """Default working precision for a build: the larger of the depth formula
    and what the clusters' contractions and schedule indices demand."""
    from .scalar import default_precision

    tasks = plan(profile, seq, pairs)
    depth = max(n for _, _, n, _, _ in tasks)
    return max(default_precision(depth), max(required_precision(n, g, c) for _, _, n, g, c in tasks))
