"""Executable checks of the construction's quantitative inequalities.

Every check returns a :class:`CheckReport` whose ``as_json`` form is the
``{"check", "pass", "constants", "worst", "seed"}`` object written by the
CLI.  Random sampling uses numpy's counter-based Philox generator so a seed
fixes a report bit for bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import partial

import gmpy2
import numpy as np
from gmpy2 import mpfr

from .construction import Cluster, Truncation, scale_fns, translation, y_set
from .metrics import grid_boxes, project
from .parallel import ordered_map
from .scalar import Scalar, cos_sin, log2_floor, precision, scalar, to_decimal

DEFAULT_SEED = 0
SEPARATION_K_MAX = 6


def _num(x):
    if isinstance(x, Scalar):
        return to_decimal(x)
    return x


@dataclass
class CheckReport:
    check: str
    passed: bool
    constants: dict = field(default_factory=dict)
    worst: dict = field(default_factory=dict)
    seed: int | None = None

    def as_json(self) -> dict:
        return {
            "check": self.check,
            "pass": self.passed,
            "constants": {k: _num(v) for k, v in self.constants.items()},
            "worst": {k: _num(v) for k, v in self.worst.items()},
            "seed": self.seed,
        }

    def dumps(self) -> str:
        return json.dumps(self.as_json(), sort_keys=True)


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


# -- decay of Y_n(c) ---------------------------------------------------------

def check_yydecay(c, n: int) -> CheckReport:
    """y_i <= 3^-i + 4^-i along y_set(c, n) sorted descending."""
    if n < 1:
        raise ValueError("n must be >= 1")
    c = c if isinstance(c, Scalar) else scalar(c)
    ys = sorted(y_set(c, n), reverse=True)
    worst_i, worst_margin = 0, None
    ok = True
    for i, y in enumerate(ys, start=1):
        bound = mpfr(3) ** (-i) + mpfr(4) ** (-i)
        margin = bound - y
        if worst_margin is None or margin < worst_margin:
            worst_i, worst_margin = i, margin
        if y > bound:
            ok = False
    return CheckReport("yydecay", ok, {"c": c, "n": n, "points": len(ys)},
                       {"i": worst_i, "margin": worst_margin})


# -- bi-Lipschitz pair bounds ------------------------------------------------

def _frame(cl: Cluster, points=None):
    """(parallel, perpendicular) coordinates of the points relative to t_g."""
    tx, ty = translation(cl.g)
    cos, sin = cos_sin(cl.theta)
    out = []
    for x, y in (cl.points if points is None else points):
        dx, dy = x - tx, y - ty
        out.append((dx * cos + dy * sin, -dx * sin + dy * cos))
    return out


def check_bilipschitz(cl: Cluster) -> CheckReport:
    """Pairs ranked i < j from the top of the Z coordinate: perpendicular gap
    >= v(g)/2^(i+1) and parallel gap <= 2 v(g)/3^i."""
    if cl.c == 0:
        raise ValueError("check_bilipschitz needs a cluster with c > 0")
    if len(cl.points) < 2:
        raise ValueError("check_bilipschitz needs at least two points")
    v, _ = scale_fns(cl.g)
    # the tight case i, i+1 sits exactly on the bound; allow rounding noise
    slack = 1 - mpfr(2) ** (-(precision() // 2))
    coords = sorted(_frame(cl), key=lambda p: p[1], reverse=True)
    ok = True
    worst = None
    worst_score = None
    for i in range(len(coords)):
        par_i, perp_i = coords[i]
        lower = v / mpfr(2) ** (i + 2)        # ranks are 1-based in the bound
        upper = 2 * v / mpfr(3) ** (i + 1)
        for j in range(i + 1, len(coords)):
            par_j, perp_j = coords[j]
            perp_gap = perp_i - perp_j
            par_gap = abs(par_i - par_j)
            score = min(perp_gap / lower, upper / par_gap if par_gap else mpfr("inf"))
            if worst_score is None or score < worst_score:
                worst_score = score
                worst = {"i": i + 1, "j": j + 1, "perp_gap": perp_gap, "perp_bound": lower,
                         "par_gap": par_gap, "par_bound": upper}
            if perp_gap < lower * slack or par_gap > upper / slack:
                ok = False
    worst = dict(worst or {})
    worst.update({"k": cl.k, "n": cl.n, "g": cl.g})
    return CheckReport("bilipschitz", ok, {"min_ratio": worst_score}, worst)


# -- separation of projected clusters ----------------------------------------

@dataclass
class SeparationRow:
    g_small: int
    g_large: int
    gap: Scalar
    bound: Scalar

    @property
    def ratio(self) -> Scalar:
        return self.gap / self.bound


@dataclass
class SeparationReport:
    theta: Scalar
    K: int | None
    C: Scalar
    rows: list[SeparationRow]
    K_max: int = SEPARATION_K_MAX

    @property
    def passed(self) -> bool:
        return self.K is not None and self.K <= self.K_max and self.C > 0

    def report(self) -> CheckReport:
        worst = {}
        qualifying = [r for r in self.rows if self.K is not None and r.g_small >= self.K]
        if qualifying:
            w = min(qualifying, key=lambda r: (r.ratio, r.g_small, r.g_large))
            worst = {"g_small": w.g_small, "g_large": w.g_large, "gap": w.gap, "bound": w.bound}
        return CheckReport("separation", self.passed,
                           {"theta": self.theta, "K": self.K, "C": self.C, "pairs": len(self.rows)},
                           worst)


def _min_gap(A: list[Scalar], B: list[Scalar]) -> Scalar:
    if A[-1] < B[0]:
        return B[0] - A[-1]
    if B[-1] < A[0]:
        return A[0] - B[-1]
    merged = sorted([(a, 0) for a in A] + [(b, 1) for b in B])
    best = None
    for (x, s), (y, t) in zip(merged, merged[1:]):
        if s != t and (best is None or y - x < best):
            best = y - x
    return best


def check_separation(trunc: Truncation, theta, K_max: int = SEPARATION_K_MAX) -> SeparationReport:
    """Gap between the theta-projections of every pair of clusters against
    4^-g_small; K is the smallest index from which every gap is positive and
    C the smallest gap * 4^g_small over those pairs."""
    theta = theta if isinstance(theta, Scalar) else scalar(theta)
    if len(trunc.clusters) < 2:
        raise ValueError("check_separation needs at least two clusters")
    proj = [(cl.g, project(cl.points, theta)) for cl in trunc.clusters]
    rows = []
    for a in range(len(proj)):
        for b in range(a + 1, len(proj)):
            (ga, Pa), (gb, Pb) = proj[a], proj[b]
            gs, gl = min(ga, gb), max(ga, gb)
            rows.append(SeparationRow(gs, gl, _min_gap(Pa, Pb), mpfr(4) ** (-gs)))
    rows.sort(key=lambda r: (r.g_small, r.g_large))
    bad = [r.g_small for r in rows if r.gap <= 0]
    K = (max(bad) + 1) if bad else min(r.g_small for r in rows)
    if K > max(r.g_small for r in rows):
        return SeparationReport(theta, None, mpfr(0), rows, K_max)
    C = min(r.ratio for r in rows if r.g_small >= K)
    return SeparationReport(theta, K, C, rows, K_max)


# -- radius bracket ----------------------------------------------------------

class _ClusterIndex:
    """Bounding discs around each cluster's translation for fast ball tests."""

    def __init__(self, trunc: Truncation):
        self.clusters = trunc.clusters
        self.centers = []
        self.radii = []
        for cl in trunc.clusters:
            tx, ty = translation(cl.g)
            rad = max(gmpy2.sqrt((x - tx) ** 2 + (y - ty) ** 2) for x, y in cl.points)
            self.centers.append((tx, ty))
            self.radii.append(rad)

    def hits(self, x, R) -> list[int]:
        """Indices of clusters with a point in the closed ball B(x, R)."""
        out = []
        R2 = R * R
        for idx, ((tx, ty), rad) in enumerate(zip(self.centers, self.radii)):
            d = gmpy2.sqrt((x[0] - tx) ** 2 + (x[1] - ty) ** 2)
            if d > R + rad:
                continue
            if d + rad <= R or any((px - x[0]) ** 2 + (py - x[1]) ** 2 <= R2
                                   for px, py in self.clusters[idx].points):
                out.append(idx)
        return out

    def points_in_ball(self, x, R) -> list:
        out = []
        R2 = R * R
        for idx, ((tx, ty), rad) in enumerate(zip(self.centers, self.radii)):
            d = gmpy2.sqrt((x[0] - tx) ** 2 + (x[1] - ty) ** 2)
            if d > R + rad:
                continue
            out.extend((px, py) for px, py in self.clusters[idx].points
                       if (px - x[0]) ** 2 + (py - x[1]) ** 2 <= R2)
        return out


def _radius_exponents(trunc: Truncation) -> tuple[int, int]:
    return -2, trunc.G_max + 4


def check_radius_bracket(trunc: Truncation, samples: int, seed: int = DEFAULT_SEED) -> CheckReport:
    """Balls B(x, 2^-a) with x in F that meet two or more clusters: the least
    schedule index m they meet satisfies a - 3 <= m <= a + 2 (only the lower
    side when R > 1)."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    pts = trunc.points()
    index = _ClusterIndex(trunc)
    rng = _rng(seed)
    lo, hi = _radius_exponents(trunc)
    picks = rng.integers(0, len(pts), size=samples)
    exps = rng.integers(lo, hi + 1, size=samples)
    ok = True
    tested = 0
    worst = {}
    worst_margin = None
    for p, a in zip(picks.tolist(), exps.tolist()):
        x = pts[p]
        R = gmpy2.exp2(-a)
        hit = index.hits(x, R)
        if len(hit) < 2:
            continue
        tested += 1
        m = min(trunc.clusters[i].g for i in hit)
        margin = m - (a - 3)
        if a >= 0:
            margin = min(margin, a + 2 - m)
        if worst_margin is None or margin < worst_margin:
            worst_margin = margin
            worst = {"x": x[0], "y": x[1], "a": a, "m": m}
        if margin < 0:
            ok = False
    return CheckReport("radius_bracket", ok,
                       {"samples": samples, "tested": tested, "min_margin": worst_margin},
                       worst, seed)


# -- global covering ---------------------------------------------------------

@dataclass
class CoveringReport:
    epsilon: Scalar
    C_measured: Scalar
    samples: int
    worst: tuple           # (x, R, r) of the worst triple
    worst_count: int
    r_floor_exponent: int
    seed: int

    def report(self, bound=None) -> CheckReport:
        ok = gmpy2.is_finite(self.C_measured) and (bound is None or self.C_measured <= bound)
        x, R, r = self.worst
        constants = {"epsilon": self.epsilon, "C_measured": self.C_measured,
                     "samples": self.samples, "r_floor_exponent": self.r_floor_exponent}
        if bound is not None:
            constants["C_bound"] = bound
        return CheckReport("global_covering", bool(ok), constants,
                           {"x": x[0], "y": x[1], "R": R, "r": r, "count": self.worst_count},
                           self.seed)


def _covering_chunk(triples, trunc_points, index: _ClusterIndex, eps):
    out = []
    for p, a, b in triples:
        x = trunc_points[p]
        R, r = gmpy2.exp2(-a), gmpy2.exp2(-b)
        inside = index.points_in_ball(x, R)
        N = len(grid_boxes(inside, r)) if inside else 0
        out.append((N / gmpy2.exp2((b - a) * eps), N, p, a, b))
    return out


def check_global_covering(trunc: Truncation, epsilon, samples: int,
                          seed: int = DEFAULT_SEED, workers: int | None = 1) -> CoveringReport:
    """Largest N_r(B(x, R) ∩ F) / (R/r)^epsilon over seeded triples with x in
    F, dyadic R = 2^-a and dyadic r = 2^-b < R above the finest-feature floor."""
    eps = epsilon if isinstance(epsilon, Scalar) else scalar(epsilon)
    if not (0 < eps < 1) and eps != 1:
        raise ValueError("epsilon must lie in (0, 1]")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    pts = trunc.points()
    floor_b = -log2_floor(trunc.finest_feature())   # 2^-floor_b >= finest feature
    while gmpy2.exp2(-floor_b) < trunc.finest_feature():
        floor_b -= 1
    a_lo = _radius_exponents(trunc)[0]
    rng = _rng(seed)
    picks = rng.integers(0, len(pts), size=samples).tolist()
    a_s = rng.integers(a_lo, floor_b, size=samples)
    b_s = a_s + 1 + rng.integers(0, floor_b - a_s)
    triples = list(zip(picks, a_s.tolist(), b_s.tolist()))
    chunk = max(1, len(triples) // 64)
    chunks = [triples[i:i + chunk] for i in range(0, len(triples), chunk)]
    results = ordered_map(partial(_chunk_task, trunc=trunc, eps=eps), chunks, workers)
    best = None
    for part in results:
        for row in part:
            if best is None or row[0] > best[0]:
                best = row
    C, N, p, a, b = best
    return CoveringReport(eps, C, samples, (pts[p], gmpy2.exp2(-a), gmpy2.exp2(-b)), N, floor_b, seed)


def _chunk_task(triples, trunc, eps):
    return _covering_chunk(triples, trunc.points(), _ClusterIndex(trunc), eps)
