"""Windowed Assouad-type and box-type dimension estimates.

An Assouad estimate is the largest exponent log_b N_r(B(x, R) cap P) / j over
centres x and windows (R, r = R b^-j).  The reduction is sequential in
(window, j, centre) order and only a strictly larger exponent replaces the
incumbent, so the witness is the lexicographically smallest maximiser no
matter how the windows were distributed over workers.
"""

from __future__ import annotations

import csv
import io
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field

import gmpy2
from gmpy2 import mpfr

from .construction import Cluster, Truncation
from .metrics import cover_count_2d, greedy_count, in_ball, grid_boxes, normalize, project
from .parallel import ordered_map
from .profile import angle_distance
from .scalar import Scalar, scalar, to_decimal

MAX_CENTERS = 2 ** 14


class EmptyWindowError(ValueError):
    pass


@dataclass(frozen=True)
class WindowSpec:
    """Scale pairs (R, r = R base^-j).

    ``R_exponents`` give R = base^-a.  ``anchors`` replaces them with explicit
    (R, j_max) radii; ``r_floor`` skips windows finer than the set's finest
    generated feature.
    """

    ratio_exponents: tuple = tuple(range(1, 17))
    R_exponents: tuple = (0,)
    base: Scalar = mpfr(2)
    anchors: tuple = ()
    stride: int | None = None
    r_floor: Scalar | None = None

    def __post_init__(self):
        if not self.ratio_exponents or any(j < 1 for j in self.ratio_exponents):
            raise EmptyWindowError("ratio exponents must be a non-empty list of integers >= 1")
        if not self.anchors and not self.R_exponents:
            raise EmptyWindowError("no window radii")
        if self.base <= 1:
            raise ValueError("window base must exceed 1")

    def windows(self) -> list[tuple[int, Scalar, tuple]]:
        js = tuple(sorted(set(self.ratio_exponents)))
        if self.anchors:
            return [(a, R, tuple(j for j in js if j <= jmax))
                    for a, (R, jmax) in enumerate(self.anchors)]
        b = self.base
        return [(a, b ** (-a), js) for a in sorted(set(self.R_exponents))]

    def with_base(self, base) -> "WindowSpec":
        return WindowSpec(self.ratio_exponents, self.R_exponents, base, self.anchors,
                          self.stride, self.r_floor)


def parse_window(text: str) -> WindowSpec:
    """``dyadic:1..16`` or ``base:3:1..10``: r = R base^-j for the listed j at
    the unit radius R = 1."""
    parts = text.split(":")
    try:
        if parts[0] == "dyadic" and len(parts) == 2:
            base, rng = mpfr(2), parts[1]
        elif parts[0] == "base" and len(parts) == 3:
            base, rng = scalar(parts[1]), parts[2]
        else:
            raise ValueError
        lo, hi = (int(x) for x in rng.split(".."))
    except ValueError:
        raise ValueError(f"bad window spec {text!r}; expected dyadic:J..K or base:B:J..K") from None
    if lo < 1 or hi < lo:
        raise ValueError(f"bad window range in {text!r}")
    return WindowSpec(tuple(range(lo, hi + 1)), (0,), base)


@dataclass(frozen=True)
class Witness:
    a: int
    j: int
    x: object
    R: Scalar
    r: Scalar
    count: int


@dataclass(frozen=True)
class WindowRow:
    a: int
    j: int
    R: Scalar
    r: Scalar
    exponent: Scalar | None
    count: int
    center: object


@dataclass
class EstimateReport:
    value: Scalar
    witness: Witness | None
    table: list[WindowRow]
    stride: int
    flags: list[str] = field(default_factory=list)


def _stride(n: int, requested: int | None) -> int:
    if requested:
        return requested
    return 1 if n <= MAX_CENTERS else -(-n // MAX_CENTERS)


class _Log:
    def __init__(self, base):
        self.logb = gmpy2.log(base)
        self.cache = {}

    def exponent(self, count: int, j: int) -> Scalar:
        lg = self.cache.get(count)
        if lg is None:
            lg = self.cache[count] = gmpy2.log(mpfr(count))
        return lg / (j * self.logb)


def _window_1d(P, centers, a, R, js, base, r_floor):
    """Best exponent per j for one radius over all centres (1-D, exact greedy)."""
    log = _Log(base)
    slices = []
    for i in centers:
        x = P[i]
        slices.append((bisect_left(P, x - R), bisect_right(P, x + R)))
    rows, skipped = [], 0
    for j in js:
        r = R * base ** (-j)
        if r_floor is not None and r < r_floor:
            skipped += 1
            continue
        cache = {}
        nxt = {}
        best = None
        for i, (lo, hi) in zip(centers, slices):
            key = (lo, hi)
            N = cache.get(key)
            if N is None:
                # greedy walk with memoised jumps, shared across slices
                N, p = 0, lo
                while p < hi:
                    N += 1
                    q = nxt.get(p)
                    if q is None:
                        q = nxt[p] = bisect_right(P, P[p] + r, p + 1)
                    p = q
                cache[key] = N
            if N <= 1:
                continue
            e = log.exponent(N, j)
            if best is None or e > best[0]:
                best = (e, N, P[i])
        if best is None:
            rows.append(WindowRow(a, j, R, r, None, 1, None))
        else:
            rows.append(WindowRow(a, j, R, r, best[0], best[1], best[2]))
    return rows, skipped


def _window_2d(P, centers, a, R, js, base, r_floor):
    log = _Log(base)
    xs = [p[0] for p in P]
    balls = []
    for c in centers:
        lo, hi = bisect_left(xs, c[0] - R), bisect_right(xs, c[0] + R)
        balls.append(in_ball(P[lo:hi], c, R))
    rows, skipped = [], 0
    for j in js:
        r = R * base ** (-j)
        if r_floor is not None and r < r_floor:
            skipped += 1
            continue
        best = None
        for c, ball in zip(centers, balls):
            N = len(grid_boxes(ball, r))
            if N <= 1:
                continue
            e = log.exponent(N, j)
            if best is None or e > best[0]:
                best = (e, N, c)
        if best is None:
            rows.append(WindowRow(a, j, R, r, None, 1, None))
        else:
            rows.append(WindowRow(a, j, R, r, best[0], best[1], best[2]))
    return rows, skipped


def _window_task(args):
    kind, P, centers, a, R, js, base, r_floor = args
    fn = _window_1d if kind == 1 else _window_2d
    return fn(P, centers, a, R, js, base, r_floor)


def _is_planar(P) -> bool:
    return isinstance(P[0], tuple)


def assouad_estimate(P, w: WindowSpec, workers: int | None = 1) -> EstimateReport:
    """Max over centres and windows of log_b N / j, with a deterministic witness."""
    if not P:
        raise EmptyWindowError("empty point set")
    windows = w.windows()
    if not any(js for _, _, js in windows):
        raise EmptyWindowError("window spec yields no scale pairs")
    planar = _is_planar(P)
    if planar:
        P = sorted(P)
    stride = _stride(len(P), w.stride)
    if planar:
        centers = [P[i] for i in range(0, len(P), stride)]
    else:
        centers = list(range(0, len(P), stride))
    tasks = [(2 if planar else 1, P, centers, a, R, js, w.base, w.r_floor)
             for a, R, js in windows if js]
    results = ordered_map(_window_task, tasks, workers)
    table: list[WindowRow] = []
    skipped = 0
    for rows, sk in results:
        table.extend(rows)
        skipped += sk
    flags = []
    if skipped:
        flags.append(f"below-floor:{skipped}")
    if stride > 1:
        flags.append(f"stride:{stride}")
    best = None
    for row in table:  # (a, j) ascending; strict improvement keeps the smallest key
        if row.exponent is not None and (best is None or row.exponent > best.exponent):
            best = row
    if best is None:
        flags.append("degenerate")
        return EstimateReport(mpfr(0), None, table, stride, flags)
    witness = Witness(best.a, best.j, best.center, best.R, best.r, best.count)
    return EstimateReport(best.exponent, witness, table, stride, flags)


def witness_count(P, witness: Witness) -> int:
    """Recompute the covering number at a witness."""
    if _is_planar(P):
        return cover_count_2d(P, witness.r, (witness.x, witness.R))
    lo = bisect_left(P, witness.x - witness.R)
    hi = bisect_right(P, witness.x + witness.R)
    return greedy_count(P, witness.r, lo, hi)


@dataclass
class BoxEstimate:
    slope: Scalar
    counts: list[int]
    degenerate: bool = False


def box_counts(P, r) -> int:
    """N_r for the box estimate: open-set count in 1-D, grid surrogate in 2-D."""
    if _is_planar(P):
        return cover_count_2d(P, r)
    return greedy_count(sorted(P), r, closed=False)


def box_estimate(P, scales) -> BoxEstimate:
    """Least-squares slope of log N_r against log(1/r)."""
    scales = [s if isinstance(s, Scalar) else scalar(s) for s in scales]
    if len(scales) < 2:
        raise ValueError("box estimate needs at least two scales")
    if not P:
        raise EmptyWindowError("empty point set")
    counts = [box_counts(P, r) for r in scales]
    if len(set(counts)) == 1:
        return BoxEstimate(mpfr(0), counts, True)
    xs = [-gmpy2.log(r) for r in scales]
    ys = [gmpy2.log(mpfr(n)) for n in counts]
    m = len(xs)
    mx = sum(xs) / m
    my = sum(ys) / m
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    sxx = sum((x - mx) ** 2 for x in xs)
    return BoxEstimate(sxy / sxx, counts)


# ---------------------------------------------------------------- sweeps

SWEEP_HEADER = ["theta", "scope", "estimate", "k", "n", "g", "c", "witness_x",
                "witness_R", "witness_r", "witness_count", "flags"]


@dataclass
class SweepRow:
    theta: Scalar
    scope: str
    report: EstimateReport
    cluster: Cluster | None = None
    flags: list[str] = field(default_factory=list)

    @property
    def estimate(self) -> Scalar:
        return self.report.value

    def csv_fields(self) -> list[str]:
        w = self.report.witness
        cl = self.cluster
        return [
            to_decimal(self.theta),
            self.scope,
            to_decimal(self.report.value),
            str(cl.k) if cl else "",
            str(cl.n) if cl else "",
            str(cl.g) if cl else "",
            to_decimal(cl.c) if cl else "",
            to_decimal(w.x) if w else "",
            to_decimal(w.R) if w else "",
            to_decimal(w.r) if w else "",
            str(w.count) if w else "",
            ";".join(self.flags + self.report.flags),
        ]


def nearest_cluster(trunc: Truncation, theta: Scalar) -> Cluster:
    """Cluster whose direction is nearest theta; the deepest one on ties, then smallest g."""
    return min(trunc.clusters, key=lambda cl: (angle_distance(cl.theta, theta), -cl.n, cl.g))


def cluster_windows(cl: Cluster, diam: Scalar, w: WindowSpec) -> WindowSpec:
    """Windows matched to the cluster: base 1/c and one radius per copy of E_m(c)
    in the projected cluster, with j capped at m (the copy's finest level)."""
    if cl.c == 0:
        return WindowSpec(w.ratio_exponents, anchors=((mpfr(1), max(w.ratio_exponents)),))
    anchors = []
    for m in range(1, cl.n + 1):
        copy = gmpy2.exp2(-4 * 2 ** m) * (1 - cl.c ** m) * cl.h / diam
        anchors.append((copy, m))
    return WindowSpec(w.ratio_exponents, base=1 / cl.c, anchors=tuple(anchors), stride=w.stride)


def cluster_estimate(cl: Cluster, theta: Scalar, w: WindowSpec) -> SweepRow:
    P = project(cl.points, theta)
    _, image = normalize(P)
    spec = cluster_windows(cl, P[-1] - P[0], w)
    report = assouad_estimate(image, spec)
    flags = []
    if cl.c == 0:
        flags.append("degenerate-count")
    return SweepRow(theta, "cluster", report, cl, flags)


def full_estimate(trunc: Truncation, theta: Scalar, w: WindowSpec) -> SweepRow:
    P = project(trunc.points(), theta)
    _, image = normalize(P)
    floor = trunc.finest_feature() / (P[-1] - P[0])
    # the whole set is probed at every radius R = base^-a down to the finest j
    radii = tuple(range(0, max(w.ratio_exponents) + 1))
    spec = WindowSpec(w.ratio_exponents, radii, w.base, (), w.stride, floor)
    return SweepRow(theta, "full", assouad_estimate(image, spec))


def _sweep_task(args):
    trunc, theta, w, scopes = args
    rows = []
    if "cluster" in scopes:
        rows.append(cluster_estimate(nearest_cluster(trunc, theta), theta, w))
    if "full" in scopes:
        rows.append(full_estimate(trunc, theta, w))
    return rows


def sweep(trunc: Truncation, thetas, w: WindowSpec, workers: int | None = 1,
          scopes=("cluster", "full")) -> list[SweepRow]:
    """Cluster-scope and whole-set estimates for each direction."""
    if not trunc.clusters:
        raise ValueError("empty truncation")
    thetas = [t if isinstance(t, Scalar) else scalar(t) for t in thetas]
    results = ordered_map(_sweep_task, [(trunc, t, w, tuple(scopes)) for t in thetas], workers)
    return [row for rows in results for row in rows]


def sweep_csv(rows: list[SweepRow]) -> str:
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(SWEEP_HEADER)
    for row in rows:
        out.writerow(row.csv_fields())
    return buf.getvalue()


def estimate_csv(report: EstimateReport) -> str:
    """Summary row followed by the per-window table."""
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(["kind", "a", "j", "R", "r", "exponent", "count", "center", "flags"])
    w = report.witness
    out.writerow(["estimate", w.a if w else "", w.j if w else "", to_decimal(w.R) if w else "",
                  to_decimal(w.r) if w else "", to_decimal(report.value), w.count if w else "",
                  _fmt_center(w.x) if w else "", ";".join(report.flags)])
    for row in report.table:
        out.writerow(["window", row.a, row.j, to_decimal(row.R), to_decimal(row.r),
                      "" if row.exponent is None else to_decimal(row.exponent), row.count,
                      "" if row.center is None else _fmt_center(row.center), ""])
    return buf.getvalue()


def _fmt_center(x) -> str:
    if isinstance(x, tuple):
        return " ".join(to_decimal(v) for v in x)
    return to_decimal(x)
