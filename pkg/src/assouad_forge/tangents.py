"""Reference sets and finite weak-tangent studies.

T_k rescales the projection of a single cluster onto [0, 1]; when the
projection direction matches the cluster's own direction the image is the
normalised Y_n(c), and a small angular offset delta leaks at most
sin(delta) v(g) of the cluster's long side into the projection.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import gmpy2
from gmpy2 import mpfr

from .construction import Cluster, Truncation, cluster, e_set, required_precision, y_set
from .metrics import hausdorff, normalize, project
from .profile import Profile, contraction_of, evaluate
from .scalar import Scalar, precision, scalar, to_decimal, working_precision
from .scheduler import DirectionSequence, approximants, pair_index


@dataclass(frozen=True)
class ReferenceSet:
    kind: str
    c: Scalar
    depth: int
    normalized: bool
    points: tuple


def reference_set(kind: str, c=0, depth: int = 1, normalized: bool = False) -> ReferenceSet:
    """Y_depth(c), Z truncated at 2^-depth (with 0), or E_depth(c)."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    c = c if isinstance(c, Scalar) else scalar(c)
    if not (0 <= c <= mpfr("0.5")):
        raise ValueError("c must lie in [0, 1/2]")
    if kind == "Y":
        pts = y_set(c, depth)
    elif kind == "Z":
        pts = [mpfr(0)] + [gmpy2.exp2(-i) for i in range(depth, 0, -1)]
    elif kind == "E":
        pts = [mpfr(0), mpfr(1)] if c == 0 else e_set(c, depth)
    else:
        raise ValueError(f"unknown reference kind {kind!r}")
    if normalized:
        _, pts = normalize(pts)
    return ReferenceSet(kind, c, depth, normalized, tuple(pts))


def tangent_image(cl: Cluster, theta) -> list[Scalar]:
    """T(pi_theta F_cluster): the cluster's projection rescaled onto [0, 1]."""
    theta = theta if isinstance(theta, Scalar) else scalar(theta)
    _, image = normalize(project(cl.points, theta))
    return image


def tangent_image_of(trunc: Truncation, k_index: int, n: int, theta) -> list[Scalar]:
    return tangent_image(trunc.find(k_index, n), theta)


def projection_ratio(cl: Cluster, theta) -> Scalar:
    """|pi_theta F| / |pi_{theta_cluster} F|."""
    P = project(cl.points, theta)
    Q = project(cl.points, cl.theta)
    return (P[-1] - P[0]) / (Q[-1] - Q[0])


def ratio_bound(n_k: int) -> Scalar:
    """1 + 2 log(n_k) / n_k^(1/4)."""
    n = mpfr(n_k)
    return 1 + 2 * gmpy2.log(n) / gmpy2.root(n, 4)


def misalignment_bound(cl: Cluster, delta) -> Scalar:
    """2 sin(delta) ln(g+1) / diam(Y_n(c)): v(g) sin(delta) of leakage over a
    normalising diameter of about h(g) diam(Y_n(c))."""
    ys = y_set(cl.c, cl.n)
    return 2 * abs(gmpy2.sin(delta)) * gmpy2.log(mpfr(cl.g + 1)) / (ys[-1] - ys[0])


@dataclass
class StudyRow:
    k: int
    n_k: int | None
    g: int | None
    dH: Scalar | None = None
    ratio: Scalar | None = None
    ratio_bound: Scalar | None = None
    delta: Scalar | None = None
    flags: list[str] = field(default_factory=list)


def convergence_study(profile: Profile, seq: DirectionSequence, theta, ks, G_cap: int) -> list[StudyRow]:
    """For each k: F_k = cluster(theta_{n_k}, depth k), its tangent image's
    distance to the normalised Y_k(c) with c = c(phi(theta)), and the
    diameter ratio against its bound."""
    theta = theta if isinstance(theta, Scalar) else scalar(theta)
    ks = sorted(ks)
    c = contraction_of(evaluate(profile, theta))
    approx = approximants(seq, theta, max(ks))
    by_k = {row.k: row for row in approx.rows}
    out = []
    for k in ks:
        a = by_k.get(k)
        if a is None:
            flag = "approximation-missed" if k in approx.missing else "sequence-truncated"
            out.append(StudyRow(k, None, None, flags=[flag]))
            continue
        g = pair_index(a.n, k)
        if g > G_cap:
            out.append(StudyRow(k, a.n, g, flags=["skipped:g>G_cap"]))
            continue
        ck = contraction_of(a.value)
        bits = max(precision(), required_precision(k, g, ck), required_precision(k, g, c))
        with working_precision(bits):
            cl = cluster(a.theta, a.n, k, g, ck)
            image = tangent_image(cl, theta)
            _, ref = normalize(y_set(c, k))
            ratio = projection_ratio(cl, theta)
            bound = ratio_bound(a.n)
            dH = hausdorff(image, ref)
        flags = []
        if not (1 <= ratio <= bound):
            flags.append("ratio-out-of-bound")
        out.append(StudyRow(k, a.n, g, dH, ratio, bound, a.distance, flags))
    return out


def misalignment_study(cl: Cluster, deltas) -> list[StudyRow]:
    """Hausdorff distance between the tangent image at theta_cluster + delta and
    the normalised Y_n(c), with the leakage bound, for each offset delta."""
    _, ref = normalize(y_set(cl.c, cl.n))
    rows = []
    for delta in deltas:
        delta = delta if isinstance(delta, Scalar) else scalar(delta)
        image = tangent_image(cl, cl.theta + delta)
        dH = hausdorff(image, ref)
        bound = misalignment_bound(cl, delta)
        flags = [] if dH <= bound else ["bound-violated"]
        rows.append(StudyRow(cl.k, cl.k, cl.g, dH, projection_ratio(cl, cl.theta + delta),
                             bound, delta, flags))
    return rows


STUDY_HEADER = ["k", "n_k", "g", "dH", "ratio", "ratio_bound", "flags"]


def study_csv(rows: list[StudyRow]) -> str:
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(STUDY_HEADER)
    for r in rows:
        out.writerow([r.k, "" if r.n_k is None else r.n_k, "" if r.g is None else r.g,
                      "" if r.dH is None else to_decimal(r.dH),
                      "" if r.ratio is None else to_decimal(r.ratio),
                      "" if r.ratio_bound is None else to_decimal(r.ratio_bound),
                      ";".join(r.flags)])
    return buf.getvalue()
