from fractions import Fraction
from itertools import product

import gmpy2
import pytest
from gmpy2 import mpfr
from hypothesis import given, strategies as st

from assouad_forge.construction import (PrecisionError, build_f, cluster, e_set, f_prime,
                                        precision_for, required_precision, scale_fns,
                                        schedule_pairs, translation, y_set, z_set)
from assouad_forge.profile import constant, contraction_of, linear, staircase
from assouad_forge.scalar import default_precision, pi, scalar, set_precision, working_precision
from assouad_forge.scheduler import enumerate_directions, pair_index, sequence_for_blocks, unpair


def e_oracle(c: Fraction, n: int) -> list[Fraction]:
    # direct composition of S_0(x) = cx and S_1(x) = cx + 1 - c
    out = set()
    for word in product((0, 1), repeat=n):
        x = Fraction(0)
        for i in reversed(word):
            x = c * x + (1 - c) * i
        out.add(x)
    return sorted(out)


def as_mpfr(q: Fraction):
    return mpfr(q.numerator) / q.denominator


def test_e_set_examples():
    half = scalar("0.5")
    assert e_set(half, 1) == [0, half]
    assert e_set(half, 2) == [0, scalar("0.25"), half, scalar("0.75")]
    third = 1 / mpfr(3)
    got = e_set(third, 2)
    want = [as_mpfr(q) for q in e_oracle(Fraction(1, 3), 2)]
    assert [abs(a - b) < mpfr(2) ** -250 for a, b in zip(got, want)] == [True] * 4
    with pytest.raises(ValueError):
        e_set(0, 3)


@pytest.mark.parametrize("c", [Fraction(1, 2), Fraction(1, 3), Fraction(1, 5), Fraction(2, 7)])
def test_e_set_matches_composition_oracle(c):
    for n in range(1, 8):
        got = e_set(as_mpfr(c), n)
        want = e_oracle(c, n)
        assert len(got) == 2 ** n
        for a, b in zip(got, want):
            assert abs(a - as_mpfr(b)) < mpfr(2) ** -240


@given(st.integers(min_value=2, max_value=1000))
def test_e_set_nesting(d):
    c = 1 / mpfr(d)
    for n in range(1, 7):
        assert set(e_set(c, n)) <= set(e_set(c, n + 1))


def test_z_set_examples():
    half = scalar("0.5")
    assert z_set(1, half) == [scalar("0.25"), half]
    assert z_set(2, half) == [gmpy2.exp2(-i) for i in range(6, 0, -1)]
    assert z_set(5, 0) == [0, 1]


def test_y_set_examples():
    half = scalar("0.5")
    assert y_set(half, 1) == [1 / mpfr(81), 1 / mpfr(81) + 1 / mpfr(512)]
    assert y_set(0, 3) == [0, half]
    ys = sorted(y_set(half, 1), reverse=True)
    assert ys[0] <= mpfr(7) / 12


@pytest.mark.parametrize("c", ["0.5", "0.25", "0.1"])
def test_cardinalities_and_nesting(c):
    c = scalar(c)
    with working_precision(default_precision(8)):
        prev = None
        for n in range(1, 8):
            ys = y_set(c, n)
            assert len(ys) == len(z_set(n, c)) == 2 ** (n + 1) - 2
            if prev is not None:
                assert set(prev) <= set(ys)
            prev = ys


def test_yydecay_exhaustive():
    with working_precision(default_precision(10)):
        for c in ("0.5", "0.3333", "0.05"):
            for n in range(1, 11):
                ys = sorted(y_set(scalar(c), n), reverse=True)
                for i, y in enumerate(ys, start=1):
                    assert y <= mpfr(3) ** -i + mpfr(4) ** -i


def test_y_set_collision_raises_precision_error():
    with working_precision(64):
        with pytest.raises(PrecisionError):
            y_set(scalar("0.5"), 7)


def test_f_prime_pairing():
    half = scalar("0.5")
    assert f_prime(half, 1) == [(1 / mpfr(81), scalar("0.25")), (1 / mpfr(81) + 1 / mpfr(512), half)]
    assert f_prime(0, 4) == [(0, 0), (half, 1)]
    pts = f_prime(scalar("0.3"), 3)
    assert len(pts) == 14
    assert len({y for y, _ in pts}) == len({z for _, z in pts}) == 14


def test_scale_functions():
    v1, h1 = scale_fns(1)
    assert v1 == scalar("0.05")
    assert abs(h1 - scalar("0.05") / gmpy2.log(2)) < mpfr(2) ** -250
    v2, h2 = scale_fns(2)
    assert v2 < v1 and h2 < h1
    for i in range(1, 200):
        v, h = scale_fns(i)
        assert 0 < h < 1 and 0 < v < 1
        assert v <= mpfr(10) ** -i / i
        assert 2 ** i * v <= mpfr(5) ** -i
        assert abs(h * gmpy2.log(mpfr(i + 1)) - v) <= v * mpfr(2) ** -250
        if i > 1:
            pv, ph = scale_fns(i - 1)
            assert v < pv and h < ph


def test_cluster_rotation_by_pi():
    cl = cluster(pi(), 1, 1, 1, 0)
    v, h = scale_fns(1)
    (x0, y0), (x1, y1) = cl.points
    assert (x0, y0) == (scalar("0.5"), scalar("0.25"))
    tol = mpfr(2) ** -240
    assert abs(x1 - (scalar("0.5") - h / 2)) < tol
    assert abs(y1 - (scalar("0.25") - v)) < tol


def test_cluster_rotation_by_half_pi():
    cl = cluster(pi() / 2, 1, 1, 2, 0)
    v, h = scale_fns(2)
    tx, ty = translation(2)
    (x0, y0), (x1, y1) = cl.points
    tol = mpfr(2) ** -240
    assert abs(x0 - tx) < tol and abs(y0 - ty) < tol
    # rotate90(h/2, v) = (-v, h/2)
    assert abs(x1 - (tx - v)) < tol and abs(y1 - (ty + h / 2)) < tol


@given(st.integers(min_value=1, max_value=3141), st.sampled_from(["0.5", "0.3", "0.05", "0"]),
       st.integers(min_value=1, max_value=4), st.integers(min_value=1, max_value=30))
def test_cluster_inside_rotated_rectangle(ti, c, n, g):
    theta = mpfr(ti) / 1000
    c = scalar(c)
    with working_precision(max(256, required_precision(n, g, c))):
        cl = cluster(theta, 1, n, g, c)
        v, h = scale_fns(g)
        tx, ty = translation(g)
        cos, sin = gmpy2.cos(theta), gmpy2.sin(theta)
        slack = v * mpfr(2) ** -60
        for x, y in cl.points:
            dx, dy = x - tx, y - ty
            a = dx * cos + dy * sin
            b = -dx * sin + dy * cos
            assert -slack <= a <= h + slack and -slack <= b <= v + slack
        expected = 2 if c == 0 else 2 ** (n + 1) - 2
        assert len(set(cl.points)) == len(cl.points) == expected


def test_build_small_truncations():
    p = linear()
    seq = enumerate_directions(p, 4)
    t1 = build_f(p, seq, G_max=1)
    assert [(cl.k, cl.n) for cl in t1.clusters] == [(1, 1)]
    assert t1.origin == (0, 0) and t1.points()[0] == (0, 0)
    t4 = build_f(p, seq, G_max=4)
    assert sorted((cl.k, cl.n) for cl in t4.clusters) == [(1, 1), (1, 2), (2, 1), (2, 2)]
    assert [cl.g for cl in t4.clusters] == [1, 2, 3, 4]


def test_build_contractions_follow_profile():
    p = staircase([("0.4", "0.6", "1"), ("0.9", "1.6", "0.5")])
    seq = sequence_for_blocks(p, 2)
    pairs = [(k, 3) for k in range(1, 9)]
    set_precision(precision_for(p, seq, pairs))
    trunc = build_f(p, seq, pairs=pairs)
    for cl in trunc.clusters:
        assert cl.c == contraction_of(p(seq[cl.k].theta))
        assert cl.g == pair_index(cl.k, cl.n)


def test_build_g12_point_budget_and_determinism():
    p = linear()
    seq = sequence_for_blocks(p, 4)
    pairs = schedule_pairs(12, 6)
    set_precision(precision_for(p, seq, pairs))
    a = build_f(p, seq, pairs=pairs)
    b = build_f(p, seq, pairs=pairs)
    assert len(a.points()) <= 2 ** 14
    assert len({cl.g for cl in a.clusters}) == len(a.clusters)
    assert a.points() == b.points()


def test_build_refuses_low_precision():
    p = constant("0.5")
    seq = sequence_for_blocks(p, 2)
    with working_precision(128):
        with pytest.raises(PrecisionError):
            build_f(p, seq, pairs=[(1, 4)])


def test_build_rejects_duplicates_and_empty():
    p = constant("0.5")
    seq = sequence_for_blocks(p, 2)
    with pytest.raises(ValueError):
        build_f(p, seq, pairs=[(1, 1), (1, 1)])
    with pytest.raises(ValueError):
        build_f(p, seq, pairs=[])
    with pytest.raises(ValueError):
        build_f(p, seq, G_max=0)


def test_schedule_pairs_covers_every_index():
    pairs = schedule_pairs(25)
    assert [pair_index(k, n) for k, n in pairs] == list(range(1, 26))
    assert all(n <= 2 for _, n in schedule_pairs(25, 2))
    assert unpair(25) == (5, 5)
