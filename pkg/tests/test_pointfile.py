import pytest
from gmpy2 import mpfr
from hypothesis import given, strategies as st

from assouad_forge.construction import build_f, precision_for, schedule_pairs
from assouad_forge.pointfile import (PointFileError, atomic_write, dump_points_1d, dump_truncation,
                                     parse_points_1d, parse_truncation, read_points_1d,
                                     read_truncation, write_truncation)
from assouad_forge.profile import linear
from assouad_forge.scalar import precision, set_precision, working_precision
from assouad_forge.scheduler import sequence_for_blocks


@pytest.fixture
def trunc():
    p = linear()
    seq = sequence_for_blocks(p, 3)
    pairs = schedule_pairs(9, 4)
    set_precision(precision_for(p, seq, pairs))
    return build_f(p, seq, pairs=pairs)


def test_truncation_round_trip_is_bit_exact(tmp_path, trunc):
    path = tmp_path / "f.pts"
    write_truncation(path, trunc)
    text = path.read_text()
    assert text.startswith("# assouad-forge point set v1\n")
    assert f"# mantissa_bits {trunc.mantissa_bits}" in text
    assert f"# profile_sha256 {trunc.profile.digest()}" in text
    set_precision(64)
    back = read_truncation(path)
    assert precision() == trunc.mantissa_bits
    assert back.points() == trunc.points()
    assert [(c.k, c.n, c.g, c.c, c.theta) for c in back.clusters] == \
        [(c.k, c.n, c.g, c.c, c.theta) for c in trunc.clusters]
    assert dump_truncation(back) == text


def test_corrupted_headers_are_rejected(trunc):
    text = dump_truncation(trunc)
    with pytest.raises(PointFileError):
        parse_truncation("hello\n")
    with pytest.raises(PointFileError):
        parse_truncation(text.replace("# profile_sha256 ", "# profile_sha256 00"))
    with pytest.raises(PointFileError):
        parse_truncation(text.replace("0x", "zz", 3))
    lines = text.splitlines()
    no_bits = [l for l in lines if not l.startswith("# mantissa_bits")]
    with pytest.raises(PointFileError):
        parse_truncation("\n".join(no_bits))


@given(st.lists(st.integers(min_value=-(2 ** 200), max_value=2 ** 200), min_size=1, max_size=20))
def test_points_1d_round_trip(ints):
    with working_precision(256):
        P = sorted({mpfr(i) / 2 ** 90 for i in ints})
        assert parse_points_1d(dump_points_1d(P, ["note"])) == P


def test_atomic_write_replaces_whole_file(tmp_path):
    path = tmp_path / "out.txt"
    path.write_text("old")
    atomic_write(path, "new\n")
    assert path.read_text() == "new\n"
    assert [p.name for p in tmp_path.iterdir()] == ["out.txt"]


def test_atomic_write_leaves_no_partial_file(tmp_path):
    path = tmp_path / "out.txt"
    with pytest.raises(TypeError):
        atomic_write(path, None)
    assert list(tmp_path.iterdir()) == []


def test_read_points_refuses_planar_file(tmp_path, trunc):
    path = tmp_path / "f.pts"
    write_truncation(path, trunc)
    with pytest.raises(PointFileError):
        read_points_1d(path)
