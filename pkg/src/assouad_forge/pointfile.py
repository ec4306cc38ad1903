"""Text point-set files.

A truncation file starts with '#' header lines recording the profile, its
sha256, G_max and the mantissa width, then one ``# cluster ...`` line per
cluster followed by its points as ``x y`` hex floats.  1-D files hold one hex
float per line.  Writes go to a temporary file that is renamed into place.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

from .construction import Cluster, Truncation
from .profile import make_profile
from .scalar import from_hex, precision, set_precision, to_hex

MAGIC = "# assouad-forge point set v1"


class PointFileError(ValueError):
    pass


def atomic_write(path, text: str) -> None:
    """Write ``text`` to ``path`` via a sibling temp file and rename."""
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def dump_truncation(trunc: Truncation) -> str:
    lines = [
        MAGIC,
        f"# profile {trunc.profile.source}",
        f"# profile_sha256 {trunc.profile.digest()}",
        f"# gmax {trunc.G_max}",
        f"# mantissa_bits {trunc.mantissa_bits}",
        f"# clusters {len(trunc.clusters)}",
        "# origin",
        f"{to_hex(trunc.origin[0])} {to_hex(trunc.origin[1])}",
    ]
    for cl in trunc.clusters:
        lines.append(f"# cluster k={cl.k} n={cl.n} g={cl.g} theta={to_hex(cl.theta)} c={to_hex(cl.c)}")
        lines.extend(f"{to_hex(x)} {to_hex(y)}" for x, y in cl.points)
    return "\n".join(lines) + "\n"


def write_truncation(path, trunc: Truncation) -> None:
    atomic_write(path, dump_truncation(trunc))


def _fields(text: str, lineno: int) -> dict[str, str]:
    out = {}
    for tok in text.split():
        if "=" not in tok:
            raise PointFileError(f"line {lineno}: malformed cluster header token {tok!r}")
        key, value = tok.split("=", 1)
        out[key] = value
    return out


def _point(line: str, lineno: int, bits: int) -> tuple:
    parts = line.split()
    if len(parts) != 2:
        raise PointFileError(f"line {lineno}: expected 'x y', got {line!r}")
    try:
        return from_hex(parts[0], bits), from_hex(parts[1], bits)
    except ValueError as exc:
        raise PointFileError(f"line {lineno}: {exc}") from exc


def parse_truncation(text: str, adopt_precision: bool = True) -> Truncation:
    """Inverse of :func:`dump_truncation`.

    With ``adopt_precision`` the working precision is raised to the file's
    mantissa width so later arithmetic matches the build.
    """
    lines = text.splitlines()
    if not lines or lines[0].strip() != MAGIC:
        raise PointFileError("not a truncation file (missing header)")
    meta: dict[str, str] = {}
    origin = None
    clusters = []
    current: dict | None = None
    pts: list = []
    want_origin = False
    bits = None

    def close():
        if current is not None:
            if not pts:
                raise PointFileError(f"cluster k={current['k']} n={current['n']} has no points")
            clusters.append(Cluster(int(current["k"]), int(current["n"]), int(current["g"]),
                                    from_hex(current["c"], bits), from_hex(current["theta"], bits),
                                    tuple(pts)))

    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body == "origin":
                want_origin = True
                continue
            if body.startswith("cluster "):
                if bits is None:
                    raise PointFileError("mantissa_bits must precede the clusters")
                close()
                current = _fields(body[len("cluster "):], lineno)
                for key in ("k", "n", "g", "theta", "c"):
                    if key not in current:
                        raise PointFileError(f"line {lineno}: cluster header lacks {key}=")
                pts = []
                continue
            key, _, value = body.partition(" ")
            meta[key] = value
            if key == "mantissa_bits":
                try:
                    bits = int(value)
                except ValueError:
                    raise PointFileError(f"line {lineno}: bad mantissa_bits {value!r}") from None
                if adopt_precision and precision() < bits:
                    set_precision(bits)
            continue
        if bits is None:
            raise PointFileError("data before the mantissa_bits header")
        if want_origin:
            origin = _point(line, lineno, bits)
            want_origin = False
        elif current is None:
            raise PointFileError(f"line {lineno}: point outside any cluster")
        else:
            pts.append(_point(line, lineno, bits))
    close()
    for key in ("profile", "gmax", "mantissa_bits"):
        if key not in meta:
            raise PointFileError(f"header lacks '# {key}'")
    if origin is None:
        raise PointFileError("file has no origin point")
    try:
        profile = make_profile(json.loads(meta["profile"]))
    except (json.JSONDecodeError, ValueError) as exc:
        raise PointFileError(f"bad profile header: {exc}") from exc
    if "profile_sha256" in meta and meta["profile_sha256"] != profile.digest():
        raise PointFileError("profile hash does not match the recorded profile")
    return Truncation(tuple(clusters), profile, int(meta["gmax"]), bits, origin)


def read_truncation(path) -> Truncation:
    with open(path, encoding="utf-8") as fh:
        return parse_truncation(fh.read())


def dump_points_1d(P, comments: list[str] = ()) -> str:
    lines = [f"# {c}" for c in comments]
    lines.extend(to_hex(x) for x in P)
    return "\n".join(lines) + "\n"


def write_points_1d(path, P, comments: list[str] = ()) -> None:
    atomic_write(path, dump_points_1d(P, comments))


def parse_points_1d(text: str) -> list:
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            out.append(from_hex(line))
        except ValueError as exc:
            raise PointFileError(f"line {lineno}: {exc}") from exc
    return sorted(out)


def read_points_1d(path) -> list:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if text.startswith(MAGIC):
        raise PointFileError(f"{path} is a planar truncation file, not a 1-D point set")
    return parse_points_1d(text)
