"""Command-line entry point: ``assouad-forge <verb> [options]``.

Exit status is 0 on success, 1 when ``verify`` finds a failing check and 2 on
any input error.  Every output file is written to a temporary sibling first
and renamed into place.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

from . import __version__
from .construction import build_f, precision_for, schedule_pairs
from .estimator import assouad_estimate, estimate_csv, parse_window, sweep, sweep_csv
from .harness import (DEFAULT_SEED, check_bilipschitz, check_global_covering,
                      check_radius_bracket, check_separation, check_yydecay)
from .metrics import project
from .parallel import worker_count
from .pointfile import (MAGIC, PointFileError, atomic_write, dump_points_1d, dump_truncation,
                        parse_points_1d, parse_truncation)
from .profile import ProfileError, load_profile
from .scalar import DEFAULT_PRECISION, PrecisionError, parse_decimal, pi, set_precision, to_hex
from .scheduler import directions_csv, enumerate_directions, sequence_for_blocks
from .tangents import convergence_study, study_csv, tangent_image

VERBS = ("build", "project", "estimate", "sweep", "tangent", "verify", "directions")

EXIT_OK, EXIT_CHECK_FAILED, EXIT_INPUT = 0, 1, 2

VERIFY_RADIUS_SAMPLES = 1000
VERIFY_COVERING_SAMPLES = 1000
VERIFY_EPSILON = "0.35"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits on its own; raise instead so parse_args can be tested
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _decimal(text: str):
    try:
        return parse_decimal(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"unparsable decimal {text!r}") from None


def _clusters(text: str) -> list[tuple[int, int]]:
    pairs = []
    for part in text.split(","):
        try:
            k, n = part.split(":")
            pair = (int(k), int(n))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad cluster {part!r}; expected k:n") from None
        if pair[0] < 1 or pair[1] < 1:
            raise argparse.ArgumentTypeError(f"cluster indices must be >= 1 in {part!r}")
        pairs.append(pair)
    return pairs


def _thetas(text: str):
    if text == "clusters":
        return text
    return _positive_int(text)


def _window(text: str):
    try:
        return parse_window(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--precision-bits", type=_positive_int, help="mantissa width")
    common.add_argument("--out", help="output file (default: stdout)")

    p = _Parser(prog="assouad-forge",
                description="Finite truncations of planar sets with prescribed projection dimensions.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="verb", metavar="verb", parser_class=_Parser)
    sub.required = True

    b = sub.add_parser("build", parents=[common], help="build a truncation point file")
    b.add_argument("--profile", required=True)
    b.add_argument("--gmax", type=_positive_int)
    b.add_argument("--depth", type=_positive_int, help="largest cluster depth n to keep")
    b.add_argument("--clusters", type=_clusters, help="explicit k:n[,k:n...] list")

    d = sub.add_parser("directions", parents=[common], help="export the direction sequence")
    d.add_argument("--profile", required=True)
    g = d.add_mutually_exclusive_group(required=True)
    g.add_argument("--depth", type=_positive_int, help="number of complete blocks")
    g.add_argument("--count", type=_positive_int, help="number of directions")

    pr = sub.add_parser("project", parents=[common], help="project a truncation onto a direction")
    pr.add_argument("--in", dest="infile", required=True)
    pr.add_argument("--theta", type=_decimal, required=True)

    e = sub.add_parser("estimate", parents=[common], help="windowed Assouad estimate")
    e.add_argument("--in", dest="infile", required=True)
    e.add_argument("--window", type=_window, default=parse_window("dyadic:1..16"))
    e.add_argument("--theta", type=_decimal, help="project a planar input first")

    s = sub.add_parser("sweep", parents=[common], help="estimates over a grid of directions")
    s.add_argument("--in", dest="infile", required=True)
    s.add_argument("--thetas", type=_thetas, required=True,
                   help="grid size N (theta = i*pi/N) or 'clusters'")
    s.add_argument("--window", type=_window, default=parse_window("dyadic:1..16"))
    s.add_argument("--scope", choices=("cluster", "full", "both"), default="both")

    t = sub.add_parser("tangent", parents=[common], help="tangent convergence study or image")
    t.add_argument("--profile")
    t.add_argument("--in", dest="infile")
    t.add_argument("--theta", type=_decimal, required=True)
    t.add_argument("--depth", type=_positive_int, default=6, help="largest k in the study")
    t.add_argument("--gmax", type=_positive_int, default=10 ** 5, help="skip clusters beyond this g")
    t.add_argument("--clusters", type=_clusters, help="single k:n cluster of --in to rescale")

    v = sub.add_parser("verify", parents=[common], help="run the inequality checks on a truncation")
    v.add_argument("--in", dest="infile", required=True)
    v.add_argument("--seed", type=int, default=DEFAULT_SEED)
    v.add_argument("--theta", type=_decimal, help="separation direction (default pi/3, pi/2, pi)")
    return p


@dataclass
class Command:
    verb: str
    options: argparse.Namespace


def parse_args(argv) -> Command:
    argv = list(argv)
    if not argv:
        raise UsageError("assouad-forge: a verb is required (" + ", ".join(VERBS) + ")")
    ns = build_parser().parse_args(argv)
    if ns.verb == "build" and (ns.gmax is None) == (ns.clusters is None):
        raise UsageError("assouad-forge build: exactly one of --gmax or --clusters is required")
    if ns.verb == "tangent":
        if ns.clusters is not None:
            if ns.infile is None or len(ns.clusters) != 1:
                raise UsageError("assouad-forge tangent: --clusters needs --in and one k:n pair")
        elif ns.profile is None:
            raise UsageError("assouad-forge tangent: --profile is required for a study")
    return Command(ns.verb, ns)


def _emit(text: str, out) -> None:
    if out:
        atomic_write(out, text)
    else:
        sys.stdout.write(text)


def _read(path) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load_planar(path):
    return parse_truncation(_read(path))


def _load_any(path):
    text = _read(path)
    if text.startswith(MAGIC):
        return parse_truncation(text)
    return parse_points_1d(text)


def _cmd_build(o) -> int:
    profile = load_profile(o.profile)
    pairs = o.clusters if o.clusters is not None else schedule_pairs(o.gmax, o.depth)
    if not pairs:
        raise ValueError("no clusters satisfy the --gmax/--depth limits")
    seq = enumerate_directions(profile, max(k for k, _ in pairs))
    set_precision(o.precision_bits or precision_for(profile, seq, pairs))
    if o.clusters is not None:
        trunc = build_f(profile, seq, pairs=pairs, workers=worker_count())
    else:
        trunc = build_f(profile, seq, G_max=o.gmax, depth_max=o.depth, workers=worker_count())
    _emit(dump_truncation(trunc), o.out)
    return EXIT_OK


def _cmd_directions(o) -> int:
    profile = load_profile(o.profile)
    if o.precision_bits:
        set_precision(o.precision_bits)
    seq = sequence_for_blocks(profile, o.depth) if o.depth else enumerate_directions(profile, o.count)
    _emit(directions_csv(seq), o.out)
    return EXIT_OK


def _cmd_project(o) -> int:
    trunc = _load_planar(o.infile)
    if o.precision_bits:
        set_precision(o.precision_bits)
    P = project(trunc.points(), o.theta)
    _emit(dump_points_1d(P, [f"projection theta={to_hex(o.theta)}",
                             f"profile_sha256 {trunc.profile.digest()}",
                             f"mantissa_bits {trunc.mantissa_bits}"]), o.out)
    return EXIT_OK


def _cmd_estimate(o) -> int:
    data = _load_any(o.infile)
    if o.precision_bits:
        set_precision(o.precision_bits)
    if not isinstance(data, list):
        P = data.points()
        if o.theta is not None:
            P = project(P, o.theta)
    else:
        P = data
    report = assouad_estimate(P, o.window, workers=worker_count())
    _emit(estimate_csv(report), o.out)
    return EXIT_OK


def _cmd_sweep(o) -> int:
    trunc = _load_planar(o.infile)
    if o.precision_bits:
        set_precision(o.precision_bits)
    if o.thetas == "clusters":
        thetas = sorted({cl.theta for cl in trunc.clusters})
    else:
        thetas = [pi() * i / o.thetas for i in range(1, o.thetas + 1)]
    scopes = ("cluster", "full") if o.scope == "both" else (o.scope,)
    rows = sweep(trunc, thetas, o.window, workers=worker_count(), scopes=scopes)
    _emit(sweep_csv(rows), o.out)
    return EXIT_OK


def _cmd_tangent(o) -> int:
    if o.clusters is not None:
        trunc = _load_planar(o.infile)
        if o.precision_bits:
            set_precision(o.precision_bits)
        k, n = o.clusters[0]
        image = tangent_image(trunc.find(k, n), o.theta)
        _emit(dump_points_1d(image, [f"tangent image k={k} n={n} theta={to_hex(o.theta)}"]), o.out)
        return EXIT_OK
    profile = load_profile(o.profile)
    if o.precision_bits:
        set_precision(o.precision_bits)
    seq = sequence_for_blocks(profile, o.depth)
    rows = convergence_study(profile, seq, o.theta, range(1, o.depth + 1), o.gmax)
    _emit(study_csv(rows), o.out)
    return EXIT_OK


def verify_reports(trunc, seed: int = DEFAULT_SEED, thetas=None) -> list:
    """Every harness check on a truncation, in a fixed order."""
    reports = []
    for cl in trunc.clusters:
        r = check_yydecay(cl.c, cl.n)
        r.constants.update({"k": cl.k, "g": cl.g})
        reports.append(r)
    for cl in trunc.clusters:
        if cl.c > 0:
            reports.append(check_bilipschitz(cl))
    if len(trunc.clusters) >= 2:
        for theta in thetas or (pi() / 3, pi() / 2, pi()):
            reports.append(check_separation(trunc, theta).report())
    reports.append(check_radius_bracket(trunc, VERIFY_RADIUS_SAMPLES, seed))
    reports.append(check_global_covering(trunc, VERIFY_EPSILON, VERIFY_COVERING_SAMPLES, seed,
                                         workers=worker_count()).report())
    return reports


def _cmd_verify(o) -> int:
    trunc = _load_planar(o.infile)
    if o.precision_bits:
        set_precision(o.precision_bits)
    reports = verify_reports(trunc, o.seed, [o.theta] if o.theta is not None else None)
    text = "".join(json.dumps(r.as_json(), sort_keys=True) + "\n" for r in reports)
    _emit(text, o.out)
    failed = [r.check for r in reports if not r.passed]
    if failed:
        print(f"verify: failing checks: {', '.join(sorted(set(failed)))}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    return EXIT_OK


HANDLERS = {
    "build": _cmd_build,
    "directions": _cmd_directions,
    "project": _cmd_project,
    "estimate": _cmd_estimate,
    "sweep": _cmd_sweep,
    "tangent": _cmd_tangent,
    "verify": _cmd_verify,
}


def execute(cmd: Command) -> int:
    try:
        return HANDLERS[cmd.verb](cmd.options)
    except (OSError, PointFileError, ProfileError, PrecisionError, ValueError, KeyError,
            IndexError) as exc:
        print(f"assouad-forge {cmd.verb}: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    # decimal flags are parsed during argument parsing, so fix the width first
    set_precision(DEFAULT_PRECISION)
    try:
        cmd = parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INPUT
    return execute(cmd)


if __name__ == "__main__":
    sys.exit(main())
