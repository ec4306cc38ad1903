"""Upper semi-continuous dimension profiles on G(1,2).

G(1,2) is identified with angles in (0, pi]; the horizontal axis is theta = pi
and the metric is arc length on a circle of circumference pi.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any

import gmpy2
from gmpy2 import mpfr

from .scalar import Scalar, parse_decimal, pi, precision, scalar, working_precision


class ProfileError(ValueError):
    pass


@dataclass(frozen=True)
class Direction:
    theta: Scalar

    def __post_init__(self):
        theta = self.theta if isinstance(self.theta, Scalar) else scalar(self.theta)
        if not (0 < theta <= pi()):
            raise ProfileError(f"direction angle must lie in (0, pi], got {theta}")
        object.__setattr__(self, "theta", theta)

    def distance(self, other: "Direction") -> Scalar:
        return angle_distance(self.theta, other.theta)


def angle_distance(a: Scalar, b: Scalar) -> Scalar:
    """Arc-length distance on G(1,2): min(|a-b|, pi-|a-b|)."""
    d = abs(a - b)
    w = pi() - d
    return d if d <= w else w


def wrap_angle(theta: Scalar) -> Scalar:
    """Map any real angle onto its representative in (0, pi]."""
    p = pi()
    t = gmpy2.fmod(theta, p)
    if t <= 0:
        t += p
    return t


@dataclass(frozen=True)
class Arc:
    lo: Scalar
    hi: Scalar
    value: Scalar

    def contains(self, theta: Scalar) -> bool:
        return self.lo <= theta <= self.hi


@dataclass(frozen=True)
class Sample:
    theta: Scalar
    value: Scalar


@dataclass(frozen=True)
class Profile:
    """Immutable profile; ``evaluate`` is pure."""

    kind: str
    default: Scalar = field(default_factory=lambda: mpfr(0))
    value: Scalar | None = None
    arcs: tuple[Arc, ...] = ()
    samples: tuple[Sample, ...] = ()
    radius: Scalar | None = None
    source: str = ""

    def __call__(self, theta) -> Scalar:
        return evaluate(self, theta)

    def breakpoints(self) -> list[Scalar]:
        """Angles where the profile may jump (used by the usc audit)."""
        out: list[Scalar] = []
        for arc in self.arcs:
            out += [arc.lo, arc.hi]
        for s in self.samples:
            out += [wrap_angle(s.theta - self.radius), wrap_angle(s.theta + self.radius)]
        return out

    def digest(self) -> str:
        return hashlib.sha256(self.source.encode()).hexdigest()


def evaluate(profile: Profile, theta) -> Scalar:
    """phi(theta).  Staircase and sampled kinds take the max over every
    closed arc/ball containing theta and fall back to the default."""
    if isinstance(theta, Direction):
        theta = theta.theta
    if profile.kind == "constant":
        return profile.value
    if profile.kind == "linear":
        return theta / pi()
    if profile.kind == "staircase":
        hits = [a.value for a in profile.arcs if a.contains(theta)]
        return max(hits) if hits else profile.default
    if profile.kind == "sampled":
        hits = [s.value for s in profile.samples
                if angle_distance(s.theta, theta) <= profile.radius]
        return max(hits) if hits else profile.default
    raise ProfileError(f"unknown profile kind {profile.kind!r}")


def contraction_of(s) -> Scalar:
    """Contraction ratio c in [0, 1/2] with log 2 / log(1/c) = s (c = 0 at s = 0)."""
    s = s if isinstance(s, Scalar) else scalar(s)
    if s < 0 or s > 1:
        raise ProfileError(f"dimension value must lie in [0, 1], got {s}")
    if s == 0:
        return mpfr(0)
    # extra guard bits, then one final rounding at the working precision
    bits = precision()
    with working_precision(bits + 64):
        c = gmpy2.exp2(-1 / s)
    return mpfr(c)


def dimension_of(c) -> Scalar:
    """Inverse of :func:`contraction_of`."""
    c = c if isinstance(c, Scalar) else scalar(c)
    if c == 0:
        return mpfr(0)
    # keep the guard bits: contraction_of rounds only once, at the end
    with working_precision(precision() + 64):
        return gmpy2.log(2) / gmpy2.log(1 / c)


def _unit(text: Any, what: str) -> Scalar:
    if not isinstance(text, str):
        raise ProfileError(f"{what} must be a decimal string, got {text!r}")
    try:
        v = parse_decimal(text)
    except ValueError as exc:
        raise ProfileError(f"{what}: {exc}") from exc
    if not (0 <= v <= 1):
        raise ProfileError(f"{what} must lie in [0, 1], got {text}")
    return v


def _angle(text: Any, what: str) -> Scalar:
    if not isinstance(text, str):
        raise ProfileError(f"{what} must be a decimal string, got {text!r}")
    try:
        v = parse_decimal(text)
    except ValueError as exc:
        raise ProfileError(f"{what}: {exc}") from exc
    if not (0 < v <= pi()):
        raise ProfileError(f"{what} must lie in (0, pi], got {text}")
    return v


def make_profile(spec: dict) -> Profile:
    """Build a profile from its JSON form.

    >>> make_profile({"type": "linear"}).kind
    'linear'
    """
    if not isinstance(spec, dict) or "type" not in spec:
        raise ProfileError("profile spec must be an object with a 'type' key")
    source = json.dumps(spec, sort_keys=True, separators=(",", ":"))
    kind = spec["type"]
    if kind == "constant":
        return Profile("constant", value=_unit(spec.get("value"), "value"), source=source)
    if kind == "linear":
        return Profile("linear", source=source)
    default = _unit(spec.get("default", "0"), "default")
    if kind == "staircase":
        arcs = []
        for i, piece in enumerate(spec.get("pieces", [])):
            lo = _angle(piece.get("lo"), f"pieces[{i}].lo")
            hi = _angle(piece.get("hi"), f"pieces[{i}].hi")
            if lo > hi:
                raise ProfileError(f"pieces[{i}]: lo > hi")
            arcs.append(Arc(lo, hi, _unit(piece.get("value"), f"pieces[{i}].value")))
        return Profile("staircase", default=default, arcs=tuple(arcs), source=source)
    if kind == "sampled":
        radius_text = spec.get("radius", "0")
        try:
            radius = parse_decimal(radius_text)
        except (ValueError, AttributeError) as exc:
            raise ProfileError(f"radius: {exc}") from exc
        if radius < 0:
            raise ProfileError("radius must be non-negative")
        samples = tuple(
            Sample(_angle(p.get("theta"), f"points[{i}].theta"),
                   _unit(p.get("value"), f"points[{i}].value"))
            for i, p in enumerate(spec.get("points", []))
        )
        return Profile("sampled", default=default, samples=samples, radius=radius, source=source)
    raise ProfileError(f"unknown profile type {kind!r}")


def load_profile(path) -> Profile:
    with open(path, encoding="utf-8") as fh:
        try:
            spec = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ProfileError(f"{path}: invalid JSON ({exc})") from exc
    return make_profile(spec)


def constant(value: str) -> Profile:
    return make_profile({"type": "constant", "value": value})


def linear() -> Profile:
    return make_profile({"type": "linear"})


def staircase(pieces: list[tuple[str, str, str]], default: str = "0") -> Profile:
    return make_profile({
        "type": "staircase",
        "default": default,
        "pieces": [{"lo": lo, "hi": hi, "value": v} for lo, hi, v in pieces],
    })


def usc_audit(profile: Profile, grid_step, tol="0") -> list[Scalar]:
    """Grid check of upper semi-continuity.

    The grid is the uniform grid of the given step on (0, pi] plus every
    breakpoint.  At each grid point theta the profile is compared with its
    values at theta +- eta for eta = step 2^-10, 2^-40, 2^-80.  theta is a
    violation when the excess at the smallest offset is above ``tol`` and has
    not decayed below half the excess at the largest offset, i.e. the values
    nearby tend to something larger than phi(theta).
    """
    step = grid_step if isinstance(grid_step, Scalar) else scalar(grid_step)
    tol = tol if isinstance(tol, Scalar) else scalar(tol)
    if step <= 0:
        raise ProfileError("grid_step must be positive")
    if tol < 0:
        raise ProfileError("tol must be non-negative")
    p = pi()
    pts = set()
    n = int(gmpy2.ceil(p / step))
    for i in range(1, n + 1):
        t = step * i
        pts.add(t if t <= p else p)
    pts.update(wrap_angle(b) for b in profile.breakpoints())
    offsets = [step * gmpy2.exp2(-e) for e in (10, 40, 80)]
    bad = []
    for t in sorted(pts):
        v = evaluate(profile, t)
        excess = [max(evaluate(profile, wrap_angle(t - eta)), evaluate(profile, wrap_angle(t + eta))) - v
                  for eta in offsets]
        if excess[-1] > tol and excess[-1] * 2 >= excess[0]:
            bad.append(t)
    return bad
