"""Discrete 1+1-dimensional Minkowski geometry.

Events are integer points ``(t, x)`` of a finite strip of sites ``0..L-1``
(lattice spacing and ``c`` set to one).  A :class:`Cut` is a staircase
hypersurface given by a 1-Lipschitz time profile over the sites; the
"past" of a cut is the set of events with ``t <= T(x)``.

The brick-wall circuit in :mod:`grwflash.evolution` pairs wires ``(x, x+1)``
at time ``t`` when ``(x + t) % 2 == parity``.  Only cuts that never split
one of those two-site gates carry an exactly interaction-local evolution, so
this module also provides the check and the upward snap onto such cuts.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Collection, Iterable, NamedTuple, Union

import numpy as np


class Event(NamedTuple):
    t: int
    x: int


class Causal(enum.Enum):
    STRICT_FUTURE = "strict_future"
    LIGHTLIKE_FUTURE = "lightlike_future"
    SPACELIKE = "spacelike"
    LIGHTLIKE_PAST = "lightlike_past"
    STRICT_PAST = "strict_past"
    EQUAL = "equal"


FUTURE_RELATIONS = frozenset({Causal.STRICT_FUTURE, Causal.LIGHTLIKE_FUTURE, Causal.EQUAL})


@dataclass(frozen=True)
class Strip:
    """Finite truncation of the lattice: ``L`` sites, times ``0..T_max``.

    ``parity`` fixes the brick pattern of the gate lattice (see module doc).
    """

    L: int
    T_max: int
    parity: int = 0

    def __post_init__(self):
        if self.L < 2:
            raise ValueError(f"strip needs at least 2 sites, got L={self.L}")
        if self.T_max < 1:
            raise ValueError(f"T_max must be >= 1, got {self.T_max}")
        if self.parity not in (0, 1):
            raise ValueError("parity must be 0 or 1")

    @property
    def sites(self) -> range:
        return range(self.L)

    def contains(self, e: Event) -> bool:
        return 0 <= e.t <= self.T_max and 0 <= e.x < self.L

    def events(self) -> Iterable[Event]:
        for t in range(self.T_max + 1):
            for x in range(self.L):
                yield Event(t, x)


@dataclass(frozen=True)
class Cut:
    """Time profile ``T(x)`` of a staircase hypersurface.

    Profiles are not clipped to the strip horizon: cells are built from the
    exact lattice hyperboloids and only the quantum layer clamps to ``T_max``.
    """

    times: tuple

    def __post_init__(self):
        times = tuple(int(t) for t in self.times)
        object.__setattr__(self, "times", times)
        if len(times) < 1:
            raise ValueError("empty cut")
        for a, b in zip(times, times[1:]):
            if abs(a - b) > 1:
                raise ValueError(f"cut is not 1-Lipschitz: {times}")

    @classmethod
    def flat(cls, L: int, t: int) -> "Cut":
        return cls((t,) * L)

    def __len__(self) -> int:
        return len(self.times)

    def __getitem__(self, x: int) -> int:
        return self.times[x]

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.times, dtype=np.int64)

    def vertex(self, x: int) -> Event:
        return Event(self.times[x], x)

    def vertices(self) -> list[Event]:
        return [Event(t, x) for x, t in enumerate(self.times)]

    def is_below(self, e: Event) -> bool:
        """True if ``e`` lies at or below the cut (the cut's own vertices count)."""
        return e.t <= self.times[e.x]

    def clamped(self, lo: int, hi: int) -> "Cut":
        return Cut(tuple(min(max(t, lo), hi) for t in self.times))

    def overlap(self, other: "Cut") -> frozenset:
        return frozenset(x for x, (a, b) in enumerate(zip(self.times, other.times)) if a == b)


def causal_relation(a: Event, b: Event) -> Causal:
    """Relation of ``b`` as seen from ``a``."""
    dt = b.t - a.t
    dx = abs(b.x - a.x)
    if dt == 0 and dx == 0:
        return Causal.EQUAL
    if dx < abs(dt):
        return Causal.STRICT_FUTURE if dt > 0 else Causal.STRICT_PAST
    if dx == abs(dt):
        return Causal.LIGHTLIKE_FUTURE if dt > 0 else Causal.LIGHTLIKE_PAST
    return Causal.SPACELIKE


def in_future(a: Event, b: Event) -> bool:
    """Causal (closed) future: ``b`` is in the future of ``a``."""
    return abs(b.x - a.x) <= b.t - a.t


def proper_time(a: Event, b: Event) -> float:
    if not in_future(a, b):
        raise ValueError(f"{b} is not in the causal future of {a}; proper time undefined")
    dt = b.t - a.t
    dx = b.x - a.x
    return math.sqrt(dt * dt - dx * dx)


def _hyperboloid_offset(level: float, dx: int) -> int:
    # smallest integer u > dx with u^2 - dx^2 >= level^2
    target = level * level + dx * dx
    u = max(dx + 1, math.ceil(math.sqrt(target)))
    while u - 1 > dx and (u - 1) ** 2 >= target:
        u -= 1
    while u * u < target:
        u += 1
    return u


def hyperboloid_cut(seed: Event, level: float, strip: Strip, clamp: bool = True) -> Cut:
    """Lattice hyperboloid of proper time ``level`` above ``seed``.

    ``T(x)`` is the earliest event at site ``x`` in the strict future of the
    seed with proper time at least ``level``; with ``clamp`` the profile is
    cut off at the horizon ``T_max``.
    """
    if level <= 0:
        raise ValueError("level must be positive")
    times = []
    for x in strip.sites:
        t = seed.t + _hyperboloid_offset(level, abs(x - seed.x))
        times.append(min(t, strip.T_max) if clamp else t)
    return Cut(tuple(times))


EventSet = Union[Callable[[Event], bool], Collection[Event]]


def _as_predicate(S: EventSet) -> Callable[[Event], bool]:
    if callable(S):
        return S
    members = frozenset(S)
    return members.__contains__


def is_past_complete(S: EventSet, strip: Strip) -> bool:
    inside = _as_predicate(S)
    for e in strip.events():
        if not inside(e) or e.t == 0:
            continue
        for x in (e.x - 1, e.x, e.x + 1):
            if 0 <= x < strip.L and not inside(Event(e.t - 1, x)):
                return False
    return True


def boundary_of_past_complete(S: EventSet, strip: Strip) -> Cut:
    """Return the cut whose past (within the strip) is exactly ``S``."""
    inside = _as_predicate(S)
    members = [e for e in strip.events() if inside(e)]
    if not members:
        raise ValueError("empty event set has no boundary")
    if len(members) == strip.L * (strip.T_max + 1):
        raise ValueError("the whole strip has no boundary")
    if not is_past_complete(inside, strip):
        raise ValueError("event set is not past complete")
    times = []
    for x in strip.sites:
        column = [e.t for e in members if e.x == x]
        if not column:
            raise ValueError(f"site {x} has no event in the set; boundary is not a cut of the strip")
        times.append(max(column))
    return Cut(tuple(times))


def cut_meet(a: Cut, b: Cut) -> Cut:
    return Cut(tuple(min(u, v) for u, v in zip(a.times, b.times)))


def cut_join(a: Cut, b: Cut) -> Cut:
    return Cut(tuple(max(u, v) for u, v in zip(a.times, b.times)))


# -- gate lattice -------------------------------------------------------------

def gate_partner(x: int, t: int, L: int, parity: int) -> int | None:
    """Site sharing the time-``t`` gate with site ``x`` (None at an idle wall)."""
    if (x + t) % 2 == parity:
        return x + 1 if x + 1 < L else None
    return x - 1 if x >= 1 else None


def is_gate_compatible(cut: Cut, parity: int) -> bool:
    """True if no two-site gate has one wire below the cut and one above."""
    T = cut.times
    for x in range(len(T) - 1):
        if T[x] != T[x + 1] and (x + min(T[x], T[x + 1])) % 2 == parity:
            return False
    return True


def snap_to_gates(cut: Cut, parity: int) -> Cut:
    """Smallest gate-compatible cut lying at or above ``cut``.

    Each site moves up by at most one step.  The region below the result is
    the past closure of every gate that has at least one output wire at or
    below the original cut.
    """
    T = cut.times
    L = len(T)
    out = list(T)
    for x in range(L):
        if x + 1 < L:
            s = T[x + 1] - 1 if (x + T[x + 1] - 1) % 2 == parity else T[x + 1] - 2
            out[x] = max(out[x], s + 1)
        if x >= 1:
            s = T[x - 1] - 1 if (x - 1 + T[x - 1] - 1) % 2 == parity else T[x - 1] - 2
            out[x] = max(out[x], s + 1)
    return Cut(tuple(out))


def random_cut(strip: Strip, rng: np.random.Generator, lo: int = 0, hi: int | None = None,
               compatible: bool = True) -> Cut:
    """Random 1-Lipschitz cut with times in ``[lo, hi]`` (gate-compatible by default)."""
    hi = strip.T_max if hi is None else hi
    t = int(rng.integers(lo, hi + 1))
    times = []
    for _ in range(strip.L):
        times.append(t)
        t = min(max(t + int(rng.integers(-1, 2)), lo), hi)
    cut = Cut(tuple(times))
    if compatible:
        cut = snap_to_gates(cut, strip.parity)
        cut = cut_meet(cut, Cut.flat(strip.L, max(hi, lo)))
        if not is_gate_compatible(cut, strip.parity):  # pragma: no cover - meet keeps compatibility
            raise AssertionError("snapped cut is not gate compatible")
    return cut
