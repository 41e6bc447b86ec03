"""Cell complex generated by a family of flash hyperboloids.

Abstract 4-cells are integer vectors ``k`` with ``0 <= k_i <= n_i``; the
geometric 4-cell ``k`` is the set of events lying above exactly ``k_j`` of
particle ``j``'s cuts for every ``j``.  A 3-cell ``(i, k)`` is the piece of
cut ``H_{i,k_i}`` separating 4-cell ``k - e_i`` from 4-cell ``k``.

Particle labels ``i`` and flash indices ``k`` are 1-based throughout, as are
the keys of :attr:`CellComplex.hyperboloids`.

Ties between cuts of different particles are broken by the total order
``(time, particle)``: where ``H_ik`` and ``H_jl`` pass through the same vertex,
the cut of the lower particle label is treated as lying below.  This makes the
3-cells of every cut an exact partition of its vertex set *and* places each
3-cell on the boundary surface of the predecessor-complete set it closes.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .lattice import Cut, Event, Strip, cut_join, cut_meet

Cell4 = tuple  # k = (k_1, ..., k_N)
Cell3 = tuple  # (i, k) with k_i >= 1

ENUMERATION_GUARD = 12


def count_cells(n: Sequence[int]) -> int:
    if any(ni < 0 for ni in n):
        raise ValueError("flash counts must be non-negative")
    return math.prod(ni + 1 for ni in n)


def all_cells(n: Sequence[int]) -> list[Cell4]:
    """Every abstract 4-cell, in lexicographic order."""
    return [tuple(k) for k in itertools.product(*(range(ni + 1) for ni in n))]


def all_3cells(n: Sequence[int]) -> list[Cell3]:
    return [(i + 1, k) for k in all_cells(n) for i in range(len(n)) if k[i] >= 1]


def predecessors(k: Cell4) -> list[Cell4]:
    return [k[:j] + (k[j] - 1,) + k[j + 1:] for j in range(len(k)) if k[j] > 0]


def is_predecessor_complete(V: Iterable[Cell4]) -> bool:
    members = set(map(tuple, V))
    return all(p in members for k in members for p in predecessors(k))


@dataclass(frozen=True)
class CellComplex:
    """Hyperboloid cuts ``H_ik`` for ``i in 1..N``, ``k in 1..n_i``.

    The cuts of one particle must be strictly nested (each lies strictly above
    the previous one at every site), as happens for hyperboloids based at
    flashes on the previous cut.
    """

    strip: Strip
    seeds: tuple
    hyperboloids: dict

    def __post_init__(self):
        object.__setattr__(self, "seeds", tuple(Event(*s) for s in self.seeds))
        N = len(self.seeds)
        n = []
        for i in range(1, N + 1):
            ks = sorted(k for (j, k) in self.hyperboloids if j == i)
            if ks != list(range(1, len(ks) + 1)):
                raise ValueError(f"flash indices of particle {i} must be 1..n_i, got {ks}")
            n.append(len(ks))
            for k in ks:
                if len(self.hyperboloids[(i, k)]) != self.strip.L:
                    raise ValueError(f"cut H_{i}{k} has the wrong number of sites")
            for k in ks[1:]:
                lo, hi = self.hyperboloids[(i, k - 1)], self.hyperboloids[(i, k)]
                if any(b <= a for a, b in zip(lo.times, hi.times)):
                    raise ValueError(f"cuts of particle {i} are not strictly nested at k={k}")
        if len(self.hyperboloids) != sum(n):
            raise ValueError("hyperboloid keys refer to unknown particles")
        object.__setattr__(self, "n", tuple(n))

    @property
    def N(self) -> int:
        return len(self.seeds)

    def cut(self, i: int, k: int) -> Cut:
        return self.hyperboloids[(i, k)]

    def top_time(self) -> int:
        """Latest vertex time over all cuts (0 if there are none)."""
        return max((max(c.times) for c in self.hyperboloids.values()), default=0)

    # -- location -----------------------------------------------------------

    def locate_4cell(self, e: Event) -> Cell4:
        return tuple(
            sum(1 for l in range(1, self.n[j] + 1) if self.hyperboloids[(j + 1, l)][e.x] <= e.t)
            for j in range(self.N)
        )

    def locate_3cell(self, i: int, k: int, v: Event) -> Cell3:
        T = self.hyperboloids[(i, k)]
        if T[v.x] != v.t:
            raise ValueError(f"{v} is not a vertex of H_{i}{k} (cut time there is {T[v.x]})")
        kk = []
        for j in range(1, self.N + 1):
            if j == i:
                kk.append(k)
                continue
            count = 0
            for l in range(1, self.n[j - 1] + 1):
                s = self.hyperboloids[(j, l)][v.x]
                if s < v.t or (s == v.t and j < i):
                    count += 1
            kk.append(count)
        return (i, tuple(kk))

    def three_cells_of(self, i: int, k: int) -> dict:
        """Partition of the vertices of ``H_ik`` into geometric 3-cells.

        Returns a map from abstract 3-cell ``(i, k_vec)`` to the frozenset of
        sites whose vertex on ``H_ik`` belongs to it.
        """
        T = self.hyperboloids[(i, k)]
        parts: dict = {}
        for x in self.strip.sites:
            key = self.locate_3cell(i, k, Event(T[x], x))
            parts.setdefault(key, set()).add(x)
        return {key: frozenset(v) for key, v in parts.items()}

    def region(self, V: Iterable[Cell4], t_top: int | None = None) -> set:
        """Events ``(t, x)`` with ``0 <= t <= t_top`` lying in a 4-cell of ``V``."""
        members = set(map(tuple, V))
        t_top = self.top_time() + 1 if t_top is None else t_top
        return {
            Event(t, x)
            for t in range(t_top + 1)
            for x in self.strip.sites
            if self.locate_4cell(Event(t, x)) in members
        }

    def closed_region(self, V: Iterable[Cell4], t_top: int | None = None) -> set:
        """Union of the closed 4-cells of ``V``: the open cells plus their upper faces.

        For ``V`` predecessor complete this is exactly the past of
        :func:`surface_of` (vertices on the surface included).
        """
        members = set(map(tuple, V))
        t_top = self.top_time() + 1 if t_top is None else t_top
        out = set()
        for t in range(t_top + 1):
            for x in self.strip.sites:
                below = tuple(
                    sum(1 for l in range(1, self.n[j] + 1) if self.hyperboloids[(j + 1, l)][x] < t)
                    for j in range(self.N)
                )
                if below in members:
                    out.add(Event(t, x))
        return out

    def to_dict(self) -> dict:
        return {
            "L": self.strip.L,
            "T_max": self.strip.T_max,
            "seeds": [list(s) for s in self.seeds],
            "n": list(self.n),
            "hyperboloids": {f"{i},{k}": list(c.times) for (i, k), c in sorted(self.hyperboloids.items())},
        }


def locate_4cell(e: Event, complex: CellComplex) -> Cell4:
    return complex.locate_4cell(e)


def locate_3cell(i: int, k: int, v: Event, complex: CellComplex) -> Cell3:
    return complex.locate_3cell(i, k, v)


def surface_of(V: Iterable[Cell4], complex: CellComplex) -> Cut:
    """Boundary surface of the union of the 4-cells in ``V``.

    For a predecessor-complete ``V`` the union is the join, over members
    ``k``, of the regions below every ``H_{j, k_j + 1}``; the empty set maps
    to the initial surface ``T == 0``.
    """
    members = set(map(tuple, V))
    if not is_predecessor_complete(members):
        raise ValueError("V is not predecessor complete")
    n = complex.n
    if tuple(n) in members:
        raise ValueError("V contains the futuremost cell; its region has no upper boundary")
    if not members:
        return Cut.flat(complex.strip.L, 0)
    surface = None
    for k in members:
        bounds = [complex.hyperboloids[(j + 1, k[j] + 1)] for j in range(complex.N) if k[j] < n[j]]
        piece = bounds[0]
        for b in bounds[1:]:
            piece = cut_meet(piece, b)
        surface = piece if surface is None else cut_join(surface, piece)
    return surface


# -- admissible sequences ----------------------------------------------------

def is_admissible(order: Sequence[Cell4], n: Sequence[int]) -> bool:
    """Each prefix predecessor complete and every abstract 4-cell used once."""
    order = [tuple(k) for k in order]
    if sorted(order) != all_cells(n):
        return False
    seen: set = set()
    for k in order:
        if any(p not in seen for p in predecessors(k)):
            return False
        seen.add(k)
    return True


def canonical_sequence(n: Sequence[int]) -> list[Cell4]:
    """Cells sorted by ``sum(k)`` (ties lexicographically): always admissible."""
    return sorted(all_cells(n), key=lambda k: (sum(k), k))


def enumerate_admissible_sequences(n: Sequence[int], guard: int = ENUMERATION_GUARD) -> list[list[Cell4]]:
    """All linear extensions of the product-of-chains order on abstract 4-cells."""
    total = count_cells(n)
    if total > guard:
        raise ValueError(
            f"{total} cells exceed the enumeration guard of {guard}; use canonical_sequence() or smaller n"
        )
    cells = all_cells(n)
    out: list[list[Cell4]] = []
    prefix: list[Cell4] = []
    placed: set = set()

    def extend():
        if len(prefix) == total:
            out.append(list(prefix))
            return
        for k in cells:
            if k not in placed and all(p in placed for p in predecessors(k)):
                placed.add(k)
                prefix.append(k)
                extend()
                prefix.pop()
                placed.discard(k)

    extend()
    return out


def crossing_steps(order: Sequence[Cell4]) -> dict:
    """Map each abstract 3-cell ``(i, k)`` to the step at which ``order`` crosses it.

    Entering 4-cell ``k`` crosses every 3-cell ``(i, k)`` of its past boundary.
    """
    steps = {}
    for step, k in enumerate(order):
        for i in range(len(k)):
            if k[i] >= 1:
                steps[(i + 1, tuple(k))] = step
    return steps


def deformation_path(a: Sequence[Cell4], b: Sequence[Cell4]) -> list[list[Cell4]]:
    """Chain of admissible sequences from ``a`` to ``b`` via adjacent swaps.

    Works front to back: the first position where the current sequence
    disagrees with ``b`` is fixed by bubbling ``b``'s cell leftwards.  Every
    cell it passes is incomparable with it (all its predecessors already sit in
    the agreed prefix), so each intermediate sequence stays admissible.
    """
    cur = [tuple(k) for k in a]
    target = [tuple(k) for k in b]
    if sorted(cur) != sorted(target):
        raise ValueError("sequences are over different cell sets")
    path = [list(cur)]
    for pos, k in enumerate(target):
        j = cur.index(k)
        while j > pos:
            cur[j - 1], cur[j] = cur[j], cur[j - 1]
            j -= 1
            path.append(list(cur))
    return path
