"""Interaction-local hypersurface evolution as a brick-wall gate circuit.

At each time step ``t`` (``0 <= t < T_max``) the strip is tiled by two-site
gates on ``{x, x+1}`` with ``(x + t) % 2 == parity``; a wall site left
unpaired gets a one-site gate.  A gate maps the wires at time ``t`` to time
``t + 1`` and acts, for every particle, as a split-step coined walk:

* coin ``C = exp(-i theta sigma_x)`` on the spin of each particle in the gate,
* a spin-conditioned shift exchanging the spin-0 (right-moving) component
  between the two sites; at a wall the shift reflects with a spin flip,
* the phase ``exp(i gamma)`` if two or more particles sit in the gate,
* ``exp(i phi(t+1, x))`` for each particle at output site ``x``.

The gates below a gate-compatible cut form a downset of the circuit, and
``U^{S'}_S`` applies the gates of ``S'`` missing from ``S`` and undoes those of
``S`` missing from ``S'``.  The two groups act on disjoint wires, so the
result does not depend on the route (meet or join) taken.  Above ``T_max`` the
evolution is the identity; cuts are clamped to the horizon first.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Mapping, NamedTuple, Optional, Union

import numpy as np

from . import kernels
from .lattice import Cut, Event, Strip, is_gate_compatible
from .quantum import CutSpace, StateVec, operator_norm, slot_diagonal

Potential = Union[None, Callable[[Event], float], Mapping]


class Gate(NamedTuple):
    t: int
    x: int
    width: int  # 1 (wall) or 2

    @property
    def wires(self) -> range:
        return range(self.x, self.x + self.width)


@dataclass(frozen=True)
class GateParams:
    theta: float = 0.0
    gamma: float = 0.0
    potential: Potential = None

    def __post_init__(self):
        if not (np.isfinite(self.theta) and np.isfinite(self.gamma)):
            raise ValueError("gate parameters must be finite")

    def phi(self, e: Event) -> float:
        if self.potential is None:
            return 0.0
        if callable(self.potential):
            return float(self.potential(e))
        return float(self.potential.get(tuple(e), 0.0))


def coin(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)


def pair_block(theta: float) -> np.ndarray:
    """Single-particle 4x4 gate on ``(x,0),(x,1),(x+1,0),(x+1,1)``."""
    shift = np.eye(4, dtype=np.complex128)[[2, 1, 0, 3]]
    return shift @ np.kron(np.eye(2), coin(theta))


def wall_block(theta: float) -> np.ndarray:
    flip = np.array([[0, 1], [1, 0]], dtype=np.complex128)
    return flip @ coin(theta)


@dataclass
class Circuit:
    strip: Strip
    params: GateParams
    N: int
    d: int = 2
    _phases: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        if self.d != 2:
            raise ValueError("the coined-walk gates need a two-state spin (d=2)")
        if self.N < 1:
            raise ValueError("need at least one particle")

    # -- layout -------------------------------------------------------------

    @cached_property
    def gates(self) -> list[Gate]:
        L, par = self.strip.L, self.strip.parity
        out = []
        for t in range(self.strip.T_max):
            x = 0
            while x < L:
                if (x + t) % 2 == par and x + 1 < L:
                    out.append(Gate(t, x, 2))
                    x += 2
                else:
                    out.append(Gate(t, x, 1))
                    x += 1
        return out

    @cached_property
    def _blocks(self) -> dict:
        b2 = pair_block(self.params.theta)
        b1 = wall_block(self.params.theta)
        return {2: (b2, b2.conj().T), 1: (b1, b1.conj().T)}

    def space(self, cut: Cut) -> CutSpace:
        return CutSpace(cut, self.N, self.d)

    def _phase(self, g: Gate) -> Optional[np.ndarray]:
        if g in self._phases:
            return self._phases[g]
        space = CutSpace(Cut.flat(self.strip.L, 0), self.N, self.d)
        total = np.zeros(space.dim)
        inside = np.zeros(space.dim, dtype=np.int64)
        for slot in range(1, self.N + 1):
            sites = space.site_of(slot)
            in_gate = (sites >= g.x) & (sites < g.x + g.width)
            inside += in_gate
            phis = np.array([self.params.phi(Event(g.t + 1, x)) for x in range(self.strip.L)])
            total += np.where(in_gate, phis[sites], 0.0)
        total += np.where(inside >= 2, self.params.gamma, 0.0)
        phase = None if not np.any(total) else np.exp(1j * total)
        self._phases[g] = phase
        return phase

    def gate_matrix_local(self, g: Gate) -> np.ndarray:
        return self._blocks[g.width][0]

    # -- cut handling ---------------------------------------------------------

    def effective(self, cut: Cut) -> Cut:
        if len(cut) != self.strip.L:
            raise ValueError(f"cut has {len(cut)} sites, strip has {self.strip.L}")
        c = cut.clamped(0, self.strip.T_max)
        if not is_gate_compatible(c, self.strip.parity):
            raise ValueError(
                f"cut {cut.times} splits a two-site gate; evolution is only defined between gate-compatible cuts"
            )
        return c

    def gates_below(self, cut: Cut) -> frozenset:
        c = self.effective(cut).times
        return frozenset(g for g in self.gates if all(g.t + 1 <= c[w] for w in g.wires))

    # -- application ----------------------------------------------------------

    def apply_gates(self, arr: np.ndarray, gates: Iterable[Gate], inverse: bool = False) -> np.ndarray:
        """Apply gates in the given order (their inverses if ``inverse``) to columns of ``arr``."""
        a = np.array(arr, dtype=np.complex128, order="C", copy=True)
        vec = a.ndim == 1
        a2 = a.reshape(-1, 1) if vec else a
        gates = list(gates)
        if gates:
            G = len(gates)
            starts = np.array([g.x * self.d for g in gates], dtype=np.int64)
            sizes = np.array([g.width * self.d for g in gates], dtype=np.int64)
            blocks = np.zeros((G, 4, 4), dtype=np.complex128)
            phase_idx = np.full(G, -1, dtype=np.int64)
            table = []
            for j, g in enumerate(gates):
                b = self._blocks[g.width][1 if inverse else 0]
                blocks[j, :b.shape[0], :b.shape[0]] = b
                ph = self._phase(g)
                if ph is not None:
                    phase_idx[j] = len(table)
                    table.append(ph.conj() if inverse else ph)
            phases = np.array(table, dtype=np.complex128) if table else np.ones((1, a2.shape[0]), np.complex128)
            kernels.apply_gate_sequence(a2, self.N, self.strip.L * self.d, starts, sizes, blocks,
                                        phase_idx, phases, inverse)
        return a2.reshape(-1) if vec else a2

    def evolve_array(self, arr: np.ndarray, source: Cut, target: Cut) -> np.ndarray:
        """``U^{target}_{source}`` applied to a vector or to the columns of a matrix."""
        below_s = self.gates_below(source)
        below_t = self.gates_below(target)
        undo = sorted(below_s - below_t, key=lambda g: (-g.t, g.x))
        do = sorted(below_t - below_s, key=lambda g: (g.t, g.x))
        out = self.apply_gates(arr, undo, inverse=True)
        return self.apply_gates(out, do)

    def evolve(self, psi: StateVec, target: Cut) -> StateVec:
        return StateVec(self.evolve_array(psi.amplitudes, psi.space.cut, target), psi.space.on(target))

    def unitary(self, source: Cut, target: Cut) -> np.ndarray:
        dim = CutSpace(source, self.N, self.d).dim
        return self.evolve_array(np.eye(dim, dtype=np.complex128), source, target)

    def layer_matrix_single(self, t: int) -> np.ndarray:
        """Single-particle matrix of the whole time-``t`` layer (no phases)."""
        Ld = self.strip.L * self.d
        m = np.zeros((Ld, Ld), dtype=np.complex128)
        for g in self.gates:
            if g.t == t:
                s = g.x * self.d
                b = self._blocks[g.width][0]
                m[s:s + b.shape[0], s:s + b.shape[0]] = b
        return m


def evolve(psi: StateVec, to: Cut, circuit: Circuit) -> StateVec:
    return circuit.evolve(psi, to)


def _overlap_check(sigma: Cut, sigma2: Cut, A: Iterable[int]) -> frozenset:
    A = frozenset(A)
    overlap = sigma.overlap(sigma2)
    if not A <= overlap:
        raise ValueError(f"sites {sorted(A - overlap)} are not in the overlap of the two cuts")
    return A


def _conjugation_deviation(circuit: Circuit, sigma: Cut, sigma2: Cut, slot: int,
                           before: np.ndarray, after: np.ndarray) -> float:
    U = circuit.unitary(sigma, sigma2)
    moved = (U * before[None, :]) @ U.conj().T
    return operator_norm(np.diag(after) - moved)


def verify_interaction_locality(sigma: Cut, sigma2: Cut, A: Iterable[int], slot: int, circuit: Circuit) -> float:
    """``|| P'(A) - U P(A) U^dagger ||`` for a site set ``A`` in the overlap."""
    A = _overlap_check(sigma, sigma2, A)
    space = circuit.space(sigma)
    ind = [1.0 if x in A else 0.0 for x in range(space.L)]
    diag = slot_diagonal(space, slot, ind)
    return _conjugation_deviation(circuit, sigma, sigma2, slot, diag, diag)


def verify_ilf(sigma: Cut, sigma2: Cut, f: Mapping[int, float], slot: int, circuit: Circuit) -> float:
    """Deviation for a multiplication operator supported in the overlap."""
    _overlap_check(sigma, sigma2, f.keys())
    space = circuit.space(sigma)
    vals = [float(f.get(x, 0.0)) for x in range(space.L)]
    diag = slot_diagonal(space, slot, vals)
    return _conjugation_deviation(circuit, sigma, sigma2, slot, diag, diag)


def verify_ilb(sigma: Cut, sigma2: Cut, slot: int, circuit: Circuit) -> float:
    """Deviation for the projectors onto the non-overlapping parts of the two cuts."""
    space = circuit.space(sigma)
    overlap = sigma.overlap(sigma2)
    ind = [0.0 if x in overlap else 1.0 for x in range(space.L)]
    diag = slot_diagonal(space, slot, ind)
    return _conjugation_deviation(circuit, sigma, sigma2, slot, diag, diag)
