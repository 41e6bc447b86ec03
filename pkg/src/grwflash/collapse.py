"""Collapse operators, their ordered product and the POVM density.

Flash ``(i, k)`` sits on the cut ``H_ik`` obtained from the lattice hyperboloid
of proper time ``m_ik * delta_s`` above the previous flash ``z_{i,k-1}`` (the
seed for ``k = 1``), moved up onto the nearest gate-compatible cut.  The
collapse operator multiplies particle ``i`` by the cut-off profile of the
3-cell containing the flash, Heisenberg-evolved back to the initial surface.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from .cells import CellComplex, canonical_sequence, crossing_steps
from .evolution import Circuit
from .lattice import Cut, Event, Strip, hyperboloid_cut, snap_to_gates
from .quantum import CutSpace, DenseOp

DISTANCES = ("graph", "minkowski")


@dataclass(frozen=True)
class ModelParams:
    sigma: float
    tau_hat: float
    delta_s: float
    M: int
    n: tuple
    distance: str = "graph"
    cutoff: bool = True

    def __post_init__(self):
        object.__setattr__(self, "n", tuple(int(v) for v in self.n))
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if not self.tau_hat > 0:
            raise ValueError("tau_hat must be positive")
        if not self.delta_s > 0:
            raise ValueError("delta_s must be positive")
        if self.M < 1:
            raise ValueError("M must be at least 1")
        if not self.n or any(v < 1 for v in self.n):
            raise ValueError("every particle needs at least one flash")
        if self.distance not in DISTANCES:
            raise ValueError(f"distance must be one of {DISTANCES}")

    @property
    def N(self) -> int:
        return len(self.n)

    def flash_keys(self) -> list[tuple]:
        return [(i, k) for i in range(1, self.N + 1) for k in range(1, self.n[i - 1] + 1)]


@dataclass(frozen=True)
class FlashConfig:
    """Band index and vertex for every flash ``(i, k)``, keyed in ``flash_keys`` order."""

    keys: tuple
    bands: tuple
    events: tuple

    def __post_init__(self):
        object.__setattr__(self, "keys", tuple(tuple(k) for k in self.keys))
        object.__setattr__(self, "bands", tuple(int(m) for m in self.bands))
        object.__setattr__(self, "events", tuple(Event(*e) for e in self.events))
        if not len(self.keys) == len(self.bands) == len(self.events):
            raise ValueError("keys, bands and events must have equal length")

    @classmethod
    def from_mapping(cls, flashes: Mapping) -> "FlashConfig":
        """Build from ``{(i, k): (band, event)}``."""
        keys = sorted(flashes)
        return cls(tuple(keys), tuple(flashes[k][0] for k in keys), tuple(flashes[k][1] for k in keys))

    def band(self, i: int, k: int) -> int:
        return self.bands[self.keys.index((i, k))]

    def event(self, i: int, k: int) -> Event:
        return self.events[self.keys.index((i, k))]

    def items(self):
        return zip(self.keys, self.bands, self.events)

    def particle(self, i: int) -> tuple:
        return tuple((k, m, e) for k, m, e in self.items() if k[0] == i)

    def to_dict(self) -> dict:
        return {f"{i},{k}": {"band": m, "t": e.t, "x": e.x} for (i, k), m, e in self.items()}


# -- profiles ---------------------------------------------------------------

def cut_distances(cut: Cut, distance: str = "graph") -> np.ndarray:
    """Matrix of distances along the cut between all pairs of sites."""
    L = len(cut)
    if distance == "graph":
        steps = np.ones(L - 1)
    elif distance == "minkowski":
        dt = np.diff(cut.array)
        steps = np.sqrt(np.clip(1.0 - dt.astype(float) ** 2, 0.0, None))
    else:
        raise ValueError(f"unknown distance {distance!r}")
    pos = np.concatenate([[0.0], np.cumsum(steps)])
    return np.abs(pos[:, None] - pos[None, :])


def raw_profile(y: Event, x: Event | int, cut: Cut, sigma: float, distance: str = "graph") -> np.ndarray:
    """Unnormalized Gaussian ``exp(-dist(x, z)^2 / (4 sigma^2))`` over the sites ``z`` of ``cut``.

    ``y`` (the base of the hyperboloid) fixes the cut and is accepted for
    symmetry with :func:`cutoff_profile`.
    """
    xs = x.x if isinstance(x, Event) else int(x)
    if isinstance(x, Event) and cut[xs] != x.t:
        raise ValueError(f"{x} is not a vertex of the cut")
    dist = cut_distances(cut, distance)[xs]
    return np.exp(-(dist ** 2) / (4.0 * sigma * sigma))


def _profile_matrix(cut: Cut, sigma: float, distance: str) -> np.ndarray:
    dist = cut_distances(cut, distance)
    return np.exp(-(dist ** 2) / (4.0 * sigma * sigma))


def cutoff_profile(y: Event, A: Iterable[int], x: Event | int, cut: Cut, sigma: float,
                   distance: str = "graph") -> np.ndarray:
    """Profile ``g(z) = 1_A(z) raw_x(z) / ||raw_z||_A`` over all sites ``z``.

    Summing ``g^2`` over the centres ``x`` in ``A`` gives ``1_A(z)``.
    """
    A = sorted(set(A))
    if not A:
        raise ValueError("3-cell A is empty")
    xs = x.x if isinstance(x, Event) else int(x)
    if xs not in A:
        raise ValueError(f"centre {xs} is not in A")
    G = _profile_matrix(cut, sigma, distance)
    mask = np.zeros(len(cut))
    mask[A] = 1.0
    norms = np.sqrt((G ** 2) @ mask)
    return mask * G[xs] / norms


def temporal_weight(m: int, params: ModelParams) -> float:
    if not 1 <= m <= params.M:
        raise ValueError(f"band {m} outside 1..{params.M}")
    r = params.delta_s / params.tau_hat
    if m == params.M:
        return math.exp(-(m - 1) * r)
    return -math.expm1(-r) * math.exp(-(m - 1) * r)


def temporal_weights(params: ModelParams) -> np.ndarray:
    return np.array([temporal_weight(m, params) for m in range(1, params.M + 1)])


# -- geometry of a configuration ----------------------------------------------

@lru_cache(maxsize=65536)
def flash_cut(base: Event, band: int, delta_s: float, strip: Strip) -> Cut:
    """Gate-compatible cut carrying the flashes of band ``band`` above ``base``."""
    raw = hyperboloid_cut(Event(*base), band * delta_s, strip, clamp=False)
    return snap_to_gates(raw, strip.parity)


def build_complex(config: FlashConfig, seeds: Sequence[Event], params: ModelParams, strip: Strip) -> CellComplex:
    hyper = {}
    for (i, k), m, _ in config.items():
        base = Event(*seeds[i - 1]) if k == 1 else config.event(i, k - 1)
        hyper[(i, k)] = flash_cut(base, m, params.delta_s, strip)
    return CellComplex(strip, tuple(seeds), hyper)


def check_config(config: FlashConfig, seeds: Sequence[Event], params: ModelParams, strip: Strip) -> CellComplex:
    """Validate a configuration and return its cell complex."""
    if list(config.keys) != params.flash_keys():
        raise ValueError(f"configuration keys {config.keys} do not match n={params.n}")
    cx = build_complex(config, seeds, params, strip)
    for (i, k), m, e in config.items():
        if not 1 <= m <= params.M:
            raise ValueError(f"flash {(i, k)} has band {m} outside 1..{params.M}")
        if not 0 <= e.x < strip.L or cx.cut(i, k)[e.x] != e.t:
            raise ValueError(f"flash {(i, k)} at {tuple(e)} is not on its cut")
    return cx


# -- operators ----------------------------------------------------------------

class Collapser:
    """Builds (and caches) collapse operators for one circuit and parameter set.

    Operators act on the Hilbert space of the initial surface ``T == 0``.
    """

    def __init__(self, circuit: Circuit, params: ModelParams, seeds: Sequence[Event]):
        if circuit.N != params.N:
            raise ValueError("circuit and parameters disagree on the particle count")
        if len(seeds) != params.N:
            raise ValueError(f"need {params.N} seeds, got {len(seeds)}")
        self.circuit = circuit
        self.params = params
        self.seeds = tuple(Event(*s) for s in seeds)
        self.strip = circuit.strip
        self.sigma0 = Cut.flat(self.strip.L, 0)
        self.space0 = CutSpace(self.sigma0, params.N, circuit.d)
        self._U: dict = {}
        self._K: dict = {}

    # evolution from the initial surface, cached by the clamped profile
    def U(self, cut: Cut) -> np.ndarray:
        key = self.circuit.effective(cut).times
        if key not in self._U:
            self._U[key] = self.circuit.unitary(self.sigma0, Cut(key))
        return self._U[key]

    def complex_for(self, config: FlashConfig) -> CellComplex:
        return build_complex(config, self.seeds, self.params, self.strip)

    def cell_sites(self, i: int, k: int, config: FlashConfig, cx: CellComplex) -> tuple:
        """Abstract 3-cell of flash ``(i, k)`` and the site set ``A`` its profile is cut to."""
        cut = cx.cut(i, k)
        e = config.event(i, k)
        cell = cx.locate_3cell(i, k, e)
        if not self.params.cutoff:
            return cell, frozenset(range(self.strip.L))
        parts = cx.three_cells_of(i, k)
        return cell, parts[cell]

    def profile(self, i: int, k: int, config: FlashConfig, cx: CellComplex) -> np.ndarray:
        _, A = self.cell_sites(i, k, config, cx)
        base = self.seeds[i - 1] if k == 1 else config.event(i, k - 1)
        return cutoff_profile(base, A, config.event(i, k), cx.cut(i, k), self.params.sigma, self.params.distance)

    def K(self, i: int, k: int, config: FlashConfig, cx: CellComplex | None = None) -> np.ndarray:
        cx = self.complex_for(config) if cx is None else cx
        cut = cx.cut(i, k)
        g = self.profile(i, k, config, cx)
        key = (self.circuit.effective(cut).times, i, g.tobytes())
        if key not in self._K:
            U = self.U(cut)
            diag = g[self.space0.site_of(i)]
            self._K[key] = U.conj().T @ (diag[:, None] * U)
        return self._K[key]

    def ordered_flashes(self, config: FlashConfig, cx: CellComplex, seq: Sequence | None = None) -> list:
        """Flashes in the order their 3-cells are crossed by ``seq`` (stable within a step)."""
        seq = canonical_sequence(self.params.n) if seq is None else seq
        steps = crossing_steps(seq)
        keyed = []
        for (i, k), _, e in config.items():
            cell = cx.locate_3cell(i, k, e)
            keyed.append((steps[cell], (i, k)))
        keyed.sort()
        return [ik for _, ik in keyed]

    def L(self, config: FlashConfig, seq: Sequence | None = None) -> np.ndarray:
        cx = self.complex_for(config)
        out = np.eye(self.space0.dim, dtype=np.complex128)
        for i, k in self.ordered_flashes(config, cx, seq):
            out = self.K(i, k, config, cx) @ out
        return out

    def apply_L(self, config: FlashConfig, psi: np.ndarray, seq: Sequence | None = None) -> np.ndarray:
        cx = self.complex_for(config)
        out = np.asarray(psi, dtype=np.complex128)
        for i, k in self.ordered_flashes(config, cx, seq):
            out = self.K(i, k, config, cx) @ out
        return out

    def weight(self, config: FlashConfig) -> float:
        return math.prod(temporal_weight(m, self.params) for m in config.bands)

    def D(self, config: FlashConfig, seq: Sequence | None = None) -> np.ndarray:
        Lm = self.L(config, seq)
        return self.weight(config) * (Lm.conj().T @ Lm)

    def probability(self, config: FlashConfig, psi0: np.ndarray, seq: Sequence | None = None) -> float:
        v = self.apply_L(config, psi0, seq)
        return self.weight(config) * float(np.vdot(v, v).real)


def collapse_op(flash: tuple, config: FlashConfig, collapser: Collapser) -> DenseOp:
    i, k = flash
    return DenseOp(collapser.K(i, k, config), collapser.space0)


def big_L(config: FlashConfig, collapser: Collapser, seq: Sequence | None = None) -> DenseOp:
    return DenseOp(collapser.L(config, seq), collapser.space0)


def density_D(config: FlashConfig, collapser: Collapser, seq: Sequence | None = None) -> DenseOp:
    return DenseOp(collapser.D(config, seq), collapser.space0)
