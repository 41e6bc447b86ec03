"""Joint flash distribution, sampling, conditioning and reference models."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Iterator, Mapping, Sequence

import numpy as np

from .cells import canonical_sequence
from .collapse import (
    Collapser,
    FlashConfig,
    ModelParams,
    _profile_matrix,
    cutoff_profile,
    flash_cut,
    temporal_weight,
)
from .evolution import Circuit, GateParams, Gate
from .lattice import Cut, Event, Strip, _hyperboloid_offset
from .quantum import CutSpace, StateVec, hermitian_sqrt

CONFIG_GUARD = 200_000
NORMALIZATION_TOL = 1e-6


@dataclass
class Model:
    """Everything needed to define the flash process on a strip."""

    strip: Strip
    seeds: tuple
    params: ModelParams
    gates: GateParams
    d: int = 2
    _collapser: Collapser | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.seeds = tuple(Event(*s) for s in self.seeds)
        if len(self.seeds) != self.params.N:
            raise ValueError(f"need {self.params.N} seeds, got {len(self.seeds)}")
        for s in self.seeds:
            if not 0 <= s.x < self.strip.L:
                raise ValueError(f"seed {tuple(s)} lies outside the strip")
            if s.t > 0:
                raise ValueError(f"seed {tuple(s)} lies above the initial surface t=0")

    @property
    def N(self) -> int:
        return self.params.N

    @property
    def circuit(self) -> Circuit:
        return self.collapser.circuit

    @property
    def collapser(self) -> Collapser:
        if self._collapser is None:
            self._collapser = Collapser(Circuit(self.strip, self.gates, self.N, self.d), self.params, self.seeds)
        return self._collapser

    @property
    def space0(self) -> CutSpace:
        return self.collapser.space0

    def with_gates(self, gates: GateParams) -> "Model":
        return Model(self.strip, self.seeds, self.params, gates, self.d)

    def with_params(self, **changes) -> "Model":
        return Model(self.strip, self.seeds, replace(self.params, **changes), self.gates, self.d)


# -- configuration space -------------------------------------------------------

def _particle_chains(model: Model, i: int) -> list[list]:
    p, strip = model.params, model.strip
    out: list[list] = []

    def rec(k, base, acc):
        if k > p.n[i - 1]:
            out.append(list(acc))
            return
        for m in range(1, p.M + 1):
            cut = flash_cut(base, m, p.delta_s, strip)
            for x in strip.sites:
                e = Event(cut[x], x)
                acc.append(((i, k), m, e))
                rec(k + 1, e, acc)
                acc.pop()

    rec(1, model.seeds[i - 1], [])
    return out


def count_configs(model: Model) -> int:
    p, L = model.params, model.strip.L
    return math.prod((p.M * L) ** ni for ni in p.n)


def enumerate_configs(model: Model, guard: int = CONFIG_GUARD) -> Iterator[FlashConfig]:
    """Every self-consistent flash configuration (bands and vertices of all chains)."""
    total = count_configs(model)
    if total > guard:
        raise ValueError(f"{total} configurations exceed the guard of {guard}; reduce L, M or n")
    keys = model.params.flash_keys()
    chains = [_particle_chains(model, i) for i in range(1, model.N + 1)]
    for combo in itertools.product(*chains):
        flat = [f for chain in combo for f in chain]
        yield FlashConfig(tuple(keys), tuple(f[1] for f in flat), tuple(f[2] for f in flat))


# -- distributions ---------------------------------------------------------------

@dataclass
class JointDistribution:
    entries: list
    total: float

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([p for _, p in self.entries])

    def as_dict(self) -> dict:
        return {c: p for c, p in self.entries}

    def marginal(self, key: Callable[[FlashConfig], object]) -> dict:
        out: dict = {}
        for c, p in self.entries:
            k = key(c)
            out[k] = out.get(k, 0.0) + p
        return out

    def particle_marginal(self, i: int) -> dict:
        return self.marginal(lambda c: c.particle(i))


def total_variation(p: Mapping, q: Mapping) -> float:
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def mutual_information(dist: JointDistribution, a: Callable, b: Callable) -> float:
    """Mutual information (natural log) between two functions of the configuration."""
    joint = dist.marginal(lambda c: (a(c), b(c)))
    pa = dist.marginal(a)
    pb = dist.marginal(b)
    mi = 0.0
    for (x, y), pxy in joint.items():
        if pxy > 0:
            mi += pxy * math.log(pxy / (pa[x] * pb[y]))
    return mi


def particle_mutual_information(dist: JointDistribution, i: int = 1, j: int = 2) -> float:
    return mutual_information(dist, lambda c: c.particle(i), lambda c: c.particle(j))


def joint_distribution(psi0: StateVec | np.ndarray, model: Model, seq: Sequence | None = None,
                       check: bool = True, tol: float = NORMALIZATION_TOL) -> JointDistribution:
    psi = psi0.amplitudes if isinstance(psi0, StateVec) else np.asarray(psi0, dtype=np.complex128)
    if abs(np.linalg.norm(psi) - 1.0) > 1e-10:
        raise ValueError("initial state must be normalized")
    col = model.collapser
    entries = [(c, col.probability(c, psi, seq)) for c in enumerate_configs(model)]
    total = float(math.fsum(p for _, p in entries))
    if check and abs(total - 1.0) > tol:
        raise ValueError(f"flash probabilities sum to {total!r}; the POVM is not normalized")
    return JointDistribution(entries, total)


def povm_sum(model: Model, seq: Sequence | None = None) -> np.ndarray:
    """``sum over configurations of D``; equals the identity for a valid model."""
    col = model.collapser
    total = np.zeros((col.space0.dim,) * 2, dtype=np.complex128)
    for c in enumerate_configs(model):
        total += col.D(c, seq)
    return total


def sample_flashes(dist: JointDistribution, rng_seed: int, count: int) -> list[FlashConfig]:
    """I.i.d. draws by inverse CDF over the enumerated configurations."""
    probs = np.clip(dist.probabilities, 0.0, None)
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    rng = np.random.Generator(np.random.PCG64(rng_seed))
    idx = np.searchsorted(cdf, rng.random(count), side="right")
    idx = np.minimum(idx, len(cdf) - 1)
    return [dist.entries[j][0] for j in idx]


# -- conditioning ------------------------------------------------------------------

@dataclass
class ConditionedState:
    surface: Cut
    past: dict
    psi: StateVec
    W: np.ndarray = field(repr=False)


def _past_part(config: FlashConfig, sigma: Cut) -> dict:
    return {k: (m, e) for k, m, e in config.items() if sigma.is_below(e)}


def _compatible(config: FlashConfig, sigma: Cut, past: Mapping) -> bool:
    return _past_part(config, sigma) == dict(past)


def conditional_state(sigma: Cut, past: Mapping, psi0: StateVec | np.ndarray, model: Model) -> ConditionedState:
    """Wave function on ``sigma`` given the flashes at or below it.

    ``past`` maps flash keys to ``(band, event)``; every other flash is
    conditioned to lie strictly above ``sigma``.
    """
    past = {tuple(k): (int(m), Event(*e)) for k, (m, e) in past.items()}
    for k, (m, e) in past.items():
        if not sigma.is_below(e):
            raise ValueError(f"past flash {k} at {tuple(e)} lies above the surface")
    psi = psi0.amplitudes if isinstance(psi0, StateVec) else np.asarray(psi0, dtype=np.complex128)
    col = model.collapser
    W2 = np.zeros((col.space0.dim,) * 2, dtype=np.complex128)
    for c in enumerate_configs(model):
        if _compatible(c, sigma, past):
            W2 += col.D(c)
    W = hermitian_sqrt(W2)
    v = W @ psi
    nrm = np.linalg.norm(v)
    if nrm < 1e-12:
        raise ValueError("conditioning on an event of probability zero")
    out = model.circuit.evolve_array(v / nrm, col.sigma0, sigma)
    return ConditionedState(sigma, past, StateVec(out, CutSpace(sigma, model.N, model.d)), W)


def conditional_probabilities(state: ConditionedState, model: Model, rcond: float = 1e-12) -> dict:
    """Probabilities of the future completions computed from ``psi_Sigma`` alone."""
    col = model.collapser
    W = state.W
    w, v = np.linalg.eigh(W)
    keep = w > rcond * max(1.0, w.max())
    Winv = (v[:, keep] / w[keep]) @ v[:, keep].conj().T
    U = model.circuit.unitary(col.sigma0, state.surface)
    phi = U.conj().T @ state.psi.amplitudes  # back on the initial surface
    out = {}
    for c in enumerate_configs(model):
        if _compatible(c, state.surface, state.past):
            op = Winv @ col.D(c) @ Winv
            out[c] = float(np.vdot(phi, op @ phi).real)
    return out


def direct_conditional(dist: JointDistribution, sigma: Cut, past: Mapping) -> dict:
    past = {tuple(k): (int(m), Event(*e)) for k, (m, e) in past.items()}
    sel = [(c, p) for c, p in dist.entries if _compatible(c, sigma, past)]
    z = math.fsum(p for _, p in sel)
    if z <= 0:
        raise ValueError("conditioning event has probability zero")
    return {c: p / z for c, p in sel}


# -- the two-flash case written out by hand -----------------------------------------

def simple_case_L(config: FlashConfig, model: Model) -> np.ndarray:
    """Four-branch operator for two particles with one flash each.

    ``P_i`` is the part of ``H_i`` at or below the other cut and ``F_i`` the
    part strictly above it, with vertices shared by both cuts assigned to
    ``P_1`` and ``F_2``.
    """
    if model.params.n != (1, 1):
        raise ValueError("the simple case needs exactly two particles with one flash each")
    strip, p = model.strip, model.params
    x1, x2 = config.event(1, 1), config.event(2, 1)
    H1 = flash_cut(model.seeds[0], config.band(1, 1), p.delta_s, strip)
    H2 = flash_cut(model.seeds[1], config.band(2, 1), p.delta_s, strip)
    P1 = {x for x in strip.sites if H1[x] <= H2[x]}
    F1 = set(strip.sites) - P1
    P2 = {x for x in strip.sites if H2[x] < H1[x]}
    F2 = set(strip.sites) - P2
    A1 = P1 if x1.x in P1 else F1
    A2 = P2 if x2.x in P2 else F2
    if not p.cutoff:
        A1 = A2 = set(strip.sites)
    g1 = cutoff_profile(model.seeds[0], A1, x1, H1, p.sigma, p.distance)
    g2 = cutoff_profile(model.seeds[1], A2, x2, H2, p.sigma, p.distance)
    circ = model.circuit
    space = model.space0
    d1 = g1[space.site_of(1)][:, None]
    d2 = g2[space.site_of(2)][:, None]
    sigma0 = Cut.flat(strip.L, 0)
    op = np.eye(space.dim, dtype=np.complex128)
    if x1.x in P1:
        op = circ.evolve_array(op, sigma0, H1)
        op = d1 * op
        op = circ.evolve_array(op, H1, H2)
        op = d2 * op
        op = circ.evolve_array(op, H2, sigma0)
    else:
        op = circ.evolve_array(op, sigma0, H2)
        op = d2 * op
        op = circ.evolve_array(op, H2, H1)
        op = d1 * op
        op = circ.evolve_array(op, H1, sigma0)
    return op


def simple_case_povm_sum(model: Model) -> np.ndarray:
    total = np.zeros((model.space0.dim,) * 2, dtype=np.complex128)
    for c in enumerate_configs(model):
        Lm = simple_case_L(c, model)
        w = math.prod(temporal_weight(m, model.params) for m in c.bands)
        total += w * (Lm.conj().T @ Lm)
    return total


# -- non-interacting reference ------------------------------------------------------------

def noninteracting_reference(psi0: StateVec | np.ndarray, model: Model) -> JointDistribution:
    """Tensor-product construction for a circuit without contact interaction.

    Each particle gets its own one-particle circuit; its collapse operators
    are ``u^dagger g u`` on the one-particle space and ``L`` is the tensor
    product of the per-particle chains (flash index increasing from right to
    left).  Profiles use the same 3-cells as the full model (or the whole cut
    when ``params.cutoff`` is off).
    """
    if model.gates.gamma != 0:
        raise ValueError("the tensor-product reference needs gamma = 0")
    psi = psi0.amplitudes if isinstance(psi0, StateVec) else np.asarray(psi0, dtype=np.complex128)
    strip, p = model.strip, model.params
    single = Circuit(strip, model.gates, 1, model.d)
    sigma0 = Cut.flat(strip.L, 0)
    Ld = strip.L * model.d
    ucache: dict = {}

    def u(cut: Cut) -> np.ndarray:
        key = single.effective(cut).times
        if key not in ucache:
            ucache[key] = single.unitary(sigma0, Cut(key))
        return ucache[key]

    col = model.collapser
    entries = []
    for c in enumerate_configs(model):
        cx = col.complex_for(c)
        factors = []
        for i in range(1, model.N + 1):
            Li = np.eye(Ld, dtype=np.complex128)
            for k in range(1, p.n[i - 1] + 1):
                cut = cx.cut(i, k)
                g = col.profile(i, k, c, cx)
                ui = u(cut)
                Li = ui.conj().T @ (np.repeat(g, model.d)[:, None] * ui) @ Li
            factors.append(Li)
        Lfull = factors[0]
        for f in factors[1:]:
            Lfull = np.kron(Lfull, f)
        v = Lfull @ psi
        w = math.prod(temporal_weight(m, p) for m in c.bands)
        entries.append((c, w * float(np.vdot(v, v).real)))
    return JointDistribution(entries, float(math.fsum(q for _, q in entries)))


# -- flat-slice (non-relativistic) reference -------------------------------------------------

def flatness_violations(model: Model) -> list[str]:
    """Reasons why the model's cuts are not all horizontal slices (empty if they are)."""
    p, L = model.params, model.strip.L
    problems = []
    for m in range(1, p.M + 1):
        level = m * p.delta_s
        offs = {_hyperboloid_offset(level, dx) for dx in range(L)}
        if len(offs) > 1:
            problems.append(
                f"level {level:g} gives a curved cut (offsets {sorted(offs)}); "
                f"need ceil(level) - level > (L-1)^2 / (2 level) roughly"
            )
    for i, s in enumerate(model.seeds, start=1):
        first = s.t + _hyperboloid_offset(p.delta_s, 0)
        if first < 1:
            problems.append(f"first cut of particle {i} at t={first} is not above the initial surface")
    return problems


def _layer_unitary(model: Model, t: int) -> np.ndarray:
    """Dense matrix of the full time-``t`` layer, assembled site by site."""
    strip, g, N, d = model.strip, model.gates, model.N, model.d
    Ld = strip.L * d
    c, s = math.cos(g.theta), math.sin(g.theta)
    C = np.array([[c, -1j * s], [-1j * s, c]])
    V = np.zeros((Ld, Ld), dtype=np.complex128)
    pairs, walls = [], []
    x = 0
    while x < strip.L:
        if (x + t) % 2 == strip.parity and x + 1 < strip.L:
            pairs.append((x, x + 1))
            x += 2
        else:
            walls.append(x)
            x += 1
    for a, b in pairs:
        # coin on both sites, then the spin-0 components trade places
        for site in (a, b):
            V[site * d:(site + 1) * d, site * d:(site + 1) * d] = C
        shifted = V.copy()
        shifted[a * d + 0], shifted[b * d + 0] = V[b * d + 0], V[a * d + 0]
        V = shifted
    for w in walls:
        V[w * d:(w + 1) * d, w * d:(w + 1) * d] = np.array([[0, 1], [1, 0]]) @ C
    full = V
    for _ in range(N - 1):
        full = np.kron(full, V)
    groups = [set(pr) for pr in pairs] + [{w} for w in walls]
    phase = np.ones(Ld ** N, dtype=np.complex128)
    for conf in itertools.product(range(strip.L), repeat=N):
        total = sum(g.phi(Event(t + 1, x)) for x in conf)
        for grp in groups:
            if sum(1 for x in conf if x in grp) >= 2:
                total += g.gamma
        phase_val = np.exp(1j * total)
        # every spin assignment of this site configuration
        for spins in itertools.product(range(d), repeat=N):
            j = 0
            for x, sp in zip(conf, spins):
                j = j * Ld + x * d + sp
            phase[j] = phase_val
    return phase[:, None] * full


def flat_limit_reference(psi0: StateVec | np.ndarray, model: Model) -> JointDistribution:
    """Non-relativistic collapse chain on horizontal slices.

    Flash ``(i, k)`` occurs on the slice ``t = t_{i,k-1} + ceil(m delta_s)``;
    the collapses are applied in time order with Gaussians normalized over the
    whole slice, and the unitary between slices is the product of full layers.
    """
    problems = flatness_violations(model)
    if problems:
        raise ValueError("flat-slice reference not applicable: " + "; ".join(problems))
    psi = psi0.amplitudes if isinstance(psi0, StateVec) else np.asarray(psi0, dtype=np.complex128)
    strip, p = model.strip, model.params
    L = strip.L
    layers = [_layer_unitary(model, t) for t in range(strip.T_max)]
    cum = [np.eye(len(psi), dtype=np.complex128)]
    for V in layers:
        cum.append(V @ cum[-1])

    def U_to(t: int) -> np.ndarray:
        return cum[min(max(t, 0), strip.T_max)]

    x = np.arange(L)
    G = np.exp(-((x[:, None] - x[None, :]) ** 2) / (4 * p.sigma ** 2))
    Gn = G / np.sqrt((G ** 2).sum(axis=0))[None, :]  # column z normalized over all centres
    space = CutSpace(Cut.flat(L, 0), model.N, model.d)

    per_particle = []
    for i in range(1, model.N + 1):
        chains = []
        for choice in itertools.product(range(1, p.M + 1), range(L), repeat=p.n[i - 1]):
            bands = choice[0::2]
            sites = choice[1::2]
            t = model.seeds[i - 1].t
            evs = []
            for m, xs in zip(bands, sites):
                t = t + _hyperboloid_offset(m * p.delta_s, 0)
                evs.append(Event(t, xs))
            chains.append([((i, k + 1), bands[k], evs[k]) for k in range(len(bands))])
        per_particle.append(chains)

    entries = []
    for combo in itertools.product(*per_particle):
        flashes = [f for ch in combo for f in ch]
        order = sorted(flashes, key=lambda f: (f[2].t, f[0][0], f[0][1]))
        v = psi.copy()
        for (i, k), m, e in order:
            U = U_to(e.t)
            diag = Gn[e.x][space.site_of(i)]
            v = U.conj().T @ (diag * (U @ v))
        w = math.prod(temporal_weight(m, p) for _, m, _ in flashes)
        flashes.sort()
        cfg = FlashConfig(tuple(f[0] for f in flashes), tuple(f[1] for f in flashes), tuple(f[2] for f in flashes))
        entries.append((cfg, w * float(np.vdot(v, v).real)))
    return JointDistribution(entries, float(math.fsum(q for _, q in entries)))


# -- parameter independence -------------------------------------------------------------------

def past_flashes(config: FlashConfig, sigma: Cut) -> tuple:
    """Per flash: its event if it lies at or below ``sigma``, else ``None``."""
    return tuple(e if sigma.is_below(e) else None for e in config.events)


def parameter_independence_probe(sigma: Cut, field_a, field_b, psi0: StateVec | np.ndarray,
                                 model: Model) -> float:
    """Total variation between the laws of the flashes at or below ``sigma`` under two fields."""
    da = joint_distribution(psi0, model.with_gates(replace(model.gates, potential=field_a)))
    db = joint_distribution(psi0, model.with_gates(replace(model.gates, potential=field_b)))
    return total_variation(da.marginal(lambda c: past_flashes(c, sigma)),
                           db.marginal(lambda c: past_flashes(c, sigma)))


def fields_agree_below(sigma: Cut, field_a, field_b, strip: Strip) -> bool:
    """True if the two potentials coincide on every gate output at or below ``sigma``."""
    ga = GateParams(potential=field_a)
    gb = GateParams(potential=field_b)
    for t in range(1, strip.T_max + 1):
        for x in strip.sites:
            e = Event(t, x)
            if sigma.is_below(e) and ga.phi(e) != gb.phi(e):
                return False
    return True
