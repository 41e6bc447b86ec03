"""Run configuration: JSON file -> validated :class:`RunConfig`.

All quantities are in lattice units.  Validation errors name the offending
key and the line of the file where it appears.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .collapse import DISTANCES, ModelParams
from .evolution import GateParams
from .lattice import Event, Strip
from .model import Model
from .quantum import CutSpace, StateVec, gaussian_packet, product_state, random_state
from .lattice import Cut


class ConfigError(ValueError):
    pass


# -- external fields --------------------------------------------------------------

@dataclass(frozen=True)
class UniformPotential:
    value: float

    def __call__(self, e: Event) -> float:
        return self.value


@dataclass(frozen=True)
class RegionPotential:
    """Constant phase on the events of a space-time box (inclusive bounds)."""

    value: float
    t_min: int
    t_max: int
    x_min: int
    x_max: int

    def __call__(self, e: Event) -> float:
        inside = self.t_min <= e.t <= self.t_max and self.x_min <= e.x <= self.x_max
        return self.value if inside else 0.0


@dataclass(frozen=True)
class TablePotential:
    entries: tuple  # ((t, x, value), ...)

    def __call__(self, e: Event) -> float:
        for t, x, v in self.entries:
            if (t, x) == (e.t, e.x):
                return v
        return 0.0


@dataclass(frozen=True)
class AboveCutPotential:
    """Phase ``value + slope * x`` on every event strictly above a cut.

    A constant phase on a whole time slice is a global phase; the slope is
    what makes the field physically visible.
    """

    value: float
    cut: tuple
    slope: float = 0.0

    def __call__(self, e: Event) -> float:
        return self.value + self.slope * e.x if e.t > self.cut[e.x] else 0.0


# -- the parsed configuration -------------------------------------------------------

@dataclass
class RunConfig:
    raw: dict
    strip: Strip
    seeds: tuple
    params: ModelParams
    gates: GateParams
    d: int
    initial_state: dict
    rng_seed: int
    samples: int
    probe: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)

    def model(self, gates: GateParams | None = None) -> Model:
        return Model(self.strip, self.seeds, self.params, self.gates if gates is None else gates, self.d)

    def initial_vector(self) -> StateVec:
        return build_initial_state(self.initial_state, self.strip, self.params.N, self.d)


class _Reader:
    def __init__(self, text: str, source: str):
        self.text = text
        self.source = source

    def line_of(self, path: tuple) -> int:
        """Line of the deepest key of ``path`` found in the text (1 if none is)."""
        pos = 0
        for seg in path:
            if isinstance(seg, int):
                continue
            j = self.text.find(json.dumps(seg), pos)
            if j < 0:
                break
            pos = j
        return self.text.count("\n", 0, pos) + 1

    def fail(self, path: tuple, msg: str):
        dotted = ".".join(str(p) for p in path)
        raise ConfigError(f"{self.source}:{self.line_of(path)}: '{dotted}': {msg}")

    def get(self, obj: dict, path: tuple, key: str, kind, default=None, required=True):
        full = path + (key,)
        if key not in obj:
            if required and default is None:
                self.fail(path if path else (key,), f"missing required key '{key}'")
            return default
        val = obj[key]
        ok = {
            "int": isinstance(val, int) and not isinstance(val, bool),
            "num": isinstance(val, (int, float)) and not isinstance(val, bool) and math.isfinite(val),
            "bool": isinstance(val, bool),
            "str": isinstance(val, str),
            "list": isinstance(val, list),
            "dict": isinstance(val, dict),
        }[kind]
        if not ok:
            self.fail(full, f"expected {kind}, got {type(val).__name__}")
        return val


SECTIONS = {"strip", "particles", "dynamics", "collapse", "initial_state", "rng_seed", "samples",
            "probe", "outputs", "schema_version", "description"}


def parse_config(text: str, source: str = "<config>", seed_override: int | None = None) -> RunConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}: invalid JSON: {exc.msg}") from None
    r = _Reader(text, source)
    if not isinstance(raw, dict):
        raise ConfigError(f"{source}:1: top level must be an object")
    for key in raw:
        if key not in SECTIONS:
            r.fail((key,), "unknown section")

    st = r.get(raw, (), "strip", "dict")
    L = r.get(st, ("strip",), "L", "int")
    T_max = r.get(st, ("strip",), "T_max", "int")
    parity = r.get(st, ("strip",), "parity", "int", default=0, required=False)
    if L < 2:
        r.fail(("strip", "L"), "need at least 2 sites")
    if T_max < 1:
        r.fail(("strip", "T_max"), "must be >= 1")
    if parity not in (0, 1):
        r.fail(("strip", "parity"), "must be 0 or 1")
    strip = Strip(L, T_max, parity)

    pa = r.get(raw, (), "particles", "dict")
    N = r.get(pa, ("particles",), "N", "int")
    n = r.get(pa, ("particles",), "n", "list")
    seeds = r.get(pa, ("particles",), "seeds", "list")
    d = r.get(pa, ("particles",), "d", "int", default=2, required=False)
    if N < 1:
        r.fail(("particles", "N"), "need at least one particle")
    if len(n) != N or not all(isinstance(v, int) and v >= 1 for v in n):
        r.fail(("particles", "n"), f"need {N} positive integers")
    if len(seeds) != N or not all(isinstance(s, list) and len(s) == 2 and all(isinstance(c, int) for c in s)
                                  for s in seeds):
        r.fail(("particles", "seeds"), f"need {N} [t, x] integer pairs")
    for s in seeds:
        if not 0 <= s[1] < L:
            r.fail(("particles", "seeds"), f"seed site {s[1]} outside 0..{L - 1}")
        if s[0] > 0:
            r.fail(("particles", "seeds"), "seeds must lie at or below the initial surface t=0")
    if d != 2:
        r.fail(("particles", "d"), "the walk dynamics needs d = 2")

    dy = r.get(raw, (), "dynamics", "dict")
    theta = r.get(dy, ("dynamics",), "theta", "num")
    gamma = r.get(dy, ("dynamics",), "gamma", "num")
    pot_spec = r.get(dy, ("dynamics",), "potential", "dict", default={"kind": "zero"}, required=False)
    potential = build_potential(pot_spec, r, ("dynamics", "potential"))
    gates = GateParams(float(theta), float(gamma), potential)

    co = r.get(raw, (), "collapse", "dict")
    sigma = r.get(co, ("collapse",), "sigma", "num")
    tau_hat = r.get(co, ("collapse",), "tau_hat", "num")
    delta_s = r.get(co, ("collapse",), "delta_s", "num")
    M = r.get(co, ("collapse",), "M", "int")
    distance = r.get(co, ("collapse",), "distance", "str", default="graph", required=False)
    cutoff = r.get(co, ("collapse",), "cutoff", "bool", default=True, required=False)
    for key, val in (("sigma", sigma), ("tau_hat", tau_hat), ("delta_s", delta_s)):
        if val <= 0:
            r.fail(("collapse", key), "must be positive")
    if M < 1:
        r.fail(("collapse", "M"), "must be >= 1")
    if distance not in DISTANCES:
        r.fail(("collapse", "distance"), f"must be one of {list(DISTANCES)}")
    params = ModelParams(float(sigma), float(tau_hat), float(delta_s), M, tuple(n), distance, cutoff)

    init = r.get(raw, (), "initial_state", "dict")
    _check_initial(init, r, L, N)

    rng_seed = r.get(raw, (), "rng_seed", "int")
    if seed_override is not None:
        rng_seed = int(seed_override)
    if not 0 <= rng_seed < 2 ** 64:
        r.fail(("rng_seed",), "must be an unsigned 64-bit integer")
    samples = r.get(raw, (), "samples", "int", default=1000, required=False)
    if samples < 0:
        r.fail(("samples",), "must be non-negative")

    probe = r.get(raw, (), "probe", "dict", default={}, required=False)
    if probe:
        _check_probe(probe, r, strip)
    outputs = r.get(raw, (), "outputs", "dict", default={}, required=False)

    return RunConfig(raw, strip, tuple(Event(*s) for s in seeds), params, gates, d, init, rng_seed,
                     samples, probe, outputs)


def load_config(path: str | Path, seed_override: int | None = None) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from None
    return parse_config(text, str(path), seed_override)


def build_potential(spec: dict, r: _Reader | None = None, path: tuple = ("potential",)):
    def fail(msg, sub=()):
        if r is None:
            raise ConfigError(f"{'.'.join(path + sub)}: {msg}")
        r.fail(path + sub, msg)

    kind = spec.get("kind")
    if kind == "zero":
        return None
    if kind == "uniform":
        v = spec.get("value")
        if not isinstance(v, (int, float)):
            fail("uniform potential needs a numeric 'value'", ("value",))
        return UniformPotential(float(v))
    if kind == "region":
        keys = ("value", "t_min", "t_max", "x_min", "x_max")
        for k in keys:
            if not isinstance(spec.get(k), (int, float)):
                fail(f"region potential needs numeric '{k}'", (k,))
        return RegionPotential(float(spec["value"]), *(int(spec[k]) for k in keys[1:]))
    if kind == "table":
        events = spec.get("events")
        if not isinstance(events, list) or not all(isinstance(e, list) and len(e) == 3 for e in events):
            fail("table potential needs 'events' as [t, x, value] triples", ("events",))
        return TablePotential(tuple((int(t), int(x), float(v)) for t, x, v in events))
    if kind == "above_cut":
        cut = spec.get("cut")
        v = spec.get("value", 0.0)
        slope = spec.get("slope", 0.0)
        if not isinstance(cut, list) or not all(isinstance(x, (int, float)) for x in (v, slope)):
            fail("above_cut potential needs 'cut' (list of times) and numeric 'value'/'slope'")
        return AboveCutPotential(float(v), tuple(int(c) for c in cut), float(slope))
    fail(f"unknown potential kind {kind!r} (zero, uniform, region, table, above_cut)", ("kind",))


def _check_initial(init: dict, r: _Reader, L: int, N: int) -> None:
    kind = r.get(init, ("initial_state",), "kind", "str")
    if kind == "product_gaussian":
        centers = r.get(init, ("initial_state",), "centers", "list")
        widths = r.get(init, ("initial_state",), "widths", "list", default=[1.0] * N, required=False)
        momenta = r.get(init, ("initial_state",), "momenta", "list", default=[0.0] * N, required=False)
        for key, vals in (("centers", centers), ("widths", widths), ("momenta", momenta)):
            if len(vals) != N or not all(isinstance(v, (int, float)) for v in vals):
                r.fail(("initial_state", key), f"need {N} numbers")
        if any(w <= 0 for w in widths):
            r.fail(("initial_state", "widths"), "widths must be positive")
    elif kind == "entangled_pair":
        if N != 2:
            r.fail(("initial_state", "kind"), "entangled_pair needs exactly two particles")
        sites = r.get(init, ("initial_state",), "sites", "list")
        if len(sites) != 2 or not all(isinstance(s, int) and 0 <= s < L for s in sites):
            r.fail(("initial_state", "sites"), f"need two sites in 0..{L - 1}")
        spin = r.get(init, ("initial_state",), "spin", "int", default=0, required=False)
        if spin not in (0, 1):
            r.fail(("initial_state", "spin"), "must be 0 or 1")
    elif kind == "random":
        r.get(init, ("initial_state",), "seed", "int")
    else:
        r.fail(("initial_state", "kind"), "must be product_gaussian, entangled_pair or random")


def _check_probe(probe: dict, r: _Reader, strip: Strip) -> None:
    surf = r.get(probe, ("probe",), "surface", "list")
    if len(surf) != strip.L or not all(isinstance(t, int) for t in surf):
        r.fail(("probe", "surface"), f"need {strip.L} integer times")
    try:
        Cut(tuple(surf))
    except ValueError as exc:
        r.fail(("probe", "surface"), str(exc))
    for key in ("field_a", "field_b"):
        spec = r.get(probe, ("probe",), key, "dict", default={"kind": "zero"}, required=False)
        build_potential(spec, r, ("probe", key))


def build_initial_state(spec: dict, strip: Strip, N: int, d: int = 2) -> StateVec:
    space = CutSpace(Cut.flat(strip.L, 0), N, d)
    kind = spec["kind"]
    if kind == "product_gaussian":
        widths = spec.get("widths", [1.0] * N)
        momenta = spec.get("momenta", [0.0] * N)
        factors = [gaussian_packet(strip.L, d, c, w, momentum=k)
                   for c, w, k in zip(spec["centers"], widths, momenta)]
        return product_state(space, factors).normalized()
    if kind == "entangled_pair":
        a, b = spec["sites"]
        up = np.zeros(d)
        up[spec.get("spin", 0)] = 1.0
        ea = np.kron(np.eye(strip.L)[a], up)
        eb = np.kron(np.eye(strip.L)[b], up)
        amps = np.kron(ea, eb) + np.kron(eb, ea)
        return StateVec(amps, space).normalized()
    if kind == "random":
        return random_state(space, np.random.Generator(np.random.PCG64(spec["seed"])))
    raise ConfigError(f"unknown initial state kind {kind!r}")
