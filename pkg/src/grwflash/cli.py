"""Command-line experiment runner.

    grwflash verify --config run.json
    grwflash simulate --config run.json --out results/ --seed 7
    grwflash enumerate-cells --config run.json --out cells/

Every run logs the SHA-256 of the canonical configuration and the RNG seed.
Results are computed in full before any file is written, and each file is
written atomically.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .cells import (
    ENUMERATION_GUARD,
    all_3cells,
    all_cells,
    canonical_sequence,
    count_cells,
    enumerate_admissible_sequences,
)
from .collapse import FlashConfig, cutoff_profile, flash_cut
from .config import ConfigError, RunConfig, build_potential, load_config
from .evolution import verify_ilb, verify_ilf, verify_interaction_locality
from .io import SCHEMA_VERSION, canonical_json, config_hash, csv_text, write_outputs
from .lattice import Cut, Event, random_cut
from .model import (
    JointDistribution,
    enumerate_configs,
    flat_limit_reference,
    joint_distribution,
    noninteracting_reference,
    particle_mutual_information,
    past_flashes,
    povm_sum,
    sample_flashes,
    total_variation,
)
from .quantum import operator_norm

log = logging.getLogger("grwflash")


def default_config_path() -> Path:
    return Path(str(resources.files("grwflash").joinpath("data/default.json")))


# -- helpers -----------------------------------------------------------------------

def _distribution(cfg: RunConfig, psi, model=None, threads: int = 1) -> JointDistribution:
    model = cfg.model() if model is None else model
    if threads <= 1:
        return joint_distribution(psi, model)
    configs = list(enumerate_configs(model))
    col = model.collapser
    vec = psi.amplitudes
    for c in configs[:1]:  # warm the operator caches before sharing them
        col.probability(c, vec)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        probs = list(pool.map(lambda c: col.probability(c, vec), configs))
    entries = list(zip(configs, probs))
    total = math.fsum(probs)
    if abs(total - 1.0) > 1e-6:
        raise ValueError(f"flash probabilities sum to {total!r}; the POVM is not normalized")
    return JointDistribution(entries, total)


def _flash_rows(config: FlashConfig) -> list:
    return [[i, k, m, e.t, e.x] for (i, k), m, e in config.items()]


def _envelope(cfg: RunConfig, kind: str, body: dict) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "config_sha256": config_hash(cfg.raw),
        "rng_seed": cfg.rng_seed,
        **body,
    }


# -- subcommands ---------------------------------------------------------------------

def cmd_verify(cfg: RunConfig, args) -> tuple[int, dict]:
    model = cfg.model()
    psi = cfg.initial_vector()
    rng = np.random.Generator(np.random.PCG64(cfg.rng_seed))
    checks = []

    def record(name, value, tol):
        ok = bool(value < tol)
        checks.append({"check": name, "value": float(value), "tolerance": tol, "pass": ok})
        print(f"{'PASS' if ok else 'FAIL'} {name}: {value:.3e} (tol {tol:g})")

    S = povm_sum(model)
    record("povm_sum_identity", operator_norm(S - np.eye(S.shape[0])), 1e-8)
    dist = joint_distribution(psi, model, check=False)
    record("initial_state_total", abs(dist.total - 1.0), 1e-8)

    circ = model.circuit
    worst = 0.0
    for _ in range(10):
        a = random_cut(cfg.strip, rng)
        b = random_cut(cfg.strip, rng)
        overlap = sorted(a.overlap(b))
        slot = int(rng.integers(1, model.N + 1))
        A = [x for x in overlap if rng.random() < 0.5]
        f = {x: float(rng.normal()) for x in overlap}
        worst = max(worst, verify_interaction_locality(a, b, A, slot, circ),
                    verify_ilf(a, b, f, slot, circ), verify_ilb(a, b, slot, circ))
    record("interaction_locality", worst, 1e-12)

    spread = 0.0
    if count_cells(cfg.params.n) <= ENUMERATION_GUARD:
        seqs = enumerate_admissible_sequences(cfg.params.n)
        configs = list(enumerate_configs(model))
        col = model.collapser
        for j in rng.choice(len(configs), size=min(200, len(configs)), replace=False):
            mats = [col.L(configs[j], s) for s in seqs]
            spread = max(spread, max(operator_norm(m - mats[0]) for m in mats))
    record("ordering_invariance", spread, 1e-10)

    worst = 0.0
    for _ in range(50):
        cut = random_cut(cfg.strip, rng)
        A = sorted({int(x) for x in rng.choice(cfg.strip.L, size=int(rng.integers(1, cfg.strip.L + 1)))})
        total = sum(cutoff_profile(Event(0, 0), A, x, cut, cfg.params.sigma, cfg.params.distance) ** 2 for x in A)
        target = np.array([1.0 if z in A else 0.0 for z in range(cfg.strip.L)])
        worst = max(worst, float(np.max(np.abs(total - target))))
    record("profile_identity", worst, 1e-12)

    status = 0 if all(c["pass"] for c in checks) else 1
    return status, {"verify.json": canonical_json(_envelope(cfg, "verify", {"checks": checks}))}


def cmd_simulate(cfg: RunConfig, args) -> tuple[int, dict]:
    psi = cfg.initial_vector()
    dist = _distribution(cfg, psi, threads=args.threads)
    draws = sample_flashes(dist, cfg.rng_seed, cfg.samples)
    table = [{"flashes": _flash_rows(c), "probability": float(p)} for c, p in dist.entries]
    body = {"total": float(dist.total), "n_configs": len(table), "distribution": table,
            "columns": ["i", "k", "band", "t", "x"]}
    rows = []
    for j, c in enumerate(draws):
        for (i, k), m, e in c.items():
            rows.append([j, i, k, m, e.t, e.x])
    files = {
        "distribution.json": canonical_json(_envelope(cfg, "simulate", body)),
        "samples.csv": csv_text(["sample", "i", "k", "band", "t", "x"], rows),
    }
    print(f"configurations: {len(table)}  total probability: {dist.total:.15f}  samples: {len(draws)}")
    return 0, files


def cmd_enumerate_cells(cfg: RunConfig, args) -> tuple[int, dict]:
    model = cfg.model()
    n = cfg.params.n
    # reference configuration: band 1, every flash straight above its predecessor
    flashes = {}
    for i, seed in enumerate(model.seeds, start=1):
        base = seed
        for k in range(1, n[i - 1] + 1):
            cut = flash_cut(base, 1, cfg.params.delta_s, cfg.strip)
            base = Event(cut[base.x], base.x)
            flashes[(i, k)] = (1, base)
    config = FlashConfig.from_mapping(flashes)
    cx = model.collapser.complex_for(config)
    three = {}
    for (i, k) in cfg.params.flash_keys():
        for (ii, kk), sites in sorted(cx.three_cells_of(i, k).items()):
            three[f"{ii}:{','.join(map(str, kk))}"] = sorted(sites)
    body = {
        "n": list(n),
        "count_4cells": count_cells(n),
        "cells4": [list(k) for k in all_cells(n)],
        "cells3": [[i, list(k)] for i, k in all_3cells(n)],
        "canonical_sequence": [list(k) for k in canonical_sequence(n)],
        "reference_flashes": _flash_rows(config),
        "complex": cx.to_dict(),
        "three_cell_sites": three,
    }
    if count_cells(n) <= ENUMERATION_GUARD:
        seqs = enumerate_admissible_sequences(n)
        body["admissible_sequences"] = [[list(k) for k in s] for s in seqs]
        print(f"4-cells: {count_cells(n)}  admissible sequences: {len(seqs)}")
    else:
        body["admissible_sequences"] = None
        print(f"4-cells: {count_cells(n)}  (enumeration skipped above guard {ENUMERATION_GUARD})")
    return 0, {"cells.json": canonical_json(_envelope(cfg, "enumerate-cells", body))}


def cmd_compare_noninteracting(cfg: RunConfig, args) -> tuple[int, dict]:
    model = cfg.model(replace(cfg.gates, gamma=0.0))
    psi = cfg.initial_vector()
    general = joint_distribution(psi, model)
    ref = noninteracting_reference(psi, model)
    tv = total_variation(general.as_dict(), ref.as_dict())
    body = {"tv_general_vs_tensor": tv, "mutual_information_general": particle_mutual_information(general)
            if model.N >= 2 else 0.0}
    uncut = model.with_params(cutoff=False)
    d2 = noninteracting_reference(psi, uncut)
    body["mutual_information_uncut_reference"] = particle_mutual_information(d2) if model.N >= 2 else 0.0
    print(f"TV(general, tensor product) = {tv:.3e}")
    return 0, {"compare_noninteracting.json": canonical_json(_envelope(cfg, "compare-noninteracting", body))}


def cmd_flat_limit(cfg: RunConfig, args) -> tuple[int, dict]:
    model = cfg.model()
    psi = cfg.initial_vector()
    ref = flat_limit_reference(psi, model)
    general = joint_distribution(psi, model)
    tv = total_variation(general.as_dict(), ref.as_dict())
    print(f"TV(general, flat-slice reference) = {tv:.3e}")
    return 0, {"flat_limit.json": canonical_json(_envelope(cfg, "flat-limit", {"tv": tv}))}


def cmd_param_independence(cfg: RunConfig, args) -> tuple[int, dict]:
    if not cfg.probe:
        raise ConfigError("param-independence needs a 'probe' section with 'surface' and 'field_b'")
    sigma = Cut(tuple(cfg.probe["surface"]))
    fa = build_potential(cfg.probe.get("field_a", {"kind": "zero"}))
    fb = build_potential(cfg.probe.get("field_b", {"kind": "zero"}))
    psi = cfg.initial_vector()
    da = joint_distribution(psi, cfg.model(replace(cfg.gates, potential=fa)))
    db = joint_distribution(psi, cfg.model(replace(cfg.gates, potential=fb)))
    tv_past = total_variation(da.marginal(lambda c: past_flashes(c, sigma)),
                              db.marginal(lambda c: past_flashes(c, sigma)))
    tv_full = total_variation(da.as_dict(), db.as_dict())
    print(f"TV of flashes at/below surface = {tv_past:.3e}; TV of full joint law = {tv_full:.3e}")
    body = {"surface": list(sigma.times), "tv_past": tv_past, "tv_full": tv_full}
    return 0, {"param_independence.json": canonical_json(_envelope(cfg, "param-independence", body))}


COMMANDS = {
    "verify": (cmd_verify, "run the normalization, locality, ordering and profile checks"),
    "simulate": (cmd_simulate, "compute the joint flash distribution and draw samples"),
    "enumerate-cells": (cmd_enumerate_cells, "dump abstract cells, admissible sequences and a reference complex"),
    "compare-noninteracting": (cmd_compare_noninteracting, "compare with the tensor-product construction at gamma=0"),
    "flat-limit": (cmd_flat_limit, "compare deep-seed runs with the flat-slice collapse chain"),
    "param-independence": (cmd_param_independence, "probe the dependence of early flashes on late fields"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="grwflash", description="Relativistic flash-collapse model on a 1+1D lattice")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", default=None, help="run configuration (JSON); defaults to the shipped example")
        p.add_argument("--out", default=None, help="output directory (nothing is written if omitted)")
        p.add_argument("--seed", type=int, default=None, help="override rng_seed (unsigned 64-bit)")
        p.add_argument("--threads", type=int, default=1, help="worker threads for the enumeration")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    path = args.config or default_config_path()
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    try:
        cfg = load_config(path, seed_override=args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    log.info("config %s sha256=%s rng_seed=%d", path, config_hash(cfg.raw), cfg.rng_seed)
    func = COMMANDS[args.command][0]
    try:
        status, files = func(cfg, args)
    except (ValueError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.out is not None:
        for p in write_outputs(args.out, files):
            log.debug("wrote %s", p)
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
