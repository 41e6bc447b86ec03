"""Independent reference implementations used as test oracles.

Nothing here imports the package's algorithms; each oracle recomputes its
quantity from first principles (brute force, closed forms, explicit dense
matrices) so agreement is evidence rather than tautology.
"""
from __future__ import annotations

import itertools
import math

import numpy as np


# -- geometry -----------------------------------------------------------------------

def brute_hyperboloid(seed, level, L, T_max=None):
    """Per site: smallest t with t - t0 > |x - x0| and (t-t0)^2 - (x-x0)^2 >= level^2."""
    t0, x0 = seed
    out = []
    for x in range(L):
        dx = abs(x - x0)
        t = t0 + dx + 1
        while (t - t0) ** 2 - dx ** 2 < level ** 2:
            t += 1
        out.append(t if T_max is None else min(t, T_max))
    return tuple(out)


def brute_boundary(members, L):
    """Top time per column of a finite event set."""
    return tuple(max(t for (t, x) in members if x == col) for col in range(L))


def brute_past_complete(members, L):
    S = set(members)
    for (t, x) in S:
        if t == 0:
            continue
        for y in (x - 1, x, x + 1):
            if 0 <= y < L and (t - 1, y) not in S:
                return False
    return True


# -- posets ---------------------------------------------------------------------------

def grid_cells(n):
    return list(itertools.product(*(range(v + 1) for v in n)))


def brute_linear_extensions(n):
    """All permutations of the product-of-chains poset respecting the componentwise order."""
    cells = grid_cells(n)

    def leq(a, b):
        return all(u <= v for u, v in zip(a, b))

    out = []
    for perm in itertools.permutations(cells):
        if all(not leq(perm[j], perm[i]) for i in range(len(perm)) for j in range(i + 1, len(perm))):
            out.append(list(perm))
    return out


def count_linear_extensions_brute(n):
    """Count orderings among all permutations by checking each cell's immediate predecessors."""
    cells = grid_cells(n)
    preds = {k: [k[:j] + (k[j] - 1,) + k[j + 1:] for j in range(len(k)) if k[j] > 0] for k in cells}
    count = 0
    for perm in itertools.permutations(cells):
        pos = {k: i for i, k in enumerate(perm)}
        if all(pos[p] < pos[k] for k in cells for p in preds[k]):
            count += 1
    return count


def hook_length_count(rows, cols):
    """Number of standard Young tableaux of a rows x cols rectangle."""
    hooks = 1
    for r in range(rows):
        for c in range(cols):
            hooks *= (rows - r - 1) + (cols - c - 1) + 1
    return math.factorial(rows * cols) // hooks


# -- quantum walk circuit -----------------------------------------------------------------

def single_coin(theta):
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -1j * s], [-1j * s, c]])


def single_gate_matrix(L, t, x, width, theta):
    """One-particle matrix (size 2L) of the gate at (t, x), identity elsewhere.

    Pair gate: coin on both sites, then the spin-0 components swap sites.
    Wall gate: coin, then spin flip.
    """
    m = np.eye(2 * L, dtype=np.complex128)
    C = single_coin(theta)
    if width == 2:
        block = np.zeros((4, 4), dtype=np.complex128)
        block[0:2, 0:2] = C
        block[2:4, 2:4] = C
        swapped = block.copy()
        swapped[0], swapped[2] = block[2], block[0]
        m[2 * x:2 * x + 4, 2 * x:2 * x + 4] = swapped
    else:
        m[2 * x:2 * x + 2, 2 * x:2 * x + 2] = np.array([[0, 1], [1, 0]]) @ C
    return m


def brick_layout(L, T_max, parity=0):
    gates = []
    for t in range(T_max):
        x = 0
        while x < L:
            if (x + t) % 2 == parity and x + 1 < L:
                gates.append((t, x, 2))
                x += 2
            else:
                gates.append((t, x, 1))
                x += 1
    return gates


def full_gate_matrix(L, N, gate, theta, gamma, phi):
    t, x, width = gate
    g1 = single_gate_matrix(L, t, x, width, theta)
    full = np.array([[1.0 + 0j]])
    for _ in range(N):
        full = np.kron(full, g1)
    dim = (2 * L) ** N
    phase = np.zeros(dim)
    wires = set(range(x, x + width))
    for idx in range(dim):
        rest, sites = idx, []
        for _ in range(N):
            sites.append((rest % (2 * L)) // 2)
            rest //= 2 * L
        inside = [s for s in sites if s in wires]
        total = sum(phi(t + 1, s) for s in inside)
        if len(inside) >= 2:
            total += gamma
        phase[idx] = total
    return np.exp(1j * phase)[:, None] * full


def dense_evolution(L, T_max, N, source, target, theta, gamma, phi=lambda t, x: 0.0, parity=0):
    """Dense U from ``source`` to ``target`` for cuts with target at or above source."""
    src = [min(max(v, 0), T_max) for v in source]
    tgt = [min(max(v, 0), T_max) for v in target]
    assert all(a <= b for a, b in zip(src, tgt))
    U = np.eye((2 * L) ** N, dtype=np.complex128)
    for g in brick_layout(L, T_max, parity):
        t, x, w = g
        below_t = all(t + 1 <= tgt[y] for y in range(x, x + w))
        below_s = all(t + 1 <= src[y] for y in range(x, x + w))
        if below_t and not below_s:
            U = full_gate_matrix(L, N, g, theta, gamma, phi) @ U
    return U


# -- collapse ------------------------------------------------------------------------------

def gaussian_cutoff_profile(cut, A, x, sigma):
    """Profile over sites with graph distance |z - x|, cut to A, normalized per z over A."""
    L = len(cut)
    A = set(A)
    g = np.zeros(L)
    for z in range(L):
        if z not in A:
            continue
        norm = math.sqrt(sum(math.exp(-2 * (z - a) ** 2 / (4 * sigma ** 2)) for a in A))
        g[z] = math.exp(-(z - x) ** 2 / (4 * sigma ** 2)) / norm
    return g


def exponential_bands(r, M):
    """Probabilities of landing in bands 1..M of width r (in units of tau), last band absorbing."""
    out = [math.exp(-(m - 1) * r) - math.exp(-m * r) for m in range(1, M)]
    out.append(math.exp(-(M - 1) * r))
    return out


def entropy_mi(joint):
    """Mutual information (natural log) of a dict {(a, b): p}."""
    pa, pb = {}, {}
    for (a, b), p in joint.items():
        pa[a] = pa.get(a, 0.0) + p
        pb[b] = pb.get(b, 0.0) + p
    return sum(p * math.log(p / (pa[a] * pb[b])) for (a, b), p in joint.items() if p > 0)
