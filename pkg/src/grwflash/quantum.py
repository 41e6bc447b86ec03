"""Finite-dimensional Hilbert spaces attached to cuts.

A configuration of ``N`` distinguishable particles assigns each one a site
and an internal (spin) state.  Basis vectors are ordered lexicographically by
``(particle slot, site, spin)`` in C order, i.e. the amplitude array reshapes
to ``(L, d) * N`` with particle 1 outermost.  Every cut carries a copy of the
same space, so operators are plain matrices in this basis.

Particle slots are 1-based in the public API.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence, Union

import numpy as np

from .lattice import Cut

SiteFunction = Union[Callable[[int], float], Sequence[float], np.ndarray]


@dataclass(frozen=True)
class CutSpace:
    cut: Cut
    N: int
    d: int = 2

    def __post_init__(self):
        if self.N < 1 or self.d < 1:
            raise ValueError("need at least one particle and one internal state")

    @property
    def L(self) -> int:
        return len(self.cut)

    @property
    def local_dim(self) -> int:
        return self.L * self.d

    @property
    def dim(self) -> int:
        return self.local_dim ** self.N

    @property
    def shape(self) -> tuple:
        return (self.local_dim,) * self.N

    def on(self, cut: Cut) -> "CutSpace":
        return CutSpace(cut, self.N, self.d)

    def index(self, config: Sequence[tuple]) -> int:
        """Basis index of ``((site_1, spin_1), ..., (site_N, spin_N))``."""
        idx = 0
        for site, spin in config:
            idx = idx * self.local_dim + site * self.d + spin
        return idx

    def site_of(self, slot: int) -> np.ndarray:
        """Site of particle ``slot`` for every basis vector (length ``dim``)."""
        _check_slot(self, slot)
        local_sites = np.repeat(np.arange(self.L), self.d)
        shape = [1] * self.N
        shape[slot - 1] = self.local_dim
        return np.broadcast_to(local_sites.reshape(shape), self.shape).reshape(-1)


def _check_slot(space: CutSpace, slot: int) -> None:
    if not 1 <= slot <= space.N:
        raise ValueError(f"particle slot {slot} outside 1..{space.N}")


def _site_values(space: CutSpace, f: SiteFunction) -> np.ndarray:
    if callable(f):
        vals = np.array([f(x) for x in range(space.L)], dtype=float)
    else:
        vals = np.asarray(f, dtype=float)
    if vals.shape != (space.L,):
        raise ValueError(f"site function must have {space.L} values, got shape {vals.shape}")
    return vals


@dataclass
class StateVec:
    amplitudes: np.ndarray
    space: CutSpace

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        if self.amplitudes.shape != (self.space.dim,):
            raise ValueError(f"state has {self.amplitudes.size} amplitudes, space needs {self.space.dim}")
        if not np.all(np.isfinite(self.amplitudes)):
            raise ValueError("state has non-finite amplitudes")

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVec":
        nrm = self.norm()
        if nrm == 0:
            raise ValueError("cannot normalize the zero vector")
        return StateVec(self.amplitudes / nrm, self.space)

    def inner(self, other: "StateVec") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass
class DenseOp:
    matrix: np.ndarray
    domain: CutSpace
    codomain: CutSpace = field(default=None)

    def __post_init__(self):
        if self.codomain is None:
            self.codomain = self.domain
        self.matrix = np.asarray(self.matrix, dtype=np.complex128)
        if self.matrix.shape != (self.codomain.dim, self.domain.dim):
            raise ValueError(
                f"matrix shape {self.matrix.shape} does not match spaces ({self.codomain.dim}, {self.domain.dim})"
            )

    def __matmul__(self, other):
        if isinstance(other, DenseOp):
            return DenseOp(self.matrix @ other.matrix, other.domain, self.codomain)
        if isinstance(other, StateVec):
            return StateVec(self.matrix @ other.amplitudes, self.codomain)
        return self.matrix @ other

    @property
    def H(self) -> "DenseOp":
        return DenseOp(self.matrix.conj().T, self.codomain, self.domain)

    def expectation(self, psi: StateVec) -> complex:
        return complex(np.vdot(psi.amplitudes, self.matrix @ psi.amplitudes))


def slot_diagonal(space: CutSpace, slot: int, f: SiteFunction) -> np.ndarray:
    """Diagonal of the multiplication operator ``f(site of particle slot)``."""
    return _site_values(space, f)[space.site_of(slot)]


def mult_operator(space: CutSpace, slot: int, f: SiteFunction) -> DenseOp:
    return DenseOp(np.diag(slot_diagonal(space, slot, f)).astype(np.complex128), space)


def position_projector(space: CutSpace, slot: int, A: Iterable[int]) -> DenseOp:
    sites = set(A)
    bad = [x for x in sites if not 0 <= x < space.L]
    if bad:
        raise ValueError(f"sites {bad} are outside the strip")
    indicator = np.array([1.0 if x in sites else 0.0 for x in range(space.L)])
    return mult_operator(space, slot, indicator)


def operator_norm(A) -> float:
    """Largest singular value (spectral norm)."""
    m = A.matrix if isinstance(A, DenseOp) else np.asarray(A)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def hermitian_sqrt(op, herm_tol: float = 1e-10, neg_tol: float = 1e-8):
    """Positive square root of a Hermitian PSD matrix (or :class:`DenseOp`)."""
    m = op.matrix if isinstance(op, DenseOp) else np.asarray(op, dtype=np.complex128)
    scale = max(1.0, float(np.max(np.abs(m))) if m.size else 1.0)
    if np.max(np.abs(m - m.conj().T), initial=0.0) > herm_tol * scale:
        raise ValueError("operator is not Hermitian")
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    if w.size and w.min() < -neg_tol * scale:
        raise ValueError(f"operator has a negative eigenvalue {w.min():.3e}; expected positive semidefinite")
    root = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    if isinstance(op, DenseOp):
        return DenseOp(root, op.domain, op.codomain)
    return root


def random_state(space: CutSpace, rng: np.random.Generator) -> StateVec:
    amps = rng.normal(size=space.dim) + 1j * rng.normal(size=space.dim)
    return StateVec(amps, space).normalized()


def gaussian_packet(L: int, d: int, center: float, width: float, spin: Sequence[complex] | None = None,
                    momentum: float = 0.0) -> np.ndarray:
    """Single-particle wave packet as a length ``L*d`` vector (normalized)."""
    x = np.arange(L)
    profile = np.exp(-((x - center) ** 2) / (4 * width * width) + 1j * momentum * x)
    spin_vec = np.ones(d) / np.sqrt(d) if spin is None else np.asarray(spin, dtype=np.complex128)
    vec = np.kron(profile, spin_vec)
    return vec / np.linalg.norm(vec)


def product_state(space: CutSpace, factors: Sequence[np.ndarray]) -> StateVec:
    if len(factors) != space.N:
        raise ValueError(f"need {space.N} single-particle factors, got {len(factors)}")
    amps = np.array([1.0 + 0j])
    for f in factors:
        f = np.asarray(f, dtype=np.complex128)
        if f.shape != (space.local_dim,):
            raise ValueError(f"factor has shape {f.shape}, expected ({space.local_dim},)")
        amps = np.kron(amps, f)
    return StateVec(amps, space)
