"""Hot loop of the gate circuit, with a compiled and a NumPy implementation.

``apply_gate_sequence`` applies a list of gates, in order, to the columns of
a C-contiguous complex128 array of shape ``(dim, batch)`` with
``dim = Ld ** N``.  Gate ``g`` multiplies the ``sizes[g]`` local basis states
starting at ``starts[g]`` of every particle by ``blocks[g]`` and then applies
the diagonal ``phases[phase_idx[g]]`` (skipped when the index is negative).
With ``inverse`` the phase is applied first, as needed when undoing gates.

The compiled extension is used when it was built; otherwise the NumPy
version is selected at import.  :func:`use_backend` switches explicitly.
"""
from __future__ import annotations

import numpy as np


def _apply_gate_sequence_numpy(state, N, Ld, starts, sizes, blocks, phase_idx, phases, inverse):
    batch = state.shape[1]
    for g in range(len(starts)):
        b, s, k = int(sizes[g]), int(starts[g]), int(phase_idx[g])
        if inverse and k >= 0:
            state *= phases[k][:, None]
        blk = blocks[g, :b, :b]
        for p in range(N):
            view = state.reshape(Ld ** p, Ld, Ld ** (N - 1 - p) * batch)[:, s:s + b, :]
            view[...] = np.einsum("ij,pjq->piq", blk, view)
        if not inverse and k >= 0:
            state *= phases[k][:, None]


_IMPLEMENTATIONS = {"numpy": _apply_gate_sequence_numpy}

try:  # pragma: no cover - depends on the build
    from ._kernels import apply_gate_sequence as _compiled

    _IMPLEMENTATIONS["cython"] = _compiled
except ImportError:  # pragma: no cover - depends on the build
    pass

BACKEND = "cython" if "cython" in _IMPLEMENTATIONS else "numpy"
_active = _IMPLEMENTATIONS[BACKEND]


def apply_gate_sequence(state, N, Ld, starts, sizes, blocks, phase_idx, phases, inverse=False) -> None:
    _active(state, int(N), int(Ld), starts, sizes, blocks, phase_idx, phases, bool(inverse))


def available_backends() -> list[str]:
    return sorted(_IMPLEMENTATIONS)


def use_backend(name: str) -> str:
    """Switch the active kernel; returns the previously active backend name."""
    global BACKEND, _active
    if name not in _IMPLEMENTATIONS:
        raise ValueError(f"backend {name!r} not available (have {available_backends()})")
    previous = BACKEND
    BACKEND = name
    _active = _IMPLEMENTATIONS[name]
    return previous
