import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from grwflash.lattice import Cut
from grwflash.quantum import (
    CutSpace,
    DenseOp,
    StateVec,
    gaussian_packet,
    hermitian_sqrt,
    mult_operator,
    operator_norm,
    position_projector,
    product_state,
    random_state,
)

SPACE = CutSpace(Cut((0, 1, 1, 2)), N=2, d=2)
site_sets = st.sets(st.integers(0, 3))
site_values = arrays(np.float64, 4, elements=st.floats(-3, 3))


def test_space_dimensions_and_basis_order():
    assert SPACE.L == 4 and SPACE.local_dim == 8 and SPACE.dim == 64
    # slot 1 is the most significant index, then site, then spin
    assert SPACE.index([(0, 0), (0, 1)]) == 1
    assert SPACE.index([(0, 1), (0, 0)]) == 8
    assert SPACE.index([(3, 1), (3, 1)]) == 63
    assert SPACE.site_of(1)[SPACE.index([(2, 1), (1, 0)])] == 2
    assert SPACE.site_of(2)[SPACE.index([(2, 1), (1, 0)])] == 1


def test_projector_examples():
    for slot in (1, 2):
        assert np.allclose(position_projector(SPACE, slot, range(4)).matrix, np.eye(64))
        assert not position_projector(SPACE, slot, []).matrix.any()
    with pytest.raises(ValueError):
        position_projector(SPACE, 1, [4])
    with pytest.raises(ValueError):
        position_projector(SPACE, 3, [0])


@given(site_sets, site_sets, st.sampled_from([1, 2]))
def test_projector_algebra(A, B, slot):
    PA = position_projector(SPACE, slot, A).matrix
    PB = position_projector(SPACE, slot, B).matrix
    assert np.max(np.abs(PA @ PA - PA)) < 1e-12
    assert np.max(np.abs(PA - PA.conj().T)) < 1e-12
    PAB = position_projector(SPACE, slot, A & B).matrix
    assert np.max(np.abs(PA @ PB - PAB)) < 1e-12
    if not A & B:
        assert np.max(np.abs(position_projector(SPACE, slot, A | B).matrix - PA - PB)) < 1e-12


@given(site_values, site_values, st.sampled_from([1, 2]), st.sampled_from([1, 2]))
def test_multiplication_operators(f, g, s1, s2):
    Pf = mult_operator(SPACE, s1, f).matrix
    Pg = mult_operator(SPACE, s2, g).matrix
    assert np.array_equal(Pf @ Pg, Pg @ Pf)
    if s1 == s2:
        assert np.allclose(Pf @ Pg, mult_operator(SPACE, s1, f * g).matrix, atol=1e-12)


def test_mult_operator_consistency():
    assert np.allclose(mult_operator(SPACE, 1, lambda x: 1.0).matrix, np.eye(64))
    A = {1, 3}
    ind = [1.0 if x in A else 0.0 for x in range(4)]
    assert np.array_equal(mult_operator(SPACE, 2, ind).matrix, position_projector(SPACE, 2, A).matrix)
    with pytest.raises(ValueError):
        mult_operator(SPACE, 1, [1.0, 2.0])


def test_hermitian_sqrt_examples(rng):
    assert np.allclose(hermitian_sqrt(np.eye(3)), np.eye(3))
    assert np.allclose(hermitian_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))
    for _ in range(10):
        B = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        A = B.conj().T @ B
        R = hermitian_sqrt(A)
        assert np.max(np.abs(R @ R - A)) < 1e-8 * max(1.0, np.abs(A).max())
        assert np.min(np.linalg.eigvalsh(R)) > -1e-10
    with pytest.raises(ValueError):
        hermitian_sqrt(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        hermitian_sqrt(np.diag([1.0, -1.0]))


def test_hermitian_sqrt_keeps_denseop_type():
    space = CutSpace(Cut.flat(2, 0), 1, 1)
    op = DenseOp(np.diag([4.0, 1.0]), space)
    out = hermitian_sqrt(op)
    assert isinstance(out, DenseOp) and np.allclose(out.matrix, np.diag([2.0, 1.0]))


def test_operator_norm_is_largest_singular_value(rng):
    A = rng.normal(size=(5, 5))
    assert operator_norm(A) == pytest.approx(np.linalg.svd(A, compute_uv=False)[0])
    assert operator_norm(np.zeros((0, 0))) == 0.0


def test_states(rng):
    psi = random_state(SPACE, rng)
    assert psi.norm() == pytest.approx(1.0, abs=1e-12)
    assert psi.inner(psi) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        StateVec(np.zeros(3), SPACE)
    with pytest.raises(ValueError):
        StateVec(np.full(64, np.nan), SPACE)
    with pytest.raises(ValueError):
        StateVec(np.zeros(64), SPACE).normalized()


def test_product_state_and_packets():
    a = gaussian_packet(4, 2, 1.0, 0.7)
    b = gaussian_packet(4, 2, 2.5, 1.2, spin=[1, 0], momentum=0.3)
    assert np.linalg.norm(a) == pytest.approx(1.0) and np.linalg.norm(b) == pytest.approx(1.0)
    psi = product_state(SPACE, [a, b])
    assert np.allclose(psi.amplitudes.reshape(8, 8), np.outer(a, b))
    with pytest.raises(ValueError):
        product_state(SPACE, [a])


def test_denseop_composition(rng):
    A = DenseOp(rng.normal(size=(64, 64)), SPACE)
    B = DenseOp(rng.normal(size=(64, 64)), SPACE)
    psi = random_state(SPACE, rng)
    assert np.allclose((A @ B).matrix, A.matrix @ B.matrix)
    assert np.allclose((A @ psi).amplitudes, A.matrix @ psi.amplitudes)
    assert np.allclose(A.H.matrix, A.matrix.conj().T)
    assert A.expectation(psi) == pytest.approx(np.vdot(psi.amplitudes, A.matrix @ psi.amplitudes))
    with pytest.raises(ValueError):
        DenseOp(np.eye(3), SPACE)
