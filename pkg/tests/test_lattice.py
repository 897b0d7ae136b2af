import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sbstack.constellation import ConstellationSpec
from sbstack.lattice import (
    ComplexChannel,
    EnumerationBudgetExceeded,
    RealLatticeSystem,
    StbcGenerator,
    TriangularSystem,
    babai_point,
    brute_force_ml,
    qr_reduce,
    realify,
    realify_matrix,
    shift_system,
    stbc_flatten,
    zf_point,
)
from util import mgs, mimo_trial, random_triangular


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def test_channel_shape_checks():
    ch = ComplexChannel(np.ones((3, 2)))
    assert (ch.num_rx, ch.num_tx) == (3, 2)
    with pytest.raises(ValueError):
        ComplexChannel(np.ones((2, 2, 2)))


def test_realify_scalar():
    sys = realify(ComplexChannel([[1 + 1j]]), [2 + 3j])
    assert np.array_equal(sys.generator, [[1, -1], [1, 1]])
    assert np.array_equal(sys.received, [2, 3])


def test_realify_real_identity():
    sys = realify(ComplexChannel(np.eye(2)), np.zeros(2))
    assert np.array_equal(sys.generator, np.eye(4))


def test_realify_matches_complex_arithmetic(rng):
    h, x, w = crandn(rng, 2, 2), crandn(rng, 2), crandn(rng, 2)
    sys = realify(ComplexChannel(h), h @ x + w)
    lhs = sys.generator @ np.concatenate([x.real, x.imag]) + np.concatenate([w.real, w.imag])
    assert np.allclose(lhs, sys.received, atol=1e-12, rtol=0)


def test_realify_length_mismatch():
    with pytest.raises(ValueError):
        realify(ComplexChannel(np.eye(2)), np.zeros(3))


def test_stbc_degenerate():
    sys = stbc_flatten(ComplexChannel([[1.0]]), StbcGenerator(np.eye(1), 1))
    assert np.array_equal(sys.generator, np.eye(2))


def test_stbc_identity_code(rng):
    h = crandn(rng, 2, 2)
    sys = stbc_flatten(ComplexChannel(h), StbcGenerator.identity(2))
    assert np.allclose(sys.generator, realify_matrix(np.kron(np.eye(2), h)))
    assert sys.dimension == 8


def _random_unitary(rng, k):
    q, r = np.linalg.qr(crandn(rng, k, k))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def test_stbc_vectorisation(rng):
    h = crandn(rng, 2, 2)
    code = StbcGenerator(_random_unitary(rng, 4), 2)
    x = crandn(rng, 4)
    c = (code.phi @ x).reshape(2, 2, order="F")
    hc = (h @ c).ravel(order="F")
    sys = stbc_flatten(ComplexChannel(h), code)
    out = sys.generator @ np.concatenate([x.real, x.imag])
    assert np.linalg.norm(out - np.concatenate([hc.real, hc.imag])) < 1e-10


def test_stbc_received_matrix_order(rng):
    h = crandn(rng, 2, 2)
    code = StbcGenerator.golden()
    x = crandn(rng, 4)
    y = h @ (code.phi @ x).reshape(2, 2, order="F")
    sys = stbc_flatten(ComplexChannel(h), code, y)
    assert np.allclose(sys.generator @ np.concatenate([x.real, x.imag]), sys.received)


def test_stbc_errors(rng):
    with pytest.raises(ValueError):
        stbc_flatten(ComplexChannel(crandn(rng, 3, 2)), StbcGenerator.identity(2))
    with pytest.raises(ValueError):
        stbc_flatten(ComplexChannel(crandn(rng, 3, 3)), StbcGenerator.identity(2))
    with pytest.raises(ValueError):
        StbcGenerator(np.ones((4, 4)), 2)


def test_golden_is_unitary():
    phi = StbcGenerator.golden().phi
    assert np.allclose(phi.conj().T @ phi, np.eye(4), atol=1e-12)


def test_qr_identity():
    y = np.array([0.5, -1.0, 2.0])
    tri, q = qr_reduce(RealLatticeSystem(np.eye(3), y), return_q=True)
    assert np.allclose(q, np.eye(3))
    assert np.allclose(tri.r, np.eye(3))
    assert np.allclose(tri.z, y)


def test_qr_hand_example():
    tri = qr_reduce(RealLatticeSystem(np.array([[3.0, 0.0], [4.0, 5.0]]), np.zeros(2)))
    assert np.allclose(tri.r, [[5, 4], [0, 3]])


def test_qr_random_against_mgs(rng):
    h = rng.standard_normal((8, 8))
    y = rng.standard_normal(8)
    tri, q = qr_reduce(RealLatticeSystem(h, y), return_q=True)
    assert np.linalg.norm(q @ tri.r - h) < 1e-9
    assert np.allclose(q.T @ q, np.eye(8), atol=1e-9)
    assert np.linalg.norm(tri.z - q.T @ y) < 1e-12
    q2, r2 = mgs(h)
    assert np.allclose(tri.r, r2, atol=1e-9)
    assert np.all(np.diag(tri.r) > 0)


def test_qr_rank_deficient():
    h = np.array([[1.0, 2.0], [2.0, 4.0]])
    with pytest.raises(np.linalg.LinAlgError):
        qr_reduce(RealLatticeSystem(h, np.zeros(2)))


def test_triangular_validation():
    with pytest.raises(ValueError):
        TriangularSystem(np.array([[1.0, 0.0], [1.0, 1.0]]), np.zeros(2))
    with pytest.raises(ValueError):
        TriangularSystem(np.array([[-1.0, 0.0], [0.0, 1.0]]), np.zeros(2))


def test_metric_preserved(rng):
    tri, x, h, y = mimo_trial(rng, 4, 4, 16, 10)
    for _ in range(20):
        v = rng.integers(-3, 4, 8)
        d = y - h @ v
        assert tri.residual + tri.metric(v) == pytest.approx(d @ d, abs=1e-9)


def test_zf_point_examples(rng):
    assert np.allclose(zf_point(TriangularSystem(np.eye(2), [1.5, -0.2])), [1.5, -0.2])
    assert np.allclose(zf_point(TriangularSystem([[2.0, 1.0], [0.0, 1.0]], [5.0, 2.0])), [1.5, 2])
    sys = random_triangular(rng, 6)
    assert np.linalg.norm(sys.r @ zf_point(sys) - sys.z) < 1e-10


def test_babai_examples():
    assert babai_point(TriangularSystem(np.eye(2), [0.4, -0.3])).tolist() == [0, 0]
    assert babai_point(TriangularSystem([[1.0, 0.9], [0.0, 1.0]], [0.0, 0.6])).tolist() == [-1, 1]
    a16 = ConstellationSpec(16)
    assert babai_point(TriangularSystem([[1.0]], [5.2]), a16).tolist() == [3]


def test_babai_matches_ml_in_one_dimension(rng):
    a = ConstellationSpec(16)
    for _ in range(50):
        sys = TriangularSystem([[abs(rng.standard_normal()) + 0.1]], [rng.standard_normal() * 5])
        assert babai_point(sys, a).tolist() == brute_force_ml(sys, a)[0].tolist()


def test_babai_matches_ml_for_diagonal(rng):
    for _ in range(8):
        r = np.diag(rng.uniform(0.5, 2.0, 4))
        sys = TriangularSystem(r, rng.standard_normal(4) * 2)
        x = babai_point(sys)
        grid = np.array(list(itertools.product(range(-12, 13), repeat=4))).T
        d = sys.z[:, None] - sys.r @ grid
        assert sys.metric(x) == pytest.approx(np.min(np.einsum("ij,ij->j", d, d)))


def test_brute_force_zero_noise():
    a = ConstellationSpec(4)
    p = np.array([1, -1, -1, 1])
    x, cost = brute_force_ml(TriangularSystem(np.eye(4), p.astype(float)), a)
    assert x.tolist() == p.tolist() and cost == 0


def test_brute_force_two_dim(rng):
    a = ConstellationSpec(4)
    sys = random_triangular(rng, 2)
    pts = [np.array(v) for v in itertools.product([-1, 1], repeat=2)]
    best = min(pts, key=sys.metric)
    x, cost = brute_force_ml(sys, a)
    assert x.tolist() == best.tolist()
    assert cost == pytest.approx(sys.metric(best), abs=1e-12)


def test_brute_force_tie_is_lexicographic():
    a = ConstellationSpec(4)
    x, _ = brute_force_ml(TriangularSystem(np.eye(2), [0.0, 0.0]), a)
    assert x.tolist() == [-1, -1]


def test_brute_force_rotation_invariance(rng):
    tri, _, h, y = mimo_trial(rng, 2, 2, 16, 5)
    x, cost = brute_force_ml(tri, ConstellationSpec(16))
    d = y - h @ x
    assert d @ d == pytest.approx(cost + tri.residual, abs=1e-9)


def test_brute_force_budget():
    with pytest.raises(EnumerationBudgetExceeded):
        brute_force_ml(TriangularSystem(np.eye(8), np.zeros(8)), ConstellationSpec(64), budget=1000)


def test_shift_preserves_metric(rng):
    a = ConstellationSpec(16)
    sys = random_triangular(rng, 4)
    sh = shift_system(sys, a)
    for _ in range(10):
        x = a.from_shifted(rng.integers(0, 4, 4))
        assert sh.metric(a.to_shifted(x)) == pytest.approx(sys.metric(x))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_realify_is_linear(seed):
    rng = np.random.default_rng(seed)
    h = crandn(rng, 2, 2)
    g = realify_matrix(h)
    x1, x2 = rng.integers(-3, 4, 4), rng.integers(-3, 4, 4)
    assert np.allclose(g @ (x1 + x2), g @ x1 + g @ x2, atol=1e-12)
    code = StbcGenerator.golden()
    s = stbc_flatten(ComplexChannel(h), code).generator
    u1, u2 = rng.integers(-3, 4, 8), rng.integers(-3, 4, 8)
    assert np.allclose(s @ (u1 + u2), s @ u1 + s @ u2, atol=1e-12)
