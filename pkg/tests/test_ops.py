import numpy as np
import pytest

from locckit import ops


def test_spectral_norm_diagonal():
    assert ops.spectral_norm(np.diag([1.0, 2.0])) == pytest.approx(2.0)


def test_spectral_norm_offdiagonal():
    x = np.sqrt(0.5) * ops.ketbra(0, 1, 2)
    assert ops.spectral_norm(x) == pytest.approx(np.sqrt(0.5), abs=1e-12)


def test_spectral_norm_zero():
    assert ops.spectral_norm(np.zeros((3, 3))) == 0.0


def test_spectral_norm_submultiplicative():
    rng = ops.rng_from_seed(11)
    for _ in range(50):
        d = int(rng.integers(2, 7))
        x = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        y = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        assert ops.spectral_norm(x @ y) <= ops.spectral_norm(x) * ops.spectral_norm(y) + 1e-12


def test_psd_sqrt_identity():
    np.testing.assert_allclose(ops.psd_sqrt(np.eye(2)), np.eye(2), atol=1e-12)


def test_psd_sqrt_diagonal_values():
    # q = 1/2 and the diag(q, 1) operator at q = 0.25
    np.testing.assert_allclose(
        ops.psd_sqrt(0.5 * ops.projector(0, 1)), np.sqrt(0.5) * ops.projector(0, 1), atol=1e-12
    )
    np.testing.assert_allclose(
        ops.psd_sqrt(np.diag([0.25, 1.0])), np.diag([0.5, 1.0]), atol=1e-12
    )


def test_psd_sqrt_squares_back():
    rng = ops.rng_from_seed(3)
    for _ in range(100):
        d = int(rng.integers(1, 7))
        p = ops.random_psd(rng, d)
        s = ops.psd_sqrt(p)
        np.testing.assert_allclose(s @ s, p, atol=1e-10 * max(1.0, np.abs(p).max()))


def test_psd_sqrt_rejects_non_hermitian():
    with pytest.raises(ValueError):
        ops.psd_sqrt(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_psd_sqrt_rejects_negative():
    with pytest.raises(ValueError):
        ops.psd_sqrt(np.diag([-0.5, 1.0]))


def test_polar_projector_kernel_convention():
    u, p = ops.polar_decompose(ops.projector(1, 2))
    np.testing.assert_allclose(u, np.eye(2), atol=1e-12)
    np.testing.assert_allclose(p, ops.projector(1, 2), atol=1e-12)


def test_polar_rank_deficient_example():
    # sqrt(1-q)|0><1| at q = 0.75: P = 0.5 |1><1|, U maps |1> -> |0> on support
    k = 0.5 * ops.ketbra(0, 1, 2)
    u, p = ops.polar_decompose(k)
    np.testing.assert_allclose(p, 0.5 * ops.projector(1, 2), atol=1e-12)
    np.testing.assert_allclose(u @ p, k, atol=1e-12)
    np.testing.assert_allclose(u @ ops.ket(1, 2), ops.ket(0, 2), atol=1e-12)


def test_polar_identity():
    u, p = ops.polar_decompose(np.eye(3))
    np.testing.assert_allclose(u, np.eye(3), atol=1e-12)
    np.testing.assert_allclose(p, np.eye(3), atol=1e-12)


def test_polar_reconstructs_random():
    rng = ops.rng_from_seed(7)
    for _ in range(100):
        d = int(rng.integers(1, 7))
        k = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        u, p = ops.polar_decompose(k)
        np.testing.assert_allclose(u @ p, k, atol=1e-9)
        # isometric on the support of p
        pi = ops.support_projector(p)
        np.testing.assert_allclose(pi @ ops.dagger(u) @ u @ pi, pi, atol=1e-9)


def test_pseudo_inverse_examples():
    np.testing.assert_allclose(
        ops.pseudo_inverse(ops.projector(0, 2)), ops.projector(0, 2), atol=1e-12
    )
    np.testing.assert_allclose(
        ops.pseudo_inverse(np.diag([0.5, 1.0])), np.diag([2.0, 1.0]), atol=1e-12
    )
    z = np.zeros((3, 3))
    np.testing.assert_allclose(ops.pseudo_inverse(z), z, atol=0)


def test_pseudo_inverse_moore_penrose_identities():
    rng = ops.rng_from_seed(19)
    for _ in range(60):
        d = int(rng.integers(2, 7))
        r = int(rng.integers(1, d))
        a = rng.standard_normal((d, r)) + 1j * rng.standard_normal((d, r))
        b = rng.standard_normal((r, d)) + 1j * rng.standard_normal((r, d))
        x = a @ b  # rank <= r < d
        xp = ops.pseudo_inverse(x)
        np.testing.assert_allclose(x @ xp @ x, x, atol=1e-9)
        np.testing.assert_allclose(xp @ x @ xp, xp, atol=1e-9)
        np.testing.assert_allclose(ops.dagger(x @ xp), x @ xp, atol=1e-9)
        np.testing.assert_allclose(ops.dagger(xp @ x), xp @ x, atol=1e-9)


def test_proportional_basic():
    p1 = ops.projector(1, 2)
    assert ops.proportional(p1, p1)
    assert ops.proportional(3.0 * p1, 7.0 * p1)
    half = 0.5 * ops.projector(0, 2) + ops.projector(1, 2)
    assert not ops.proportional(np.eye(2), half)


def test_proportional_example_distance():
    # normalized difference of I/2 and (q[0]+[1])/(1+q) at q = 0.5
    d = ops.normalized_ray_distance(np.eye(2), 0.5 * ops.projector(0, 2) + ops.projector(1, 2))
    assert d == pytest.approx(np.sqrt((1 / 2 - 1 / 3) ** 2 + (1 / 2 - 2 / 3) ** 2), abs=1e-12)


def test_proportional_rejects_zero():
    with pytest.raises(ValueError):
        ops.proportional(np.zeros((2, 2)), np.eye(2))


def test_proportional_equivalence_on_separated_sets():
    rng = ops.rng_from_seed(5)
    tol = ops.TOL_RAY
    for _ in range(20):
        base = [ops.random_psd(rng, 3) for _ in range(4)]
        # scalar multiples land at distance 0 <= tol/2; distinct random rays
        # are far beyond 2 * tol almost surely
        elems = base + [float(rng.uniform(0.5, 2.0)) * b for b in base]
        n = len(elems)
        rel = [[ops.proportional(elems[i], elems[j], tol) for j in range(n)] for i in range(n)]
        for i in range(n):
            assert rel[i][i]
            for j in range(n):
                assert rel[i][j] == rel[j][i]
                for k in range(n):
                    if rel[i][j] and rel[j][k]:
                        assert rel[i][k]


def test_kraus_proportional_phase_insensitive():
    rng = ops.rng_from_seed(23)
    k = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    assert ops.kraus_proportional(k, np.exp(1j * 0.7) * 2.0 * k)
    other = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    assert not ops.kraus_proportional(k, other)
    assert ops.kraus_proportional(np.zeros((2, 2)), np.zeros((2, 2)))
    assert not ops.kraus_proportional(np.zeros((2, 2)), np.eye(2))
