import numpy as np
import pytest

from frislab.numerics import (
    AllZeroCoefficientsError,
    NonSymmetricError,
    QuarticCoefficients,
    StronglyIndefiniteError,
    min_eigenpair,
    psd_sqrt,
    quartic_roots,
    unit_circle_roots,
)


class TestPsdSqrt:
    def test_identity(self):
        np.testing.assert_allclose(psd_sqrt(np.eye(4)), np.eye(4), atol=1e-12)

    def test_diagonal(self):
        np.testing.assert_allclose(psd_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]), atol=1e-12)

    def test_random_psd_construct_check(self, rng):
        b = rng.standard_normal((6, 6))
        mat = b @ b.T
        root = psd_sqrt(mat)
        err = np.linalg.norm(root @ root - mat) / np.linalg.norm(mat)
        assert err <= 1e-8
        np.testing.assert_allclose(root, root.T)

    def test_spectrum_is_sqrt_of_clamped_spectrum(self, rng):
        b = rng.standard_normal((5, 5))
        mat = b @ b.T
        # push one eigenvalue slightly negative, within the clamp band
        vals, vecs = np.linalg.eigh(mat)
        vals[0] = -1e-12 * vals[-1]
        mat = (vecs * vals) @ vecs.T
        got = np.sort(np.linalg.eigvalsh(psd_sqrt(mat)))
        want = np.sqrt(np.clip(np.sort(vals), 0.0, None))
        np.testing.assert_allclose(got, want, atol=1e-8 * max(1.0, vals[-1]))

    def test_rejects_asymmetric(self):
        mat = np.array([[1.0, 2.0], [0.0, 1.0]])
        with pytest.raises(NonSymmetricError):
            psd_sqrt(mat)

    def test_rejects_strongly_indefinite(self):
        with pytest.raises(StronglyIndefiniteError):
            psd_sqrt(np.diag([1.0, -0.5]))


class TestMinEigenpair:
    def test_diagonal(self):
        value, vector = min_eigenpair(np.diag([3.0, -1.0, 5.0]))
        assert value == pytest.approx(-1.0, abs=1e-12)
        np.testing.assert_allclose(np.abs(vector), [0.0, 1.0, 0.0], atol=1e-12)

    def test_degenerate_spectrum_contract_is_residual_only(self):
        value, vector = min_eigenpair(np.eye(5))
        assert value == pytest.approx(1.0, abs=1e-12)
        assert np.linalg.norm(vector) == pytest.approx(1.0, abs=1e-12)
        assert np.linalg.norm(np.eye(5) @ vector - value * vector) <= 1e-8 * np.sqrt(5)

    def test_random_rayleigh_oracle(self, rng):
        a = rng.standard_normal((8, 8))
        mat = 0.5 * (a + a.T)
        value, vector = min_eigenpair(mat)
        assert np.linalg.norm(mat @ vector - value * vector) <= 1e-8 * np.linalg.norm(mat)
        smallest = np.inf
        for _ in range(10):
            probes = rng.standard_normal((100_000, 8))
            probes /= np.linalg.norm(probes, axis=1, keepdims=True)
            smallest = min(smallest, float(np.einsum("ij,jk,ik->i", probes, mat, probes).min()))
        assert value <= smallest + 1e-9

    def test_residual_bound_across_sizes(self, rng):
        for _ in range(200):
            n = int(rng.integers(2, 65))
            a = rng.standard_normal((n, n))
            mat = 0.5 * (a + a.T)
            value, vector = min_eigenpair(mat)
            assert np.linalg.norm(mat @ vector - value * vector) <= 1e-8 * np.linalg.norm(mat)
            assert np.linalg.norm(vector) == pytest.approx(1.0, abs=1e-12)


class TestQuarticRoots:
    def test_cubic_fallback_unit_pair(self):
        q = QuarticCoefficients.from_phase_coefficients(1.0 + 0j, 0j)
        roots = np.sort_complex(quartic_roots(q))
        np.testing.assert_allclose(roots, [-1.0, 1.0], atol=1e-12)

    def test_fourth_roots_of_unity(self):
        q = QuarticCoefficients.from_phase_coefficients(0j, 1.0 + 0j)
        roots = quartic_roots(q)
        assert roots.size == 4
        np.testing.assert_allclose(np.sort(np.abs(roots)), np.ones(4), atol=1e-10)
        np.testing.assert_allclose(np.sort_complex(roots**4), np.ones(4), atol=1e-8)

    def test_residual_oracle_random(self, rng):
        for _ in range(300):
            lin = complex(rng.standard_normal(), rng.standard_normal())
            quad = complex(rng.standard_normal(), rng.standard_normal())
            q = QuarticCoefficients.from_phase_coefficients(lin, quad)
            roots = quartic_roots(q)
            assert roots.size >= 1
            assert np.all(q.residual(roots) <= 1e-8 * q.scale)

    def test_all_zero_raises(self):
        with pytest.raises(AllZeroCoefficientsError):
            quartic_roots(QuarticCoefficients.from_phase_coefficients(0j, 0j))

    def test_unit_root_exists_for_phase_instances(self, rng):
        # stationarity of a continuous periodic objective guarantees at
        # least one unit-modulus root for any nonzero coefficient pair
        for _ in range(1000):
            lin = complex(rng.standard_normal(), rng.standard_normal())
            quad = complex(rng.standard_normal(), rng.standard_normal())
            q = QuarticCoefficients.from_phase_coefficients(lin, quad)
            on_circle = unit_circle_roots(quartic_roots(q))
            assert on_circle.size >= 1
            np.testing.assert_allclose(np.abs(on_circle), 1.0, atol=1e-12)


def test_unit_circle_roots_filters_and_normalizes():
    roots = np.array([1.0000005j, 2.0 + 0j, -1.0 + 1e-8j])
    kept = unit_circle_roots(roots)
    assert kept.size == 2
    np.testing.assert_allclose(np.abs(kept), 1.0, atol=1e-15)
