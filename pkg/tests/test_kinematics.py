import numpy as np
import pytest

from monopann import kinematics as kin
from monopann.errors import (
    InvalidStretchError,
    InvertedConfigurationError,
    SingularTensorError,
)

from conftest import central_difference, central_difference_tensor


class TestTensorCross:
    def test_identity_pair(self):
        np.testing.assert_allclose(
            kin.tensor_cross(np.eye(3), np.eye(3)), 2.0 * np.eye(3)
        )

    def test_symmetric_in_arguments(self, rng):
        a = rng.standard_normal((3, 3))
        b = rng.standard_normal((3, 3))
        np.testing.assert_allclose(
            kin.tensor_cross(a, b), kin.tensor_cross(b, a), atol=1e-14
        )

    def test_half_self_cross_is_cofactor(self):
        f = np.diag([2.0, 0.5, 1.0])
        np.testing.assert_allclose(
            0.5 * kin.tensor_cross(f, f), np.diag([0.5, 2.0, 1.0]), atol=1e-14
        )

    def test_operator_matches_product(self, rng):
        m = rng.standard_normal((3, 3))
        x = rng.standard_normal((3, 3))
        op = kin.cross_operator(m)
        np.testing.assert_allclose(
            np.einsum("iIjJ,jJ->iI", op, x), kin.tensor_cross(m, x), atol=1e-14
        )


class TestCofactor:
    def test_identity(self):
        np.testing.assert_array_equal(kin.cofactor(np.eye(3)), np.eye(3))

    def test_diagonal(self):
        np.testing.assert_allclose(
            kin.cofactor(np.diag([2.0, 0.5, 1.0])), np.diag([0.5, 2.0, 1.0]),
            atol=1e-15,
        )

    def test_cross_product_identity_random(self, rng):
        for _ in range(1000):
            f = rng.standard_normal((3, 3))
            if abs(np.linalg.det(f)) < 1e-2:
                continue
            cof = kin.cofactor(f)
            alt = 0.5 * kin.tensor_cross(f, f)
            np.testing.assert_allclose(cof, alt, rtol=1e-12, atol=1e-12)

    def test_singular_raises(self):
        with pytest.raises(SingularTensorError):
            kin.cofactor(np.diag([1.0, 1.0, 0.0]))

    def test_batched(self, rng):
        fs = np.stack([kin.random_unimodular(rng) for _ in range(5)])
        batch = kin.cofactor(fs)
        for k in range(5):
            np.testing.assert_array_equal(batch[k], kin.cofactor(fs[k]))


class TestIsochoricInvariants:
    def test_reference_state(self):
        i1, i2 = kin.isochoric_invariants(np.eye(3))
        assert i1 == pytest.approx(3.0, abs=1e-14)
        assert i2 == pytest.approx(3.0, abs=1e-14)

    def test_uniaxial_stretch_two(self):
        # incompressible uniaxial: I1 = lam^2 + 2/lam, I2 = 2 lam + lam^-2
        f = kin.uniaxial_gradient(2.0)
        i1, i2 = kin.isochoric_invariants(f)
        assert i1 == pytest.approx(5.0, rel=1e-13)
        assert i2 == pytest.approx(4.25, rel=1e-13)

    def test_scale_invariance(self, rng):
        f = np.eye(3) + 0.3 * rng.standard_normal((3, 3))
        if np.linalg.det(f) <= 0:
            f = np.eye(3)
        a = kin.isochoric_invariants(f)
        b = kin.isochoric_invariants(2.0 * f)
        np.testing.assert_allclose(a, b, rtol=1e-12)

    def test_objectivity_and_isotropy(self, rng):
        for _ in range(1000):
            f = kin.random_unimodular(rng)
            q1 = kin.random_rotation(rng)
            q2 = kin.random_rotation(rng)
            ref = kin.isochoric_invariants(f)
            rot = kin.isochoric_invariants(q1 @ f @ q2.T)
            np.testing.assert_allclose(rot, ref, rtol=1e-12, atol=1e-12)

    def test_lower_bound_on_modes(self, rng):
        mode = kin.DeformationMode(
            kin.ModeKind.PRINCIPAL_STRETCH_GRID,
            (np.linspace(0.5, 3.0, 7), np.linspace(0.5, 3.0, 7)),
        )
        i1, i2 = kin.isochoric_invariants(kin.generate_mode(mode))
        assert np.all(i1 >= 3.0 - 1e-12)
        assert np.all(i2 >= 3.0 - 1e-12)

    def test_inverted_configuration_raises(self):
        with pytest.raises(InvertedConfigurationError):
            kin.isochoric_invariants(np.diag([-1.0, 1.0, 1.0]))


class TestInvariantDerivatives:
    def test_vanish_at_identity(self):
        d1, d2 = kin.invariant_first_derivatives(np.eye(3))
        np.testing.assert_allclose(d1, 0.0, atol=1e-14)
        np.testing.assert_allclose(d2, 0.0, atol=1e-14)

    def test_first_derivatives_match_fd(self, rng):
        for _ in range(20):
            f = kin.random_unimodular(rng)
            d1, d2 = kin.invariant_first_derivatives(f)
            fd1 = central_difference(lambda x: kin.isochoric_invariants(x)[0], f)
            fd2 = central_difference(lambda x: kin.isochoric_invariants(x)[1], f)
            np.testing.assert_allclose(d1, fd1, rtol=1e-6, atol=1e-8)
            np.testing.assert_allclose(d2, fd2, rtol=1e-6, atol=1e-8)

    def test_second_derivatives_match_fd(self, rng):
        for _ in range(5):
            f = kin.random_unimodular(rng)
            _, _, dd1, dd2 = kin.invariant_derivatives(f)
            fd1 = central_difference_tensor(
                lambda x: kin.invariant_first_derivatives(x)[0], f
            )
            fd2 = central_difference_tensor(
                lambda x: kin.invariant_first_derivatives(x)[1], f
            )
            np.testing.assert_allclose(dd1, fd1, rtol=1e-6, atol=1e-7)
            np.testing.assert_allclose(dd2, fd2, rtol=1e-6, atol=1e-7)

    def test_major_symmetry(self, rng):
        f = kin.random_unimodular(rng)
        _, _, dd1, dd2 = kin.invariant_derivatives(f)
        for dd in (dd1, dd2):
            swapped = np.einsum("iIjJ->jJiI", dd)
            err = np.abs(dd - swapped).max() / np.abs(dd).max()
            assert err < 1e-10

    def test_consistent_with_full_variant(self, rng):
        f = kin.random_unimodular(rng)
        d1a, d2a = kin.invariant_first_derivatives(f)
        d1b, d2b, _, _ = kin.invariant_derivatives(f)
        np.testing.assert_array_equal(d1a, d1b)
        np.testing.assert_array_equal(d2a, d2b)

    def test_second_invariant_algebraic_identity(self, rng):
        # tr cof C == ((tr C)^2 - tr C^2) / 2
        f = kin.random_unimodular(rng)
        c = f.T @ f
        direct = np.trace(kin.cofactor(c))
        alt = 0.5 * (np.trace(c) ** 2 - np.trace(c @ c))
        assert direct == pytest.approx(alt, rel=1e-12)


class TestGenerateMode:
    def test_uniaxial_identity_at_one(self):
        mode = kin.DeformationMode(kin.ModeKind.UNIAXIAL_TENSION, (1.0,))
        np.testing.assert_allclose(kin.generate_mode(mode)[0], np.eye(3))

    def test_uniaxial_invariants(self):
        mode = kin.DeformationMode(kin.ModeKind.UNIAXIAL_TENSION, (2.0,))
        i1, i2 = kin.isochoric_invariants(kin.generate_mode(mode))
        np.testing.assert_allclose([i1[0], i2[0]], [5.0, 4.25], rtol=1e-13)

    @pytest.mark.parametrize(
        "kind",
        [
            kin.ModeKind.UNIAXIAL_TENSION,
            kin.ModeKind.EQUIBIAXIAL_TENSION,
            kin.ModeKind.PURE_SHEAR,
            kin.ModeKind.SIMPLE_SHEAR,
        ],
    )
    def test_unit_determinant(self, kind):
        mode = kin.DeformationMode(kind, tuple(np.linspace(0.4, 3.0, 9)))
        fs = kin.generate_mode(mode)
        np.testing.assert_allclose(np.linalg.det(fs), 1.0, atol=1e-12)

    def test_grid_unit_determinant(self):
        mode = kin.DeformationMode(
            kin.ModeKind.PRINCIPAL_STRETCH_GRID, ((1.5,), (1.2,))
        )
        fs = kin.generate_mode(mode)
        assert fs.shape == (1, 3, 3)
        np.testing.assert_allclose(np.linalg.det(fs), 1.0, atol=1e-12)

    def test_nonpositive_stretch_raises(self):
        mode = kin.DeformationMode(kin.ModeKind.UNIAXIAL_TENSION, (0.0,))
        with pytest.raises(InvalidStretchError):
            kin.generate_mode(mode)


class TestRandomGenerators:
    def test_rotation_is_orthogonal(self, rng):
        for _ in range(50):
            q = kin.random_rotation(rng)
            np.testing.assert_allclose(q.T @ q, np.eye(3), atol=1e-12)
            assert np.linalg.det(q) == pytest.approx(1.0, abs=1e-12)

    def test_unimodular_determinant(self, rng):
        for _ in range(50):
            f = kin.random_unimodular(rng)
            assert np.linalg.det(f) == pytest.approx(1.0, abs=1e-12)
