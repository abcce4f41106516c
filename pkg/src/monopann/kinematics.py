"""3x3 tensor algebra for isochoric finite-strain kinematics.

All routines operate on numpy arrays of shape (..., 3, 3) and broadcast
over leading dimensions.  Deformation gradients are dimensionless; the
generated deformation modes all live on the unit-determinant manifold.
"""

from dataclasses import dataclass
from enum import Enum
from itertools import product

import numpy as np

from .errors import (
    InvalidStretchError,
    InvertedConfigurationError,
    SingularTensorError,
)

__all__ = [
    "LEVI_CIVITA",
    "IDENTITY4",
    "InvariantState",
    "ModeKind",
    "DeformationMode",
    "tensor_cross",
    "cross_operator",
    "cofactor",
    "isochoric_invariants",
    "invariant_first_derivatives",
    "invariant_derivatives",
    "generate_mode",
    "uniaxial_gradient",
    "principal_stretch_gradient",
    "random_rotation",
    "random_unimodular",
]


def _levi_civita() -> np.ndarray:
    eps = np.zeros((3, 3, 3))
    eps[0, 1, 2] = eps[1, 2, 0] = eps[2, 0, 1] = 1.0
    eps[0, 2, 1] = eps[2, 1, 0] = eps[1, 0, 2] = -1.0
    return eps


LEVI_CIVITA = _levi_civita()

# Pre-contracted pair of permutation tensors, indexed [i,I,j,J,k,K].
_EE = np.einsum("ijk,IJK->iIjJkK", LEVI_CIVITA, LEVI_CIVITA)

# Fourth-order identity, indexed [i,I,j,J] = delta_ij delta_IJ.
IDENTITY4 = np.einsum("ij,IJ->iIjJ", np.eye(3), np.eye(3))


def tensor_cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor cross product (a x b)_iI = eps_ijk eps_IJK a_jJ b_kK.

    Symmetric in its arguments.  For any invertible f, the identity
    ``cofactor(f) == 0.5 * tensor_cross(f, f)`` holds.
    """
    return np.einsum("iIjJkK,...jJ,...kK->...iI", _EE, a, b)


def cross_operator(m: np.ndarray) -> np.ndarray:
    """Fourth-order tensor of the linear map ``x -> tensor_cross(m, x)``.

    Indexed [i,I,j,J]; it is major-symmetric.  ``cross_operator(f)`` is both
    the derivative of ``cofactor`` and the second derivative of ``det`` at f.
    """
    return np.einsum("iIjJkK,...jJ->...iIkK", _EE, m)


def _bview(x: np.ndarray, order: int = 2) -> np.ndarray:
    """Append singleton axes so a (...) scalar field broadcasts over tensors."""
    return x[(...,) + (None,) * order]


def cofactor(f: np.ndarray) -> np.ndarray:
    """Cofactor ``(det f) f^-T`` of an invertible 3x3 tensor.

    Raises
    ------
    SingularTensorError
        If any input has zero (or non-finite) determinant.
    """
    f = np.asarray(f, dtype=float)
    det = np.linalg.det(f)
    if not np.all(np.isfinite(det)) or np.any(det == 0.0):
        raise SingularTensorError("cofactor requires det f != 0")
    inv_t = np.swapaxes(np.linalg.inv(f), -1, -2)
    return _bview(det) * inv_t


def isochoric_invariants(f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Volume-normalized invariants of the right Cauchy-Green tensor.

    Returns ``(J**(-2/3) tr C, J**(-4/3) tr cof C)`` with ``C = f^T f`` and
    ``J = det f``.  Both equal 3 exactly when f is a rotation, and are
    invariant under any positive scaling of f.

    Raises
    ------
    InvertedConfigurationError
        If any input has non-positive determinant.
    """
    f = np.asarray(f, dtype=float)
    det = np.linalg.det(f)
    if np.any(det <= 0.0) or not np.all(np.isfinite(det)):
        raise InvertedConfigurationError("isochoric invariants require det f > 0")
    c = np.swapaxes(f, -1, -2) @ f
    i1 = np.einsum("...ii->...", c)
    i2 = np.einsum("...ii->...", cofactor(c))
    return det ** (-2.0 / 3.0) * i1, det ** (-4.0 / 3.0) * i2


def _raw_invariant_terms(f: np.ndarray):
    """Shared building blocks for the invariant derivatives."""
    det = np.linalg.det(f)
    if np.any(det <= 0.0) or not np.all(np.isfinite(det)):
        raise InvertedConfigurationError("invariant derivatives require det f > 0")
    h = _bview(det) * np.swapaxes(np.linalg.inv(f), -1, -2)
    i1 = np.einsum("...iI,...iI->...", f, f)
    i2 = np.einsum("...iI,...iI->...", h, h)
    g1 = 2.0 * f
    g2 = 2.0 * tensor_cross(h, f)
    return det, h, i1, i2, g1, g2


def invariant_first_derivatives(f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Analytic first derivatives of the isochoric invariants w.r.t. f.

    Both vanish identically at any rotation, which is what makes the
    reference configuration stress-free regardless of the potential.
    """
    f = np.asarray(f, dtype=float)
    det, h, i1, i2, g1, g2 = _raw_invariant_terms(f)
    d1 = _scaled_first(det, h, i1, g1, -2.0 / 3.0)
    d2 = _scaled_first(det, h, i2, g2, -4.0 / 3.0)
    return d1, d2


def _scaled_first(det, h, raw, raw_grad, p):
    # d(J^p * raw) = p J^(p-1) raw H + J^p d(raw)
    return _bview(p * det ** (p - 1.0) * raw) * h + _bview(det**p) * raw_grad


def invariant_derivatives(
    f: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """First and second derivatives of both isochoric invariants w.r.t. f.

    Returns ``(dI1, dI2, d2I1, d2I2)`` with shapes (..., 3, 3) and
    (..., 3, 3, 3, 3).  The second derivatives are major-symmetric by
    construction.
    """
    f = np.asarray(f, dtype=float)
    det, h, i1, i2, g1, g2 = _raw_invariant_terms(f)

    x_f = cross_operator(f)  # second derivative of det
    d2_raw1 = 2.0 * np.broadcast_to(IDENTITY4, f.shape[:-2] + (3, 3, 3, 3))
    d2_raw2 = 2.0 * (
        np.einsum("...iIaA,...aAjJ->...iIjJ", x_f, x_f) + cross_operator(h)
    )

    d1 = _scaled_first(det, h, i1, g1, -2.0 / 3.0)
    d2 = _scaled_first(det, h, i2, g2, -4.0 / 3.0)
    dd1 = _scaled_second(det, h, x_f, i1, g1, d2_raw1, -2.0 / 3.0)
    dd2 = _scaled_second(det, h, x_f, i2, g2, d2_raw2, -4.0 / 3.0)
    return d1, d2, dd1, dd2


def _scaled_second(det, h, x_f, raw, raw_grad, raw_hess, p):
    # d2(J^p * raw) expanded by the product rule; x_f is d2(det)/dF2.
    hh = np.einsum("...iI,...jJ->...iIjJ", h, h)
    hg = np.einsum("...iI,...jJ->...iIjJ", h, raw_grad)
    gh = np.einsum("...iI,...jJ->...iIjJ", raw_grad, h)
    out = _bview(p * (p - 1.0) * det ** (p - 2.0) * raw, 4) * hh
    out += _bview(p * det ** (p - 1.0), 4) * (hg + gh)
    out += _bview(p * det ** (p - 1.0) * raw, 4) * x_f
    out += _bview(det**p, 4) * raw_hess
    return out


@dataclass(frozen=True, eq=False)
class InvariantState:
    """Input point of a parametrized potential: invariant pair plus parameters."""

    i1: float
    i2: float
    params: np.ndarray

    @classmethod
    def from_gradient(cls, f: np.ndarray, params) -> "InvariantState":
        i1, i2 = isochoric_invariants(f)
        return cls(float(i1), float(i2), np.atleast_1d(np.asarray(params, float)))


class ModeKind(Enum):
    UNIAXIAL_TENSION = "uniaxial_tension"
    EQUIBIAXIAL_TENSION = "equibiaxial_tension"
    PURE_SHEAR = "pure_shear"
    SIMPLE_SHEAR = "simple_shear"
    PRINCIPAL_STRETCH_GRID = "principal_stretch_grid"


@dataclass(frozen=True)
class DeformationMode:
    """A family of unit-determinant deformation gradients.

    ``parameters`` holds the stretch (or shear) values; for
    PRINCIPAL_STRETCH_GRID it is a pair ``(lambda1_values, lambda2_values)``
    whose Cartesian product is swept.
    """

    kind: ModeKind
    parameters: tuple


def _check_positive(values: np.ndarray) -> np.ndarray:
    values = np.atleast_1d(np.asarray(values, dtype=float))
    if np.any(values <= 0.0) or not np.all(np.isfinite(values)):
        raise InvalidStretchError("stretch values must be positive and finite")
    return values


def uniaxial_gradient(lam) -> np.ndarray:
    """diag(lam, lam^-1/2, lam^-1/2); broadcasts over an array of stretches."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam <= 0.0):
        raise InvalidStretchError("stretch values must be positive")
    out = np.zeros(lam.shape + (3, 3))
    lat = lam**-0.5
    out[..., 0, 0] = lam
    out[..., 1, 1] = lat
    out[..., 2, 2] = lat
    return out


def principal_stretch_gradient(lam1, lam2) -> np.ndarray:
    """diag(lam1, lam2, 1/(lam1 lam2)); broadcasts over stretch arrays."""
    lam1 = np.asarray(lam1, dtype=float)
    lam2 = np.asarray(lam2, dtype=float)
    if np.any(lam1 <= 0.0) or np.any(lam2 <= 0.0):
        raise InvalidStretchError("stretch values must be positive")
    lam1, lam2 = np.broadcast_arrays(lam1, lam2)
    out = np.zeros(lam1.shape + (3, 3))
    out[..., 0, 0] = lam1
    out[..., 1, 1] = lam2
    out[..., 2, 2] = 1.0 / (lam1 * lam2)
    return out


def generate_mode(mode: DeformationMode) -> np.ndarray:
    """Generate the deformation gradients of a mode, stacked as (N, 3, 3).

    Every returned gradient satisfies ``|det F - 1| < 1e-12``.
    """
    kind = mode.kind
    if kind is ModeKind.PRINCIPAL_STRETCH_GRID:
        lam1_values, lam2_values = mode.parameters
        lam1_values = _check_positive(lam1_values)
        lam2_values = _check_positive(lam2_values)
        pairs = np.array(list(product(lam1_values, lam2_values)))
        return principal_stretch_gradient(pairs[:, 0], pairs[:, 1])

    values = _check_positive(np.asarray(mode.parameters))
    if kind is ModeKind.UNIAXIAL_TENSION:
        return uniaxial_gradient(values)
    if kind is ModeKind.EQUIBIAXIAL_TENSION:
        out = np.zeros(values.shape + (3, 3))
        out[..., 0, 0] = values
        out[..., 1, 1] = values
        out[..., 2, 2] = values**-2.0
        return out
    if kind is ModeKind.PURE_SHEAR:
        out = np.zeros(values.shape + (3, 3))
        out[..., 0, 0] = values
        out[..., 1, 1] = 1.0
        out[..., 2, 2] = 1.0 / values
        return out
    if kind is ModeKind.SIMPLE_SHEAR:
        out = np.broadcast_to(np.eye(3), values.shape + (3, 3)).copy()
        out[..., 0, 1] = values
        return out
    raise ValueError(f"unknown deformation mode kind: {kind}")


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniform random rotation from a normalized quaternion."""
    q = rng.standard_normal(4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def random_unimodular(rng: np.random.Generator, spread: float = 0.4) -> np.ndarray:
    """Well-conditioned random deformation gradient with det F = 1."""
    while True:
        f = np.eye(3) + spread * rng.standard_normal((3, 3))
        det = np.linalg.det(f)
        if det > 0.3:  # keep the inverse well scaled
            return f * det ** (-1.0 / 3.0)
