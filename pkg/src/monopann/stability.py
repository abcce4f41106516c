"""Numerical material-stability analysis of incompressible potentials.

The rank-one convexity (ellipticity) check works through the acoustic
tensor ``Q(F, B)_ik = (d2W/dFdF)_ijkl B_j B_l``.  On the unit-determinant
manifold, ellipticity is equivalent to two scalar conditions per probing
direction B,

    (Q x Q) : (F^-T B o F^-T B) >= 0   and   (Q x I) : (F^-T B o F^-T B) >= 0,

with ``x`` the tensor cross product; they state positive semi-definiteness
of Q restricted to the plane of admissible rank-one increments.  The
compressible counterpart adds a third condition,

    (Q x Q) : Q >= 0,   (Q x Q) : I >= 0,   (Q x I) : I >= 0,

and is strictly stronger; it is provided as a diagnostic.  Directions are
sampled deterministically on the unit sphere.  Condition values are
normalized by their homogeneity scale in ``Q`` so verdicts do not depend on
the stress magnitude.
"""

import csv
import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .constitutive import as_law, pk1_tangent
from .errors import EmptyGridError
from .kinematics import isochoric_invariants, principal_stretch_gradient, tensor_cross

__all__ = [
    "ELLIPTICITY_TOLERANCE",
    "DirectionGenerator",
    "DirectionSet",
    "fibonacci_directions",
    "spherical_grid_directions",
    "direction_set",
    "acoustic_tensor",
    "ellipticity_incompressible",
    "ellipticity_compressible",
    "hessian_decomposition",
    "tangent_plane_basis",
    "baker_ericksen_check",
    "PointRecord",
    "StabilityReport",
    "scan_invariant_plane",
    "report_to_dict",
    "write_report_json",
    "write_summary_csv",
]

ELLIPTICITY_TOLERANCE = 1e-8
BAKER_ERICKSEN_TOLERANCE = 1e-12


class DirectionGenerator(Enum):
    FIBONACCI_LATTICE = "fibonacci_lattice"
    SPHERICAL_GRID = "spherical_grid"


@dataclass(frozen=True)
class DirectionSet:
    vectors: np.ndarray
    generator: DirectionGenerator
    count: int


def fibonacci_directions(count: int = 200) -> np.ndarray:
    """Deterministic, near-uniform unit vectors from the Fibonacci lattice."""
    i = np.arange(count)
    z = 1.0 - (2.0 * i + 1.0) / count
    phi = np.pi * (1.0 + np.sqrt(5.0)) * i
    r = np.sqrt(np.maximum(1.0 - z * z, 0.0))
    vecs = np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=-1)
    return vecs / np.linalg.norm(vecs, axis=-1, keepdims=True)


def spherical_grid_directions(count: int = 200) -> np.ndarray:
    """Latitude-longitude grid; kept as an alternative parametrization."""
    n_theta = max(int(np.sqrt(count / 2.0)), 2)
    n_phi = 2 * n_theta
    theta = (np.arange(n_theta) + 0.5) / n_theta * np.pi
    phi = np.arange(n_phi) / n_phi * 2.0 * np.pi
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    vecs = np.stack(
        [np.sin(tt) * np.cos(pp), np.sin(tt) * np.sin(pp), np.cos(tt)], axis=-1
    ).reshape(-1, 3)
    return vecs / np.linalg.norm(vecs, axis=-1, keepdims=True)


def direction_set(
    generator: DirectionGenerator = DirectionGenerator.FIBONACCI_LATTICE,
    count: int = 200,
) -> DirectionSet:
    if generator is DirectionGenerator.FIBONACCI_LATTICE:
        vectors = fibonacci_directions(count)
    else:
        vectors = spherical_grid_directions(count)
    return DirectionSet(vectors, generator, vectors.shape[0])


def acoustic_tensor(law, f, par, b: np.ndarray) -> np.ndarray:
    """Contract the full tangent twice with a probing direction."""
    tangent = pk1_tangent(as_law(law), f, par)
    b = np.asarray(b, dtype=float)
    return np.einsum("...iajb,...a,...b->...ij", tangent, b, b)


def _condition_values(law, f, par, directions: np.ndarray):
    """Normalized incompressible/compressible condition values per direction."""
    f = np.asarray(f, dtype=float)
    tangent = pk1_tangent(as_law(law), f, par)
    b = np.atleast_2d(directions)
    q = np.einsum("iajb,da,db->dij", tangent, b, b)
    n = np.einsum("ji,dj->di", np.linalg.inv(f), b)  # F^-T B
    nsq = np.einsum("di,di->d", n, n)
    qnorm = np.sqrt(np.einsum("dij,dij->d", q, q))
    eye = np.broadcast_to(np.eye(3), q.shape)

    qxq = tensor_cross(q, q)
    qxi = tensor_cross(q, eye)
    c1 = np.einsum("dij,di,dj->d", qxq, n, n) / ((1.0 + qnorm) ** 2 * nsq)
    c2 = np.einsum("dij,di,dj->d", qxi, n, n) / ((1.0 + qnorm) * nsq)

    d1 = np.einsum("dij,dij->d", qxq, q) / (1.0 + qnorm) ** 3
    d2 = np.einsum("dii->d", qxq) / (1.0 + qnorm) ** 2
    d3 = np.einsum("dii->d", qxi) / (1.0 + qnorm)
    return (c1, c2), (d1, d2, d3)


def ellipticity_incompressible(law, f, par, directions) -> tuple[bool, float]:
    """Evaluate both unit-determinant ellipticity conditions over a direction set.

    Returns ``(elliptic, min_value)`` where ``min_value`` is the smallest
    normalized condition value; the point counts as elliptic when it stays
    above ``-ELLIPTICITY_TOLERANCE``.
    """
    vectors = directions.vectors if isinstance(directions, DirectionSet) else directions
    (c1, c2), _ = _condition_values(law, f, par, vectors)
    min_value = float(min(c1.min(), c2.min()))
    return min_value >= -ELLIPTICITY_TOLERANCE, min_value


def ellipticity_compressible(law, f, par, directions) -> tuple[bool, float]:
    """Evaluate the three positive-semi-definiteness conditions of Q itself.

    Strictly stronger than the unit-determinant form: a pass here implies a
    pass of :func:`ellipticity_incompressible` at the same point.
    """
    vectors = directions.vectors if isinstance(directions, DirectionSet) else directions
    _, (d1, d2, d3) = _condition_values(law, f, par, vectors)
    min_value = float(min(d1.min(), d2.min(), d3.min()))
    return min_value >= -ELLIPTICITY_TOLERANCE, min_value


def hessian_decomposition(law, f, par):
    """Split the rank-one quadratic form into its two additive parts.

    Returns ``(constitutive_term, geometric_term)`` as evaluators taking a
    rank-one pair ``(a, B)``.  The first carries the second derivatives of
    the potential in the invariants, the second its first derivatives; for
    increments in the unit-determinant tangent plane their sum equals the
    full contraction of :func:`pk1_tangent`.
    """
    law = as_law(law)
    f = np.asarray(f, dtype=float)
    i1, i2 = isochoric_invariants(f)
    coef = law.coefficients(i1, i2, par)
    hess = law.hessian(i1, i2, par)
    h_cof = tensor_cross(f, f) / 2.0

    def constitutive_term(a, b):
        incr = np.outer(a, b)
        w1 = float(np.sum(f * incr))
        w2 = float(np.sum(h_cof * tensor_cross(incr, f)))
        return 4.0 * (
            float(hess[..., 0, 0]) * w1 * w1
            + 2.0 * float(hess[..., 0, 1]) * w1 * w2
            + float(hess[..., 1, 1]) * w2 * w2
        )

    def geometric_term(a, b):
        incr = np.outer(a, b)
        cross = tensor_cross(incr, f)
        return 2.0 * (
            float(coef[..., 0]) * float(np.sum(incr * incr))
            + float(coef[..., 1]) * float(np.sum(cross * cross))
        )

    return constitutive_term, geometric_term


def tangent_plane_basis(f: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Orthonormal pair spanning the admissible first vectors for direction b.

    Rank-one increments ``a o b`` stay in the unit-determinant tangent space
    exactly when ``a`` is orthogonal to ``F^-T b``.
    """
    n = np.linalg.inv(f).T @ np.asarray(b, dtype=float)
    n = n / np.linalg.norm(n)
    pick = np.eye(3)[np.argmin(np.abs(n))]
    e1 = pick - (pick @ n) * n
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(n, e1)
    return np.stack([e1, e2])


def baker_ericksen_check(law, f, par) -> bool:
    """Sufficient monotonicity condition for the ordered-stress inequalities.

    True when ``dpsi/dI1 + lam_i^2 dpsi/dI2`` is non-negative for all three
    principal stretches of f.
    """
    law = as_law(law)
    f = np.asarray(f, dtype=float)
    i1, i2 = isochoric_invariants(f)
    coef = law.coefficients(i1, i2, par)
    stretches = np.linalg.svd(f, compute_uv=False)
    values = float(coef[..., 0]) + stretches**2 * float(coef[..., 1])
    return bool(np.all(values >= -BAKER_ERICKSEN_TOLERANCE))


# ---------------------------------------------------------------------------
# invariant-plane scan


@dataclass
class PointRecord:
    lambda1: float
    lambda2: float
    f: np.ndarray
    i1: float
    i2: float
    t: np.ndarray
    elliptic: bool = False
    min_value: float = np.nan
    compressible_elliptic: bool = False
    compressible_min_value: float = np.nan
    be_ok: bool = False
    mono_ok: bool = False
    error: str | None = None


@dataclass
class StabilityReport:
    points: list
    per_parameter: list
    region: dict
    direction_count: int
    law_label: str

    def elliptic_fraction(self) -> float:
        ok = [p for p in self.points if p.error is None]
        if not ok:
            return float("nan")
        return sum(p.elliptic for p in ok) / len(ok)


def _format_params(par) -> str:
    par = np.atleast_1d(np.asarray(par, dtype=float))
    return ";".join(repr(float(v)) for v in par)


def scan_invariant_plane(
    law,
    param_grid,
    lambda1_values,
    lambda2_values,
    directions: DirectionSet | None = None,
) -> StabilityReport:
    """Sweep ``F = diag(l1, l2, 1/(l1 l2))`` over a stretch grid per parameter.

    Records ellipticity (both forms), the monotonicity spot check on the
    stress coefficients, and the ordered-stress check at every point.
    Failures at individual points are recorded and the scan continues.
    """
    law = as_law(law)
    param_grid = np.atleast_2d(np.asarray(param_grid, dtype=float))
    lambda1_values = np.atleast_1d(np.asarray(lambda1_values, dtype=float))
    lambda2_values = np.atleast_1d(np.asarray(lambda2_values, dtype=float))
    if param_grid.size == 0:
        raise EmptyGridError("parameter grid is empty")
    if lambda1_values.size == 0 or lambda2_values.size == 0:
        raise EmptyGridError("stretch grid is empty")
    if directions is None:
        directions = direction_set()

    points = []
    per_parameter = []
    for t in param_grid:
        t_points = []
        for lam1 in lambda1_values:
            for lam2 in lambda2_values:
                f = principal_stretch_gradient(lam1, lam2)
                i1, i2 = isochoric_invariants(f)
                record = PointRecord(
                    float(lam1), float(lam2), f, float(i1), float(i2), t
                )
                try:
                    elliptic, min_value = ellipticity_incompressible(
                        law, f, t, directions
                    )
                    comp, comp_min = ellipticity_compressible(law, f, t, directions)
                    coef = law.coefficients(i1, i2, t)
                    record.elliptic = elliptic
                    record.min_value = min_value
                    record.compressible_elliptic = comp
                    record.compressible_min_value = comp_min
                    record.be_ok = baker_ericksen_check(law, f, t)
                    record.mono_ok = bool(
                        np.all(coef >= -BAKER_ERICKSEN_TOLERANCE)
                    )
                except Exception as exc:  # record and continue scanning
                    record.error = f"{type(exc).__name__}: {exc}"
                t_points.append(record)
        points.extend(t_points)
        ok = [p for p in t_points if p.error is None]
        denom = max(len(ok), 1)
        per_parameter.append(
            {
                "t": [float(v) for v in t],
                "points": len(t_points),
                "failed_points": len(t_points) - len(ok),
                "elliptic_fraction": sum(p.elliptic for p in ok) / denom,
                "compressible_fraction": sum(p.compressible_elliptic for p in ok)
                / denom,
                "be_fraction": sum(p.be_ok for p in ok) / denom,
                "mono_fraction": sum(p.mono_ok for p in ok) / denom,
            }
        )
    region = {
        "lambda1": [float(lambda1_values.min()), float(lambda1_values.max())],
        "lambda2": [float(lambda2_values.min()), float(lambda2_values.max())],
        "i1": [min(p.i1 for p in points), max(p.i1 for p in points)],
        "i2": [min(p.i2 for p in points), max(p.i2 for p in points)],
    }
    return StabilityReport(
        points, per_parameter, region, directions.count, law.label
    )


def report_to_dict(report: StabilityReport) -> dict:
    return {
        "law": report.law_label,
        "direction_count": report.direction_count,
        "region": report.region,
        "per_parameter": report.per_parameter,
        "points": [
            {
                "lambda1": p.lambda1,
                "lambda2": p.lambda2,
                "f": p.f.tolist(),
                "i1": p.i1,
                "i2": p.i2,
                "t": [float(v) for v in p.t],
                "elliptic": p.elliptic,
                "min_value": None if np.isnan(p.min_value) else p.min_value,
                "compressible_elliptic": p.compressible_elliptic,
                "compressible_min_value": None
                if np.isnan(p.compressible_min_value)
                else p.compressible_min_value,
                "be_ok": p.be_ok,
                "mono_ok": p.mono_ok,
                "error": p.error,
            }
            for p in report.points
        ],
    }


def write_report_json(report: StabilityReport, path) -> None:
    Path(path).write_text(
        json.dumps(report_to_dict(report), indent=2, sort_keys=True) + "\n"
    )


def write_summary_csv(report: StabilityReport, path) -> None:
    """Per-point summary: ``t,lambda1,lambda2,i1,i2,elliptic,min_value,be_ok``."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["t", "lambda1", "lambda2", "i1", "i2", "elliptic", "min_value", "be_ok"]
        )
        for p in report.points:
            writer.writerow(
                [
                    _format_params(p.t),
                    repr(p.lambda1),
                    repr(p.lambda2),
                    repr(p.i1),
                    repr(p.i2),
                    "true" if p.elliptic else "false",
                    repr(float(p.min_value)),
                    "true" if p.be_ok else "false",
                ]
            )
