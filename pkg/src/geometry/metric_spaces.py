"""
Metric Spaces

The three candidate latent geometries (Euclidean, cosine dissimilarity and
the Poincaré ball) behind one interface: distances, analytic ambient
gradients and projection back onto the valid domain.

Row-wise batch functions do the work; the single-pair functions are thin
wrappers over them so both paths share the same arithmetic.

Author: CapMap Project
License: MIT
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from numpy.typing import NDArray

from ..config.schema import GeometryKind

Array = NDArray[np.float64]

MIN_NORM = 1e-12
# Projected Poincaré points land this fraction inside the (1 - ball_epsilon) radius
# so that the domain bound holds after floating-point rescaling.
BOUNDARY_SLACK = 1e-12


class DomainError(ValueError):
    """A point lies outside the domain of its geometry."""


@dataclass(frozen=True)
class Geometry:
    """Geometry tag with dimension and, for the Poincaré ball, a boundary margin."""
    kind: GeometryKind = GeometryKind.EUCLIDEAN
    dim: int = 5
    ball_epsilon: float = 1e-5

    def __post_init__(self):
        object.__setattr__(self, "kind", GeometryKind(self.kind))
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer: {self.dim}")
        if not (0.0 < self.ball_epsilon < 0.1):
            raise ValueError(f"ball_epsilon must lie in (0, 0.1): {self.ball_epsilon}")

    @property
    def max_norm(self) -> float:
        return 1.0 - self.ball_epsilon

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "dim": int(self.dim), "ball_epsilon": float(self.ball_epsilon)}

    @classmethod
    def from_dict(cls, data: dict) -> "Geometry":
        return cls(GeometryKind(data["kind"]), int(data["dim"]), float(data.get("ball_epsilon", 1e-5)))


@dataclass(frozen=True)
class GradientPair:
    """∂d/∂u and ∂d/∂v; `subgradient` marks the zero vectors returned at coincidence."""
    du: Array
    dv: Array
    subgradient: bool = False


def _as_rows(x) -> Array:
    arr = np.asarray(x, dtype=np.float64)
    return arr.reshape(1, -1) if arr.ndim == 1 else arr


def check_domain(g: Geometry, points) -> None:
    """
    Raise DomainError unless every row of `points` is a valid input to `g`.

    Cosine rejects (near-)zero vectors; the Poincaré ball rejects points on
    or outside the unit sphere.
    """
    rows = _as_rows(points)
    if rows.shape[-1] != g.dim:
        raise DomainError(f"expected {g.dim} coordinates, got {rows.shape[-1]}")
    if not np.all(np.isfinite(rows)):
        raise DomainError("coordinates must be finite")
    sq = np.einsum("ij,ij->i", rows, rows)
    if g.kind == GeometryKind.COSINE and np.any(np.sqrt(sq) < MIN_NORM):
        raise DomainError("cosine dissimilarity is undefined for the zero vector")
    if g.kind == GeometryKind.POINCARE and np.any(sq >= 1.0):
        raise DomainError("point lies on or outside the Poincaré ball")


def batch_distance(g: Geometry, U, V) -> Array:
    """Distances between matching rows of U and V."""
    U, V = _as_rows(U), _as_rows(V)
    if g.kind == GeometryKind.EUCLIDEAN:
        diff = U - V
        return np.sqrt(np.einsum("ij,ij->i", diff, diff))
    if g.kind == GeometryKind.COSINE:
        nu = np.sqrt(np.einsum("ij,ij->i", U, U))
        nv = np.sqrt(np.einsum("ij,ij->i", V, V))
        cos = np.einsum("ij,ij->i", U, V) / (nu * nv)
        return 1.0 - np.clip(cos, -1.0, 1.0)
    return _poincare(U, V)[0]


def _poincare(U: Array, V: Array) -> Tuple[Array, Array, Array, Array, Array]:
    """Poincaré distance plus the intermediates its gradient needs."""
    diff = U - V
    s = np.einsum("ij,ij->i", diff, diff)
    a = 1.0 - np.einsum("ij,ij->i", U, U)
    b = 1.0 - np.einsum("ij,ij->i", V, V)
    y = 2.0 * s / (a * b)
    root = np.sqrt(y * (y + 2.0))
    # arcosh(1 + y) written to keep precision for small y
    d = np.log1p(y + root)
    return d, s, a, b, root


def batch_distance_gradient(g: Geometry, U, V) -> Tuple[Array, Array, Array, NDArray[np.bool_]]:
    """
    Distances and ambient gradients for matching rows of U and V.

    Returns:
        (d, dU, dV, coincident) where coincident marks rows whose gradient
        was replaced by the zero subgradient
    """
    U, V = _as_rows(U), _as_rows(V)
    n = U.shape[0]

    if g.kind == GeometryKind.EUCLIDEAN:
        diff = U - V
        d = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        coincident = d == 0.0
        safe = np.where(coincident, 1.0, d)
        dU = diff / safe[:, None]
        dU[coincident] = 0.0
        return d, dU, -dU, coincident

    if g.kind == GeometryKind.COSINE:
        nu2 = np.einsum("ij,ij->i", U, U)
        nv2 = np.einsum("ij,ij->i", V, V)
        nu, nv = np.sqrt(nu2), np.sqrt(nv2)
        dot = np.einsum("ij,ij->i", U, V)
        cos = dot / (nu * nv)
        d = 1.0 - np.clip(cos, -1.0, 1.0)
        # d = 1 - cos; ∂cos/∂u = v/(|u||v|) - cos·u/|u|²
        dU = -(V / (nu * nv)[:, None] - (cos / nu2)[:, None] * U)
        dV = -(U / (nu * nv)[:, None] - (cos / nv2)[:, None] * V)
        return d, dU, dV, np.zeros(n, dtype=bool)

    d, s, a, b, root = _poincare(U, V)
    coincident = s == 0.0
    # d = arcosh(x), x = 1 + 2s/(ab); ∂d/∂x = 1/sqrt(x² - 1) = 1/root
    # ∂x/∂u = 4/(ab) · ((u - v) + s·u/a), symmetrically for v
    safe_root = np.where(coincident, 1.0, root)
    scale = 4.0 / (a * b * safe_root)
    diff = U - V
    dU = scale[:, None] * (diff + (s / a)[:, None] * U)
    dV = scale[:, None] * (-diff + (s / b)[:, None] * V)
    dU[coincident] = 0.0
    dV[coincident] = 0.0
    return d, dU, dV, coincident


def distance(g: Geometry, u, v) -> float:
    """
    Distance between two points.

    Euclidean: ‖u − v‖. Cosine: 1 − cos(u, v) in [0, 2].
    Poincaré: arcosh(1 + 2‖u − v‖² / ((1 − ‖u‖²)(1 − ‖v‖²))).

    Raises:
        DomainError: If either point is outside the geometry's domain
    """
    check_domain(g, u)
    check_domain(g, v)
    return float(batch_distance(g, u, v)[0])


def distance_gradient(g: Geometry, u, v) -> GradientPair:
    """
    Ambient gradients ∂d/∂u and ∂d/∂v.

    For coincident points (where Euclidean and Poincaré distances are not
    differentiable) zero vectors are returned with `subgradient` set.

    Raises:
        DomainError: If either point is outside the geometry's domain
    """
    check_domain(g, u)
    check_domain(g, v)
    _, dU, dV, coincident = batch_distance_gradient(g, u, v)
    return GradientPair(dU[0], dV[0], bool(coincident[0]))


def project_rows(g: Geometry, P) -> Array:
    """Project every row of P onto the geometry's domain (returns a new array)."""
    P = np.array(_as_rows(P), dtype=np.float64, copy=True)
    if g.kind == GeometryKind.EUCLIDEAN:
        return P

    norms = np.sqrt(np.einsum("ij,ij->i", P, P))
    if g.kind == GeometryKind.COSINE:
        tiny = norms < MIN_NORM
        if np.any(tiny):
            P[tiny] = 0.0
            P[tiny, 0] = 1.0
        return P

    limit = g.max_norm
    outside = norms > limit
    if np.any(outside):
        P[outside] *= (limit * (1.0 - BOUNDARY_SLACK) / norms[outside])[:, None]
    return P


def project_to_domain(g: Geometry, p) -> Array:
    """
    Map a point into the valid domain.

    Euclidean: identity. Cosine: a (near-)zero vector becomes the first unit
    vector. Poincaré: points beyond radius 1 − ball_epsilon are rescaled
    radially onto it.
    """
    arr = np.asarray(p, dtype=np.float64)
    projected = project_rows(g, arr.reshape(1, -1))
    return projected[0] if arr.ndim == 1 else projected


def pairwise_distances(g: Geometry, A, B) -> Array:
    """Dense |A| × |B| distance matrix."""
    A, B = _as_rows(A), _as_rows(B)
    ia, ib = np.meshgrid(np.arange(len(A)), np.arange(len(B)), indexing="ij")
    return batch_distance(g, A[ia.ravel()], B[ib.ravel()]).reshape(len(A), len(B))
