"""Stationarity domain of AR(p) coefficient vectors.

A coefficient vector ``phi`` is stationary when every root of the
characteristic polynomial

    Q(z) = z**p - phi[0] z**(p-1) - ... - phi[p-1]

lies strictly inside the unit circle. Membership is decided with the
Schur-Cohn (Jury) step-down recursion; the companion-matrix spectral radius is
kept as an independent check.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

DEFAULT_TOL = 1e-9
DEFAULT_MARGIN = 1e-3


def as_coef(phi) -> np.ndarray:
    c = np.atleast_1d(np.asarray(phi, dtype=float))
    if c.ndim != 1 or c.size < 1:
        raise ValueError("coefficient vector must be one-dimensional with p >= 1")
    return c


def is_stationary(phi, tol: float = 0.0) -> bool:
    """True iff all roots of Q have modulus < 1 - tol.

    Uses the Schur-Cohn step-down recursion on the radius-scaled polynomial
    ``Q((1 - tol) z)``; no roots are extracted. NaN coefficients return False
    with a ``RuntimeWarning``.
    """
    c = as_coef(phi)
    if tol < 0 or tol >= 1:
        raise ValueError("tol must lie in [0, 1)")
    if not np.all(np.isfinite(c)):
        warnings.warn("non-finite AR coefficients treated as non-stationary", RuntimeWarning,
                      stacklevel=2)
        return False
    p = c.size
    r = 1.0 - tol
    # monic a(z) = z^p + a_1 z^{p-1} + ... + a_p with roots scaled by 1/r
    a = -c / r ** np.arange(1, p + 1)
    for k in range(p, 0, -1):
        refl = a[k - 1]
        if not abs(refl) < 1.0:
            return False
        if k == 1:
            break
        head = a[: k - 1]
        a = (head - refl * head[::-1]) / (1.0 - refl * refl)
    return True


def companion_matrix(phi) -> np.ndarray:
    c = as_coef(phi)
    p = c.size
    A = np.zeros((p, p))
    A[0, :] = c
    if p > 1:
        A[1:, :-1] = np.eye(p - 1)
    return A


def companion_spectral_radius(phi) -> float:
    """Largest root modulus of Q, from the companion-matrix eigenvalues."""
    try:
        eig = np.linalg.eigvals(companion_matrix(phi))
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(f"eigenvalue solver failed: {exc}") from exc
    return float(np.max(np.abs(eig)))


@dataclass(frozen=True)
class StabilityPolytope:
    """Vertices of the convex hull of the order-p stability domain.

    ``vertices[j]`` is the coefficient vector whose characteristic polynomial
    is ``(z - 1)**(p - j) * (z + 1)**j``.
    """

    p: int
    vertices: np.ndarray

    def __post_init__(self):
        if self.vertices.shape != (self.p + 1, self.p):
            raise ValueError("need exactly p + 1 vertices of length p")

    def vertex_polynomials(self) -> list[list[int]]:
        return [_vertex_poly(self.p, j) for j in range(self.p + 1)]


def _vertex_poly(p: int, j: int) -> list[int]:
    # exact integer coefficients, highest degree first
    poly = [1]
    for root in [1] * (p - j) + [-1] * j:
        nxt = poly + [0]
        for k, coef in enumerate(poly):
            nxt[k + 1] -= root * coef
        poly = nxt
    return poly


@lru_cache(maxsize=128)
def _hull_vertices(p: int) -> StabilityPolytope:
    verts = np.array([[float(-c) for c in _vertex_poly(p, j)[1:]] for j in range(p + 1)])
    verts.setflags(write=False)
    return StabilityPolytope(p, verts)


def hull_vertices(p: int) -> StabilityPolytope:
    """The p + 1 vertices of conv(B_p)."""
    if int(p) != p or p < 1:
        raise ValueError(f"order must be a positive integer, got {p!r}")
    return _hull_vertices(int(p))


def project_into_hull(phi, poly: StabilityPolytope | None = None, margin: float = DEFAULT_MARGIN,
                      xtol: float = 1e-10) -> np.ndarray:
    """Shrink ``phi`` radially toward the origin until it is stationary.

    Stationary input (at ``margin``) is returned unchanged. Otherwise returns
    ``s * phi`` with ``s`` found by bisection; the lower bracket is always
    stationary, so the result is too.
    """
    c = as_coef(phi)
    if not 0 <= margin < 1:
        raise ValueError("margin must lie in [0, 1)")
    if poly is not None and poly.p != c.size:
        raise ValueError(f"polytope order {poly.p} does not match p={c.size}")
    if is_stationary(c, margin):
        return c
    if not np.all(np.isfinite(c)):
        return np.zeros_like(c)
    lo, hi = 0.0, 1.0
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if is_stationary(mid * c, margin):
            lo = mid
        else:
            hi = mid
    return lo * c
