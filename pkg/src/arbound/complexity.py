"""Gaussian complexity of stationary AR classes over widely spaced design rows.

Block index sets follow ``i_k = floor(m / 2) + 2 m k`` (1-based design rows),
one point per pair of length-m blocks. The closed-form complexity bound takes
the largest distance between stability-polytope vertices as seen through the
selected rows; the Monte Carlo estimator is the direct definition with the
supremum evaluated at the vertices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._parallel import chunked_seeds, map_ordered
from .armodel import Design
from .stability import StabilityPolytope

MC_CHUNK = 1000


@dataclass(frozen=True)
class BlockPlan:
    n: int
    m: int
    mu: int
    indices: np.ndarray  # 1-based design rows, strictly increasing
    dropped: int = 0
    index_count: str = "mu"

    @property
    def rows(self) -> np.ndarray:
        """0-based row positions into ``Design.X``."""
        return self.indices - 1


def block_indices(n: int, p: int, m: int, mu: int, index_count: str = "mu") -> BlockPlan:
    """Index set of ``mu`` points spaced ``2m`` apart, clamped to rows ``1..n-p``.

    ``index_count="mu-plus-1"`` keeps ``k = 0..mu`` instead of ``k = 0..mu-1``.
    For ``m = 1`` the offset ``floor(m/2) = 0`` is moved to 1, the first
    design row.
    """
    if m < 1 or mu < 1:
        raise ValueError("block length and count must be >= 1")
    if 2 * mu * m > n:
        raise ValueError(f"2*mu*m = {2 * mu * m} exceeds n = {n}")
    if index_count not in ("mu", "mu-plus-1"):
        raise ValueError(f"unknown index_count {index_count!r}")
    k_max = mu if index_count == "mu-plus-1" else mu - 1
    offset = max(m // 2, 1)
    idx = offset + 2 * m * np.arange(k_max + 1)
    keep = idx <= n - p
    idx = idx[keep]
    if idx.size == 0:
        raise ValueError(f"no block index fits in {n - p} design rows")
    idx.setflags(write=False)
    return BlockPlan(n, m, mu, idx, dropped=int((~keep).sum()), index_count=index_count)


def _check(design: Design, plan: BlockPlan, poly: StabilityPolytope | None = None):
    if poly is not None and poly.p != design.p:
        raise ValueError(f"polytope order {poly.p} does not match design order {design.p}")
    if plan.indices[-1] > design.rows:
        raise ValueError(f"plan index {plan.indices[-1]} exceeds {design.rows} design rows")


def vertex_diameter(design: Design, plan: BlockPlan, poly: StabilityPolytope) -> float:
    """max over vertex pairs of ``sqrt(sum_i <X_i, v_j - v_j'>^2)`` over plan rows."""
    _check(design, plan, poly)
    proj = design.X[plan.rows] @ poly.vertices.T  # rows x (p+1)
    best = 0.0
    for j in range(proj.shape[1] - 1):
        diff = proj[:, j + 1 :] - proj[:, [j]]
        best = max(best, float(np.max(np.einsum("ij,ij->j", diff, diff))))
    return math.sqrt(best)


@dataclass(frozen=True)
class ComplexityValue:
    value: float
    p: int
    points_used: int


def empirical_gaussian_complexity(design: Design, plan: BlockPlan,
                                  poly: StabilityPolytope) -> ComplexityValue:
    """Slepian-type upper bound on the empirical Gaussian complexity at scale ``mu``."""
    p = design.p
    value = 2 * math.sqrt(2) / plan.mu * math.sqrt(math.log(p + 1)) * vertex_diameter(
        design, plan, poly)
    return ComplexityValue(value, p, int(plan.indices.size))


def ar1_complexity_term(design: Design, plan: BlockPlan, cap: float) -> float:
    """``(4/mu) sqrt(M/2) sqrt(sum_i X_i^2)`` for an order-1 design."""
    if design.p != 1:
        raise ValueError("AR(1) complexity term needs an order-1 design")
    _check(design, plan)
    x = design.X[plan.rows, 0]
    return 4.0 / plan.mu * math.sqrt(cap / 2.0) * math.sqrt(float(x @ x))


def _mc_chunk(args):
    proj, mu, seed, size = args
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((size, proj.shape[0]))
    vals = 2.0 * np.max(np.abs(z @ proj), axis=1) / mu
    return float(vals.sum()), float((vals * vals).sum())


def monte_carlo_complexity(design: Design, plan: BlockPlan, poly: StabilityPolytope,
                           draws: int, seed: int, workers: int = 1,
                           return_stderr: bool = False):
    """Average of ``2 max_j |(1/mu) sum_i Z_i <X_i, v_j>|`` over Gaussian draws.

    Draws come in fixed-size chunks with their own seed substreams and are
    summed in chunk order, so the estimate does not depend on ``workers``.
    """
    if draws < 1:
        raise ValueError("draws must be >= 1")
    _check(design, plan, poly)
    proj = design.X[plan.rows] @ poly.vertices.T
    jobs = [(proj, plan.mu, s, size) for s, size in chunked_seeds(seed, draws, MC_CHUNK)]
    parts = map_ordered(_mc_chunk, jobs, workers)
    total = math.fsum(a for a, _ in parts)
    total_sq = math.fsum(b for _, b in parts)
    mean = total / draws
    if not return_stderr:
        return mean
    var = max(total_sq / draws - mean * mean, 0.0)
    stderr = math.sqrt(var / (draws - 1)) if draws > 1 else math.inf
    return mean, stderr
