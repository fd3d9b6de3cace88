"""Synthetic Gaussian AR paths and bound-coverage experiments."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from ._parallel import map_ordered, seed_sequence
from .armodel import build_design, fit_stationary, one_step_predictions, truncated_loss
from .mixing import GaussianARSurrogate, MixingProfile, mixing_profile, plan_blocks
from .complexity import block_indices
from .riskbound import bound_for_order
from .stability import as_coef, is_stationary
from .timeseries import GrowthSeries


@dataclass(frozen=True)
class SimSpec:
    phi: np.ndarray
    sigma: float = 1.0
    n: int = 1000
    burn_in: int | None = None
    seed: int = 0
    stationary_start: bool = False

    def __post_init__(self):
        phi = as_coef(self.phi)
        object.__setattr__(self, "phi", phi)
        if not is_stationary(phi):
            raise ValueError(f"coefficients {phi} are not stationary")
        if self.stationary_start and phi.size != 1:
            raise ValueError("stationary start is only available for AR(1)")
        if self.n < 1 or self.sigma <= 0:
            raise ValueError("need n >= 1 and sigma > 0")

    @property
    def p(self) -> int:
        return self.phi.size

    @property
    def effective_burn_in(self) -> int:
        if self.burn_in is not None:
            return self.burn_in
        return 0 if self.stationary_start else 100 * self.p


def simulate_path(phi, sigma: float, n: int, burn_in: int, rng,
                  stationary_start: bool = False) -> np.ndarray:
    phi = as_coef(phi)
    eps = sigma * rng.standard_normal(n + burn_in)
    if stationary_start:
        x0 = rng.normal(0.0, sigma / math.sqrt(1.0 - phi[0] ** 2))
        # zi carries phi * x0 into the first output
        x = lfilter([1.0], [1.0, -phi[0]], eps, zi=[phi[0] * x0])[0]
    else:
        x = lfilter([1.0], np.concatenate([[1.0], -phi]), eps)
    return x[burn_in:]


def simulate(spec: SimSpec) -> GrowthSeries:
    """Gaussian AR path of length ``n`` after discarding ``burn_in`` draws."""
    rng = np.random.default_rng(spec.seed)
    x = simulate_path(spec.phi, spec.sigma, spec.n, spec.effective_burn_in, rng,
                      spec.stationary_start)
    return GrowthSeries(x, provenance=f"simulated AR({spec.p}) seed={spec.seed}")


@dataclass(frozen=True)
class CoverageResult:
    replicates: int
    violations: int
    skipped: int
    eta: float
    bounds: list[float] = field(default_factory=list, repr=False)
    holdout_risks: list[float] = field(default_factory=list, repr=False)

    @property
    def violation_rate(self) -> float:
        done = self.replicates - self.skipped
        return self.violations / done if done else math.nan

    @property
    def mean_bound(self) -> float:
        return float(np.mean(self.bounds)) if self.bounds else math.nan

    def as_dict(self) -> dict:
        return {
            "replicates": self.replicates,
            "violations": self.violations,
            "skipped": self.skipped,
            "violation_rate": self.violation_rate,
            "eta": self.eta,
            "mean_bound": self.mean_bound,
            "mean_holdout_risk": (float(np.mean(self.holdout_risks))
                                  if self.holdout_risks else math.nan),
        }


def truth_profile(spec: SimSpec, n: int, samples: int = 100_000, seed: int = 0,
                  workers: int = 1) -> MixingProfile:
    """beta(m) of the true process for m = 1..min(n/2, 100)."""
    surrogate = GaussianARSurrogate(spec.phi, spec.sigma)
    return mixing_profile(surrogate, range(1, min(n // 2, 100) + 1), samples=samples,
                          seed=seed, workers=workers)


def _replicate(args):
    spec, seed, p_fit, M, eta, holdout, choices = args
    rng = np.random.default_rng(seed)
    n = spec.n
    x = simulate_path(spec.phi, spec.sigma, n + holdout, spec.effective_burn_in, rng,
                      spec.stationary_start)
    train = x[:n]
    fit = fit_stationary(train, p_fit, M)
    design = build_design(train, p_fit)
    best = None
    for choice in choices:
        plan = block_indices(n, p_fit, choice.m, choice.mu)
        report = bound_for_order(fit, design, plan, M, eta, choice.beta)
        if best is None or report.bound_total < best.bound_total:
            best = report
    preds = one_step_predictions(fit.coef, x, n)
    risk = float(np.mean(truncated_loss(preds - x[n:], M)))
    return best.bound_total, risk


def coverage_experiment(spec: SimSpec, p_fit: int, M: float, eta: float, replicates: int,
                        holdout: int, profile: MixingProfile | None = None,
                        workers: int = 1) -> CoverageResult:
    """Fraction of replicates whose held-out truncated risk exceeds the bound.

    The beta profile comes from the true coefficients. Each replicate uses
    the feasible block plan giving the smallest bound.
    """
    if replicates < 1 or holdout < 100:
        raise ValueError("need replicates >= 1 and holdout >= 100")
    if profile is None:
        profile = truth_profile(spec, spec.n, seed=spec.seed)
    choices = [c for c in plan_blocks(spec.n, eta, profile) if c.feasible]
    # skip plans whose index set does not fit the design
    choices = [c for c in choices if max(c.m // 2, 1) <= spec.n - p_fit]
    seeds = seed_sequence(spec.seed).spawn(replicates)
    if not choices:
        return CoverageResult(replicates, 0, replicates, eta)
    jobs = [(spec, s, p_fit, M, eta, holdout, choices) for s in seeds]
    results = map_ordered(_replicate, jobs, workers)
    bounds = [b for b, _ in results]
    risks = [r for _, r in results]
    violations = sum(r > b for b, r in results)
    return CoverageResult(replicates, int(violations), 0, eta, bounds, risks)

