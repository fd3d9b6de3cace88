"""Generalization bounds for stationary AR(p) fits and order selection.

Each bound is training error + complexity term + confidence term, valid with
probability at least ``1 - eta`` when the block plan is feasible, i.e. the
mixing-adjusted level ``eta' = eta - 4 (mu - 1) beta(m)`` is positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._parallel import map_ordered
from .armodel import Design, FittedAR, build_design, fit_stationary
from .complexity import BlockPlan, ar1_complexity_term, block_indices, vertex_diameter
from .mixing import BlockChoice, MixingProfile, block_choice, plan_blocks
from .stability import DEFAULT_MARGIN, StabilityPolytope, hull_vertices


class InfeasiblePlanError(ValueError):
    pass


@dataclass(frozen=True)
class RiskBoundReport:
    p: int
    train_error: float
    complexity_term: float
    confidence_term: float
    bound_total: float
    M: float
    eta: float
    eta_prime: float
    m: int
    mu: int
    beta_m: float
    points_used: int
    notes: tuple[str, ...] = ()
    # for p = 1, the general-order complexity term, kept for comparison
    complexity_term_general: float | None = None

    def as_dict(self) -> dict:
        out = {k: getattr(self, k) for k in self.__dataclass_fields__}
        out["notes"] = list(self.notes)
        return out


def confidence_term(M: float, mu: int, eta_prime: float) -> float:
    """``3 M sqrt(ln(4 / eta') / (2 mu))``."""
    if not eta_prime > 0:
        raise InfeasiblePlanError(f"adjusted level eta' = {eta_prime} is not positive")
    if M <= 0 or mu < 1:
        raise ValueError("need M > 0 and mu >= 1")
    return 3.0 * M * math.sqrt(math.log(4.0 / eta_prime) / (2.0 * mu))


def complexity_constant(p: int, M: float, mu: int) -> float:
    """``4 sqrt(pi M log(p + 1)) / mu``."""
    return 4.0 * math.sqrt(math.pi * M * math.log(p + 1)) / mu


def general_complexity_term(design: Design, plan: BlockPlan, poly: StabilityPolytope,
                            M: float) -> float:
    return complexity_constant(design.p, M, plan.mu) * vertex_diameter(design, plan, poly)


def _eta_prime(plan: BlockPlan, eta: float, beta_m: float) -> float:
    eta_prime = eta - 4 * (plan.mu - 1) * beta_m
    if not eta_prime > 0:
        raise InfeasiblePlanError(
            f"plan m={plan.m}, mu={plan.mu} infeasible at eta={eta}: "
            f"4(mu-1)beta(m) = {4 * (plan.mu - 1) * beta_m:.4g}")
    return eta_prime


def _notes(fit: FittedAR, plan: BlockPlan) -> tuple[str, ...]:
    notes = [f"index_set=floor(m/2)+2mk, k<{'=' if plan.index_count == 'mu-plus-1' else ''}mu"]
    if not fit.stationary_before_projection:
        notes.append("projection_engaged")
    if plan.dropped:
        notes.append(f"indices_dropped={plan.dropped}")
    return tuple(notes)


def _assemble(fit, plan, M, eta, eta_prime, beta_m, complexity, general=None):
    conf = confidence_term(M, plan.mu, eta_prime)
    total = fit.train_error + complexity + conf
    return RiskBoundReport(
        p=fit.p, train_error=fit.train_error, complexity_term=complexity,
        confidence_term=conf, bound_total=total, M=M, eta=eta, eta_prime=eta_prime,
        m=plan.m, mu=plan.mu, beta_m=beta_m, points_used=int(plan.indices.size),
        notes=_notes(fit, plan), complexity_term_general=general)


def bound_arp(fit: FittedAR, design: Design, plan: BlockPlan, poly: StabilityPolytope,
              M: float, eta: float, beta_m: float) -> RiskBoundReport:
    """Bound for an order p >= 2 fit through the stability-polytope vertices."""
    if fit.p < 2:
        raise ValueError("use bound_ar1 for p = 1")
    eta_prime = _eta_prime(plan, eta, beta_m)
    return _assemble(fit, plan, M, eta, eta_prime, beta_m,
                     general_complexity_term(design, plan, poly, M))


def bound_ar1(fit: FittedAR, design: Design, plan: BlockPlan, M: float, eta: float,
              beta_m: float) -> RiskBoundReport:
    """Bound for an AR(1) fit, with ``(4/mu) sqrt(M/2) ||X_I||`` as complexity."""
    if fit.p != 1:
        raise ValueError("bound_ar1 needs p = 1")
    eta_prime = _eta_prime(plan, eta, beta_m)
    general = general_complexity_term(design, plan, hull_vertices(1), M)
    return _assemble(fit, plan, M, eta, eta_prime, beta_m,
                     ar1_complexity_term(design, plan, M), general)


def bound_for_order(fit: FittedAR, design: Design, plan: BlockPlan, M: float, eta: float,
                    beta_m: float) -> RiskBoundReport:
    if fit.p == 1:
        return bound_ar1(fit, design, plan, M, eta, beta_m)
    return bound_arp(fit, design, plan, hull_vertices(fit.p), M, eta, beta_m)


def aic(fit: FittedAR, n_effective: int) -> float:
    """``n ln(RSS / n) + 2 (p + 1)`` with the untruncated residual sum of squares."""
    if not fit.rss > 0:
        raise ValueError("AIC needs a positive residual sum of squares")
    return n_effective * math.log(fit.rss / n_effective) + 2 * (fit.p + 1)


def argmin_first(values) -> int:
    """Position of the smallest value, earliest on ties."""
    vals = list(values)
    best = 0
    for k, v in enumerate(vals):
        if v < vals[best]:
            best = k
    return best


def aic_table(series, p_max: int, margin: float = DEFAULT_MARGIN,
              center: bool = False) -> list[tuple[int, float]]:
    """AIC for p = 1..p_max, every order fitted on targets ``p_max + 1 .. n``."""
    x = series.values if hasattr(series, "values") else np.asarray(series, dtype=float)
    n_eff = x.shape[0] - p_max
    out = []
    for p in range(1, p_max + 1):
        fit = fit_stationary(x, p, cap=math.inf, margin=margin, first_target=p_max,
                             center=center)
        out.append((p, aic(fit, n_eff)))
    return out


@dataclass(frozen=True)
class SelectionResult:
    per_order: list[RiskBoundReport]
    aic_per_order: list[tuple[int, float]]
    srm_choice: int
    aic_choice: int
    block: BlockChoice
    candidates: list[dict] = field(default_factory=list)
    fits: list[FittedAR] = field(default_factory=list, repr=False)


def _order_bounds(fits, designs, n, choice, M, eta, index_count):
    reports = []
    for fit, design in zip(fits, designs):
        plan = block_indices(n, fit.p, choice.m, choice.mu, index_count)
        reports.append(bound_for_order(fit, design, plan, M, eta, choice.beta))
    return reports


def srm_select(series, p_max: int, M: float, eta: float, profile: MixingProfile,
               margin: float = DEFAULT_MARGIN, block: tuple[int, int] | None = None,
               index_count: str = "mu", center: bool = False,
               workers: int = 1) -> SelectionResult:
    """Bound every order p = 1..p_max and pick the one with the smallest bound.

    One block plan serves every order. Unless ``block=(m, mu)`` fixes it, the
    plan is the feasible one with the smallest bound averaged over orders.
    """
    x = series.values if hasattr(series, "values") else np.asarray(series, dtype=float)
    n = x.shape[0]
    if p_max < 1 or n <= 2 * p_max:
        raise ValueError(f"need 1 <= p_max and n > 2 p_max (n={n}, p_max={p_max})")
    mean = float(np.mean(x)) if center else 0.0
    xc = x - mean

    def fit_one(p):
        return fit_stationary(x, p, M, margin, center=center), build_design(xc, p)

    pairs = map_ordered(fit_one, range(1, p_max + 1), workers)
    fits = [f for f, _ in pairs]
    designs = [d for _, d in pairs]

    if block is not None:
        m, mu = block
        if m not in profile.betas:
            raise ValueError(f"no beta({m}) in the mixing profile")
        choice = BlockChoice(m, mu, eta, profile.betas[m],
                             eta - 4 * (mu - 1) * profile.betas[m], n)
        choices = [choice]
    else:
        choices = plan_blocks(n, eta, profile)
    feasible = [c for c in choices if c.feasible]
    if not feasible:
        best = max(choices, key=lambda c: c.eta_prime) if choices else None
        detail = (f"; best margin eta'={best.eta_prime:.4g} at m={best.m}, mu={best.mu}"
                  if best else "")
        raise InfeasiblePlanError(f"no feasible block plan at eta={eta}{detail}")

    candidates = []
    best_reports, best_choice, best_mean = None, None, math.inf
    for choice in feasible:
        reports = _order_bounds(fits, designs, n, choice, M, eta, index_count)
        avg = float(np.mean([r.bound_total for r in reports]))
        candidates.append({"m": choice.m, "mu": choice.mu, "beta": choice.beta,
                           "eta_prime": choice.eta_prime, "mean_bound": avg})
        if avg < best_mean:
            best_reports, best_choice, best_mean = reports, choice, avg

    aics = aic_table(x, p_max, margin, center)
    srm = best_reports[argmin_first(r.bound_total for r in best_reports)].p
    aic_choice = aics[argmin_first(a for _, a in aics)][0]
    return SelectionResult(best_reports, aics, srm, aic_choice, best_choice, candidates, fits)
