"""Beta-mixing coefficients of Gaussian AR surrogates and block planning.

For a stationary Markov chain with stationary law ``pi`` and m-step kernel
``P^m``, ``beta(m) = E_{x ~ pi} TV(P^m(x, .), pi)``. An AR(q) process is a
Markov chain in its state ``(X_t, ..., X_{t-q+1})``. Its scalar beta at gap m
is the state-chain beta at lag ``m + q - 1``: the first q future values form
the future state, and every later value adds only fresh noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, linalg
from scipy.special import ndtr

from ._parallel import chunked_seeds, map_ordered, seed_sequence
from .stability import as_coef, companion_matrix, is_stationary

MC_CHUNK = 10_000
DEFAULT_SAMPLES = 100_000
QUAD_EPSABS = 1e-13


@dataclass(frozen=True)
class GaussianARSurrogate:
    phi: np.ndarray
    sigma: float = 1.0

    def __post_init__(self):
        phi = as_coef(self.phi)
        object.__setattr__(self, "phi", phi)
        if not self.sigma > 0:
            raise ValueError("innovation sd must be positive")
        if not is_stationary(phi):
            raise ValueError(f"surrogate coefficients {phi} are not stationary")

    @property
    def q(self) -> int:
        return self.phi.size


def tv_gaussians_1d(mean1: float, var1: float, mean2: float, var2: float) -> float:
    """Total variation distance ``(1/2) int |f - g|`` between two normal laws.

    The densities cross where the quadratic ``log f(x) - log g(x)`` vanishes;
    the distance is the total of ``F - G`` over the intervals where ``f > g``.
    """
    if not (var1 > 0 and var2 > 0):
        raise ValueError("variances must be positive")
    s1, s2 = math.sqrt(var1), math.sqrt(var2)
    # log f - log g = a x^2 + b x + c
    a = 0.5 / var2 - 0.5 / var1
    b = mean1 / var1 - mean2 / var2
    c = 0.5 * mean2 * mean2 / var2 - 0.5 * mean1 * mean1 / var1 + math.log(s2 / s1)
    if a == 0.0:
        if b == 0.0:
            return 0.0
        cuts = [-c / b]
    else:
        disc = b * b - 4 * a * c
        if disc <= 0:
            cuts = []
        else:
            # numerically stable quadratic roots
            qq = -0.5 * (b + math.copysign(math.sqrt(disc), b))
            r = sorted({qq / a, c / qq} if qq != 0 else {0.0})
            cuts = r
    edges = [-math.inf, *cuts, math.inf]
    tv = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        if math.isinf(lo) and math.isinf(hi):
            x = 0.0
        elif math.isinf(lo):
            x = hi - 1.0
        elif math.isinf(hi):
            x = lo + 1.0
        else:
            x = 0.5 * (lo + hi)
        if a * x * x + b * x + c > 0:
            tv += _mass(mean1, s1, lo, hi) - _mass(mean2, s2, lo, hi)
    return min(max(tv, 0.0), 1.0)


def _mass(mean, sd, lo, hi):
    zl = -math.inf if math.isinf(lo) else (lo - mean) / sd
    zh = math.inf if math.isinf(hi) else (hi - mean) / sd
    # use the tail on the side that avoids cancellation
    if zl > 0:
        return float(ndtr(-zl) - ndtr(-zh))
    return float(ndtr(zh) - ndtr(zl))


def ar1_transition(phi: float, sigma: float, m: int):
    """Stationary variance, and mean factor and variance of the m-step kernel."""
    v_inf = sigma * sigma / (1 - phi * phi)
    v_m = sigma * sigma * sum(phi ** (2 * k) for k in range(m))
    return v_inf, phi ** m, v_m


def beta_ar1(surrogate: GaussianARSurrogate, m: int, quad_points: int | None = None) -> float:
    """beta(m) of a Gaussian AR(1): the ``pi``-average of ``TV(P^m(x, .), pi)``.

    With ``quad_points`` the outer integral is a Gauss-Hermite rule with that
    many nodes. The default (``None``) integrates adaptively over the
    half-line, using that the integrand is even in x; the Gauss-Hermite rule
    converges slowly when the kernel and stationary variances are close,
    because the integrand then has a near-kink at the origin.
    """
    if surrogate.q != 1:
        raise ValueError("beta_ar1 needs an order-1 surrogate")
    if m < 1:
        raise ValueError("lag must be >= 1")
    phi = float(surrogate.phi[0])
    if abs(phi) >= 1:
        raise ValueError("|phi| must be < 1")
    v_inf, gain, v_m = ar1_transition(phi, surrogate.sigma, m)
    sd_inf = math.sqrt(v_inf)
    if quad_points is not None:
        nodes, weights = np.polynomial.hermite_e.hermegauss(quad_points)
        weights = weights / math.sqrt(2 * math.pi)
        vals = [tv_gaussians_1d(gain * sd_inf * z, v_m, 0.0, v_inf) for z in nodes]
        value = float(np.dot(weights, vals))
    else:
        def integrand(z):
            return tv_gaussians_1d(gain * sd_inf * z, v_m, 0.0, v_inf) * math.exp(-0.5 * z * z)

        half, _ = integrate.quad(integrand, 0.0, 40.0, epsabs=QUAD_EPSABS, epsrel=1e-10,
                                 limit=500)
        value = 2.0 * half / math.sqrt(2 * math.pi)
    return min(max(value, 0.0), 1.0)


def _state_moments(surrogate: GaussianARSurrogate, lag: int):
    q = surrogate.q
    A = companion_matrix(surrogate.phi)
    noise = np.zeros((q, q))
    noise[0, 0] = surrogate.sigma ** 2
    v_inf = linalg.solve_discrete_lyapunov(A, noise)
    v_inf = 0.5 * (v_inf + v_inf.T)
    v_lag = np.zeros((q, q))
    Ak = np.eye(q)
    for _ in range(lag):
        col = Ak[:, 0]
        v_lag += surrogate.sigma ** 2 * np.outer(col, col)
        Ak = A @ Ak
    return Ak, v_lag, v_inf


def _chol(v, what):
    try:
        return linalg.cholesky(v, lower=True)
    except linalg.LinAlgError:
        raise np.linalg.LinAlgError(f"{what} covariance is singular") from None


def _logpdf_chol(x, mean, L):
    # rows of x; mean broadcastable
    z = linalg.solve_triangular(L, (x - mean).T, lower=True)
    return -0.5 * np.sum(z * z, axis=0) - np.sum(np.log(np.diag(L)))


def _beta_chunk(args):
    gain, L_lag, L_inf, seed, size = args
    q = L_inf.shape[0]
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((size, q)) @ L_inf.T
    cond_mean = x @ gain.T
    # y ~ P^L(x, .): weight max(0, 1 - pi(y) / p(y | x))
    y1 = cond_mean + rng.standard_normal((size, q)) @ L_lag.T
    r1 = _logpdf_chol(y1, 0.0, L_inf) - _logpdf_chol(y1, cond_mean, L_lag)
    w1 = np.maximum(0.0, -np.expm1(np.minimum(r1, 700.0)))
    # y ~ pi: weight max(0, 1 - p(y | x) / pi(y))
    y2 = rng.standard_normal((size, q)) @ L_inf.T
    r2 = _logpdf_chol(y2, cond_mean, L_lag) - _logpdf_chol(y2, 0.0, L_inf)
    w2 = np.maximum(0.0, -np.expm1(np.minimum(r2, 700.0)))
    w = 0.5 * (w1 + w2)
    return float(w.sum()), float((w * w).sum())


def beta_state_chain(surrogate: GaussianARSurrogate, lag: int,
                     samples: int = DEFAULT_SAMPLES, seed: int = 0,
                     workers: int = 1, return_stderr: bool = False):
    """Monte Carlo beta of the companion-form state chain at ``lag`` steps.

    The lag-step kernel covariance has rank ``min(lag, q)``, so ``lag < q``
    is rejected.
    """
    q = surrogate.q
    if lag < q:
        raise ValueError(f"state-chain lag {lag} < order {q}: m-step covariance is singular; "
                         f"use lag >= q")
    if samples < 2:
        raise ValueError("need at least 2 samples")
    gain, v_lag, v_inf = _state_moments(surrogate, lag)
    L_lag = _chol(v_lag, f"{lag}-step")
    L_inf = _chol(v_inf, "stationary")
    jobs = [(gain, L_lag, L_inf, s, size)
            for s, size in chunked_seeds(seed, samples, MC_CHUNK)]
    parts = map_ordered(_beta_chunk, jobs, workers)
    mean = math.fsum(a for a, _ in parts) / samples
    var = max(math.fsum(b for _, b in parts) / samples - mean * mean, 0.0)
    mean = min(max(mean, 0.0), 1.0)
    if return_stderr:
        return mean, math.sqrt(var / (samples - 1))
    return mean


def beta_arq(surrogate: GaussianARSurrogate, m: int, samples: int = DEFAULT_SAMPLES,
             seed: int = 0, workers: int = 1, return_stderr: bool = False):
    """beta(m) of the scalar AR(q) series, via the state chain at lag ``m + q - 1``."""
    if m < 1:
        raise ValueError("lag must be >= 1")
    return beta_state_chain(surrogate, m + surrogate.q - 1, samples, seed, workers,
                            return_stderr)


@dataclass(frozen=True)
class MixingProfile:
    """beta(m) over a range of lags, made nonincreasing by a running minimum."""

    betas: dict[int, float]
    method: str
    surrogate: GaussianARSurrogate
    raw_betas: dict[int, float] = field(default_factory=dict)
    stderr: dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        for m, b in self.betas.items():
            if not 0.0 <= b <= 1.0:
                raise ValueError(f"beta({m}) = {b} outside [0, 1]")

    @property
    def lags(self) -> list[int]:
        return sorted(self.betas)


def isotonic_nonincreasing(raw: dict[int, float]) -> dict[int, float]:
    out, running = {}, math.inf
    for m in sorted(raw):
        running = min(running, raw[m])
        out[m] = running
    return out


def mixing_profile(surrogate: GaussianARSurrogate, lags, method: str | None = None,
                   samples: int = DEFAULT_SAMPLES, quad_points: int | None = None,
                   seed: int = 0, workers: int = 1) -> MixingProfile:
    """beta(m) for each lag. Quadrature for q = 1, Monte Carlo otherwise.

    Each lag's Monte Carlo estimate gets its own seed substream.
    """
    lags = sorted({int(m) for m in lags})
    if not lags or lags[0] < 1:
        raise ValueError("lags must be positive integers")
    if method is None:
        method = "quadrature" if surrogate.q == 1 else "monte_carlo"
    raw, se = {}, {}
    if method == "quadrature":
        for m in lags:
            raw[m] = beta_ar1(surrogate, m, quad_points)
            se[m] = 0.0
    elif method == "monte_carlo":
        seeds = seed_sequence(seed).spawn(len(lags))
        for m, s in zip(lags, seeds):
            raw[m], se[m] = beta_arq(surrogate, m, samples, s, workers, return_stderr=True)
    else:
        raise ValueError(f"unknown method {method!r}")
    return MixingProfile(isotonic_nonincreasing(raw), method, surrogate, raw, se)


@dataclass(frozen=True)
class BlockChoice:
    m: int
    mu: int
    eta: float
    beta: float
    eta_prime: float
    n: int

    @property
    def feasible(self) -> bool:
        return self.eta_prime > 0

    @property
    def unused(self) -> int:
        return self.n - 2 * self.mu * self.m


def block_choice(n: int, eta: float, m: int, beta: float) -> BlockChoice:
    mu = n // (2 * m)
    return BlockChoice(m, mu, eta, beta, eta - 4 * (mu - 1) * beta, n)


def plan_blocks(n: int, eta: float, profile: MixingProfile) -> list[BlockChoice]:
    """Every lag in the profile with ``mu = floor(n / 2m)`` and its adjusted level."""
    if n < 4:
        raise ValueError("need n >= 4")
    if not 0 < eta < 1:
        raise ValueError("eta must lie in (0, 1)")
    return [block_choice(n, eta, m, profile.betas[m]) for m in profile.lags
            if n // (2 * m) >= 1]


def fit_surrogate(series, q: int, margin: float = 1e-3) -> GaussianARSurrogate:
    """Gaussian AR(q) surrogate from an OLS fit, shrunk to stationarity."""
    from .armodel import fit_stationary

    fit = fit_stationary(series, q, cap=math.inf, margin=margin)
    return GaussianARSurrogate(fit.coef, math.sqrt(fit.sigma2))
