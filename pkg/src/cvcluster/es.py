"""Derandomized (mu/mu_w, lambda) evolution strategy with isotropic mutations.

Only the global step size adapts (cumulative step-size adaptation); the
mutation covariance stays the identity. Offspring are ``x + sigma * z`` with
standard normal ``z``; the new parent is the weighted mean of the ``mu``
best offspring.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple

import numpy as np

from .errors import NonFiniteFitnessError, ParameterError

__all__ = ["EsConfig", "EsTrace", "EsResult", "default_config", "es_minimize", "es_minimize_restarts"]


@dataclass(frozen=True)
class EsConfig:
    dim: int
    lam: int
    mu: int
    weights: tuple
    sigma0: float = 0.3
    max_evals: int = 100_000
    target_fitness: float = 1e-8
    seed: int | None = 0
    # stop once the best-of-generation values over the last window span less than this
    tol_fun_hist: float = 1e-12
    tol_sigma: float = 1e-14

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if self.dim < 1:
            raise ParameterError(f"dim must be >= 1, got {self.dim}")
        if not (1 <= self.mu <= self.lam):
            raise ParameterError(f"need 1 <= mu <= lambda, got mu={self.mu}, lambda={self.lam}")
        if w.size != self.mu:
            raise ParameterError(f"expected {self.mu} weights, got {w.size}")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ParameterError("recombination weights must sum to 1")
        if np.any(np.diff(w) > 0) or np.any(w < 0):
            raise ParameterError("recombination weights must be non-negative and non-increasing")
        if not self.sigma0 > 0:
            raise ParameterError("sigma0 must be positive")
        if self.max_evals < 1:
            raise ParameterError("max_evals must be positive")

    @property
    def mu_eff(self) -> float:
        w = np.asarray(self.weights)
        return float(1.0 / np.sum(w**2))

    def with_(self, **changes) -> EsConfig:
        return replace(self, **changes)


@dataclass
class EsTrace:
    best_fitness_per_generation: list = field(default_factory=list)
    sigma_per_generation: list = field(default_factory=list)
    evaluations_used: int = 0
    best_x: np.ndarray | None = None
    stop_reason: str = ""


class EsResult(NamedTuple):
    x: np.ndarray
    fun: float
    trace: EsTrace


def log_weights(mu: int) -> tuple:
    w = np.log(mu + 0.5) - np.log(np.arange(1, mu + 1))
    return tuple((w / w.sum()).tolist())


def default_config(dim: int, **overrides) -> EsConfig:
    """Standard population sizing: ``lambda = 4 + floor(3 ln dim)``, ``mu = lambda // 2``."""
    if dim < 1:
        raise ParameterError(f"dim must be >= 1, got {dim}")
    lam = 4 + int(math.floor(3 * math.log(dim)))
    mu = lam // 2
    cfg = EsConfig(
        dim=dim,
        lam=lam,
        mu=mu,
        weights=log_weights(mu),
        sigma0=0.3,
        max_evals=int(round(1e5 * math.sqrt(dim))),
        target_fitness=1e-8,
    )
    return cfg.with_(**overrides) if overrides else cfg


def es_minimize(f: Callable, x0, cfg: EsConfig, vectorized: bool = False) -> EsResult:
    """Minimise ``f`` starting from ``x0``.

    Parameters
    ----------
    f : callable
        Maps a parameter vector to a float. With ``vectorized=True`` it maps
        a ``(lambda, dim)`` array to ``lambda`` fitness values instead.
    x0 : array_like
        Initial parent.
    cfg : EsConfig
        Population sizes, budget and stopping thresholds.

    Returns
    -------
    EsResult
        ``(x, fun, trace)`` with the best point ever evaluated.

    Raises
    ------
    NonFiniteFitnessError
        If ``f`` returns nan or inf.
    """
    x = np.array(x0, dtype=float).reshape(-1)
    n = x.size
    if n != cfg.dim:
        raise ParameterError(f"x0 has length {n}, config expects {cfg.dim}")
    rng = np.random.default_rng(cfg.seed)
    w = np.asarray(cfg.weights)
    mu_eff = cfg.mu_eff
    c_sigma = (mu_eff + 2.0) / (n + mu_eff + 5.0)
    d_sigma = 1.0 + 2.0 * max(0.0, math.sqrt((mu_eff - 1.0) / (n + 1.0)) - 1.0) + c_sigma
    chi_n = math.sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n))
    path_coef = math.sqrt(c_sigma * (2.0 - c_sigma) * mu_eff)
    hist_len = 10 + int(math.ceil(30.0 * n / cfg.lam))

    sigma = cfg.sigma0
    path = np.zeros(n)
    trace = EsTrace()
    best_x, best_f = x.copy(), math.inf
    gen_best = []

    while trace.evaluations_used < cfg.max_evals:
        z = rng.standard_normal((cfg.lam, n))
        xs = x + sigma * z
        if vectorized:
            fit = np.asarray(f(xs), dtype=float).reshape(-1)
        else:
            fit = np.array([float(f(xk)) for xk in xs])
        trace.evaluations_used += cfg.lam
        if not np.all(np.isfinite(fit)):
            k = int(np.flatnonzero(~np.isfinite(fit))[0])
            raise NonFiniteFitnessError(
                f"fitness returned {fit[k]} at generation {len(gen_best)} for x={xs[k].tolist()}"
            )
        order = np.argsort(fit, kind="stable")
        if fit[order[0]] < best_f:
            best_f = float(fit[order[0]])
            best_x = xs[order[0]].copy()
        gen_best.append(float(fit[order[0]]))
        trace.best_fitness_per_generation.append(best_f)
        trace.sigma_per_generation.append(sigma)

        if best_f <= cfg.target_fitness:
            trace.stop_reason = "target"
            break

        zw = w @ z[order[: cfg.mu]]
        x = x + sigma * zw
        path = (1.0 - c_sigma) * path + path_coef * zw
        sigma *= math.exp((c_sigma / d_sigma) * (np.linalg.norm(path) / chi_n - 1.0))

        if sigma < cfg.tol_sigma:
            trace.stop_reason = "tol_sigma"
            break
        if len(gen_best) >= hist_len:
            recent = gen_best[-hist_len:]
            if max(recent) - min(recent) < cfg.tol_fun_hist:
                trace.stop_reason = "tol_fun_hist"
                break
    else:
        trace.stop_reason = "max_evals"

    trace.best_x = best_x
    return EsResult(best_x, best_f, trace)


def es_minimize_restarts(
    f: Callable,
    sample_x0: Callable,
    cfg: EsConfig,
    restarts: int = 10,
    vectorized: bool = False,
    stop_below: float | None = None,
) -> tuple[EsResult, list]:
    """Independent restarts with seeds spawned from ``cfg.seed``.

    ``sample_x0(rng)`` draws each start point. Stops early once a run reaches
    ``stop_below`` (default: the config's target). Returns the best result
    and the list of all per-restart results.
    """
    if restarts < 1:
        raise ParameterError("restarts must be >= 1")
    stop_below = cfg.target_fitness if stop_below is None else stop_below
    children = np.random.SeedSequence(cfg.seed).spawn(restarts)
    runs = []
    best = None
    for child in children:
        start_rng, es_seed = np.random.default_rng(child.spawn(1)[0]), int(child.generate_state(1)[0])
        res = es_minimize(f, sample_x0(start_rng), cfg.with_(seed=es_seed), vectorized=vectorized)
        runs.append(res)
        if best is None or res.fun < best.fun:
            best = res
        if best.fun <= stop_below:
            break
    return best, runs
