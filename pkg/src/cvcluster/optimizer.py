"""Choosing the orthogonal freedom ``O`` of the cluster unitary.

With ``M = V^2 + I`` the nullifier covariance is ``M^(1/2) O D_p O^T M^(1/2)``,
so any weighted sum of normalised nullifier variances equals
``tr(D_p O^T B O)`` with ``B = M^(1/2) W M^(1/2)`` and
``W = diag(weight_i / divisor_i)``. The minimum over orthogonal ``O`` pairs
the eigenvalues of ``B`` in decreasing order with the input p-variances in
increasing order.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .es import default_config, es_minimize
from .gaussian import (
    VAC,
    NullifierReport,
    SqueezingSpectrum,
    nullifier_variances_closed_form,
    random_orthogonal,
    sqrt_spd,
)
from .graphs import Graph

__all__ = [
    "QualityObjective",
    "OptimizationResult",
    "ConcentrationResult",
    "VerificationReport",
    "quality_matrix",
    "objective",
    "optimize_orthogonal",
    "concentrate_on_pair",
    "brute_force_pairing",
    "givens_orthogonal",
    "verify_optimum_numerically",
]

CONCENTRATION_WEIGHT = 1e5


@dataclass(frozen=True)
class QualityObjective:
    """Node weights of the fitness ``sum_i weight_i * normalized_i``."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).reshape(-1)
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ParameterError("weights must be finite and non-negative")
        if not np.any(w > 0):
            raise ParameterError("at least one weight must be positive")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, n: int) -> QualityObjective:
        return cls(np.ones(n))

    @classmethod
    def concentrate(cls, n: int, n1: int, n2: int, weight: float = CONCENTRATION_WEIGHT) -> QualityObjective:
        w = np.ones(n)
        w[[n1, n2]] = weight
        return cls(w)


@dataclass(frozen=True)
class OptimizationResult:
    o_star: np.ndarray
    report: NullifierReport
    objective_value: float


@dataclass(frozen=True)
class ConcentrationResult:
    result: OptimizationResult
    n1: int
    n2: int
    mu_n1: float
    mu_n2: float
    mu_excluded: float


def _divisors(v: Graph) -> np.ndarray:
    return (1.0 + v.degrees) * VAC


def quality_matrix(v: Graph, obj: QualityObjective) -> np.ndarray:
    """``B = M^(1/2) W M^(1/2)``."""
    a = v.as_float()
    if obj.weights.size != v.n:
        raise ParameterError(f"{obj.weights.size} weights for a {v.n}-node graph")
    half = sqrt_spd(a @ a + np.eye(v.n))
    b = half @ np.diag(obj.weights / _divisors(v)) @ half
    return 0.5 * (b + b.T)


def objective(v: Graph, o, s: SqueezingSpectrum, obj: QualityObjective) -> float:
    """``sum_i weight_i * normalized_i`` for a given orthogonal matrix."""
    report = nullifier_variances_closed_form(v, o, s)
    return float(obj.weights @ report.normalized)


def optimize_orthogonal(v: Graph, s: SqueezingSpectrum, obj: QualityObjective | None = None) -> OptimizationResult:
    """Closed-form minimiser of the weighted nullifier fitness.

    Eigenvalue ties and equal squeezing values are resolved by stable index
    order, so the result is deterministic.
    """
    if s.n != v.n:
        raise ParameterError(f"spectrum has {s.n} modes for a {v.n}-node graph")
    obj = QualityObjective.uniform(v.n) if obj is None else obj
    lam, q = np.linalg.eigh(quality_matrix(v, obj))
    d = s.p_variances
    by_lam = np.argsort(-lam, kind="stable")
    by_d = np.argsort(d, kind="stable")
    o = np.empty_like(q)
    o[:, by_d] = q[:, by_lam]
    report = nullifier_variances_closed_form(v, o, s)
    return OptimizationResult(o_star=o, report=report, objective_value=float(obj.weights @ report.normalized))


def concentrate_on_pair(
    v: Graph, s: SqueezingSpectrum, n1: int, n2: int, weight: float = CONCENTRATION_WEIGHT
) -> ConcentrationResult:
    """Push the best squeezing onto the nullifiers of ``n1`` and ``n2``."""
    if n1 == n2:
        raise ParameterError("n1 and n2 must differ")
    for node in (n1, n2):
        if not (0 <= node < v.n):
            raise ParameterError(f"node {node} out of range for {v.n} nodes")
    res = optimize_orthogonal(v, s, QualityObjective.concentrate(v.n, n1, n2, weight))
    rep = res.report
    return ConcentrationResult(
        result=res,
        n1=n1,
        n2=n2,
        mu_n1=float(rep.db[n1]),
        mu_n2=float(rep.db[n2]),
        # undefined (nan) when the pair is the whole graph
        mu_excluded=rep.excluded_mean((n1, n2)) if v.n > 2 else math.nan,
    )


def brute_force_pairing(v: Graph, s: SqueezingSpectrum, obj: QualityObjective) -> float:
    """Exhaustive minimum of ``sum_k lambda_k d_pi(k)`` over all pairings (small ``n`` only)."""
    if v.n > 8:
        raise ParameterError("brute force is limited to n <= 8")
    lam = np.linalg.eigvalsh(quality_matrix(v, obj))
    d = s.p_variances
    return min(float(lam @ d[list(perm)]) for perm in itertools.permutations(range(v.n)))


def givens_orthogonal(angles, n: int) -> np.ndarray:
    """Special orthogonal matrix from ``n(n-1)/2`` Givens angles."""
    angles = np.asarray(angles, dtype=float)
    if angles.size != n * (n - 1) // 2:
        raise ParameterError(f"expected {n * (n - 1) // 2} angles, got {angles.size}")
    o = np.eye(n)
    k = 0
    for i in range(n - 1):
        for j in range(i + 1, n):
            c, sn = math.cos(angles[k]), math.sin(angles[k])
            oi, oj = o[:, i].copy(), o[:, j].copy()
            o[:, i] = c * oi - sn * oj
            o[:, j] = sn * oi + c * oj
            k += 1
    return o


@dataclass(frozen=True)
class VerificationReport:
    analytic_value: float
    sampled_min: float
    violations: int
    trials: int
    es_value: float | None
    es_gap: float | None

    @property
    def ok(self) -> bool:
        es_ok = self.es_gap is None or self.es_gap >= -1e-6
        return self.violations == 0 and es_ok


def verify_optimum_numerically(
    v: Graph,
    s: SqueezingSpectrum,
    obj: QualityObjective | None = None,
    trials: int = 200,
    seed=0,
    run_es: bool = True,
) -> VerificationReport:
    """Cross-check the closed form against random orthogonal matrices and an ES search.

    The ES search (Givens-angle parametrisation) only runs for ``n <= 8``.
    ``es_gap`` is ES best minus analytic value; a negative gap beyond
    ``1e-6`` would mean the closed form is not optimal.
    """
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    obj = QualityObjective.uniform(v.n) if obj is None else obj
    best = optimize_orthogonal(v, s, obj).objective_value
    rng = np.random.default_rng(seed)
    sampled = [objective(v, random_orthogonal(v.n, rng), s, obj) for _ in range(trials)]
    violations = sum(1 for val in sampled if best > val + 1e-9)

    es_value = es_gap = None
    if run_es and v.n <= 8 and v.n >= 2:
        dim = v.n * (v.n - 1) // 2
        cfg = default_config(dim, sigma0=0.5, max_evals=20_000 * dim, target_fitness=-math.inf,
                             seed=int(rng.integers(2**32)))
        res = es_minimize(lambda ang: objective(v, givens_orthogonal(ang, v.n), s, obj),
                          rng.uniform(-math.pi, math.pi, dim), cfg)
        es_value = res.fun
        es_gap = es_value - best
    return VerificationReport(
        analytic_value=best,
        sampled_min=float(min(sampled)),
        violations=violations,
        trials=trials,
        es_value=es_value,
        es_gap=es_gap,
    )
