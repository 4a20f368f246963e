"""Two-party entanglement routing with local passive optics.

A cluster is shared between Alice (``n`` modes) and Bob (``p`` modes). Modes
are renumbered so Alice's come first, giving the quadrature layout
``(q_A, q_B, p_A, p_B)``. Each party applies a local unitary; the goal is to
make the rows of the transformed covariance that belong to two chosen modes
equal to those of an isolated two-mode EPR pair, i.e. to drive

    f = || sigma_channel - rows(S sigma_1 S^T) ||_F

to zero. The search runs the isotropic evolution strategy on the ``n^2 + p^2``
Hermitian-generator parameters of the two unitaries.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import appendix
from ._backend import kernels
from .errors import ConfigError, ContractViolation, FormatError, ParameterError
from .es import EsConfig, default_config, es_minimize_restarts
from .gaussian import (
    VAC,
    SqueezingSpectrum,
    apply_symplectic,
    cluster_covariance,
    symplectic_form,
)
from .graphs import Graph, catalog_graph, graph_from_spec

__all__ = [
    "FOUND",
    "NOT_FOUND",
    "Partition",
    "ChannelTarget",
    "RoutingProblem",
    "RoutingSolution",
    "SolutionCheck",
    "unitary_from_params",
    "block_symplectic",
    "channel_rows",
    "channel_target_rows",
    "reduced_rows",
    "routing_fitness",
    "solve_routing",
    "verify_solution",
    "global_reshape",
    "default_partition",
    "default_pair",
    "RoutingConfig",
    "load_routing_config",
    "save_solution",
    "load_solution",
    "appendix_problems",
    "verify_appendix",
    "nearest_unitary",
]

FOUND = "FOUND"
NOT_FOUND = "NOT_FOUND_WITHIN_BUDGET"
FEASIBILITY_THRESHOLD = 1e-6


def _db_to_r(db: float) -> float:
    # 10**(-db/10) = exp(-2r)
    return db * math.log(10.0) / 20.0


@dataclass(frozen=True)
class Partition:
    alice: tuple
    bob: tuple

    def __post_init__(self):
        a, b = tuple(int(x) for x in self.alice), tuple(int(x) for x in self.bob)
        if not a or not b:
            raise ParameterError("both parties need at least one node")
        if len(set(a)) != len(a) or len(set(b)) != len(b) or set(a) & set(b):
            raise ParameterError("partition lists must be disjoint and duplicate-free")
        object.__setattr__(self, "alice", a)
        object.__setattr__(self, "bob", b)

    @property
    def n(self) -> int:
        return len(self.alice)

    @property
    def p(self) -> int:
        return len(self.bob)

    @property
    def order(self) -> tuple:
        return self.alice + self.bob

    def validate(self, num_nodes: int) -> None:
        if sorted(self.order) != list(range(num_nodes)):
            raise ParameterError(f"partition does not cover nodes 0..{num_nodes - 1} exactly once")

    def position(self, node: int) -> int:
        try:
            return self.order.index(int(node))
        except ValueError:
            raise ParameterError(f"node {node} is not in the partition") from None

    def same_team(self, a: int, b: int) -> bool:
        return (a in self.alice) == (b in self.alice)


@dataclass(frozen=True)
class ChannelTarget:
    """EPR pair of cluster type: ``q`` of each mode correlates with ``p`` of the other.

    ``n1`` and ``n2`` are positions in the Alice-first layout.
    """

    n1: int
    n2: int
    squeezing_db: float

    @property
    def r(self) -> float:
        return _db_to_r(self.squeezing_db)

    @property
    def ch_diag(self) -> float:
        return math.cosh(2 * self.r) * VAC

    @property
    def ch_offdiag(self) -> float:
        return math.sinh(2 * self.r) * VAC


def unitary_from_params(theta) -> np.ndarray:
    """``exp(iH)`` with ``H`` Hermitian built from ``d**2`` reals.

    Layout: ``d`` diagonal entries, the real parts of the strict upper
    triangle (row-major), then their imaginary parts.
    """
    theta = np.asarray(theta, dtype=float).reshape(-1)
    d = math.isqrt(theta.size)
    if d * d != theta.size or d == 0:
        raise ParameterError(f"parameter count {theta.size} is not a positive perfect square")
    return kernels.expi_hermitian(theta[None, :], d)[0]


def _check_unitary(u, tol=1e-8):
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ContractViolation(f"unitary must be square, got shape {u.shape}")
    err = float(np.abs(u.conj().T @ u - np.eye(u.shape[0])).max())
    if err > tol:
        raise ContractViolation(f"matrix is not unitary (|U^H U - I| = {err:.2e})")
    return u


def block_symplectic(u_a, u_b, tol: float = 1e-5) -> np.ndarray:
    """Symplectic of ``U_A (+) U_B`` over the ``(q_A, q_B, p_A, p_B)`` layout.

    ``tol`` is loose by default so that published six-digit matrices pass.
    """
    u_a, u_b = _check_unitary(u_a, tol), _check_unitary(u_b, tol)
    n, p = u_a.shape[0], u_b.shape[0]
    u = np.zeros((n + p, n + p), dtype=complex)
    u[:n, :n] = u_a
    u[n:, n:] = u_b
    return np.block([[u.real, -u.imag], [u.imag, u.real]])


def channel_rows(n1: int, n2: int, n: int, p: int) -> list:
    """Row indices ``(q_n1, q_n2, p_n1, p_n2)`` in the Alice-first layout."""
    total = n + p
    if not (0 <= n1 < total and 0 <= n2 < total):
        raise ParameterError(f"channel nodes ({n1}, {n2}) out of range for {total} modes")
    if n1 == n2:
        raise ParameterError("channel nodes must differ")
    return [n1, n2, n1 + total, n2 + total]


def channel_target_rows(t: ChannelTarget, n: int, p: int) -> np.ndarray:
    """The ``4 x 2(n+p)`` rows an isolated EPR pair would have."""
    rows = channel_rows(t.n1, t.n2, n, p)
    out = np.zeros((4, 2 * (n + p)))
    for k, col in enumerate(rows):
        out[k, col] = t.ch_diag
    # q_n1 <-> p_n2 and q_n2 <-> p_n1
    for k, col in enumerate((rows[3], rows[2], rows[1], rows[0])):
        out[k, col] = t.ch_offdiag
    return out


def reduced_rows(sigma2, n1: int, n2: int, n: int, p: int) -> np.ndarray:
    sigma2 = np.asarray(sigma2, dtype=float)
    if sigma2.shape != (2 * (n + p), 2 * (n + p)):
        raise ContractViolation(f"covariance shape {sigma2.shape} does not match {n + p} modes")
    return sigma2[channel_rows(n1, n2, n, p), :]


@dataclass(frozen=True, eq=False)
class RoutingProblem:
    """Everything the routing fitness needs, in the Alice-first layout."""

    sigma1: np.ndarray
    n: int
    p: int
    target: ChannelTarget
    partition: Partition | None = None
    label: str = ""

    def __post_init__(self):
        sigma1 = np.ascontiguousarray(self.sigma1, dtype=float)
        if sigma1.shape != (2 * (self.n + self.p),) * 2:
            raise ContractViolation("sigma1 does not match n + p modes")
        sigma1.setflags(write=False)
        object.__setattr__(self, "sigma1", sigma1)
        object.__setattr__(self, "_rows", np.array(channel_rows(self.target.n1, self.target.n2, self.n, self.p)))
        object.__setattr__(self, "_target_rows", channel_target_rows(self.target, self.n, self.p))

    @property
    def dim(self) -> int:
        return self.n * self.n + self.p * self.p

    @property
    def rows(self) -> np.ndarray:
        return self._rows

    @property
    def target_rows(self) -> np.ndarray:
        return self._target_rows

    @classmethod
    def from_graph(
        cls,
        graph: Graph,
        partition: Partition,
        pair,
        squeezing_db: float = 5.0,
        channel_db: float | None = None,
        label: str = "",
    ) -> RoutingProblem:
        """Cluster of ``graph`` built from equal ``squeezing_db`` inputs and ``O = I``.

        ``pair`` uses the graph's own node labels; ``channel_db`` defaults to
        the input squeezing.
        """
        partition.validate(graph.n)
        a, b = (int(x) for x in pair)
        if a == b:
            raise ParameterError("channel nodes must differ")
        ordered = graph.relabel(partition.order)
        sigma1 = cluster_covariance(ordered, SqueezingSpectrum.equal(graph.n, -abs(squeezing_db)))
        target = ChannelTarget(
            partition.position(a),
            partition.position(b),
            abs(squeezing_db) if channel_db is None else abs(channel_db),
        )
        return cls(sigma1=sigma1, n=partition.n, p=partition.p, target=target, partition=partition, label=label)

    def split(self, theta):
        theta = np.asarray(theta, dtype=float).reshape(-1)
        if theta.size != self.dim:
            raise ParameterError(f"expected {self.dim} parameters, got {theta.size}")
        return theta[: self.n * self.n], theta[self.n * self.n :]

    def unitaries(self, theta):
        ta, tb = self.split(theta)
        return unitary_from_params(ta), unitary_from_params(tb)

    def fitness_batch(self, thetas, backend=None) -> np.ndarray:
        k = kernels if backend is None else backend
        return k.routing_residuals(thetas, self.sigma1, self.rows, self.target_rows, self.n, self.p)

    def transformed(self, u_a, u_b) -> np.ndarray:
        return apply_symplectic(block_symplectic(u_a, u_b), self.sigma1, tol=1e-5)


def routing_fitness(theta_joint, problem: RoutingProblem) -> float:
    """Frobenius distance between the EPR target rows and the transformed rows."""
    theta = np.asarray(theta_joint, dtype=float).reshape(1, -1)
    if theta.shape[1] != problem.dim:
        raise ParameterError(f"expected {problem.dim} parameters, got {theta.shape[1]}")
    return float(problem.fitness_batch(theta)[0])


@dataclass(frozen=True)
class SolutionCheck:
    block_error: float
    residual_max: float
    unitarity_error: float
    tol: float

    @property
    def block_ok(self) -> bool:
        return self.block_error <= self.tol

    @property
    def residual_ok(self) -> bool:
        return self.residual_max <= self.tol

    @property
    def unitarity_ok(self) -> bool:
        return self.unitarity_error <= max(self.tol, 1e-8)

    @property
    def ok(self) -> bool:
        return self.block_ok and self.residual_ok and self.unitarity_ok

    def lines(self) -> list:
        mark = lambda b: "pass" if b else "FAIL"  # noqa: E731
        return [
            f"channel block    {mark(self.block_ok)}  max|diff| = {self.block_error:.3e}",
            f"residual corr.   {mark(self.residual_ok)}  max|corr| = {self.residual_max:.3e}",
            f"unitarity        {mark(self.unitarity_ok)}  max|U^H U - I| = {self.unitarity_error:.3e}",
        ]


@dataclass(frozen=True, eq=False)
class RoutingSolution:
    u_a: np.ndarray
    u_b: np.ndarray
    f_opt: float
    residual_max: float
    evaluations: int
    verdict: str
    theta: np.ndarray | None = None
    restarts_used: int = 0
    wall_time: float = 0.0
    best_per_restart: list = field(default_factory=list)

    @property
    def found(self) -> bool:
        return self.verdict == FOUND


def nearest_unitary(u) -> np.ndarray:
    """Polar factor of ``u``: the unitary closest to it in Frobenius norm."""
    w, _, vh = np.linalg.svd(np.asarray(u, dtype=complex))
    return w @ vh


def verify_solution(sol, problem: RoutingProblem, tol: float = 1e-5, project: bool = True) -> SolutionCheck:
    """Recompute the transformed covariance and check the channel.

    ``sol`` is a :class:`RoutingSolution` or a ``(u_a, u_b)`` pair. Matrices
    given to a few digits are only approximately unitary; with ``project``
    they are replaced by their nearest unitary first, so the checked state is
    a physical one. ``unitarity_error`` always refers to the input matrices.
    """
    u_a, u_b = (sol.u_a, sol.u_b) if isinstance(sol, RoutingSolution) else sol
    u_a, u_b = np.asarray(u_a, dtype=complex), np.asarray(u_b, dtype=complex)
    unit_err = max(
        float(np.abs(u.conj().T @ u - np.eye(u.shape[0])).max()) for u in (u_a, u_b)
    )
    if project:
        u_a, u_b = nearest_unitary(u_a), nearest_unitary(u_b)
    sigma2 = problem.transformed(u_a, u_b)
    rows = list(problem.rows)
    others = [i for i in range(sigma2.shape[0]) if i not in rows]
    block = sigma2[np.ix_(rows, rows)]
    want = problem.target_rows[:, rows]
    residual = float(np.abs(sigma2[np.ix_(rows, others)]).max()) if others else 0.0
    return SolutionCheck(
        block_error=float(np.abs(block - want).max()),
        residual_max=residual,
        unitarity_error=unit_err,
        tol=tol,
    )


def _residual_max(problem, u_a, u_b) -> float:
    sigma2 = problem.transformed(u_a, u_b)
    rows = list(problem.rows)
    others = [i for i in range(sigma2.shape[0]) if i not in rows]
    return float(np.abs(sigma2[np.ix_(rows, others)]).max()) if others else 0.0


def solve_routing(
    problem: RoutingProblem,
    restarts: int = 10,
    cfg: EsConfig | None = None,
    seed: int = 0,
    threshold: float = FEASIBILITY_THRESHOLD,
) -> RoutingSolution:
    """Search for local unitaries with restarted ES runs.

    Start points are uniform in ``[-pi, pi]`` per parameter. The verdict is
    ``FOUND`` when the best fitness is below ``threshold`` and
    ``NOT_FOUND_WITHIN_BUDGET`` otherwise; the latter is not a proof that no
    solution exists.
    """
    cfg = default_config(problem.dim, seed=seed) if cfg is None else cfg
    if cfg.dim != problem.dim:
        raise ParameterError(f"ES config is for dim {cfg.dim}, problem needs {problem.dim}")
    t0 = time.perf_counter()
    best, runs = es_minimize_restarts(
        problem.fitness_batch,
        lambda rng: rng.uniform(-math.pi, math.pi, problem.dim),
        cfg,
        restarts=restarts,
        vectorized=True,
        stop_below=min(cfg.target_fitness, threshold),
    )
    u_a, u_b = problem.unitaries(best.x)
    f_opt = routing_fitness(best.x, problem)
    return RoutingSolution(
        u_a=u_a,
        u_b=u_b,
        f_opt=f_opt,
        residual_max=_residual_max(problem, u_a, u_b),
        evaluations=sum(r.trace.evaluations_used for r in runs),
        verdict=FOUND if f_opt < threshold else NOT_FOUND,
        theta=best.x,
        restarts_used=len(runs),
        wall_time=time.perf_counter() - t0,
        best_per_restart=[r.fun for r in runs],
    )


def global_reshape(s_a, s_b) -> np.ndarray:
    """``S_B S_A^-1``: maps the cluster made by ``S_A`` onto the one made by ``S_B``."""
    s_a, s_b = np.asarray(s_a, dtype=float), np.asarray(s_b, dtype=float)
    if s_a.shape != s_b.shape or s_a.ndim != 2 or s_a.shape[0] != s_a.shape[1] or s_a.shape[0] % 2:
        raise ContractViolation(f"incompatible symplectic shapes {s_a.shape} and {s_b.shape}")
    om = symplectic_form(s_a.shape[0] // 2)
    # S^-1 = Omega^T S^T Omega for any symplectic S
    return s_b @ (om.T @ s_a.T @ om)


# -- catalog defaults ---------------------------------------------------------


def default_partition(graph: Graph, kind: str = "halves") -> Partition:
    """First half of the node labels to Alice, the rest to Bob.

    For row-major 2-row grids and dual-rail ladders this is the row split.
    """
    if kind != "halves":
        raise ParameterError(f"unknown partition kind {kind!r}")
    half = graph.n // 2
    return Partition(tuple(range(half)), tuple(range(half, graph.n)))


def default_pair(partition: Partition, pair_type: str) -> tuple:
    """``cross``: first node of each party; ``same``: Alice's first two nodes."""
    if pair_type == "cross":
        return partition.alice[0], partition.bob[0]
    if pair_type == "same":
        if partition.n < 2:
            raise ParameterError("same-team pair needs Alice to own two nodes")
        return partition.alice[0], partition.alice[1]
    raise ParameterError(f"pair type must be 'cross' or 'same', got {pair_type!r}")


@dataclass
class RoutingConfig:
    graph: object
    alice: tuple | None = None
    bob: tuple | None = None
    pair: tuple | None = None
    pair_type: str = "cross"
    squeezing_db: float = 5.0
    restarts: int = 10
    seed: int = 0
    es: dict = field(default_factory=dict)
    label: str = ""

    def build(self) -> tuple[RoutingProblem, EsConfig]:
        g = graph_from_spec(self.graph)
        if (self.alice is None) != (self.bob is None):
            raise ConfigError("give both 'alice' and 'bob' or neither")
        part = default_partition(g) if self.alice is None else Partition(tuple(self.alice), tuple(self.bob))
        try:
            part.validate(g.n)
        except ParameterError as exc:
            raise ConfigError(str(exc)) from None
        pair = tuple(self.pair) if self.pair is not None else default_pair(part, self.pair_type)
        if len(pair) != 2:
            raise ConfigError(f"pair must list two nodes, got {pair!r}")
        label = self.label or (self.graph if isinstance(self.graph, str) else "custom")
        problem = RoutingProblem.from_graph(g, part, pair, self.squeezing_db, label=label)
        unknown = set(self.es) - {"lam", "mu", "sigma0", "max_evals", "target_fitness", "tol_fun_hist", "tol_sigma"}
        if unknown:
            raise ConfigError(f"unknown ES override(s): {sorted(unknown)}")
        es_over = dict(self.es)
        if "lam" in es_over or "mu" in es_over:
            from .es import log_weights

            lam = int(es_over.pop("lam", 4 + int(3 * math.log(problem.dim))))
            mu = int(es_over.pop("mu", lam // 2))
            es_over.update(lam=lam, mu=mu, weights=log_weights(mu))
        try:
            cfg = default_config(problem.dim, seed=self.seed, **es_over)
        except (TypeError, ParameterError) as exc:
            raise ConfigError(f"bad ES overrides: {exc}") from None
        return problem, cfg

    @classmethod
    def from_dict(cls, data: dict) -> RoutingConfig:
        known = {"graph", "alice", "bob", "pair", "pair_type", "squeezing_db", "restarts", "seed", "es", "label"}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown routing config key(s): {sorted(extra)}")
        if "graph" not in data:
            raise ConfigError("routing config needs a 'graph' entry")
        return cls(**data)


def load_routing_config(path) -> RoutingConfig:
    """Read a routing problem from a JSON or YAML file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read routing config {path}: {exc}") from exc
    try:
        if path.suffix.lower() in (".yaml", ".yml"):
            import yaml

            data = yaml.safe_load(text)
        else:
            data = json.loads(text)
    except Exception as exc:
        raise ConfigError(f"cannot parse routing config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"routing config {path} must hold a mapping")
    return RoutingConfig.from_dict(data)


def _write_matrix(path, m):
    np.savetxt(path, m, delimiter=",", fmt="%.17g")


def save_solution(sol: RoutingSolution, directory, problem: RoutingProblem | None = None) -> Path:
    """Write ``u_a_re.csv``, ``u_a_im.csv``, ``u_b_re.csv``, ``u_b_im.csv`` and ``summary.json``."""
    d = Path(directory)
    try:
        d.mkdir(parents=True, exist_ok=True)
        _write_matrix(d / "u_a_re.csv", sol.u_a.real)
        _write_matrix(d / "u_a_im.csv", sol.u_a.imag)
        _write_matrix(d / "u_b_re.csv", sol.u_b.real)
        _write_matrix(d / "u_b_im.csv", sol.u_b.imag)
        summary = {
            "f_opt": sol.f_opt,
            "residual_max": sol.residual_max,
            "verdict": sol.verdict,
            "evaluations": sol.evaluations,
            "restarts_used": sol.restarts_used,
            "best_per_restart": list(map(float, sol.best_per_restart)),
        }
        if problem is not None:
            summary.update(
                label=problem.label,
                n=problem.n,
                p=problem.p,
                n1=problem.target.n1,
                n2=problem.target.n2,
                squeezing_db=problem.target.squeezing_db,
            )
            if problem.partition is not None:
                summary.update(alice=list(problem.partition.alice), bob=list(problem.partition.bob))
        (d / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write routing solution to {d}: {exc}") from exc
    return d


def load_solution(directory) -> RoutingSolution:
    d = Path(directory)
    try:
        ua = np.loadtxt(d / "u_a_re.csv", delimiter=",", ndmin=2) + 1j * np.loadtxt(
            d / "u_a_im.csv", delimiter=",", ndmin=2
        )
        ub = np.loadtxt(d / "u_b_re.csv", delimiter=",", ndmin=2) + 1j * np.loadtxt(
            d / "u_b_im.csv", delimiter=",", ndmin=2
        )
        summary = json.loads((d / "summary.json").read_text())
    except (OSError, ValueError) as exc:
        raise FormatError(f"cannot load routing solution from {d}: {exc}") from exc
    return RoutingSolution(
        u_a=ua,
        u_b=ub,
        f_opt=float(summary["f_opt"]),
        residual_max=float(summary["residual_max"]),
        evaluations=int(summary.get("evaluations", 0)),
        verdict=summary["verdict"],
        restarts_used=int(summary.get("restarts_used", 0)),
        best_per_restart=summary.get("best_per_restart", []),
    )


# -- published solutions ------------------------------------------------------


def appendix_problems(squeezing_db: float = 5.0) -> dict:
    """The two published routing problems with their unitaries.

    Returns ``{name: (problem, (u_a, u_b))}``.
    """
    grid = catalog_graph("grid", rows=2, cols=3)
    full = catalog_graph("complete", n=6)
    return {
        "grid6": (
            RoutingProblem.from_graph(
                grid, Partition(appendix.GRID6_ALICE, appendix.GRID6_BOB), appendix.GRID6_PAIR,
                squeezing_db, label="grid:2x3",
            ),
            (appendix.GRID6_U_A, appendix.GRID6_U_B),
        ),
        "complete6": (
            RoutingProblem.from_graph(
                full, Partition(appendix.FULL6_ALICE, appendix.FULL6_BOB), appendix.FULL6_PAIR,
                squeezing_db, label="complete:6",
            ),
            (appendix.FULL6_U_A, appendix.FULL6_U_B),
        ),
    }


def verify_appendix(squeezing_dbs=(3.0, 5.0, 7.0), tol: float = 1e-3) -> list:
    """Check the published unitaries at several input squeezings.

    Returns ``(name, squeezing_db, SolutionCheck)`` tuples.
    """
    out = []
    for db in squeezing_dbs:
        for name, (problem, sol) in appendix_problems(db).items():
            out.append((name, float(db), verify_solution(sol, problem, tol=tol)))
    return out
