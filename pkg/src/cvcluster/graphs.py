"""Graph families used as cluster-state topologies.

Generators for the Barabasi-Albert, Erdos-Renyi and Watts-Strogatz models,
a small catalog of fixed shapes (grids, complete graphs, dual-rail ladders)
and a plain-text adjacency-list format. Every generator is a pure function of
its parameters and seed; adjacency matrices are dense ``int8`` arrays.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError, ParameterError

__all__ = [
    "Graph",
    "DegreeStats",
    "gen_barabasi_albert",
    "gen_erdos_renyi",
    "gen_watts_strogatz",
    "catalog_graph",
    "graph_from_spec",
    "degree_stats",
    "parse_adjacency_list",
    "format_adjacency_list",
    "read_adjacency_list",
    "write_adjacency_list",
]


def _as_rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected, unweighted simple graph stored as a dense adjacency matrix.

    The constructor validates the matrix: square, symmetric, binary, with an
    empty diagonal. The stored array is made read-only.
    """

    adjacency: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.adjacency)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise FormatError(f"adjacency must be a non-empty square matrix, got shape {a.shape}")
        if not np.all((a == 0) | (a == 1)):
            raise FormatError("adjacency entries must be 0 or 1")
        if not np.array_equal(a, a.T):
            raise FormatError("adjacency must be symmetric")
        if np.any(np.diag(a) != 0):
            raise FormatError("adjacency must have a zero diagonal (no self-loops)")
        a = a.astype(np.int8, copy=True)
        a.setflags(write=False)
        object.__setattr__(self, "adjacency", a)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def num_edges(self) -> int:
        return int(self.adjacency.sum()) // 2

    @property
    def degrees(self) -> np.ndarray:
        return self.adjacency.sum(axis=1).astype(np.int64)

    def edges(self) -> list[tuple[int, int]]:
        """Edges ``(i, j)`` with ``i < j`` in lexicographic order."""
        i, j = np.nonzero(np.triu(self.adjacency, 1))
        return list(zip(i.tolist(), j.tolist()))

    def as_float(self) -> np.ndarray:
        return self.adjacency.astype(float)

    def relabel(self, order) -> Graph:
        """Return the graph with node ``order[k]`` moved to position ``k``."""
        order = np.asarray(order, dtype=int)
        if sorted(order.tolist()) != list(range(self.n)):
            raise ParameterError("order must be a permutation of the node labels")
        return Graph(self.adjacency[np.ix_(order, order)])

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return np.array_equal(self.adjacency, other.adjacency)

    def __hash__(self):
        return hash(self.adjacency.tobytes())

    def __repr__(self):
        return f"Graph(n={self.n}, edges={self.num_edges})"

    @classmethod
    def from_edges(cls, n: int, edges) -> Graph:
        a = np.zeros((n, n), dtype=np.int8)
        for i, j in edges:
            if not (0 <= i < n and 0 <= j < n):
                raise FormatError(f"edge ({i}, {j}) out of range for {n} nodes")
            if i == j:
                raise FormatError(f"self-loop on node {i}")
            a[i, j] = a[j, i] = 1
        return cls(a)

    @classmethod
    def empty(cls, n: int) -> Graph:
        return cls(np.zeros((n, n), dtype=np.int8))


@dataclass(frozen=True)
class DegreeStats:
    degrees: np.ndarray
    mean_degree: float
    max_degree: int


def degree_stats(g: Graph) -> DegreeStats:
    deg = g.degrees
    return DegreeStats(degrees=deg, mean_degree=2.0 * g.num_edges / g.n, max_degree=int(deg.max()))


def gen_barabasi_albert(n: int, m: int, seed=None) -> Graph:
    """Preferential-attachment graph.

    Growth starts from a complete graph on ``m`` nodes; every later node
    brings ``m`` edges to distinct existing nodes chosen with probability
    proportional to ``degree + 1``. The edge count is therefore always
    ``m * (n - m) + m * (m - 1) / 2`` and ``m = n - 1`` gives the complete
    graph.
    """
    if not (isinstance(n, (int, np.integer)) and n >= 2):
        raise ParameterError(f"n must be an integer >= 2, got {n!r}")
    if not (isinstance(m, (int, np.integer)) and 1 <= m <= n - 1):
        raise ParameterError(f"m must satisfy 1 <= m <= n-1, got m={m!r}, n={n}")
    rng = _as_rng(seed)
    a = np.zeros((n, n), dtype=np.int8)
    a[:m, :m] = 1
    np.fill_diagonal(a, 0)
    deg = a.sum(axis=1).astype(float)
    for new in range(m, n):
        w = deg[:new] + 1.0
        targets = rng.choice(new, size=m, replace=False, p=w / w.sum())
        a[new, targets] = 1
        a[targets, new] = 1
        deg[targets] += 1.0
        deg[new] = m
    return Graph(a)


def gen_erdos_renyi(n: int, p: float, seed=None) -> Graph:
    """G(n, p): every unordered pair is linked independently with probability ``p``."""
    if n < 1:
        raise ParameterError(f"n must be positive, got {n}")
    if not (0.0 <= p <= 1.0):
        raise ParameterError(f"p must lie in [0, 1], got {p}")
    rng = _as_rng(seed)
    upper = np.triu(rng.random((n, n)) < p, 1).astype(np.int8)
    return Graph(upper + upper.T)


def gen_watts_strogatz(n: int, k: int, p: float, seed=None) -> Graph:
    """Small-world graph obtained by rewiring a ring lattice.

    Lattice edges ``(u, u + j)`` are visited for ``j = 1..k/2`` and, within
    each ``j``, for ``u = 0..n-1``. With probability ``p`` the far endpoint is
    replaced by a node drawn uniformly among the current non-neighbours of
    ``u``. Rewiring never creates self-loops or multi-edges, so the edge count
    ``n * k / 2`` is preserved.
    """
    if k % 2 != 0:
        raise ParameterError(f"k must be even, got {k}")
    if not (2 <= k <= n - 2):
        raise ParameterError(f"k must satisfy 2 <= k <= n-2, got k={k}, n={n}")
    if not (0.0 <= p <= 1.0):
        raise ParameterError(f"p must lie in [0, 1], got {p}")
    rng = _as_rng(seed)
    a = np.zeros((n, n), dtype=np.int8)
    nodes = np.arange(n)
    for j in range(1, k // 2 + 1):
        a[nodes, (nodes + j) % n] = 1
        a[(nodes + j) % n, nodes] = 1
    deg = a.sum(axis=1).astype(np.int64)
    for j in range(1, k // 2 + 1):
        for u in range(n):
            if rng.random() >= p:
                continue
            if deg[u] >= n - 1:
                continue
            v = (u + j) % n
            # rejection sampling over all nodes == uniform over non-neighbours
            w = int(rng.integers(n))
            while w == u or a[u, w]:
                w = int(rng.integers(n))
            a[u, v] = a[v, u] = 0
            a[u, w] = a[w, u] = 1
            deg[v] -= 1
            deg[w] += 1
    return Graph(a)


def _grid(rows: int, cols: int) -> Graph:
    if rows < 1 or cols < 1:
        raise ParameterError(f"grid dimensions must be positive, got {rows}x{cols}")
    edges = []
    for r in range(rows):
        for c in range(cols):
            u = r * cols + c
            if c + 1 < cols:
                edges.append((u, u + 1))
            if r + 1 < rows:
                edges.append((u, u + cols))
    return Graph.from_edges(rows * cols, edges)


def _complete(n: int) -> Graph:
    if n < 1:
        raise ParameterError(f"n must be positive, got {n}")
    return Graph(np.ones((n, n), dtype=np.int8) - np.eye(n, dtype=np.int8))


def _dual_rail(n: int) -> Graph:
    # ladder: rail 0..n/2-1 on top, rail n/2..n-1 below, rungs between
    if n < 4 or n % 2:
        raise ParameterError(f"dual_rail needs an even node count >= 4, got {n}")
    return _grid(2, n // 2)


def catalog_graph(name: str, **params) -> Graph:
    """Build one of the fixed catalog shapes.

    Parameters
    ----------
    name : str
        ``"grid"`` (``rows``, ``cols``; nodes numbered row-major),
        ``"complete"`` (``n``), ``"dual_rail"`` (``n`` even; a ladder of two
        ``n/2``-node rails) or ``"custom"`` (``path`` to an adjacency-list
        file, or ``text`` holding its contents, or ``n`` plus ``edges``).
    """
    try:
        if name == "grid":
            return _grid(int(params["rows"]), int(params["cols"]))
        if name == "complete":
            return _complete(int(params["n"]))
        if name == "dual_rail":
            return _dual_rail(int(params["n"]))
        if name == "custom":
            if "path" in params:
                return read_adjacency_list(params["path"])
            if "text" in params:
                return parse_adjacency_list(params["text"])
            if "edges" in params:
                return Graph.from_edges(int(params["n"]), params["edges"])
            raise FormatError("custom graph needs 'path', 'text' or 'n' + 'edges'")
    except KeyError as exc:
        raise FormatError(f"catalog graph {name!r} is missing parameter {exc}") from None
    raise FormatError(f"unknown catalog graph {name!r}")


def graph_from_spec(spec) -> Graph:
    """Catalog graph from a compact string or a mapping.

    Strings: ``grid:2x3``, ``complete:6``, ``dual_rail:8``, ``custom:PATH``.
    Mappings: ``{"name": "grid", "rows": 2, "cols": 3}`` and so on.
    """
    if isinstance(spec, Graph):
        return spec
    if isinstance(spec, dict):
        params = dict(spec)
        try:
            name = params.pop("name")
        except KeyError:
            raise FormatError("graph mapping needs a 'name' key") from None
        return catalog_graph(name, **params)
    if not isinstance(spec, str) or ":" not in spec:
        raise FormatError(f"graph spec must look like 'name:args', got {spec!r}")
    name, arg = spec.split(":", 1)
    if name == "grid":
        try:
            rows, cols = (int(x) for x in arg.lower().split("x"))
        except ValueError:
            raise FormatError(f"grid spec must be 'grid:RxC', got {spec!r}") from None
        return catalog_graph("grid", rows=rows, cols=cols)
    if name in ("complete", "dual_rail"):
        try:
            return catalog_graph(name, n=int(arg))
        except ValueError:
            raise FormatError(f"bad node count in {spec!r}") from None
    if name == "custom":
        return catalog_graph("custom", path=arg)
    raise FormatError(f"unknown catalog graph {name!r}")


def parse_adjacency_list(text: str) -> Graph:
    """Parse the ``nodes N`` / ``i j`` edge-list format (0-based labels).

    Blank lines and ``#`` comments are ignored. Asymmetry cannot arise in an
    edge list, but self-loops and out-of-range labels are rejected.
    """
    n = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if n is None:
            if len(parts) != 2 or parts[0] != "nodes":
                raise FormatError(f"line {lineno}: expected header 'nodes N', got {raw!r}")
            try:
                n = int(parts[1])
            except ValueError:
                raise FormatError(f"line {lineno}: bad node count {parts[1]!r}") from None
            if n < 1:
                raise FormatError(f"line {lineno}: node count must be positive")
            continue
        if len(parts) != 2:
            raise FormatError(f"line {lineno}: expected 'i j', got {raw!r}")
        try:
            edges.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise FormatError(f"line {lineno}: non-integer node label in {raw!r}") from None
    if n is None:
        raise FormatError("missing 'nodes N' header")
    return Graph.from_edges(n, edges)


def format_adjacency_list(g: Graph) -> str:
    lines = [f"nodes {g.n}"]
    lines += [f"{i} {j}" for i, j in g.edges()]
    return "\n".join(lines) + "\n"


def read_adjacency_list(path) -> Graph:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise FormatError(f"cannot read adjacency list {path}: {exc}") from exc
    return parse_adjacency_list(text)


def write_adjacency_list(g: Graph, path) -> None:
    Path(path).write_text(format_adjacency_list(g))
