"""Seeded ensemble experiments and result emission.

Every random draw derives from one master seed through
``SeedSequence(seed, spawn_key=...)``: key ``(0,)`` for a sampled input
spectrum and ``(1, grid_index, trial)`` for each graph. Trials can therefore
run in any order (or concurrently) and still produce identical numbers.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .gaussian import SqueezingSpectrum, nullifier_variances_closed_form
from .graphs import Graph, gen_barabasi_albert, gen_erdos_renyi, gen_watts_strogatz, graph_from_spec
from .optimizer import concentrate_on_pair, optimize_orthogonal
from .routing import RoutingConfig, solve_routing

__all__ = [
    "SweepSpec",
    "EnsembleSummary",
    "ConcentrationSummary",
    "CurvePoint",
    "RoutingRow",
    "resolve_spectrum",
    "make_graph",
    "trial_rng",
    "run_quality_sweep",
    "run_concentration",
    "run_degree_sweep",
    "run_routing_suite",
    "default_routing_suite",
    "emit",
    "load_sweep_spec",
]

log = logging.getLogger(__name__)

MODELS = ("BA", "ER", "WS", "catalog")


@dataclass(frozen=True)
class SweepSpec:
    """One ensemble experiment.

    ``param_grid`` holds ``m`` for BA, ``p`` for ER, the rewiring probability
    for WS (ring degree ``ws_k``) and graph spec strings for ``catalog``.
    ``spectrum`` is ``uniform:LO,HI``, ``standin`` or a path to a file with one
    dB value per line. ``objective`` is ``uniform`` or ``concentrate:N1,N2``.
    """

    model: str
    param_grid: tuple
    nodes: int = 48
    trials: int = 100
    spectrum: str = "uniform:-14,-3"
    objective: str = "uniform"
    seed: int = 0
    ws_k: int = 4

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        grid = tuple(self.param_grid)
        if not grid:
            raise ConfigError("param_grid must not be empty")
        object.__setattr__(self, "param_grid", grid)
        self.pair  # validates the objective string

    @property
    def pair(self):
        if self.objective == "uniform":
            return None
        if self.objective.startswith("concentrate:"):
            try:
                n1, n2 = (int(x) for x in self.objective.split(":", 1)[1].split(","))
            except ValueError:
                raise ConfigError(f"objective must be 'concentrate:N1,N2', got {self.objective!r}") from None
            return n1, n2
        raise ConfigError(f"unknown objective {self.objective!r}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["param_grid"] = list(self.param_grid)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> SweepSpec:
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown sweep spec key(s): {sorted(extra)}")
        return cls(**d)


def load_sweep_spec(path) -> SweepSpec:
    """Read a :class:`SweepSpec` from JSON or YAML; a ``spec`` sub-mapping is accepted."""
    path = Path(path)
    try:
        text = path.read_text()
        if path.suffix.lower() in (".yaml", ".yml"):
            import yaml

            data = yaml.safe_load(text)
        else:
            data = json.loads(text)
    except OSError as exc:
        raise ConfigError(f"cannot read sweep spec {path}: {exc}") from exc
    except Exception as exc:
        raise ConfigError(f"cannot parse sweep spec {path}: {exc}") from exc
    if isinstance(data, dict) and "spec" in data:
        data = data["spec"]
    if not isinstance(data, dict):
        raise ConfigError(f"sweep spec {path} must hold a mapping")
    return SweepSpec.from_dict(data)


def trial_rng(seed: int, grid_index: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1, grid_index, trial)))


def resolve_spectrum(source: str, n: int, seed: int) -> SqueezingSpectrum:
    if source == "standin":
        spec = SqueezingSpectrum.standin(n)
    elif source.startswith("uniform:"):
        try:
            lo, hi = (float(x) for x in source.split(":", 1)[1].split(","))
        except ValueError:
            raise ConfigError(f"spectrum must be 'uniform:LO,HI', got {source!r}") from None
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0,)))
        spec = SqueezingSpectrum.uniform(n, lo, hi, rng)
    else:
        try:
            spec = SqueezingSpectrum.from_file(source)
        except Exception as exc:
            raise ConfigError(str(exc)) from exc
    if spec.n != n:
        raise ConfigError(f"spectrum has {spec.n} values but the graphs have {n} nodes")
    return spec


def make_graph(model: str, n: int, param, rng, ws_k: int = 4) -> Graph:
    if model == "BA":
        return gen_barabasi_albert(n, int(param), rng)
    if model == "ER":
        return gen_erdos_renyi(n, float(param), rng)
    if model == "WS":
        return gen_watts_strogatz(n, int(ws_k), float(param), rng)
    if model == "catalog":
        return graph_from_spec(param)
    raise ConfigError(f"unknown model {model!r}")


def _map(fn, items, workers):
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


@dataclass
class EnsembleSummary:
    model: str
    param: object
    trials: int
    mu: float
    sigma_spread: float
    mu_minus_sigma: float
    mu_plus_sigma: float
    mean_degree: float
    mu_unoptimized: float
    per_trial: list = field(default_factory=list)

    @classmethod
    def from_trials(cls, model, param, mus, degrees, mus_raw) -> EnsembleSummary:
        mus = np.asarray(mus, dtype=float)
        mu, sd = float(mus.mean()), float(mus.std())
        return cls(
            model=model,
            param=param,
            trials=mus.size,
            mu=mu,
            sigma_spread=sd,
            mu_minus_sigma=mu - sd,
            mu_plus_sigma=mu + sd,
            mean_degree=float(np.mean(degrees)),
            mu_unoptimized=float(np.mean(mus_raw)),
            per_trial=mus.tolist(),
        )


def run_quality_sweep(spec: SweepSpec, workers: int = 1) -> list:
    """Optimised ensemble quality for every grid point.

    For each trial the graph is drawn, the uniform-weight optimum is taken
    and its mean nullifier dB is recorded; ``mu_unoptimized`` uses ``O = I``.
    """
    spectrum = resolve_spectrum(spec.spectrum, spec.nodes, spec.seed)
    eye = np.eye(spec.nodes)
    out = []
    for gi, param in enumerate(spec.param_grid):
        t0 = time.perf_counter()

        def one(trial, gi=gi, param=param):
            g = make_graph(spec.model, spec.nodes, param, trial_rng(spec.seed, gi, trial), spec.ws_k)
            if g.n != spec.nodes:
                raise ConfigError(f"graph {param!r} has {g.n} nodes, expected {spec.nodes}")
            res = optimize_orthogonal(g, spectrum)
            raw = nullifier_variances_closed_form(g, eye, spectrum)
            return res.report.mu, 2.0 * g.num_edges / g.n, raw.mu

        results = _map(one, range(spec.trials), workers)
        mus, degs, raws = zip(*results)
        out.append(EnsembleSummary.from_trials(spec.model, param, mus, degs, raws))
        log.info("%s %s: mu=%.4f dB (%.2fs)", spec.model, param, out[-1].mu, time.perf_counter() - t0)
    return out


@dataclass
class ConcentrationSummary:
    model: str
    param: object
    trials: int
    n1: int
    n2: int
    mu_n1: float
    mu_n2: float
    mu_excluded: float
    sigma_excluded: float
    best_input_db: float
    mean_degree: float
    worst_n1: float
    worst_n2: float


def run_concentration(spec: SweepSpec, workers: int = 1) -> list:
    """Concentrate squeezing on the pair named in ``spec.objective``."""
    if spec.pair is None:
        raise ConfigError("run_concentration needs objective 'concentrate:N1,N2'")
    n1, n2 = spec.pair
    spectrum = resolve_spectrum(spec.spectrum, spec.nodes, spec.seed)
    out = []
    for gi, param in enumerate(spec.param_grid):

        def one(trial, gi=gi, param=param):
            g = make_graph(spec.model, spec.nodes, param, trial_rng(spec.seed, gi, trial), spec.ws_k)
            c = concentrate_on_pair(g, spectrum, n1, n2)
            return c.mu_n1, c.mu_n2, c.mu_excluded, 2.0 * g.num_edges / g.n

        a, b, ex, deg = (np.asarray(x) for x in zip(*_map(one, range(spec.trials), workers)))
        out.append(
            ConcentrationSummary(
                model=spec.model,
                param=param,
                trials=spec.trials,
                n1=n1,
                n2=n2,
                mu_n1=float(a.mean()),
                mu_n2=float(b.mean()),
                mu_excluded=float(ex.mean()),
                sigma_excluded=float(ex.std()),
                best_input_db=spectrum.best_db,
                mean_degree=float(deg.mean()),
                worst_n1=float(a.max()),
                worst_n2=float(b.max()),
            )
        )
    return out


@dataclass
class CurvePoint:
    model: str
    k_target: float
    mean_degree: float
    mu: float
    sigma_spread: float
    trials: int


def _curve_graph(model: str, n: int, k: float, rng) -> Graph:
    if model == "BA":
        return gen_barabasi_albert(n, max(1, int(round(k / 2))), rng)
    if model == "ER":
        return gen_erdos_renyi(n, min(1.0, k / (n - 1)), rng)
    if model.startswith("WS"):
        p = float(model.split(":", 1)[1]) if ":" in model else 0.0
        kk = int(round(k))
        kk -= kk % 2
        return gen_watts_strogatz(n, kk, p, rng)
    raise ConfigError(f"unknown curve model {model!r}; use BA, ER or WS:P")


def run_degree_sweep(
    n: int = 1000,
    models=("BA", "ER", "WS:0", "WS:0.25", "WS:0.5"),
    k_grid=(4, 8, 16, 32, 64),
    trials: int = 10,
    spectrum: str = "uniform:-14,-3",
    seed: int = 0,
    workers: int = 1,
) -> list:
    """Optimised quality against average degree for several models.

    BA uses ``m = k/2``, ER ``p = k/(n-1)``, WS ring degree ``k`` with the
    rewiring probability after the colon (``WS:0.25``).
    """
    spec_vals = resolve_spectrum(spectrum, n, seed)
    out = []
    for mi, model in enumerate(models):
        for ki, k in enumerate(k_grid):

            def one(trial, mi=mi, ki=ki, k=k, model=model):
                rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(2, mi, ki, trial)))
                g = _curve_graph(model, n, k, rng)
                return optimize_orthogonal(g, spec_vals).report.mu, 2.0 * g.num_edges / g.n

            mus, degs = (np.asarray(x) for x in zip(*_map(one, range(trials), workers)))
            out.append(CurvePoint(model, float(k), float(degs.mean()), float(mus.mean()), float(mus.std()), trials))
            log.info("%s k=%s: mu=%.4f dB", model, k, out[-1].mu)
    return out


@dataclass
class RoutingRow:
    graph: str
    pair_type: str
    n1: int
    n2: int
    verdict: str
    f_opt: float
    residual_max: float
    evaluations: int
    restarts_used: int
    wall_time: float


def default_routing_suite(squeezing_db: float = 5.0, restarts: int = 10, seed: int = 0) -> list:
    """Catalog graphs split into halves, each with a cross-team and a same-team pair."""
    graphs = ["grid:2x3", "grid:2x4", "grid:2x5", "complete:6", "dual_rail:8"]
    return [
        RoutingConfig(graph=g, pair_type=pt, squeezing_db=squeezing_db, restarts=restarts, seed=seed)
        for g in graphs
        for pt in ("cross", "same")
    ]


def run_routing_suite(configs) -> list:
    rows = []
    for cfg in configs:
        problem, es_cfg = cfg.build()
        sol = solve_routing(problem, restarts=cfg.restarts, cfg=es_cfg, seed=cfg.seed)
        part = problem.partition
        n1 = part.order[problem.target.n1]
        n2 = part.order[problem.target.n2]
        rows.append(
            RoutingRow(
                graph=problem.label,
                pair_type="same" if part.same_team(n1, n2) else "cross",
                n1=n1,
                n2=n2,
                verdict=sol.verdict,
                f_opt=sol.f_opt,
                residual_max=sol.residual_max,
                evaluations=sol.evaluations,
                restarts_used=sol.restarts_used,
                wall_time=sol.wall_time,
            )
        )
        log.info("%s %s: %s f=%.3e", rows[-1].graph, rows[-1].pair_type, sol.verdict, sol.f_opt)
    return rows


# -- emission -------------------------------------------------------------------


def _fmt(v):
    if isinstance(v, bool):
        return str(v)
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".6g")
    if isinstance(v, (list, tuple)):
        return " ".join(_fmt(x) for x in v)
    return str(v)


def _jsonable(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return float(format(v, ".6g")) if math.isfinite(v) else str(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    return v


def _row_dict(row) -> dict:
    return asdict(row) if hasattr(row, "__dataclass_fields__") else dict(row)


def emit(rows, path, fmt: str = "csv", spec: SweepSpec | None = None, columns=None, extra: dict | None = None) -> str:
    """Write result rows as CSV or JSON and return the text written.

    CSV has one header line; when ``spec`` is given its fields are prepended
    as ``spec_*`` columns so every row carries the full configuration. JSON
    holds ``{"spec": ..., "rows": [...]}``. Floats are written with six
    significant digits. ``path=None`` skips writing.
    """
    dicts = [_row_dict(r) for r in rows]
    if columns is None:
        columns = list(dicts[0]) if dicts else []
    columns = list(columns)
    meta = {"spec_" + k: v for k, v in (spec.to_dict().items() if spec else [])}
    if extra:
        meta.update(extra)

    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(list(meta) + columns)
        for d in dicts:
            writer.writerow([_fmt(v) for v in meta.values()] + [_fmt(d.get(c, "")) for c in columns])
        text = buf.getvalue()
    elif fmt == "json":
        doc = {"spec": spec.to_dict() if spec else None, "rows": [{c: _jsonable(d.get(c)) for c in columns} for d in dicts]}
        if extra:
            doc["meta"] = _jsonable(extra)
        text = json.dumps(doc, indent=2) + "\n"
    else:
        raise ConfigError(f"format must be 'csv' or 'json', got {fmt!r}")

    if path is not None:
        p = Path(path)
        try:
            p.write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write results to {p}: {exc}") from exc
    return text


SUMMARY_COLUMNS = [f.name for f in fields(EnsembleSummary)]
CONCENTRATION_COLUMNS = [f.name for f in fields(ConcentrationSummary)]
CURVE_COLUMNS = [f.name for f in fields(CurvePoint)]
ROUTING_COLUMNS = [f.name for f in fields(RoutingRow)]
