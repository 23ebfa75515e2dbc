"""Replicated simulation runs and the model-fitting pipeline.

Everything here is deterministic given the configuration: replica ``i``
uses the ``i``-th child of ``SeedSequence(config.seed)`` and results are
collected in replica order whatever the number of workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ParameterError
from .graph import Graph, GeneratorSpec
from .process import NohParams, NohProcess, SizeSeries, active_subgraph
from .stats import (FitReport, Histogram, degree_histogram, graph_degree_histogram,
                    kl_divergence, mean_degree, mean_snapshot_skewness, pool,
                    size_histogram, topology_report)


@dataclass(frozen=True)
class ExperimentConfig:
    """Measurement protocol for a set of replicated runs.

    Sizes are recorded every ``size_interval`` from 0 to the end of the
    window. Online-degree snapshots are taken every ``sample_interval``
    after ``t_lo`` up to ``t_hi`` (at most ``max_snapshots`` of them).
    """

    generator: GeneratorSpec | None = None
    noh: NohParams = NohParams(0.01, 0.005)
    seed: int = 0
    burn_in: float = 1e4
    window: tuple[float, float] = (1e4, 2e4)
    sample_interval: float = 200.0
    size_interval: float = 1.0
    replicas: int = 10
    max_snapshots: int = 50
    snapshot_times: tuple[float, ...] = ()
    initial_online: str | float = "all"
    workers: int = 1
    outputs: str | None = None

    def __post_init__(self):
        t_lo, t_hi = self.window
        if not self.burn_in <= t_lo < t_hi:
            raise ParameterError(
                f"need burn_in <= t_lo < t_hi (got {self.burn_in}, {t_lo}, {t_hi})")
        if not self.sample_interval > 0 or not self.size_interval > 0:
            raise ParameterError("sampling intervals must be positive")
        if self.replicas < 1:
            raise ParameterError("replicas must be at least 1")
        if self.max_snapshots < 1:
            raise ParameterError("max_snapshots must be at least 1")
        if self.workers < 1:
            raise ParameterError("workers must be at least 1")
        if any(not 0 <= t <= t_hi for t in self.snapshot_times):
            raise ParameterError("snapshot times must lie within [0, t_hi]")

    def size_times(self) -> np.ndarray:
        t_hi = self.window[1]
        n = int(math.floor(t_hi / self.size_interval + 1e-9))
        return np.arange(n + 1) * self.size_interval

    def degree_times(self) -> np.ndarray:
        t_lo, t_hi = self.window
        k = int(math.floor((t_hi - t_lo) / self.sample_interval + 1e-9))
        k = min(k, self.max_snapshots)
        return t_lo + self.sample_interval * np.arange(1, k + 1)

    def replica_seeds(self):
        return np.random.SeedSequence(self.seed).spawn(self.replicas)


@dataclass
class ReplicaResult:
    sizes: SizeSeries
    snapshots: list = field(repr=False)
    extra_snapshots: list = field(default_factory=list, repr=False)
    events: int = 0

    def degree_histogram(self) -> Histogram:
        return pool(degree_histogram(s) for s in self.snapshots if s.size)


def run_replica(graph: Graph, cfg: ExperimentConfig, seed, degrees: bool = True) -> ReplicaResult:
    """One trajectory: dense size samples, plus degree snapshots if asked."""
    proc = NohProcess(graph, cfg.noh, seed=seed, initial_online=cfg.initial_online)
    size_t = cfg.size_times()
    deg_t = cfg.degree_times() if degrees else np.empty(0)
    snap_t = np.asarray(sorted(set(cfg.snapshot_times)), dtype=np.float64)
    stops = np.union1d(deg_t, snap_t)
    sizes = np.empty(len(size_t), dtype=np.int64)
    snaps, extra = [], []
    i = 0
    for t in stops:
        j = np.searchsorted(size_t, t, side="right")
        sizes[i:j] = proc.sample_sizes(size_t[i:j])
        i = j
        proc.advance_to(t)
        snap = proc.snapshot()
        if t in deg_t:
            snaps.append(snap)
        if t in snap_t:
            extra.append(snap)
    sizes[i:] = proc.sample_sizes(size_t[i:])
    return ReplicaResult(SizeSeries(size_t, sizes), snaps, extra, proc.events)


def simulate(cfg: ExperimentConfig, graph: Graph | None = None, degrees: bool = True):
    """Run ``cfg.replicas`` independent trajectories over one graph."""
    if graph is None:
        if cfg.generator is None:
            raise ParameterError("no graph and no generator given")
        graph = cfg.generator.build()
    seeds = cfg.replica_seeds()
    if cfg.workers == 1:
        return [run_replica(graph, cfg, s, degrees) for s in seeds]
    with ThreadPoolExecutor(cfg.workers) as ex:
        return list(ex.map(lambda s: run_replica(graph, cfg, s, degrees), seeds))


def pooled_size_histogram(results, window) -> Histogram:
    return pool(size_histogram(r.sizes, window) for r in results)


def pooled_degree_histogram(results) -> Histogram:
    return pool(r.degree_histogram() for r in results)


def window_mean_size(results, window) -> float:
    """Average over replicas of the time-averaged size inside ``window``."""
    return float(np.mean([r.sizes.window(*window).size.mean() for r in results]))


def averaged_skewness(results) -> float:
    """Online-degree skewness per snapshot, averaged over all snapshots of
    all replicas."""
    return float(np.mean([mean_snapshot_skewness(r.snapshots) for r in results]))


# ---------------------------------------------------------------------------
# fitting

@dataclass(frozen=True)
class ModelSpec:
    """An initial topology, optionally with online/hidden dynamics on top.

    ``m="auto"`` for a scale-free generator is resolved against the target
    graph by :func:`resolve_model`.
    """

    kind: str
    params: dict = field(default_factory=dict)
    noh: NohParams | None = None

    def name(self, gen: GeneratorSpec) -> str:
        base = gen.describe()
        if self.noh is None:
            return base
        return f"NOH(lambda={self.noh.lam:g}, mu={self.noh.mu:g}) on {base}"


def fitted_sf_m(target_mean_degree: float, noh: NohParams | None) -> int:
    """Attachment count whose (thinned) mean degree matches a target.

    A scale-free graph with parameter ``m`` has mean degree close to
    ``2m``; online/hidden switching scales each degree by the online
    probability ``lam / (lam + mu)``.
    """
    q = 1.0 if noh is None else noh.online_probability
    return max(1, int(round(target_mean_degree / (2.0 * q))))


def resolve_model(spec: ModelSpec, target: Graph, seed: int = 0) -> GeneratorSpec:
    kw = dict(spec.params)
    kw.setdefault("n_vertices", target.n_vertices)
    kw.setdefault("seed", seed)
    if spec.kind == "sf" and kw.get("m", 5) == "auto":
        kw["m"] = fitted_sf_m(mean_degree(target), spec.noh)
    return GeneratorSpec(spec.kind, **kw)


def evaluate_model(spec: ModelSpec, target: Graph, cfg: ExperimentConfig,
                   target_hist: Histogram | None = None) -> FitReport:
    """Score one model against ``target``'s degree distribution."""
    if target_hist is None:
        target_hist = graph_degree_histogram(target)
    gen = resolve_model(spec, target, seed=cfg.seed)
    graph = gen.build()
    if spec.noh is None:
        kl = kl_divergence(target_hist, graph_degree_histogram(graph))
        return topology_report(graph, spec.name(gen), kl=kl,
                               initial_mean_degree=mean_degree(graph))
    run_cfg = replace(cfg, noh=spec.noh)
    return noh_report(graph, run_cfg, target_hist, spec.name(gen))


def noh_report(graph: Graph, cfg: ExperimentConfig, target_hist: Histogram,
               name: str) -> FitReport:
    results = simulate(cfg, graph)
    hist = pooled_degree_histogram(results)
    kl = kl_divergence(target_hist, hist)
    last = results[-1].snapshots[-1]
    sub = active_subgraph(graph, last)
    return topology_report(sub, name, kl=kl, skew=averaged_skewness(results),
                           initial_mean_degree=mean_degree(graph))


def compare(target: Graph, models, cfg: ExperimentConfig, target_name: str = "Real"):
    """One report per model followed by the target's own metrics row."""
    target_hist = graph_degree_histogram(target)
    rows = [evaluate_model(m, target, cfg, target_hist) for m in models]
    rows.append(topology_report(target, target_name,
                                initial_mean_degree=mean_degree(target)))
    return rows


def fit(target: Graph, lam_grid, mu_grid, cfg: ExperimentConfig, initial: Graph | None = None):
    """Grid search over ``(lam, mu)``.

    Dynamics run on ``initial`` (the target itself by default). Returns
    ``(lam, mu, FitReport)`` triples sorted by KL, ties broken by
    ``(lam, mu)``.
    """
    lam_grid, mu_grid = list(lam_grid), list(mu_grid)
    if not lam_grid or not mu_grid:
        raise ParameterError("lambda and mu grids must be non-empty")
    base = target if initial is None else initial
    target_hist = graph_degree_histogram(target)
    out = []
    for lam in lam_grid:
        for mu in mu_grid:
            noh = NohParams(lam, mu)
            rep = noh_report(base, replace(cfg, noh=noh), target_hist,
                             f"NOH(lambda={lam:g}, mu={mu:g})")
            out.append((lam, mu, rep))
    out.sort(key=lambda x: (x[2].kl, x[0], x[1]))
    return out
