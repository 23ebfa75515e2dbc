"""Empirical distributions, fit scores and topology metrics."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass

import numba
import numpy as np

from .errors import UndefinedStatisticError

REPORT_COLUMNS = ("Model", "KL", "Clustering", "Mean degree", "Assortativity",
                  "Skewness", "Mean degree (initial)")


@dataclass(frozen=True, eq=False)
class Histogram:
    """Counts of integer values; ``support`` is ascending and every count
    is positive."""

    support: np.ndarray
    counts: np.ndarray

    @classmethod
    def from_samples(cls, values) -> "Histogram":
        values = np.asarray(values).ravel()
        if values.size == 0:
            raise ValueError("cannot build a histogram from no samples")
        if not np.issubdtype(values.dtype, np.integer):
            if np.any(values != np.round(values)):
                raise ValueError("histogram values must be integers")
            values = values.astype(np.int64)
        support, counts = np.unique(values, return_counts=True)
        return cls(support.astype(np.int64), counts.astype(np.int64))

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def frequencies(self) -> np.ndarray:
        return self.counts / self.total

    def dense(self, size: int | None = None) -> np.ndarray:
        """Frequencies indexed by value ``0..size-1``."""
        if self.support[0] < 0:
            raise ValueError("dense view needs non-negative support")
        size = int(self.support[-1]) + 1 if size is None else size
        out = np.zeros(max(size, int(self.support[-1]) + 1))
        out[self.support] = self.frequencies()
        return out

    def mode(self) -> int:
        return int(self.support[np.argmax(self.counts)])

    def mean(self) -> float:
        return float(np.dot(self.support, self.counts) / self.total)

    def __add__(self, other: "Histogram") -> "Histogram":
        support = np.union1d(self.support, other.support)
        counts = np.zeros(len(support), dtype=np.int64)
        counts[np.searchsorted(support, self.support)] += self.counts
        counts[np.searchsorted(support, other.support)] += other.counts
        return Histogram(support, counts)


def pool(histograms) -> Histogram:
    it = iter(histograms)
    out = next(it)
    for h in it:
        out = out + h
    return out


def size_histogram(series, window) -> Histogram:
    """Histogram of the sizes a series records inside ``[t_lo, t_hi]``."""
    t_lo, t_hi = window
    if t_lo > t_hi:
        raise ValueError(f"empty window [{t_lo}, {t_hi}]")
    if len(series.t) == 0 or t_lo > series.t[-1] or t_hi < series.t[0]:
        raise ValueError(f"window [{t_lo}, {t_hi}] lies outside the series")
    m = (series.t >= t_lo) & (series.t <= t_hi)
    if not m.any():
        raise ValueError(f"no observations inside [{t_lo}, {t_hi}]")
    return Histogram.from_samples(series.size[m])


def degree_histogram(snap) -> Histogram:
    """Histogram of online degrees over the online vertices of ``snap``."""
    if len(snap.online) == 0:
        raise ValueError(f"no online vertices at t={snap.t}")
    return Histogram.from_samples(snap.online_degree)


def smoothed_frequencies(q: Histogram, states, eps: float | None = None) -> np.ndarray:
    """Empirical frequencies of ``q`` at ``states``; states never observed
    get ``eps`` (default ``1 / (2 * q.total)``) and the result is
    renormalized over the observed support plus those states."""
    if eps is None:
        eps = 1.0 / (2 * q.total)
    states = np.asarray(states, dtype=np.int64)
    freq = q.frequencies()
    idx = np.searchsorted(q.support, states)
    idx_c = np.minimum(idx, len(q.support) - 1)
    hit = q.support[idx_c] == states
    vals = np.where(hit, freq[idx_c], eps)
    n_missing = int((~hit).sum())
    return vals / (1.0 + n_missing * eps)


def kl_divergence(p, q: Histogram, eps: float | None = None) -> float:
    """``sum_n p_n ln(p_n / Q_n)`` of a model ``p`` against data ``q``.

    ``p`` is either a probability vector indexed by state (``p[n]`` for
    state ``n``) or a :class:`Histogram`. Empirical zeros where ``p_n > 0``
    are floored as in :func:`smoothed_frequencies`.
    """
    if isinstance(p, Histogram):
        states, probs = p.support, p.frequencies()
    else:
        probs = np.asarray(p, dtype=np.float64)
        states = np.flatnonzero(probs > 0)
        probs = probs[states]
    if q.total == 0:
        raise ValueError("empirical histogram is empty")
    probs = probs / probs.sum()
    qs = smoothed_frequencies(q, states, eps)
    return float(max(0.0, np.sum(probs * np.log(probs / qs))))


def skewness(samples) -> float:
    """Fisher-Pearson moment coefficient ``m3 / m2**1.5`` (biased form)."""
    x = np.asarray(samples, dtype=np.float64).ravel()
    if x.size < 3:
        raise UndefinedStatisticError("skewness needs at least 3 samples")
    d = x - x.mean()
    m2 = np.mean(d * d)
    if m2 <= 0 or m2 <= (np.finfo(float).eps * np.abs(x).max()) ** 2:
        raise UndefinedStatisticError("skewness undefined for zero variance")
    return float(np.mean(d ** 3) / m2 ** 1.5)


def mean_snapshot_skewness(snapshots) -> float:
    """Average over snapshots of the online-degree skewness."""
    return float(np.mean([skewness(s.online_degree) for s in snapshots]))


def mean_absolute_error(observed, predicted) -> float:
    o = np.asarray(observed, dtype=np.float64)
    p = np.asarray(predicted, dtype=np.float64)
    if o.shape != p.shape or o.size == 0:
        raise ValueError("observed and predicted must be non-empty and equal length")
    return float(np.mean(np.abs(o - p)))


# ---------------------------------------------------------------------------
# topology

@numba.njit(cache=True)
def _local_clustering(indptr, indices):
    n = len(indptr) - 1
    mark = np.full(n, -1, np.int64)
    out = np.zeros(n)
    for v in range(n):
        a, b = indptr[v], indptr[v + 1]
        k = b - a
        if k < 2:
            continue
        for j in range(a, b):
            mark[indices[j]] = v
        links = 0
        for j in range(a, b):
            u = indices[j]
            for l in range(indptr[u], indptr[u + 1]):
                if mark[indices[l]] == v:
                    links += 1
        out[v] = links / (k * (k - 1.0))
    return out


def local_clustering(g) -> np.ndarray:
    return _local_clustering(g.indptr, g.indices)


def clustering_coefficient(g) -> float:
    """Mean local clustering, counting vertices of degree < 2 as 0."""
    if g.n_edges < 1:
        raise ValueError("clustering needs at least one edge")
    return float(local_clustering(g).mean())


def mean_degree(g) -> float:
    if g.n_vertices == 0:
        raise ValueError("mean degree of an empty graph")
    return 2.0 * g.n_edges / g.n_vertices


def assortativity(g) -> float:
    """Pearson correlation of degrees at the two ends of each edge."""
    if g.n_edges < 1:
        raise ValueError("assortativity needs at least one edge")
    deg = g.degrees().astype(np.float64)
    e = g.edges()
    x = np.concatenate([deg[e[:, 0]], deg[e[:, 1]]])
    y = np.concatenate([deg[e[:, 1]], deg[e[:, 0]]])
    dx = x - x.mean()
    var = np.mean(dx * dx)
    if var <= 0:
        raise UndefinedStatisticError("assortativity undefined: all edge ends share one degree")
    return float(np.mean(dx * (y - y.mean())) / var)


def graph_degree_histogram(g) -> Histogram:
    return Histogram.from_samples(g.degrees())


@dataclass
class FitReport:
    """One row of a model comparison table."""

    model: str
    kl: float | None
    clustering: float
    mean_degree: float
    assortativity: float
    skewness: float
    initial_mean_degree: float | None = None

    def row(self) -> list[str]:
        vals = [self.kl, self.clustering, self.mean_degree, self.assortativity,
                self.skewness, self.initial_mean_degree]
        return [self.model] + ["" if v is None else repr(float(v)) for v in vals]


def topology_report(g, model: str, kl=None, skew=None, initial_mean_degree=None) -> FitReport:
    """Table metrics of ``g``; ``skew`` overrides the degree skewness."""
    def safe(f):
        try:
            return f(g)
        except ValueError:
            return math.nan
    if skew is None:
        skew = safe(lambda h: skewness(h.degrees()))
    return FitReport(model, kl, safe(clustering_coefficient), safe(mean_degree),
                     safe(assortativity), skew, initial_mean_degree)


def write_report_csv(reports, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for r in reports:
            w.writerow(r.row())


def read_report_csv(path) -> list[FitReport]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = tuple(next(r))
        if header != REPORT_COLUMNS:
            raise ValueError(f"unexpected header {header}")
        for row in r:
            vals = [None if x == "" else float(x) for x in row[1:]]
            out.append(FitReport(row[0], *vals))
    return out


def write_histogram_csv(h: Histogram, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["value", "count", "frequency"])
        for v, c, f in zip(h.support.tolist(), h.counts.tolist(), h.frequencies().tolist()):
            w.writerow([v, c, repr(f)])


def read_histogram_csv(path) -> Histogram:
    with open(path, newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        next(r)
        rows = [(int(a), int(b)) for a, b, _ in r]
    return Histogram(np.array([a for a, _ in rows], np.int64),
                     np.array([b for _, b in rows], np.int64))


def report_json(reports) -> str:
    return json.dumps([asdict(r) for r in reports], indent=2)
